mod common;

use common::{fixed_step_edge_time, jet};
use proptest::strategy::{Strategy, ValueTree};
use proptest::test_runner::TestRunner;
use tvroute::cost::edge_travel_time;
use tvroute::{StepControl, Vec2, VehicleSpec};

const ORACLE_STEPS: usize = 10_000;

/// Relative deviation of the adaptive cost from the fine fixed-step oracle
/// on `n` feasible random jet edges, drawn from a fixed seed.
fn jet_edge_errors(n: usize, ctl: &StepControl) -> Vec<f64> {
    let field = jet();
    let veh = VehicleSpec::new(0.5);
    let period = std::f64::consts::TAU / 0.4;
    let strat = (
        0.0f64..8.0,
        -2.4f64..2.4,
        -std::f64::consts::PI..std::f64::consts::PI,
        0.4f64..1.3,
        0.0f64..period,
    );
    let mut runner = TestRunner::deterministic();
    let mut errors = Vec::new();
    let mut drawn = 0;
    while errors.len() < n {
        drawn += 1;
        assert!(drawn < 50 * n, "too few feasible edges");
        let (x, y, ang, len, t0) = strat.new_tree(&mut runner).unwrap().current();
        let a = Vec2::new(x, y);
        let b = a + Vec2::from_angle(ang) * len;
        let Some(reference) = fixed_step_edge_time(&field, a, b, t0, veh.speed, ORACLE_STEPS) else {
            continue;
        };
        let got = edge_travel_time(&field, a, b, t0, &veh, ctl).unwrap();
        assert!(got.feasible, "edge {a:?} -> {b:?} at {t0} should be feasible");
        errors.push((got.travel_time - reference).abs() / reference);
    }
    errors
}

#[test]
fn hundred_jet_edges_within_tolerance() {
    let ctl = StepControl::default();
    let errors = jet_edge_errors(100, &ctl);
    let worst = errors.iter().copied().fold(0.0, f64::max);
    assert!(worst <= ctl.tol, "worst relative error {worst:e} > tol {:e}", ctl.tol);
}

#[test]
fn tighter_tolerance_tightens_agreement() {
    let loose = StepControl {
        tol: 1e-3,
        ..StepControl::default()
    };
    let tight = StepControl {
        tol: 1e-6,
        ..StepControl::default()
    };
    let worst = |c: &StepControl| jet_edge_errors(30, c).into_iter().fold(0.0, f64::max);
    let (wl, wt) = (worst(&loose), worst(&tight));
    assert!(wl <= loose.tol, "{wl:e}");
    assert!(wt < wl / 10.0, "{wt:e} vs {wl:e}");
}
