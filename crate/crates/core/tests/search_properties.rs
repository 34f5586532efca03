mod common;

use common::{jet, small_jet_graph, td_dijkstra, JET_VMAX};
use proptest::prelude::*;
use tvroute::field::{max_current_speed, Lattice};
use tvroute::search::{heuristic, plan, Algorithm, SearchOptions};
use tvroute::{travel_time_via, Rect, StepControl, VehicleSpec};

fn options(algo: Algorithm, t0: f64) -> SearchOptions {
    SearchOptions::new(algo, t0, JET_VMAX, 0.4)
}

#[test]
fn jet_speed_bound_covers_the_field() {
    let m = max_current_speed(
        &jet(),
        Rect::new(-1.0, -4.0, 10.0, 4.0),
        (0.0, std::f64::consts::TAU / 0.4),
        0.0,
        Lattice::new(221, 161, 65),
    )
    .unwrap();
    assert!(m.speed < JET_VMAX, "{}", m.speed);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn exhaustive_search_matches_reference(s in 0usize..81, g in 0usize..81, t0 in 0.0f64..16.0) {
        let graph = small_jet_graph();
        prop_assume!(s != g);
        let field = jet();
        let veh = VehicleSpec::new(0.5);
        let ctl = StepControl::default();
        let d = td_dijkstra(&graph, &field, s, t0, &veh, &ctl);
        match plan(&graph, &field, s, g, &veh, &ctl, &options(Algorithm::Tve, t0)) {
            Ok(r) => prop_assert_eq!(r.route.arrival(), d[g]),
            Err(_) => prop_assert!(d[g].is_infinite()),
        }
    }

    #[test]
    fn skip_rule_keeps_the_route(s in 0usize..81, g in 0usize..81, t0 in 0.0f64..16.0) {
        let graph = small_jet_graph();
        prop_assume!(s != g);
        let field = jet();
        let veh = VehicleSpec::new(0.5);
        let ctl = StepControl::default();
        let full = plan(&graph, &field, s, g, &veh, &ctl, &options(Algorithm::Tve, t0));
        let skip = plan(&graph, &field, s, g, &veh, &ctl, &options(Algorithm::Itve, t0));
        match (full, skip) {
            (Ok(a), Ok(b)) => {
                prop_assert_eq!(&a.route, &b.route);
                prop_assert!(b.stats.cfc <= a.stats.cfc);
            }
            (Err(_), Err(_)) => {}
            (a, b) => prop_assert!(false, "{:?} vs {:?}", a.is_ok(), b.is_ok()),
        }
    }

    #[test]
    fn heuristic_never_overestimates(u in 0usize..81, g in 0usize..81, t0 in 0.0f64..16.0) {
        let graph = small_jet_graph();
        prop_assume!(u != g);
        let field = jet();
        let veh = VehicleSpec::new(0.5);
        let ctl = StepControl::default();
        if let Ok(r) = plan(&graph, &field, u, g, &veh, &ctl, &options(Algorithm::Tve, t0)) {
            let h = heuristic(graph.position(u), graph.position(g), veh.speed, JET_VMAX);
            prop_assert!(h <= r.route.travel_time(), "h {} > {}", h, r.route.travel_time());
        }
    }

    #[test]
    fn accelerated_searches_never_beat_the_optimum(s in 0usize..81, g in 0usize..81, t0 in 0.0f64..16.0) {
        let graph = small_jet_graph();
        prop_assume!(s != g);
        let field = jet();
        let veh = VehicleSpec::new(0.5);
        let ctl = StepControl::default();
        let Ok(best) = plan(&graph, &field, s, g, &veh, &ctl, &options(Algorithm::Tve, t0)) else {
            return Ok(());
        };
        let opt = best.route.arrival();
        let astar = plan(&graph, &field, s, g, &veh, &ctl, &options(Algorithm::AStar, t0)).unwrap();
        prop_assert!((astar.route.arrival() - opt).abs() <= 1e-12 * opt);
        prop_assert!(astar.stats.cfc <= best.stats.cfc);
        for algo in [Algorithm::Ztve, Algorithm::ZAStar] {
            if let Ok(r) = plan(&graph, &field, s, g, &veh, &ctl, &options(algo, t0)) {
                prop_assert!(r.route.arrival() >= opt);
            }
        }
    }

    #[test]
    fn route_arrivals_replay_exactly(s in 0usize..81, g in 0usize..81, t0 in 0.0f64..16.0) {
        let graph = small_jet_graph();
        prop_assume!(s != g);
        let field = jet();
        let veh = VehicleSpec::new(0.5);
        let ctl = StepControl::default();
        if let Ok(r) = plan(&graph, &field, s, g, &veh, &ctl, &options(Algorithm::ZAStar, t0)) {
            let replay = travel_time_via(&field, &r.route.waypoints, t0, &[], &veh, &ctl).unwrap();
            prop_assert_eq!(&replay, &r.route.arrivals);
            prop_assert!(r.route.arrivals.windows(2).all(|w| w[1] > w[0]));
            prop_assert_eq!(r.route.waypoints[0], graph.position(s));
            prop_assert_eq!(*r.route.waypoints.last().unwrap(), graph.position(g));
        }
    }
}
