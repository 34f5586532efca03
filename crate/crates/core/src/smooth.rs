//! Waypoint merging for stair-shaped graph routes under time-varying costs.
//!
//! A pass walks the route from its start, repeatedly trying to connect the
//! current anchor directly to later waypoints. A merge is kept only if the
//! merged waypoint is reached no later than before and the goal arrival,
//! recomputed through the remaining waypoints, does not get worse. Passes
//! repeat until the waypoint count stops changing.

use crate::cost::{edge_cost, EdgeCost, StepControl, VehicleSpec};
use crate::field::{FieldError, FlowField};
use crate::geom::Vec2;
use crate::graph::{segment_blocked, Polygon};
use crate::route::{Route, RouteError};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Floor of the slack used when comparing arrival times.
pub const ARRIVAL_SLACK: f64 = 1e-9;

/// Two arrival times computed along different polylines carry independent
/// integration errors of order `tol` times the elapsed time; differences
/// below that are noise.
fn slack(ctl: &StepControl, elapsed: f64) -> f64 {
    ARRIVAL_SLACK.max(ctl.tol * elapsed.abs())
}

#[derive(Debug, Error)]
pub enum SmoothError {
    #[error(transparent)]
    Route(#[from] RouteError),
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// Why a route was returned without smoothing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SmoothDiagnostic {
    /// Segments that cross an obstacle or cannot be traversed.
    PenaltySegments { segments: Vec<usize> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmoothResult {
    pub route: Route,
    pub passes: usize,
    pub cfc: u64,
    pub cmc: u64,
    pub diagnostic: Option<SmoothDiagnostic>,
}

#[derive(Debug, Default)]
struct Counter {
    cfc: u64,
    cmc: u64,
}

/// Cost of one straight segment; segments touching an obstacle cost the
/// penalty without sampling the field.
pub fn segment_cost<F: FlowField + ?Sized>(
    field: &F,
    a: Vec2,
    b: Vec2,
    t: f64,
    obstacles: &[Polygon],
    veh: &VehicleSpec,
    ctl: &StepControl,
) -> Result<EdgeCost, FieldError> {
    if segment_blocked(a, b, obstacles) {
        return Ok(EdgeCost {
            travel_time: ctl.penalty,
            feasible: false,
            cmc: 0,
        });
    }
    edge_cost(field, a, b, t, veh, ctl)
}

/// Arrival times along `pts` departing at `t0`. Blocked or infeasible
/// segments add the penalty time.
pub fn travel_time_via<F: FlowField + ?Sized>(
    field: &F,
    pts: &[Vec2],
    t0: f64,
    obstacles: &[Polygon],
    veh: &VehicleSpec,
    ctl: &StepControl,
) -> Result<Vec<f64>, FieldError> {
    let mut c = Counter::default();
    chain(field, pts, t0, obstacles, veh, ctl, &mut c).map(|(tt, _)| tt)
}

fn chain<F: FlowField + ?Sized>(
    field: &F,
    pts: &[Vec2],
    t0: f64,
    obstacles: &[Polygon],
    veh: &VehicleSpec,
    ctl: &StepControl,
    c: &mut Counter,
) -> Result<(Vec<f64>, Vec<usize>), FieldError> {
    if pts.len() < 2 {
        return Err(FieldError::Argument("need at least two waypoints".into()));
    }
    let mut tt = Vec::with_capacity(pts.len());
    let mut bad = Vec::new();
    tt.push(t0);
    for (i, w) in pts.windows(2).enumerate() {
        let e = segment_cost(field, w[0], w[1], tt[i], obstacles, veh, ctl)?;
        c.cfc += 1;
        c.cmc += e.cmc;
        if !e.feasible {
            bad.push(i);
        }
        tt.push(tt[i] + e.travel_time);
    }
    Ok((tt, bad))
}

/// Merge waypoints of `route` while keeping every accepted change from
/// delaying the goal arrival. Arrival times of the result are recomputed with
/// the same cost function, so the output goal arrival never exceeds the input
/// one.
pub fn smooth_route<F: FlowField + ?Sized>(
    field: &F,
    route: &Route,
    obstacles: &[Polygon],
    veh: &VehicleSpec,
    ctl: &StepControl,
) -> Result<SmoothResult, SmoothError> {
    route.validate()?;
    let mut c = Counter::default();
    if route.len() < 3 {
        return Ok(SmoothResult {
            route: route.clone(),
            passes: 0,
            cfc: 0,
            cmc: 0,
            diagnostic: None,
        });
    }
    let t0 = route.departure();
    let (tt, bad) = chain(field, &route.waypoints, t0, obstacles, veh, ctl, &mut c)?;
    if !bad.is_empty() {
        return Ok(SmoothResult {
            route: route.clone(),
            passes: 0,
            cfc: c.cfc,
            cmc: c.cmc,
            diagnostic: Some(SmoothDiagnostic::PenaltySegments { segments: bad }),
        });
    }

    let goal_cap = tt[tt.len() - 1];
    let mut wp = route.waypoints.clone();
    let mut tt = tt;
    let mut passes = 0;
    loop {
        passes += 1;
        let before = wp.len();
        let (nwp, ntt) = merge_pass(field, &wp, &tt, goal_cap, obstacles, veh, ctl, &mut c)?;
        wp = nwp;
        tt = ntt;
        if wp.len() == before {
            break;
        }
    }
    Ok(SmoothResult {
        route: Route::new(wp, tt)?,
        passes,
        cfc: c.cfc,
        cmc: c.cmc,
        diagnostic: None,
    })
}

#[allow(clippy::too_many_arguments)]
fn merge_pass<F: FlowField + ?Sized>(
    field: &F,
    wp: &[Vec2],
    tt_in: &[f64],
    goal_cap: f64,
    obstacles: &[Polygon],
    veh: &VehicleSpec,
    ctl: &StepControl,
    c: &mut Counter,
) -> Result<(Vec<Vec2>, Vec<f64>), FieldError> {
    let n = wp.len();
    let end = n - 1;
    // arrival times of the route as currently merged
    let mut tt = tt_in.to_vec();
    let mut keep = vec![0usize];
    let mut start = 0usize;
    let mut path = start + 2;
    while path < n {
        let direct = segment_cost(field, wp[start], wp[path], tt[start], obstacles, veh, ctl)?;
        c.cfc += 1;
        c.cmc += direct.cmc;
        let t_direct = tt[start] + direct.travel_time;
        let mut accepted = false;
        if direct.feasible && t_direct < tt[path] + slack(ctl, tt[path] - tt[start]) {
            let (rest, bad) = chain_from(field, wp, path, t_direct, obstacles, veh, ctl, c)?;
            let goal = rest[rest.len() - 1];
            // never later than the input route, whatever the noise allowance
            let no_worse = goal <= tt[end] + slack(ctl, tt[end] - tt[start]) && goal <= goal_cap;
            if bad.is_empty() && no_worse {
                tt[path..].copy_from_slice(&rest);
                accepted = true;
            }
        }
        if accepted {
            path += 1;
        } else {
            start = path - 1;
            keep.push(start);
            path = start + 2;
        }
    }
    keep.push(end);
    Ok((
        keep.iter().map(|&i| wp[i]).collect(),
        keep.iter().map(|&i| tt[i]).collect(),
    ))
}

#[allow(clippy::too_many_arguments)]
fn chain_from<F: FlowField + ?Sized>(
    field: &F,
    wp: &[Vec2],
    from: usize,
    t: f64,
    obstacles: &[Polygon],
    veh: &VehicleSpec,
    ctl: &StepControl,
    c: &mut Counter,
) -> Result<(Vec<f64>, Vec<usize>), FieldError> {
    if from == wp.len() - 1 {
        return Ok((vec![t], Vec::new()));
    }
    chain(field, &wp[from..], t, obstacles, veh, ctl, c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Uniform;

    fn ctl() -> StepControl {
        StepControl::default()
    }

    #[test]
    fn still_water_arrivals() {
        let pts: Vec<Vec2> = (0..4).map(|i| Vec2::new(i as f64, 0.0)).collect();
        let tt = travel_time_via(&Uniform::new(0.0, 0.0), &pts, 1.0, &[], &VehicleSpec::new(0.5), &ctl()).unwrap();
        for (i, t) in tt.iter().enumerate() {
            assert!((t - (1.0 + 2.0 * i as f64)).abs() < 1e-12);
        }
    }

    #[test]
    fn single_segment_matches_edge_cost() {
        let f = Uniform::new(0.1, 0.2);
        let veh = VehicleSpec::new(0.5);
        let (a, b) = (Vec2::new(0.0, 0.0), Vec2::new(1.0, 0.5));
        let tt = travel_time_via(&f, &[a, b], 0.0, &[], &veh, &ctl()).unwrap();
        let e = edge_cost(&f, a, b, 0.0, &veh, &ctl()).unwrap();
        assert_eq!(tt[1], e.travel_time);
    }

    #[test]
    fn blocked_segment_costs_penalty() {
        let wall = Polygon::new(vec![
            Vec2::new(0.4, -1.0),
            Vec2::new(0.6, -1.0),
            Vec2::new(0.6, 1.0),
            Vec2::new(0.4, 1.0),
        ])
        .unwrap();
        let c = ctl();
        let tt = travel_time_via(
            &Uniform::new(0.0, 0.0),
            &[Vec2::ZERO, Vec2::new(1.0, 0.0)],
            0.0,
            &[wall],
            &VehicleSpec::new(0.5),
            &c,
        )
        .unwrap();
        assert!(tt[1] >= c.penalty);
    }

    #[test]
    fn stair_becomes_straight() {
        let wp = vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(1.0, 0.0),
            Vec2::new(1.0, 1.0),
            Vec2::new(2.0, 1.0),
            Vec2::new(2.0, 2.0),
        ];
        let f = Uniform::new(0.0, 0.0);
        let veh = VehicleSpec::new(0.5);
        let tt = travel_time_via(&f, &wp, 0.0, &[], &veh, &ctl()).unwrap();
        let r = smooth_route(&f, &Route::new(wp, tt).unwrap(), &[], &veh, &ctl()).unwrap();
        assert_eq!(r.route.waypoints, vec![Vec2::new(0.0, 0.0), Vec2::new(2.0, 2.0)]);
        assert!((r.route.travel_time() - 8f64.sqrt() / 0.5).abs() < 1e-9);
    }

    #[test]
    fn collinear_in_following_current() {
        let wp = vec![Vec2::new(0.0, 0.0), Vec2::new(1.0, 0.0), Vec2::new(2.0, 0.0)];
        let f = Uniform::new(0.2, 0.0);
        let veh = VehicleSpec::new(0.5);
        let tt = travel_time_via(&f, &wp, 0.0, &[], &veh, &ctl()).unwrap();
        let r = smooth_route(&f, &Route::new(wp, tt).unwrap(), &[], &veh, &ctl()).unwrap();
        assert_eq!(r.route.len(), 2);
    }

    #[test]
    fn obstacle_keeps_corner() {
        let block = Polygon::new(vec![
            Vec2::new(0.5, 0.2),
            Vec2::new(1.5, 0.2),
            Vec2::new(1.5, 0.8),
            Vec2::new(0.5, 0.8),
        ])
        .unwrap();
        let wp = vec![Vec2::new(0.0, 0.0), Vec2::new(2.0, 0.0), Vec2::new(2.0, 1.0)];
        let f = Uniform::new(0.0, 0.0);
        let veh = VehicleSpec::new(0.5);
        let obstacles = [block];
        let tt = travel_time_via(&f, &wp, 0.0, &obstacles, &veh, &ctl()).unwrap();
        let r = smooth_route(&f, &Route::new(wp.clone(), tt).unwrap(), &obstacles, &veh, &ctl()).unwrap();
        assert_eq!(r.route.waypoints, wp);
    }

    #[test]
    fn penalty_route_returned_unchanged() {
        let wp = vec![Vec2::new(0.0, 0.0), Vec2::new(1.0, 0.0), Vec2::new(2.0, 0.0)];
        // opposing current stronger than the vehicle
        let f = Uniform::new(-1.0, 0.0);
        let veh = VehicleSpec::new(0.5);
        let route = Route::new(wp, vec![0.0, 1.0, 2.0]).unwrap();
        let r = smooth_route(&f, &route, &[], &veh, &ctl()).unwrap();
        assert_eq!(r.route, route);
        assert_eq!(
            r.diagnostic,
            Some(SmoothDiagnostic::PenaltySegments { segments: vec![0, 1] })
        );
    }
}
