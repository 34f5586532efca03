mod common;

use common::{dijkstra, triangle_speed};
use proptest::prelude::*;
use tvroute::cost::{edge_cost, edge_travel_time, speed_along_path};
use tvroute::field::Uniform;
use tvroute::search::{plan, Algorithm, SearchOptions};
use tvroute::{CurrentSample, GeoGraph, GridSpec, Polygon, Rect, StepControl, Vec2, VehicleSpec};

/// Plain label-setting searches reach the same floating-point fixed point as
/// the reference.
const EXACT: [Algorithm; 2] = [Algorithm::Tve, Algorithm::Itve];

fn unit(angle: f64) -> Vec2 {
    Vec2::from_angle(angle)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn still_water_planning_equals_dijkstra(
        nx in 3usize..9,
        ny in 3usize..9,
        sectors in 1u8..4,
        speed in 0.2f64..2.0,
        with_wall in any::<bool>(),
        s_frac in (0.0f64..1.0, 0.0f64..1.0),
        g_frac in (0.0f64..1.0, 0.0f64..1.0),
    ) {
        let cell = 0.5;
        let bounds = Rect::new(0.0, 0.0, nx as f64 * cell, ny as f64 * cell);
        let obstacles = if with_wall {
            let x = (nx / 2) as f64 * cell + 0.2 * cell;
            vec![Polygon::new(vec![
                Vec2::new(x, cell * 0.6),
                Vec2::new(x + 0.3 * cell, cell * 0.6),
                Vec2::new(x + 0.3 * cell, bounds.max.y + 1.0),
                Vec2::new(x, bounds.max.y + 1.0),
            ]).unwrap()]
        } else {
            Vec::new()
        };
        let graph = GeoGraph::build(GridSpec { bounds, cell, sectors }, &obstacles).unwrap();
        let pick = |f: (f64, f64)| graph.nearest_vertex(Vec2::new(f.0 * bounds.max.x, f.1 * bounds.max.y));
        let (s, g) = (pick(s_frac), pick(g_frac));
        prop_assume!(s != g);
        let still = Uniform::zero();
        let veh = VehicleSpec::new(speed);
        let ctl = StepControl::default();
        let d = dijkstra(&graph, s, 0.0, |u, v, t| {
            let c = edge_cost(&still, graph.position(u), graph.position(v), t, &veh, &ctl).unwrap();
            Some(c.travel_time)
        });
        for algo in EXACT {
            let opt = SearchOptions::new(algo, 0.0, 0.0, cell);
            match plan(&graph, &still, s, g, &veh, &ctl, &opt) {
                Ok(r) => prop_assert_eq!(r.route.arrival(), d[g], "{:?}", algo),
                Err(e) => prop_assert!(d[g].is_infinite(), "{:?} {}", algo, e),
            }
        }
        // the heuristic may close the goal through an equally long path whose
        // floating-point sum differs in the last bits
        match plan(&graph, &still, s, g, &veh, &ctl, &SearchOptions::new(Algorithm::AStar, 0.0, 0.0, cell)) {
            Ok(r) => prop_assert!((r.route.arrival() - d[g]).abs() <= 1e-13 * d[g]),
            Err(_) => prop_assert!(d[g].is_infinite()),
        }
        // the course filter only prunes, so it can never beat the optimum
        for algo in [Algorithm::Ztve, Algorithm::ZAStar] {
            let opt = SearchOptions::new(algo, 0.0, 0.0, cell);
            if let Ok(r) = plan(&graph, &still, s, g, &veh, &ctl, &opt) {
                prop_assert!(r.route.arrival() >= d[g], "{:?}", algo);
            }
        }
        // and equal to the geometric shortest path length over v
        if d[g].is_finite() {
            let geo = dijkstra(&graph, s, 0.0, |u, v, _| Some(graph.position(u).distance(graph.position(v))));
            prop_assert!((d[g] - geo[g] / speed).abs() <= 1e-12 * d[g].max(1.0));
        }
    }

    #[test]
    fn uniform_current_matches_closed_form(
        speed in 0.1f64..3.0,
        c_frac in 0.0f64..0.95,
        c_angle in -3.2f64..3.2,
        e_angle in -3.2f64..3.2,
        len in 0.05f64..5.0,
        t0 in -10.0f64..10.0,
    ) {
        let c = unit(c_angle) * (c_frac * speed);
        let dir = unit(e_angle);
        let a = Vec2::new(1.0, -2.0);
        let b = a + dir * len;
        let field = Uniform::new(c.x, c.y);
        let veh = VehicleSpec::new(speed);
        let ctl = StepControl::default();
        let w = triangle_speed((b - a) * (1.0 / (b - a).norm()), c, speed).unwrap();
        let expect = (b - a).norm() / w;
        let got = edge_travel_time(&field, a, b, t0, &veh, &ctl).unwrap();
        prop_assert!(got.feasible);
        prop_assert!((got.travel_time - expect).abs() <= 1e-12 * expect, "{} vs {}", got.travel_time, expect);
    }

    #[test]
    fn strong_crosscurrent_is_infeasible(
        speed in 0.1f64..3.0,
        excess in 1.0001f64..3.0,
        along in -0.5f64..0.5,
        e_angle in -3.2f64..3.2,
    ) {
        let dir = unit(e_angle);
        let normal = Vec2::new(-dir.y, dir.x);
        let c = normal * (excess * speed) + dir * along;
        prop_assert!(speed_along_path(dir, CurrentSample::new(c.x, c.y), speed).is_none());
        let field = Uniform::new(c.x, c.y);
        let ctl = StepControl::default();
        let got = edge_travel_time(&field, Vec2::new(0.0, 0.0), dir, 0.0, &VehicleSpec::new(speed), &ctl).unwrap();
        prop_assert!(!got.feasible);
        prop_assert_eq!(got.travel_time, ctl.penalty);
    }

    #[test]
    fn head_current_stronger_than_vehicle_is_infeasible(
        speed in 0.1f64..3.0,
        excess in 1.0001f64..3.0,
        cross in 0.0f64..0.9,
        e_angle in -3.2f64..3.2,
    ) {
        let dir = unit(e_angle);
        let normal = Vec2::new(-dir.y, dir.x);
        let c = dir * (-excess * speed) + normal * (cross * speed);
        // the path can be held but the ground speed is negative
        if let Some(w) = speed_along_path(dir, CurrentSample::new(c.x, c.y), speed) {
            prop_assert!(w <= 0.0);
        }
        let field = Uniform::new(c.x, c.y);
        let ctl = StepControl::default();
        let got = edge_travel_time(&field, Vec2::new(0.0, 0.0), dir, 0.0, &VehicleSpec::new(speed), &ctl).unwrap();
        prop_assert!(!got.feasible);
        prop_assert_eq!(got.travel_time, ctl.penalty);
    }
}

#[test]
fn straight_still_water_route_costs_distance_over_speed() {
    let graph = GeoGraph::build(
        GridSpec {
            bounds: Rect::new(0.0, 0.0, 4.0, 1.0),
            cell: 0.5,
            sectors: 3,
        },
        &[],
    )
    .unwrap();
    let s = graph.nearest_vertex(Vec2::new(0.0, 0.5));
    let g = graph.nearest_vertex(Vec2::new(4.0, 0.5));
    let veh = VehicleSpec::new(0.8);
    let r = plan(
        &graph,
        &Uniform::zero(),
        s,
        g,
        &veh,
        &StepControl::default(),
        &SearchOptions::new(Algorithm::ZAStar, 0.0, 0.0, 0.5),
    )
    .unwrap();
    assert!((r.route.travel_time() - 4.0 / 0.8).abs() < 1e-12);
    assert!(r.route.waypoints.iter().all(|p| (p.y - 0.5).abs() < 1e-12));
}
