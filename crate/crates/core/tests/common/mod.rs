//! Test-side reference implementations, written independently of the
//! library's search, smoothing and integration code.

#![allow(dead_code)]

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use tvroute::cost::edge_cost;
use tvroute::field::{FlowField, Jet};
use tvroute::graph::VertexId;
use tvroute::{GeoGraph, GridSpec, Rect, StepControl, Vec2, VehicleSpec};

#[derive(PartialEq)]
struct Entry(f64, VertexId);

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, o: &Self) -> Ordering {
        o.0.total_cmp(&self.0).then(o.1.cmp(&self.1))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

/// Label-setting search with lazy deletion. `weight(u, v, d_u)` returns the
/// edge time when leaving `u` at `d_u`, or `None` for an unusable edge.
pub fn dijkstra<W>(graph: &GeoGraph, s: VertexId, t0: f64, mut weight: W) -> Vec<f64>
where
    W: FnMut(VertexId, VertexId, f64) -> Option<f64>,
{
    let mut d = vec![f64::INFINITY; graph.vertex_count()];
    let mut done = vec![false; graph.vertex_count()];
    let mut heap = BinaryHeap::new();
    d[s] = t0;
    heap.push(Entry(t0, s));
    while let Some(Entry(du, u)) = heap.pop() {
        if done[u] || du > d[u] {
            continue;
        }
        done[u] = true;
        for e in graph.out_edges(u) {
            if done[e.to] {
                continue;
            }
            if let Some(w) = weight(u, e.to, du) {
                let cand = du + w;
                if cand < d[e.to] {
                    d[e.to] = cand;
                    heap.push(Entry(cand, e.to));
                }
            }
        }
    }
    d
}

/// Time-dependent label-setting search with the library's edge weights.
pub fn td_dijkstra<F: FlowField + ?Sized>(
    graph: &GeoGraph,
    field: &F,
    s: VertexId,
    t0: f64,
    veh: &VehicleSpec,
    ctl: &StepControl,
) -> Vec<f64> {
    dijkstra(graph, s, t0, |u, v, t| {
        let c = edge_cost(field, graph.position(u), graph.position(v), t, veh, ctl).unwrap();
        c.feasible.then_some(c.travel_time)
    })
}

/// Ground speed along unit direction `dir`, straight from the velocity
/// triangle: the vehicle heading `θ` satisfies `v·sin(θ - φ) = -c⊥`, and the
/// ground speed is `v·cos(θ - φ) + c∥`.
pub fn triangle_speed(dir: Vec2, c: Vec2, v: f64) -> Option<f64> {
    let normal = Vec2::new(-dir.y, dir.x);
    let c_par = c.dot(dir);
    let c_perp = c.dot(normal);
    if c_perp.abs() >= v {
        return None;
    }
    let w = (v * v - c_perp * c_perp).sqrt() + c_par;
    (w > 0.0).then_some(w)
}

/// Travel time along `a → b` through the field, integrating `dt/ds = L/w`
/// with `n` classical RK4 steps in the edge parameter `s ∈ [0, 1]`.
pub fn fixed_step_edge_time<F: FlowField + ?Sized>(
    field: &F,
    a: Vec2,
    b: Vec2,
    t0: f64,
    v: f64,
    n: usize,
) -> Option<f64> {
    let d = b - a;
    let len = d.norm();
    let dir = d * (1.0 / len);
    let rate = |s: f64, t: f64| -> Option<f64> {
        let c = field.sample(a.lerp(b, s), 0.0, t).ok()?.as_vec();
        triangle_speed(dir, c, v).map(|w| len / w)
    };
    let h = 1.0 / n as f64;
    let mut t = t0;
    for i in 0..n {
        let s = i as f64 * h;
        let k1 = rate(s, t)?;
        let k2 = rate(s + 0.5 * h, t + 0.5 * h * k1)?;
        let k3 = rate(s + 0.5 * h, t + 0.5 * h * k2)?;
        let k4 = rate(s + h, t + h * k3)?;
        t += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    Some(t - t0)
}

pub fn jet() -> Jet {
    Jet::default()
}

/// A small jet-covered graph for property tests.
pub fn small_jet_graph() -> GeoGraph {
    GeoGraph::build(
        GridSpec {
            bounds: Rect::new(0.0, -1.6, 3.2, 1.6),
            cell: 0.4,
            sectors: 2,
        },
        &[],
    )
    .unwrap()
}

/// Maximum speed of the default jet, rounded up.
pub const JET_VMAX: f64 = 1.03;
