//! Label-setting route search with edge costs evaluated on the fly at each
//! vertex's arrival time.
//!
//! One core implements five variants:
//!
//! | variant  | heuristic | Zermelo filter | skip `d[u] >= d[v]` |
//! |----------|-----------|----------------|---------------------|
//! | TVE      |           |                |                     |
//! | ITVE     |           |                | ✓                   |
//! | A*TVE    | ✓         |                | ✓                   |
//! | ZTVE     |           | ✓              | ✓                   |
//! | ZA*TVE   | ✓         | ✓              | ✓                   |

mod optdir;
pub mod queue;

pub use optdir::{cal_optdir, OptDir};

use crate::cost::{edge_cost, StepControl, VehicleSpec};
use crate::field::{FieldError, FlowField};
use crate::geom::{angle_between, Vec2};
use crate::graph::{GeoGraph, VertexId};
use crate::route::Route;
use queue::IndexedMinHeap;
use serde::{Deserialize, Serialize};
use std::time::{Duration, Instant};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Tve,
    Itve,
    #[serde(rename = "astar")]
    AStar,
    Ztve,
    #[serde(rename = "zatve")]
    ZAStar,
}

impl Algorithm {
    pub const ALL: [Algorithm; 5] = [
        Algorithm::Tve,
        Algorithm::Itve,
        Algorithm::AStar,
        Algorithm::Ztve,
        Algorithm::ZAStar,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Tve => "TVE",
            Algorithm::Itve => "ITVE",
            Algorithm::AStar => "A*TVE",
            Algorithm::Ztve => "ZTVE",
            Algorithm::ZAStar => "ZA*TVE",
        }
    }

    pub fn key(self) -> &'static str {
        match self {
            Algorithm::Tve => "tve",
            Algorithm::Itve => "itve",
            Algorithm::AStar => "astar",
            Algorithm::Ztve => "ztve",
            Algorithm::ZAStar => "zatve",
        }
    }
}

impl std::str::FromStr for Algorithm {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.key() == s.to_ascii_lowercase())
            .ok_or_else(|| format!("unknown algorithm '{s}' (expected tve, itve, astar, ztve or zatve)"))
    }
}

/// Default half-width of the Zermelo angle window, in degrees.
pub const DEFAULT_DELTA_PHI_MAX_DEG: f64 = 36.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchOptions {
    pub use_heuristic: bool,
    pub use_zermelo_filter: bool,
    pub skip_dominated: bool,
    /// Half-width of the Zermelo angle window, radians, in `(0, π]`.
    pub delta_phi_max: f64,
    /// Departure time.
    pub t0: f64,
    /// Upper bound on the current speed, used by the heuristic.
    pub v_current_max: f64,
    /// Distance past the current vertex covered by the Zermelo integration,
    /// in length units (typically one grid cell).
    pub zermelo_lead: f64,
    /// RK4 steps per Zermelo integration.
    pub zermelo_steps: usize,
    /// Within this distance of the goal the Zermelo window is also opened
    /// around the bearing to the goal, where the route has to bend onto a
    /// lattice point.
    pub zermelo_goal_radius: f64,
}

impl SearchOptions {
    pub fn new(algo: Algorithm, t0: f64, v_current_max: f64, cell: f64) -> Self {
        let (h, z, skip) = match algo {
            Algorithm::Tve => (false, false, false),
            Algorithm::Itve => (false, false, true),
            Algorithm::AStar => (true, false, true),
            Algorithm::Ztve => (false, true, true),
            Algorithm::ZAStar => (true, true, true),
        };
        SearchOptions {
            use_heuristic: h,
            use_zermelo_filter: z,
            skip_dominated: skip,
            delta_phi_max: DEFAULT_DELTA_PHI_MAX_DEG.to_radians(),
            t0,
            v_current_max,
            zermelo_lead: cell,
            zermelo_steps: 8,
            zermelo_goal_radius: 4.0 * cell,
        }
    }

    pub fn validate(&self) -> Result<(), SearchError> {
        if !(self.delta_phi_max > 0.0 && self.delta_phi_max <= std::f64::consts::PI) {
            return Err(SearchError::Options("delta_phi_max must lie in (0, π]".into()));
        }
        if !self.t0.is_finite() {
            return Err(SearchError::Options("t0 must be finite".into()));
        }
        if !(self.v_current_max >= 0.0) || !self.v_current_max.is_finite() {
            return Err(SearchError::Options("v_current_max must be finite and >= 0".into()));
        }
        if !(self.zermelo_lead >= 0.0) {
            return Err(SearchError::Options("zermelo_lead must be >= 0".into()));
        }
        if !(self.zermelo_goal_radius >= 0.0) {
            return Err(SearchError::Options("zermelo_goal_radius must be >= 0".into()));
        }
        Ok(())
    }
}

/// Instrumentation counters of one search.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PlanStats {
    /// Cost-function (edge travel time) calls.
    pub cfc: u64,
    /// Current-model calls made by the cost function.
    pub cmc: u64,
    /// Outgoing edges looked at by expanded vertices, filtered or not.
    pub visited_edges: u64,
    pub expanded_vertices: u64,
    /// Zermelo course estimates and the current-model calls they made.
    pub optdir_calls: u64,
    pub optdir_model_calls: u64,
    pub optdir_fallbacks: u64,
    /// Wall-clock time; kept out of serialized artifacts.
    #[serde(skip)]
    pub wall_time: Duration,
}

#[derive(Debug, Error)]
pub enum SearchError {
    #[error("goal unreachable after expanding {} vertices ({} cost-function calls)", .stats.expanded_vertices, .stats.cfc)]
    NoRoute { stats: PlanStats },
    #[error("vertex {0} is not in the graph")]
    InvalidVertex(VertexId),
    #[error("invalid search options: {0}")]
    Options(String),
    #[error(transparent)]
    Field(#[from] FieldError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchResult {
    pub route: Route,
    pub vertices: Vec<VertexId>,
    pub stats: PlanStats,
}

/// Straight-line travel time at the maximum possible ground speed.
#[inline]
pub fn heuristic(u: Vec2, goal: Vec2, v_veh: f64, v_current_max: f64) -> f64 {
    u.distance(goal) / (v_veh + v_current_max)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Color {
    White,
    Gray,
    Black,
}

const NONE: VertexId = VertexId::MAX;

/// Observer for extraction order, used by tests.
pub trait SearchObserver {
    fn extracted(&mut self, _v: VertexId, _d: f64, _f: f64) {}
}

impl SearchObserver for () {}

/// Search a time-optimal route from `s` to `g` departing at `opt.t0`.
pub fn plan<F: FlowField + ?Sized>(
    graph: &GeoGraph,
    field: &F,
    s: VertexId,
    g: VertexId,
    veh: &VehicleSpec,
    ctl: &StepControl,
    opt: &SearchOptions,
) -> Result<SearchResult, SearchError> {
    plan_observed(graph, field, s, g, veh, ctl, opt, &mut ())
}

#[allow(clippy::too_many_arguments)]
pub fn plan_observed<F: FlowField + ?Sized, O: SearchObserver>(
    graph: &GeoGraph,
    field: &F,
    s: VertexId,
    g: VertexId,
    veh: &VehicleSpec,
    ctl: &StepControl,
    opt: &SearchOptions,
    observer: &mut O,
) -> Result<SearchResult, SearchError> {
    let started = Instant::now();
    let n = graph.vertex_count();
    for v in [s, g] {
        if v >= n {
            return Err(SearchError::InvalidVertex(v));
        }
    }
    opt.validate()?;
    veh.validate()?;
    ctl.validate()?;

    let goal = graph.position(g);
    let h = |v: VertexId| {
        if opt.use_heuristic {
            heuristic(graph.position(v), goal, veh.speed, opt.v_current_max)
        } else {
            0.0
        }
    };

    let mut d = vec![f64::INFINITY; n];
    let mut pi = vec![NONE; n];
    let mut color = vec![Color::White; n];
    let mut queue = IndexedMinHeap::with_capacity(n);
    let mut stats = PlanStats::default();

    d[s] = opt.t0;
    queue.insert(s, opt.t0 + h(s));
    color[s] = Color::Gray;

    let mut reached = false;
    while let Some((u, fu)) = queue.extract_min() {
        color[u] = Color::Black;
        stats.expanded_vertices += 1;
        observer.extracted(u, d[u], fu);
        if u == g {
            reached = true;
            break;
        }
        let pu = graph.position(u);

        let course = if opt.use_zermelo_filter && pi[u] != NONE {
            let p = pi[u];
            let horizon = 0.5 * (d[u] - d[p]) + 0.5 * opt.zermelo_lead / veh.speed;
            let est = cal_optdir(
                field,
                graph.position(p),
                pu,
                0.5 * (d[p] + d[u]),
                horizon,
                opt.zermelo_steps,
                veh,
            );
            stats.optdir_calls += 1;
            match est {
                Ok(o) => {
                    stats.optdir_model_calls += o.model_calls;
                    if o.fallback {
                        stats.optdir_fallbacks += 1;
                        None
                    } else {
                        Some(o.course)
                    }
                }
                // the estimate left the field: no filtering at this vertex
                Err(FieldError::Domain { .. }) => {
                    stats.optdir_fallbacks += 1;
                    None
                }
                Err(e) => return Err(e.into()),
            }
        } else {
            None
        };

        let near_goal = pu.distance(goal) <= opt.zermelo_goal_radius;
        let bearing = (goal - pu).angle();
        for e in graph.out_edges(u) {
            stats.visited_edges += 1;
            let v = e.to;
            if opt.skip_dominated && d[u] >= d[v] {
                continue;
            }
            if let Some(phi) = course {
                if angle_between(e.dir.angle(), phi) > opt.delta_phi_max
                    && !(near_goal && angle_between(e.dir.angle(), bearing) <= opt.delta_phi_max)
                {
                    continue;
                }
            }
            let w = edge_cost(field, pu, graph.position(v), d[u], veh, ctl)?;
            stats.cfc += 1;
            stats.cmc += w.cmc;
            if !w.feasible || color[v] == Color::Black {
                continue;
            }
            let dv = d[u] + w.travel_time;
            if dv < d[v] {
                d[v] = dv;
                pi[v] = u;
                let fv = dv + h(v);
                if color[v] == Color::White {
                    color[v] = Color::Gray;
                    queue.insert(v, fv);
                } else {
                    queue.decrease_key(v, fv);
                }
            }
        }
    }
    stats.wall_time = started.elapsed();

    if !reached {
        return Err(SearchError::NoRoute { stats });
    }

    let mut vertices = vec![g];
    while let Some(&v) = vertices.last() {
        if v == s {
            break;
        }
        vertices.push(pi[v]);
    }
    vertices.reverse();
    let waypoints = vertices.iter().map(|&v| graph.position(v)).collect();
    let arrivals = vertices.iter().map(|&v| d[v]).collect();
    Ok(SearchResult {
        route: Route { waypoints, arrivals },
        vertices,
        stats,
    })
}
