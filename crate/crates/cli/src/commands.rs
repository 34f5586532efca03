//! Computations behind each subcommand. Every function returns plain
//! serializable records; writing files is left to the caller.

use crate::scenario::Resolved;
use crate::CliError;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use tvroute::departure::DepartureResult;
use tvroute::geom::hausdorff;
use tvroute::graph::{GeoGraph, GridSpec};
use tvroute::search::PlanStats;
use tvroute::{
    find_optimal_departure, plan, smooth_route, solve_bvp_shooting, Algorithm, BvpSolution, Route, SearchOptions,
    SmoothResult, StepControl,
};

pub const ALL_ALGORITHMS: [Algorithm; 5] = [
    Algorithm::Tve,
    Algorithm::Itve,
    Algorithm::AStar,
    Algorithm::Ztve,
    Algorithm::ZAStar,
];

/// One planned route.
#[derive(Debug, Clone, Serialize)]
pub struct PlanRecord {
    /// 1-based start index.
    pub start: usize,
    pub algo: Algorithm,
    pub departure: f64,
    pub arrival: f64,
    pub travel_time: f64,
    pub length: f64,
    pub waypoints: usize,
    pub stats: PlanStats,
    #[serde(skip)]
    pub route: Route,
}

/// Plan from start `k` (0-based) departing at `t0`.
pub fn plan_one(
    r: &Resolved,
    graph: &GeoGraph,
    k: usize,
    algo: Algorithm,
    ctl: &StepControl,
    t0: f64,
) -> Result<PlanRecord, CliError> {
    let s = graph.nearest_vertex(r.starts[k]);
    let g = graph.nearest_vertex(r.goal);
    let mut opt: SearchOptions = r.search_options(algo);
    opt.t0 = t0;
    let res = plan(graph, &r.field, s, g, &r.vehicle, ctl, &opt).map_err(|e| CliError::Search {
        start: k + 1,
        source: e,
    })?;
    let route = res.route;
    Ok(PlanRecord {
        start: k + 1,
        algo,
        departure: route.departure(),
        arrival: route.arrival(),
        travel_time: route.travel_time(),
        length: route.length(),
        waypoints: route.len(),
        stats: res.stats,
        route,
    })
}

/// Plan every selected start in parallel; results are in start order.
pub fn plan_starts(
    r: &Resolved,
    starts: &[usize],
    algo: Algorithm,
    ctl: &StepControl,
) -> Result<Vec<PlanRecord>, CliError> {
    let t0 = r.scenario.mission.t0;
    starts
        .par_iter()
        .map(|&k| plan_one(r, &r.graph, k, algo, ctl, t0))
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct SmoothRecord {
    pub start: usize,
    pub waypoints_before: usize,
    pub waypoints_after: usize,
    pub reduction: f64,
    pub arrival_before: f64,
    pub arrival_after: f64,
    pub passes: usize,
    pub cfc: u64,
    pub cmc: u64,
    pub diagnostic: Option<tvroute::smooth::SmoothDiagnostic>,
    #[serde(skip)]
    pub smoothed: Route,
}

pub fn smooth_one(r: &Resolved, planned: &PlanRecord, ctl: &StepControl) -> Result<SmoothRecord, CliError> {
    let SmoothResult {
        route,
        passes,
        cfc,
        cmc,
        diagnostic,
    } = smooth_route(&r.field, &planned.route, &r.obstacles, &r.vehicle, ctl)?;
    let before = planned.route.len();
    Ok(SmoothRecord {
        start: planned.start,
        waypoints_before: before,
        waypoints_after: route.len(),
        reduction: 1.0 - route.len() as f64 / before as f64,
        arrival_before: planned.route.arrival(),
        arrival_after: route.arrival(),
        passes,
        cfc,
        cmc,
        diagnostic,
        smoothed: route,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct OracleRecord {
    pub start: usize,
    pub graph_travel_time: f64,
    pub oracle_travel_time: f64,
    /// Graph travel time over oracle travel time.
    pub ratio: f64,
    /// Hausdorff distance between the graph route and the oracle path.
    pub hausdorff: f64,
    pub theta0: f64,
    pub miss: f64,
    pub candidates: usize,
    pub t_max: f64,
    #[serde(skip)]
    pub solution: Option<BvpSolution>,
}

/// Continuous optimum from the start of `planned`'s route to its goal.
pub fn oracle_one(r: &Resolved, planned: &PlanRecord) -> Result<OracleRecord, CliError> {
    let opt = r.shooting_options(planned.travel_time);
    let route = &planned.route;
    let start = route.waypoints[0];
    let goal = *route.waypoints.last().expect("route is non-empty");
    let sol = solve_bvp_shooting(&r.field, start, goal, route.departure(), &r.vehicle, &opt).map_err(|e| {
        CliError::Oracle {
            start: planned.start,
            source: e,
        }
    })?;
    Ok(OracleRecord {
        start: planned.start,
        graph_travel_time: planned.travel_time,
        oracle_travel_time: sol.travel_time,
        ratio: planned.travel_time / sol.travel_time,
        hausdorff: hausdorff(&route.waypoints, &sol.trajectory.positions()),
        theta0: sol.theta0,
        miss: sol.miss,
        candidates: sol.candidates,
        t_max: opt.t_max,
        solution: Some(sol),
    })
}

/// Optimal departure from start `k` (0-based).
pub fn departure_one(r: &Resolved, k: usize, algo: Algorithm, ctl: &StepControl) -> Result<DepartureResult, CliError> {
    let coarse = match r.scenario.departure.coarse_sectors {
        Some(sectors) if sectors != r.graph.spec().sectors => Some(GeoGraph::build(
            GridSpec {
                sectors,
                ..*r.graph.spec()
            },
            &r.obstacles,
        )?),
        _ => None,
    };
    let scan_graph = coarse.as_ref().unwrap_or(&r.graph);
    let scan = |t: f64| plan_one(r, scan_graph, k, algo, ctl, t).map(|p| p.travel_time);
    let fine = |t: f64| plan_one(r, &r.graph, k, algo, ctl, t).map(|p| p.travel_time);
    Ok(find_optimal_departure(&scan, &fine, &r.departure_options())?)
}

/// Per-start, per-algorithm counters for the bench command.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BenchRow {
    pub start: usize,
    pub algo: Algorithm,
    pub travel_time: f64,
    pub waypoints: usize,
    pub cfc: u64,
    pub cmc: u64,
    pub visited_edges: u64,
    pub expanded_vertices: u64,
    /// Route identical (same vertex sequence) to the exhaustive search's.
    pub same_path: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BenchSummary {
    pub algo: Algorithm,
    pub cfc: u64,
    pub cmc: u64,
    /// Exhaustive-search totals divided by this algorithm's totals.
    pub cfc_speedup: f64,
    pub cmc_speedup: f64,
    pub all_same_path: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Bench {
    pub rows: Vec<BenchRow>,
    pub summary: Vec<BenchSummary>,
}

pub fn bench(r: &Resolved, starts: &[usize], ctl: &StepControl) -> Result<Bench, CliError> {
    let t0 = r.scenario.mission.t0;
    let jobs: Vec<(usize, Algorithm)> = starts
        .iter()
        .flat_map(|&k| ALL_ALGORITHMS.iter().map(move |&a| (k, a)))
        .collect();
    let plans: Vec<PlanRecord> = jobs
        .par_iter()
        .map(|&(k, a)| plan_one(r, &r.graph, k, a, ctl, t0))
        .collect::<Result<_, _>>()?;
    let reference = |start: usize| {
        plans
            .iter()
            .find(|p| p.start == start && p.algo == Algorithm::Tve)
            .expect("exhaustive search always runs")
    };
    let rows: Vec<BenchRow> = plans
        .iter()
        .map(|p| BenchRow {
            start: p.start,
            algo: p.algo,
            travel_time: p.travel_time,
            waypoints: p.waypoints,
            cfc: p.stats.cfc,
            cmc: p.stats.cmc,
            visited_edges: p.stats.visited_edges,
            expanded_vertices: p.stats.expanded_vertices,
            same_path: p.route.waypoints == reference(p.start).route.waypoints,
        })
        .collect();
    let total = |a: Algorithm, f: fn(&BenchRow) -> u64| rows.iter().filter(|x| x.algo == a).map(f).sum::<u64>();
    let (ref_cfc, ref_cmc) = (total(Algorithm::Tve, |x| x.cfc), total(Algorithm::Tve, |x| x.cmc));
    let summary = ALL_ALGORITHMS
        .iter()
        .map(|&a| {
            let (cfc, cmc) = (total(a, |x| x.cfc), total(a, |x| x.cmc));
            BenchSummary {
                algo: a,
                cfc,
                cmc,
                cfc_speedup: ref_cfc as f64 / cfc.max(1) as f64,
                cmc_speedup: ref_cmc as f64 / cmc.max(1) as f64,
                all_same_path: rows.iter().filter(|x| x.algo == a).all(|x| x.same_path),
            }
        })
        .collect();
    Ok(Bench { rows, summary })
}
