//! Command-line front end for `tvroute`.
//!
//! Every command reads a scenario, writes its artifacts plus a
//! `manifest.json` into the output directory, and reports failures as a
//! JSON object on stderr with a nonzero exit code.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod scenario;

use clap::{Args, Parser, Subcommand, ValueEnum};
use scenario::{load_scenario, Resolved, ScenarioError};
use serde::Serialize;
use sha2::{Digest, Sha256};
use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use thiserror::Error;
use tvroute::departure::DepartureError;
use tvroute::graph::GraphError;
use tvroute::oracle::OracleError;
use tvroute::smooth::SmoothError;
use tvroute::{Algorithm, SearchError, StepControl};

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error("start {start}: {source}")]
    Search { start: usize, source: SearchError },
    #[error(transparent)]
    Smooth(#[from] SmoothError),
    #[error("start {start}: {source}")]
    Oracle { start: usize, source: OracleError },
    #[error(transparent)]
    Departure(#[from] DepartureError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    Output(String),
}

impl CliError {
    /// Stable machine-readable error category.
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Scenario(_) | CliError::Argument(_) => "invalid_input",
            CliError::Search { .. } => "search",
            CliError::Smooth(_) => "smooth",
            CliError::Oracle { .. } => "oracle",
            CliError::Departure(_) => "departure",
            CliError::Graph(_) => "graph",
            CliError::Io { .. } | CliError::Output(_) => "io",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Scenario(_) | CliError::Argument(_) => 2,
            _ => 1,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::json!({ "error": { "kind": self.kind(), "message": self.to_string() } }).to_string()
    }
}

#[derive(Debug, Parser)]
#[command(name = "tvroute", version, about = "Route planning through time-varying currents")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Plan a route from each start to the goal.
    Plan(CommonArgs),
    /// Plan, then remove redundant waypoints.
    Smooth(CommonArgs),
    /// Search the departure window for the fastest departure.
    Departure(CommonArgs),
    /// Compare graph routes with the continuous optimum.
    Oracle(CommonArgs),
    /// Run every algorithm on every start and compare counters.
    Bench(CommonArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AlgoArg {
    Tve,
    Itve,
    Astar,
    Ztve,
    Zatve,
}

impl From<AlgoArg> for Algorithm {
    fn from(a: AlgoArg) -> Self {
        match a {
            AlgoArg::Tve => Algorithm::Tve,
            AlgoArg::Itve => Algorithm::Itve,
            AlgoArg::Astar => Algorithm::AStar,
            AlgoArg::Ztve => Algorithm::Ztve,
            AlgoArg::Zatve => Algorithm::ZAStar,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// Scenario TOML file.
    #[arg(long)]
    pub scenario: PathBuf,
    /// Output directory, created if missing.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Worker threads; 0 uses every core.
    #[arg(long, default_value_t = 0)]
    pub jobs: usize,
    /// Override the scenario's search algorithm.
    #[arg(long, value_enum)]
    pub algo: Option<AlgoArg>,
    /// Override the relative integration tolerance.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Restrict to one start (1-based). Departure defaults to start 1.
    #[arg(long)]
    pub start: Option<usize>,
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    command: &'a str,
    scenario_path: String,
    algo: Algorithm,
    tol: f64,
    start: Option<usize>,
    /// Scenario with every default filled in.
    scenario: &'a scenario::Scenario,
    files: Vec<FileEntry>,
}

#[derive(Serialize)]
struct FileEntry {
    name: String,
    sha256: String,
}

/// Collects output files and records their digests.
struct Outputs {
    dir: PathBuf,
    files: Vec<FileEntry>,
}

impl Outputs {
    fn new(dir: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(dir).map_err(|source| CliError::Io {
            path: dir.to_path_buf(),
            source,
        })?;
        Ok(Outputs {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        })
    }

    fn write_bytes(&mut self, name: &str, bytes: &[u8]) -> Result<(), CliError> {
        let path = self.dir.join(name);
        fs::write(&path, bytes).map_err(|source| CliError::Io { path, source })?;
        self.files.push(FileEntry {
            name: name.to_string(),
            sha256: hex::encode(Sha256::digest(bytes)),
        });
        Ok(())
    }

    fn write_json<T: Serialize + ?Sized>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Output(e.to_string()))?;
        text.push('\n');
        self.write_bytes(name, text.as_bytes())
    }

    fn write_with<F>(&mut self, name: &str, f: F) -> Result<(), CliError>
    where
        F: FnOnce(&mut Vec<u8>) -> Result<(), String>,
    {
        let mut buf = Vec::new();
        f(&mut buf).map_err(|e| CliError::Output(format!("{name}: {e}")))?;
        self.write_bytes(name, &buf)
    }
}

fn selected_starts(r: &Resolved, start: Option<usize>) -> Result<Vec<usize>, CliError> {
    let n = r.starts.len();
    match start {
        None => Ok((0..n).collect()),
        Some(k) if (1..=n).contains(&k) => Ok(vec![k - 1]),
        Some(k) => Err(CliError::Argument(format!("--start {k} is outside 1..={n}"))),
    }
}

/// Run one command; returns the list of files written.
pub fn run(cmd: &Command) -> Result<Vec<PathBuf>, CliError> {
    let (name, args) = match cmd {
        Command::Plan(a) => ("plan", a),
        Command::Smooth(a) => ("smooth", a),
        Command::Departure(a) => ("departure", a),
        Command::Oracle(a) => ("oracle", a),
        Command::Bench(a) => ("bench", a),
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.jobs)
        .build()
        .map_err(|e| CliError::Argument(format!("--jobs: {e}")))?;
    pool.install(|| execute(name, args))
}

fn execute(name: &str, args: &CommonArgs) -> Result<Vec<PathBuf>, CliError> {
    let mut r = load_scenario(&args.scenario)?;
    if let Some(a) = args.algo {
        r.scenario.search.algo = a.into();
    }
    if let Some(t) = args.tol {
        r.scenario.step.tol = t;
    }
    let ctl: StepControl = r.step();
    ctl.validate().map_err(|e| CliError::Argument(format!("--tol: {e}")))?;
    let algo = r.scenario.search.algo;
    let starts = selected_starts(&r, args.start)?;
    let mut out = Outputs::new(&args.out)?;

    match name {
        "plan" => {
            let plans = commands::plan_starts(&r, &starts, algo, &ctl)?;
            for p in &plans {
                write_route(&mut out, &format!("route_sp{}.csv", p.start), &p.route)?;
            }
            out.write_json("stats.json", &plans)?;
        }
        "smooth" => {
            let plans = commands::plan_starts(&r, &starts, algo, &ctl)?;
            let mut records = Vec::new();
            for p in &plans {
                let s = commands::smooth_one(&r, p, &ctl)?;
                write_route(&mut out, &format!("route_sp{}.csv", p.start), &p.route)?;
                write_route(&mut out, &format!("smoothed_sp{}.csv", p.start), &s.smoothed)?;
                records.push(s);
            }
            out.write_json("smooth.json", &records)?;
        }
        "departure" => {
            let k = args.start.unwrap_or(1);
            let k = selected_starts(&r, Some(k))?[0];
            let res = commands::departure_one(&r, k, algo, &ctl)?;
            out.write_with("scan.csv", |buf| res.write_scan_csv(buf).map_err(|e| e.to_string()))?;
            out.write_json(
                "departure.json",
                &serde_json::json!({ "start": k + 1, "algo": algo, "result": res }),
            )?;
        }
        "oracle" => {
            let plans = commands::plan_starts(&r, &starts, algo, &ctl)?;
            let records = {
                use rayon::prelude::*;
                plans
                    .par_iter()
                    .map(|p| commands::oracle_one(&r, p))
                    .collect::<Result<Vec<_>, _>>()?
            };
            for rec in &records {
                let traj = &rec.solution.as_ref().expect("solved").trajectory;
                out.write_with(&format!("trajectory_sp{}.csv", rec.start), |buf| {
                    traj.write_csv(buf).map_err(|e| e.to_string())
                })?;
            }
            out.write_json("oracle.json", &records)?;
        }
        "bench" => {
            let b = commands::bench(&r, &starts, &ctl)?;
            out.write_with("bench.csv", |buf| {
                use std::io::Write;
                let mut w = BufWriter::new(buf);
                let io = |e: std::io::Error| e.to_string();
                writeln!(
                    w,
                    "start,algo,travel_time,waypoints,cfc,cmc,visited_edges,expanded_vertices,same_path"
                )
                .map_err(io)?;
                for x in &b.rows {
                    writeln!(
                        w,
                        "{},{},{},{},{},{},{},{},{}",
                        x.start,
                        x.algo.key(),
                        x.travel_time,
                        x.waypoints,
                        x.cfc,
                        x.cmc,
                        x.visited_edges,
                        x.expanded_vertices,
                        x.same_path
                    )
                    .map_err(io)?;
                }
                w.flush().map_err(io)
            })?;
            out.write_json("bench.json", &b)?;
        }
        _ => unreachable!("unknown command {name}"),
    }

    let manifest = Manifest {
        tool: "tvroute",
        version: env!("CARGO_PKG_VERSION"),
        command: name,
        scenario_path: args.scenario.display().to_string(),
        algo,
        tol: ctl.tol,
        start: args.start,
        scenario: &r.scenario,
        files: std::mem::take(&mut out.files),
    };
    let mut written: Vec<PathBuf> = manifest.files.iter().map(|f| out.dir.join(&f.name)).collect();
    out.write_json("manifest.json", &manifest)?;
    written.push(out.dir.join("manifest.json"));
    Ok(written)
}

fn write_route(out: &mut Outputs, name: &str, route: &tvroute::Route) -> Result<(), CliError> {
    out.write_with(name, |buf| route.write_csv(buf).map_err(|e| e.to_string()))
}
