//! Scenario files.
//!
//! A scenario is a TOML document. Lengths are in the field's length unit,
//! times in its time unit, angles in degrees unless the key says otherwise.
//!
//! ```toml
//! [field]
//! kind = "jet"            # jet | grid | uniform | affine
//!
//! [grid]
//! bounds = [0.0, -2.4, 8.0, 2.4]   # x_min, y_min, x_max, y_max
//! cell = 0.4
//! sectors = 3
//!
//! [vehicle]
//! speed = 0.5
//!
//! [mission]
//! starts = [[0.4, -2.0], [1.6, 0.0]]
//! goal = [7.6, 0.0]
//! t0 = 0.0
//! ```
//!
//! Optional sections: `[search]`, `[step]`, `[[obstacles]]`, `[departure]`,
//! `[oracle]`. Every default is materialized by [`Scenario::resolve`] and
//! echoed in the run manifest.

use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use thiserror::Error;
use tvroute::departure::{DepartureOptions, Refiner};
use tvroute::field::io::{load, load_csv, FieldFileError};
use tvroute::field::{max_current_speed, Affine, InterpMethods, Jet, JetParams, Lattice, Uniform};
use tvroute::graph::GraphError;
use tvroute::oracle::ShootingOptions;
use tvroute::search::DEFAULT_DELTA_PHI_MAX_DEG;
use tvroute::{
    Algorithm, CurrentGradient, CurrentSample, Field, FieldError, FlowField, GeoGraph, GridSpec, Polygon, Rect,
    SearchOptions, StepControl, Vec2, VehicleSpec,
};

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot read scenario {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("scenario schema error: {0}")]
    Schema(#[from] toml::de::Error),
    #[error("invalid scenario field `{field}`: {msg}")]
    Invalid { field: String, msg: String },
    #[error("field file: {0}")]
    FieldFile(#[from] FieldFileError),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

fn invalid(field: &str, msg: impl Into<String>) -> ScenarioError {
    ScenarioError::Invalid {
        field: field.into(),
        msg: msg.into(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum FieldSection {
    Jet(JetParams),
    Grid(GridSource),
    Uniform {
        u: f64,
        v: f64,
    },
    /// Steady field `c(p) = base + jacobian·p`.
    Affine {
        #[serde(default)]
        base: CurrentSample,
        #[serde(default)]
        jacobian: CurrentGradient,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GridFormat {
    Csv,
    Binary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSource {
    /// Relative paths are taken from the scenario file's directory.
    pub path: PathBuf,
    /// Inferred from the extension when absent (`.csv` → csv, else binary).
    #[serde(default)]
    pub format: Option<GridFormat>,
    /// Interpolation for csv input; binary files carry their own.
    #[serde(default)]
    pub interp: InterpMethods,
    /// Queries up to this far outside the time axis are clamped.
    #[serde(default)]
    pub time_clamp: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub bounds: [f64; 4],
    pub cell: f64,
    #[serde(default = "default_sectors")]
    pub sectors: u8,
}

fn default_sectors() -> u8 {
    3
}

fn default_speed() -> f64 {
    0.5
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VehicleSection {
    #[serde(default = "default_speed")]
    pub speed: f64,
    #[serde(default)]
    pub depth: f64,
    #[serde(default)]
    pub dive: Option<tvroute::cost::DiveProfile>,
}

impl Default for VehicleSection {
    fn default() -> Self {
        VehicleSection {
            speed: default_speed(),
            depth: 0.0,
            dive: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Mission {
    pub starts: Vec<[f64; 2]>,
    pub goal: [f64; 2],
    #[serde(default)]
    pub t0: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SearchSection {
    #[serde(default = "default_algo")]
    pub algo: Algorithm,
    #[serde(default = "default_dphi")]
    pub delta_phi_max_deg: f64,
    /// Computed from the field over the box and mission window when absent.
    #[serde(default)]
    pub v_current_max: Option<f64>,
    /// Length of the time window scanned for `v_current_max`; one field
    /// period or the gridded time span when absent.
    #[serde(default)]
    pub mission_window: Option<f64>,
    /// Defaults to 4 grid cells.
    #[serde(default)]
    pub zermelo_goal_radius: Option<f64>,
    #[serde(default = "default_zsteps")]
    pub zermelo_steps: usize,
}

fn default_algo() -> Algorithm {
    Algorithm::ZAStar
}

fn default_dphi() -> f64 {
    DEFAULT_DELTA_PHI_MAX_DEG
}

fn default_zsteps() -> usize {
    8
}

impl Default for SearchSection {
    fn default() -> Self {
        SearchSection {
            algo: default_algo(),
            delta_phi_max_deg: default_dphi(),
            v_current_max: None,
            mission_window: None,
            zermelo_goal_radius: None,
            zermelo_steps: default_zsteps(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObstacleSection {
    pub vertices: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DepartureSection {
    /// Departure window; `[t0, t0 + period]` for periodic fields.
    #[serde(default)]
    pub window: Option<[f64; 2]>,
    #[serde(default)]
    pub dt: Option<f64>,
    #[serde(default)]
    pub tol: Option<f64>,
    #[serde(default)]
    pub refiner: Refiner,
    #[serde(default)]
    pub horizon: Option<f64>,
    /// Sector count of a coarser graph used only for the support scan.
    #[serde(default)]
    pub coarse_sectors: Option<u8>,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleSection {
    #[serde(default)]
    pub starts: Option<usize>,
    #[serde(default)]
    pub rho: Option<f64>,
    #[serde(default)]
    pub dt: Option<f64>,
    #[serde(default)]
    pub t_max: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub field: FieldSection,
    pub grid: GridSection,
    #[serde(default)]
    pub vehicle: VehicleSection,
    pub mission: Mission,
    #[serde(default)]
    pub search: SearchSection,
    #[serde(default)]
    pub step: StepControl,
    #[serde(default)]
    pub obstacles: Vec<ObstacleSection>,
    #[serde(default)]
    pub departure: DepartureSection,
    #[serde(default)]
    pub oracle: OracleSection,
}

/// Scenario with every default filled in, plus the objects built from it.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub scenario: Scenario,
    pub field: Field,
    pub graph: GeoGraph,
    pub obstacles: Vec<Polygon>,
    pub vehicle: VehicleSpec,
    pub starts: Vec<Vec2>,
    pub goal: Vec2,
}

impl Scenario {
    pub fn from_toml(text: &str) -> Result<Self, ScenarioError> {
        Ok(toml::from_str(text)?)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("scenario serializes")
    }

    fn bounds(&self) -> Rect {
        let b = self.grid.bounds;
        Rect::new(b[0], b[1], b[2], b[3])
    }

    fn validate(&self) -> Result<(), ScenarioError> {
        let b = self.grid.bounds;
        if !b.iter().all(|v| v.is_finite()) || !(b[2] > b[0] && b[3] > b[1]) {
            return Err(invalid(
                "grid.bounds",
                "expected [x_min, y_min, x_max, y_max] with max > min",
            ));
        }
        let bounds = self.bounds();
        if self.mission.starts.is_empty() {
            return Err(invalid("mission.starts", "at least one start position is required"));
        }
        for (i, s) in self.mission.starts.iter().enumerate() {
            if !bounds.contains(Vec2::new(s[0], s[1])) {
                return Err(invalid(&format!("mission.starts[{i}]"), "outside grid.bounds"));
            }
        }
        let g = self.mission.goal;
        if !bounds.contains(Vec2::new(g[0], g[1])) {
            return Err(invalid("mission.goal", "outside grid.bounds"));
        }
        if !self.mission.t0.is_finite() {
            return Err(invalid("mission.t0", "must be finite"));
        }
        let d = self.search.delta_phi_max_deg;
        if !(d > 0.0 && d <= 180.0) {
            return Err(invalid("search.delta_phi_max_deg", "must lie in (0, 180]"));
        }
        if let Some(v) = self.search.v_current_max {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(invalid("search.v_current_max", "must be finite and >= 0"));
            }
        }
        if let Some(w) = self.departure.window {
            if !(w[1] > w[0]) {
                return Err(invalid("departure.window", "end must follow start"));
            }
        }
        if let Some(dt) = self.departure.dt {
            if !(dt > 0.0) {
                return Err(invalid("departure.dt", "must be positive"));
            }
        }
        self.step.validate().map_err(|e| invalid("step", e.to_string()))?;
        Ok(())
    }

    fn load_field(&self, base: &Path) -> Result<Field, ScenarioError> {
        Ok(match &self.field {
            FieldSection::Jet(p) => Field::Jet(Jet::new(*p)?),
            FieldSection::Uniform { u, v } => Field::Uniform(Uniform::new(*u, *v)),
            FieldSection::Affine { base, jacobian } => Field::Affine(Affine {
                base: *base,
                jacobian: *jacobian,
            }),
            FieldSection::Grid(src) => {
                let path = if src.path.is_absolute() {
                    src.path.clone()
                } else {
                    base.join(&src.path)
                };
                if !path.exists() {
                    return Err(invalid("field.path", format!("{} does not exist", path.display())));
                }
                let format = src
                    .format
                    .unwrap_or_else(|| match path.extension().and_then(|e| e.to_str()) {
                        Some(e) if e.eq_ignore_ascii_case("csv") => GridFormat::Csv,
                        _ => GridFormat::Binary,
                    });
                Field::Grid(match format {
                    GridFormat::Csv => load_csv(&path, src.interp, src.time_clamp)?,
                    GridFormat::Binary => load(&path)?,
                })
            }
        })
    }

    /// Validate, load the field, build the graph and fill in every default.
    /// `base` resolves relative file paths.
    pub fn resolve(&self, base: &Path) -> Result<Resolved, ScenarioError> {
        self.validate()?;
        let field = self.load_field(base)?;
        let vehicle = VehicleSpec {
            speed: self.vehicle.speed,
            depth: self.vehicle.depth,
            dive: self.vehicle.dive,
        };
        vehicle.validate().map_err(|e| invalid("vehicle", e.to_string()))?;
        let obstacles = self
            .obstacles
            .iter()
            .enumerate()
            .map(|(i, o)| {
                Polygon::new(o.vertices.iter().map(|v| Vec2::new(v[0], v[1])).collect())
                    .map_err(|e| invalid(&format!("obstacles[{i}]"), e.to_string()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let spec = GridSpec {
            bounds: self.bounds(),
            cell: self.grid.cell,
            sectors: self.grid.sectors,
        };
        let graph = GeoGraph::build(spec, &obstacles)?;
        let to_vec = |p: &[f64; 2]| Vec2::new(p[0], p[1]);
        let starts: Vec<Vec2> = self.mission.starts.iter().map(to_vec).collect();
        let goal = to_vec(&self.mission.goal);
        for (i, s) in starts.iter().enumerate() {
            if obstacles.iter().any(|o| o.contains(*s)) {
                return Err(invalid(&format!("mission.starts[{i}]"), "inside an obstacle"));
            }
        }
        if obstacles.iter().any(|o| o.contains(goal)) {
            return Err(invalid("mission.goal", "inside an obstacle"));
        }

        let mut sc = self.clone();
        let t0 = sc.mission.t0;
        let window_len = match sc.search.mission_window {
            Some(w) => w,
            None => default_window(&field),
        };
        sc.search.mission_window = Some(window_len);
        if sc.search.v_current_max.is_none() {
            sc.search.v_current_max = Some(scan_max_speed(&field, &spec, (t0, t0 + window_len), vehicle.depth)?);
        }
        sc.search.zermelo_goal_radius.get_or_insert(4.0 * spec.cell);

        let period = field.period();
        let window = *sc
            .departure
            .window
            .get_or_insert([t0, t0 + period.unwrap_or(window_len)]);
        let dep = DepartureOptions::new((window[0], window[1]), period);
        let dt = *sc.departure.dt.get_or_insert(dep.dt);
        sc.departure.tol.get_or_insert(dt / 100.0);

        let span = starts
            .iter()
            .map(|s| s.distance(goal))
            .fold(0.0, f64::max)
            .max(spec.cell);
        let sh = ShootingOptions::new(spec.cell, span, vehicle.speed);
        sc.oracle.starts.get_or_insert(sh.starts);
        sc.oracle.rho.get_or_insert(sh.rho);
        sc.oracle.dt.get_or_insert(sh.dt);

        Ok(Resolved {
            scenario: sc,
            field,
            graph,
            obstacles,
            vehicle,
            starts,
            goal,
        })
    }
}

/// One period for periodic fields, the gridded time span for gridded ones,
/// otherwise 1 (time-invariant fields).
fn default_window(field: &Field) -> f64 {
    if let Some(p) = field.period() {
        return p;
    }
    match field {
        Field::Grid(g) => {
            let (a, b) = g.time_window();
            (b - a).max(0.0)
        }
        _ => 1.0,
    }
}

/// Relative margin added to the sampled maximum current speed.
pub const VMAX_MARGIN: f64 = 0.01;

/// Upper estimate of the current speed: the lattice maximum (4 samples per
/// grid cell in space, 4 per stored time step for gridded fields and 64 per
/// window otherwise) raised by [`VMAX_MARGIN`] to cover peaks between samples.
fn scan_max_speed(field: &Field, spec: &GridSpec, window: (f64, f64), z: f64) -> Result<f64, ScenarioError> {
    let per_cell = |len: f64| (4.0 * len / spec.cell).ceil() as usize + 1;
    let nt = match field {
        Field::Grid(g) => 4 * g.axes().nt().max(1) + 1,
        _ if window.1 > window.0 => 65,
        _ => 1,
    };
    let lattice = Lattice::new(per_cell(spec.bounds.width()), per_cell(spec.bounds.height()), nt);
    let region = match field.extent() {
        Some(e) => intersect(spec.bounds, e),
        None => spec.bounds,
    };
    let window = match field {
        Field::Grid(g) => {
            let (a, b) = g.time_window();
            (window.0.clamp(a, b), window.1.clamp(a, b))
        }
        _ => window,
    };
    Ok(max_current_speed(field, region, window, z, lattice)?.speed * (1.0 + VMAX_MARGIN))
}

fn intersect(a: Rect, b: Rect) -> Rect {
    Rect::new(
        a.min.x.max(b.min.x),
        a.min.y.max(b.min.y),
        a.max.x.min(b.max.x),
        a.max.y.min(b.max.y),
    )
}

impl Resolved {
    pub fn search_options(&self, algo: Algorithm) -> SearchOptions {
        let s = &self.scenario.search;
        let mut o = SearchOptions::new(
            algo,
            self.scenario.mission.t0,
            s.v_current_max.unwrap_or(0.0),
            self.scenario.grid.cell,
        );
        o.delta_phi_max = s.delta_phi_max_deg.to_radians();
        o.zermelo_steps = s.zermelo_steps;
        if let Some(r) = s.zermelo_goal_radius {
            o.zermelo_goal_radius = r;
        }
        o
    }

    pub fn step(&self) -> StepControl {
        self.scenario.step
    }

    pub fn departure_options(&self) -> DepartureOptions {
        let d = &self.scenario.departure;
        let w = d.window.expect("resolved");
        DepartureOptions {
            window: (w[0], w[1]),
            dt: d.dt.expect("resolved"),
            tol: d.tol.expect("resolved"),
            refiner: d.refiner,
            horizon: d.horizon,
        }
    }

    /// `t_max` falls back to three times the graph route's travel time.
    pub fn shooting_options(&self, graph_travel_time: f64) -> ShootingOptions {
        let o = &self.scenario.oracle;
        ShootingOptions {
            starts: o.starts.expect("resolved"),
            rho: o.rho.expect("resolved"),
            dt: o.dt.expect("resolved"),
            t_max: o.t_max.unwrap_or(3.0 * graph_travel_time),
            theta_tol: 1e-10,
            region: Some(self.graph.spec().bounds),
        }
    }
}

/// Read and parse a scenario file, returning it with the directory used to
/// resolve relative paths.
pub fn read_scenario(path: &Path) -> Result<(Scenario, PathBuf), ScenarioError> {
    let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    Ok((Scenario::from_toml(&text)?, base))
}

/// Read, validate and resolve a scenario file.
pub fn load_scenario(path: &Path) -> Result<Resolved, ScenarioError> {
    let (sc, base) = read_scenario(path)?;
    sc.resolve(&base)
}
