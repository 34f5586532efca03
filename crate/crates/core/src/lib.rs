//! Time-optimal route planning for slow vehicles in time-varying currents.
//!
//! The crate builds a sector-grid graph over the operating area, searches it
//! with edge costs computed on the fly at each vertex's arrival time, smooths
//! the resulting stair-shaped route, finds the best departure time, and
//! cross-checks graph routes against a continuous optimal-control solution.

// NaN-rejecting checks are written as negated comparisons on purpose.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cost;
pub mod departure;
pub mod field;
pub mod geom;
pub mod graph;
pub mod oracle;
pub mod route;
pub mod search;
pub mod smooth;
pub mod zermelo;

pub use cost::{EdgeCost, StepControl, VehicleSpec};
pub use departure::{find_optimal_departure, DepartureOptions, DepartureResult};
pub use field::{CurrentGradient, CurrentSample, Field, FieldError, FlowField};
pub use geom::{Rect, Vec2};
pub use graph::{GeoGraph, GridSpec, Polygon};
pub use oracle::{integrate_zermelo, solve_bvp_shooting, BvpSolution, ShootingOptions, Trajectory};
pub use route::Route;
pub use search::{plan, Algorithm, PlanStats, SearchError, SearchOptions, SearchResult};
pub use smooth::{smooth_route, travel_time_via, SmoothResult};
