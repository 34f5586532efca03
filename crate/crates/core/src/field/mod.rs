//! Current sources: the analytic meandering jet, gridded datasets, and a few
//! closed-form fields used for testing and degenerate scenarios.
//!
//! Every source implements [`FlowField`], which returns the horizontal current
//! vector and its spatial partial derivatives at a position, depth and time.
//! Fields are immutable after construction and can be shared across threads.

mod grid;
pub mod interp;
pub mod io;
mod jet;

pub use grid::{GridAxes, GridField, GridFieldBuilder, InterpMethods, SpatialMethod};
pub use interp::Method1D;
pub use jet::{Jet, JetParams};

use crate::geom::{Rect, Vec2};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Horizontal current vector `(u, v)` (east, north).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct CurrentSample {
    pub u: f64,
    pub v: f64,
}

impl CurrentSample {
    pub const ZERO: CurrentSample = CurrentSample { u: 0.0, v: 0.0 };

    pub const fn new(u: f64, v: f64) -> Self {
        CurrentSample { u, v }
    }

    pub fn as_vec(self) -> Vec2 {
        Vec2::new(self.u, self.v)
    }

    pub fn speed(self) -> f64 {
        self.u.hypot(self.v)
    }

    pub fn mean(self, other: CurrentSample) -> CurrentSample {
        CurrentSample::new(0.5 * (self.u + other.u), 0.5 * (self.v + other.v))
    }
}

/// Spatial partial derivatives of the current components.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct CurrentGradient {
    pub u_x: f64,
    pub u_y: f64,
    pub v_x: f64,
    pub v_y: f64,
}

impl CurrentGradient {
    pub const ZERO: CurrentGradient = CurrentGradient {
        u_x: 0.0,
        u_y: 0.0,
        v_x: 0.0,
        v_y: 0.0,
    };

    pub fn is_finite(&self) -> bool {
        self.u_x.is_finite() && self.u_y.is_finite() && self.v_x.is_finite() && self.v_y.is_finite()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Z,
    T,
}

impl std::fmt::Display for Axis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Axis::X => "x",
            Axis::Y => "y",
            Axis::Z => "z",
            Axis::T => "t",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FieldError {
    #[error("query {value} outside the field domain on axis {axis} ([{min}, {max}])")]
    Domain { axis: Axis, value: f64, min: f64, max: f64 },
    #[error("invalid argument: {0}")]
    Argument(String),
}

/// A time-, space- and depth-varying horizontal current.
pub trait FlowField: Send + Sync {
    /// Current vector at horizontal position `p`, depth `z` and time `t`.
    fn sample(&self, p: Vec2, z: f64, t: f64) -> Result<CurrentSample, FieldError>;

    /// Spatial derivatives `∂(u, v)/∂(x, y)` at `(p, z, t)`.
    fn gradient(&self, p: Vec2, z: f64, t: f64) -> Result<CurrentGradient, FieldError>;

    /// Dominant temporal period, when the field has one.
    fn period(&self) -> Option<f64> {
        None
    }

    /// Horizontal extent of the data, if bounded.
    fn extent(&self) -> Option<Rect> {
        None
    }
}

impl<F: FlowField + ?Sized> FlowField for &F {
    fn sample(&self, p: Vec2, z: f64, t: f64) -> Result<CurrentSample, FieldError> {
        (**self).sample(p, z, t)
    }
    fn gradient(&self, p: Vec2, z: f64, t: f64) -> Result<CurrentGradient, FieldError> {
        (**self).gradient(p, z, t)
    }
    fn period(&self) -> Option<f64> {
        (**self).period()
    }
    fn extent(&self) -> Option<Rect> {
        (**self).extent()
    }
}

/// Spatially and temporally constant current.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Uniform {
    pub u: f64,
    pub v: f64,
}

impl Uniform {
    pub const fn new(u: f64, v: f64) -> Self {
        Uniform { u, v }
    }

    pub const fn zero() -> Self {
        Uniform { u: 0.0, v: 0.0 }
    }
}

impl FlowField for Uniform {
    fn sample(&self, _p: Vec2, _z: f64, _t: f64) -> Result<CurrentSample, FieldError> {
        Ok(CurrentSample::new(self.u, self.v))
    }
    fn gradient(&self, _p: Vec2, _z: f64, _t: f64) -> Result<CurrentGradient, FieldError> {
        Ok(CurrentGradient::ZERO)
    }
}

/// Steady affine current `c(p) = c0 + J·p`, e.g. the pure shear `u = -y`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Affine {
    pub base: CurrentSample,
    pub jacobian: CurrentGradient,
}

impl Affine {
    /// Shear flow `u = rate · y`, `v = 0`.
    pub fn shear(rate: f64) -> Self {
        Affine {
            base: CurrentSample::ZERO,
            jacobian: CurrentGradient {
                u_y: rate,
                ..CurrentGradient::ZERO
            },
        }
    }
}

impl FlowField for Affine {
    fn sample(&self, p: Vec2, _z: f64, _t: f64) -> Result<CurrentSample, FieldError> {
        let j = &self.jacobian;
        Ok(CurrentSample::new(
            self.base.u + j.u_x * p.x + j.u_y * p.y,
            self.base.v + j.v_x * p.x + j.v_y * p.y,
        ))
    }
    fn gradient(&self, _p: Vec2, _z: f64, _t: f64) -> Result<CurrentGradient, FieldError> {
        Ok(self.jacobian)
    }
}

/// Closed set of field kinds the scenario loader can produce.
#[derive(Debug, Clone)]
pub enum Field {
    Jet(Jet),
    Grid(GridField),
    Uniform(Uniform),
    Affine(Affine),
}

impl FlowField for Field {
    fn sample(&self, p: Vec2, z: f64, t: f64) -> Result<CurrentSample, FieldError> {
        match self {
            Field::Jet(f) => f.sample(p, z, t),
            Field::Grid(f) => f.sample(p, z, t),
            Field::Uniform(f) => f.sample(p, z, t),
            Field::Affine(f) => f.sample(p, z, t),
        }
    }
    fn gradient(&self, p: Vec2, z: f64, t: f64) -> Result<CurrentGradient, FieldError> {
        match self {
            Field::Jet(f) => f.gradient(p, z, t),
            Field::Grid(f) => f.gradient(p, z, t),
            Field::Uniform(f) => f.gradient(p, z, t),
            Field::Affine(f) => f.gradient(p, z, t),
        }
    }
    fn period(&self) -> Option<f64> {
        match self {
            Field::Jet(f) => f.period(),
            Field::Grid(f) => f.period(),
            _ => None,
        }
    }
    fn extent(&self) -> Option<Rect> {
        match self {
            Field::Grid(f) => f.extent(),
            _ => None,
        }
    }
}

/// Number of lattice samples along each axis for [`max_current_speed`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Lattice {
    pub nx: usize,
    pub ny: usize,
    pub nt: usize,
}

impl Lattice {
    pub const fn new(nx: usize, ny: usize, nt: usize) -> Self {
        Lattice { nx, ny, nt }
    }
}

/// Result of a lattice scan: the maximum speed and the lattice that produced it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaxSpeed {
    pub speed: f64,
    pub lattice: Lattice,
    /// Lattice spacing in x, y and t.
    pub spacing: [f64; 3],
}

/// Maximum of `‖(u, v)‖` over a regular lattice covering `region × window` at
/// depth `z`. Each axis includes both endpoints; a single sample along an axis
/// sits at the lower bound.
pub fn max_current_speed<F: FlowField + ?Sized>(
    field: &F,
    region: Rect,
    window: (f64, f64),
    z: f64,
    lattice: Lattice,
) -> Result<MaxSpeed, FieldError> {
    if !(region.width() >= 0.0 && region.height() >= 0.0) || !(window.1 >= window.0) {
        return Err(FieldError::Argument("empty region or time window".into()));
    }
    if lattice.nx == 0 || lattice.ny == 0 || lattice.nt == 0 {
        return Err(FieldError::Argument(
            "lattice must have at least one sample per axis".into(),
        ));
    }
    let step = |lo: f64, hi: f64, n: usize| if n > 1 { (hi - lo) / (n - 1) as f64 } else { 0.0 };
    let sx = step(region.min.x, region.max.x, lattice.nx);
    let sy = step(region.min.y, region.max.y, lattice.ny);
    let st = step(window.0, window.1, lattice.nt);
    let mut best = 0.0f64;
    for it in 0..lattice.nt {
        let t = window.0 + it as f64 * st;
        for iy in 0..lattice.ny {
            let y = region.min.y + iy as f64 * sy;
            for ix in 0..lattice.nx {
                let x = region.min.x + ix as f64 * sx;
                let c = field.sample(Vec2::new(x, y), z, t)?;
                best = best.max(c.speed());
            }
        }
    }
    Ok(MaxSpeed {
        speed: best,
        lattice,
        spacing: [sx, sy, st],
    })
}

/// Central finite-difference gradient, shared by the gridded field and tests.
pub fn finite_difference_gradient<F: FlowField + ?Sized>(
    field: &F,
    p: Vec2,
    z: f64,
    t: f64,
    h: f64,
) -> Result<CurrentGradient, FieldError> {
    let xp = field.sample(Vec2::new(p.x + h, p.y), z, t)?;
    let xm = field.sample(Vec2::new(p.x - h, p.y), z, t)?;
    let yp = field.sample(Vec2::new(p.x, p.y + h), z, t)?;
    let ym = field.sample(Vec2::new(p.x, p.y - h), z, t)?;
    let inv = 0.5 / h;
    Ok(CurrentGradient {
        u_x: (xp.u - xm.u) * inv,
        u_y: (yp.u - ym.u) * inv,
        v_x: (xp.v - xm.v) * inv,
        v_y: (yp.v - ym.v) * inv,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_field_has_zero_gradient() {
        let f = Uniform::new(0.3, -0.7);
        let g = f.gradient(Vec2::new(1.0, 2.0), 0.0, 5.0).unwrap();
        assert_eq!(g, CurrentGradient::ZERO);
        let fd = finite_difference_gradient(&f, Vec2::new(1.0, 2.0), 0.0, 5.0, 1e-3).unwrap();
        assert_eq!(fd, CurrentGradient::ZERO);
    }

    #[test]
    fn shear_field_gradient() {
        let f = Affine::shear(-1.0);
        let g = f.gradient(Vec2::new(0.5, 0.5), 0.0, 0.0).unwrap();
        assert_eq!(g.u_y, -1.0);
        assert_eq!((g.u_x, g.v_x, g.v_y), (0.0, 0.0, 0.0));
        assert_eq!(
            f.sample(Vec2::new(3.0, 2.0), 0.0, 0.0).unwrap(),
            CurrentSample::new(-2.0, 0.0)
        );
    }

    #[test]
    fn max_speed_of_simple_fields() {
        let r = Rect::new(0.0, 0.0, 1.0, 1.0);
        let l = Lattice::new(5, 5, 3);
        let zero = max_current_speed(&Uniform::zero(), r, (0.0, 1.0), 0.0, l).unwrap();
        assert_eq!(zero.speed, 0.0);
        let u = max_current_speed(&Uniform::new(0.3, 0.4), r, (0.0, 1.0), 0.0, l).unwrap();
        assert!((u.speed - 0.5).abs() < 1e-15);
    }

    #[test]
    fn max_speed_rejects_empty_input() {
        let r = Rect::new(0.0, 0.0, 1.0, 1.0);
        assert!(max_current_speed(&Uniform::zero(), r, (1.0, 0.0), 0.0, Lattice::new(2, 2, 2)).is_err());
        assert!(max_current_speed(&Uniform::zero(), r, (0.0, 1.0), 0.0, Lattice::new(0, 2, 2)).is_err());
    }
}
