//! Gridded current fields with layered interpolation: a 2-D spatial stage on
//! every depth layer and time step the query touches, then a 1-D stage
//! across depth, then a 1-D stage across time.

use super::interp::{self, catmull_rom_weights, Method1D};
use super::{finite_difference_gradient, Axis, CurrentGradient, CurrentSample, FieldError, FlowField};
use crate::geom::{Rect, Vec2};
use serde::{Deserialize, Serialize};

/// Horizontal interpolation method applied on each depth layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpatialMethod {
    Nearest,
    Bilinear,
    /// Separable Catmull-Rom, edge samples replicated.
    Bicubic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct InterpMethods {
    pub spatial: SpatialMethod,
    pub depth: Method1D,
    pub time: Method1D,
}

impl Default for InterpMethods {
    fn default() -> Self {
        InterpMethods {
            spatial: SpatialMethod::Bilinear,
            depth: Method1D::Linear,
            time: Method1D::Linear,
        }
    }
}

/// Sample locations of a gridded field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridAxes {
    pub nx: usize,
    pub ny: usize,
    pub origin: Vec2,
    pub dx: f64,
    pub dy: f64,
    /// Depth levels, strictly increasing.
    pub depths: Vec<f64>,
    /// Time stamps, strictly increasing.
    pub times: Vec<f64>,
}

impl GridAxes {
    pub fn nz(&self) -> usize {
        self.depths.len()
    }

    pub fn nt(&self) -> usize {
        self.times.len()
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny * self.nz() * self.nt()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Flat index of `u[t][z][y][x]`.
    #[inline]
    pub fn index(&self, it: usize, iz: usize, iy: usize, ix: usize) -> usize {
        ((it * self.nz() + iz) * self.ny + iy) * self.nx + ix
    }

    pub fn extent(&self) -> Rect {
        Rect::new(
            self.origin.x,
            self.origin.y,
            self.origin.x + (self.nx - 1) as f64 * self.dx,
            self.origin.y + (self.ny - 1) as f64 * self.dy,
        )
    }

    fn validate(&self, methods: &InterpMethods) -> Result<(), FieldError> {
        let arg = |m: String| Err(FieldError::Argument(m));
        if self.nx < 2 || self.ny < 2 {
            return arg(format!(
                "grid needs at least 2x2 horizontal samples, got {}x{}",
                self.nx, self.ny
            ));
        }
        if !(self.dx > 0.0 && self.dy > 0.0) || !self.dx.is_finite() || !self.dy.is_finite() {
            return arg("grid spacing must be positive and finite".into());
        }
        if !self.origin.is_finite() {
            return arg("grid origin must be finite".into());
        }
        if self.depths.is_empty() || self.times.is_empty() {
            return arg("grid needs at least one depth level and one time stamp".into());
        }
        interp::check_abscissae(&self.depths).map_err(|e| FieldError::Argument(format!("depth levels: {e}")))?;
        interp::check_abscissae(&self.times).map_err(|e| FieldError::Argument(format!("time stamps: {e}")))?;
        for (name, n, m) in [("depth", self.nz(), methods.depth), ("time", self.nt(), methods.time)] {
            if n > 1 && n < m.min_samples() {
                return arg(format!(
                    "{m:?} {name} interpolation needs at least {} samples, got {n}",
                    m.min_samples()
                ));
            }
        }
        Ok(())
    }
}

/// Current field sampled on a regular horizontal lattice at a list of depths
/// and times. A single depth level (or time stamp) makes the field invariant
/// along that axis.
#[derive(Debug, Clone, PartialEq)]
pub struct GridField {
    axes: GridAxes,
    u: Vec<f64>,
    v: Vec<f64>,
    methods: InterpMethods,
    time_clamp: f64,
    fd_step: f64,
}

/// Incremental construction of a [`GridField`].
#[derive(Debug, Clone)]
pub struct GridFieldBuilder {
    axes: GridAxes,
    methods: InterpMethods,
    time_clamp: f64,
    fd_step: Option<f64>,
}

impl GridFieldBuilder {
    pub fn new(axes: GridAxes) -> Self {
        GridFieldBuilder {
            axes,
            methods: InterpMethods::default(),
            time_clamp: 0.0,
            fd_step: None,
        }
    }

    pub fn methods(mut self, methods: InterpMethods) -> Self {
        self.methods = methods;
        self
    }

    /// Queries up to `tol` outside the time window clamp to the boundary field.
    pub fn time_clamp(mut self, tol: f64) -> Self {
        self.time_clamp = tol;
        self
    }

    pub fn fd_step(mut self, h: f64) -> Self {
        self.fd_step = Some(h);
        self
    }

    pub fn build(self, u: Vec<f64>, v: Vec<f64>) -> Result<GridField, FieldError> {
        self.axes.validate(&self.methods)?;
        let n = self.axes.len();
        if u.len() != n || v.len() != n {
            return Err(FieldError::Argument(format!(
                "expected {n} samples per component, got u={} v={}",
                u.len(),
                v.len()
            )));
        }
        if let Some(i) = u.iter().chain(&v).position(|x| !x.is_finite()) {
            return Err(FieldError::Argument(format!(
                "non-finite current sample at flat index {}",
                i % n
            )));
        }
        if !(self.time_clamp >= 0.0) {
            return Err(FieldError::Argument("time clamp tolerance must be >= 0".into()));
        }
        let fd_step = self.fd_step.unwrap_or(self.axes.dx.min(self.axes.dy) / 100.0);
        if !(fd_step > 0.0) {
            return Err(FieldError::Argument("finite-difference step must be positive".into()));
        }
        Ok(GridField {
            axes: self.axes,
            u,
            v,
            methods: self.methods,
            time_clamp: self.time_clamp,
            fd_step,
        })
    }

    /// Fill the arrays by evaluating `f(x, y, z, t)` at every sample.
    pub fn build_from_fn(self, mut f: impl FnMut(f64, f64, f64, f64) -> (f64, f64)) -> Result<GridField, FieldError> {
        let a = &self.axes;
        let mut u = Vec::with_capacity(a.len());
        let mut v = Vec::with_capacity(a.len());
        for &t in &a.times {
            for &z in &a.depths {
                for iy in 0..a.ny {
                    let y = a.origin.y + iy as f64 * a.dy;
                    for ix in 0..a.nx {
                        let x = a.origin.x + ix as f64 * a.dx;
                        let (cu, cv) = f(x, y, z, t);
                        u.push(cu);
                        v.push(cv);
                    }
                }
            }
        }
        self.build(u, v)
    }
}

/// Relative slack for queries that land on the boundary up to rounding.
const EDGE_SLACK: f64 = 1e-9;

impl GridField {
    pub fn axes(&self) -> &GridAxes {
        &self.axes
    }

    pub fn methods(&self) -> InterpMethods {
        self.methods
    }

    pub fn fd_step(&self) -> f64 {
        self.fd_step
    }

    pub fn time_clamp(&self) -> f64 {
        self.time_clamp
    }

    pub fn u(&self) -> &[f64] {
        &self.u
    }

    pub fn v(&self) -> &[f64] {
        &self.v
    }

    /// Time window `[t_first, t_last]`.
    pub fn time_window(&self) -> (f64, f64) {
        let t = &self.axes.times;
        (t[0], t[t.len() - 1])
    }

    /// Horizontal coordinate along one axis → (cell index, fraction), or a
    /// domain error.
    fn horizontal(&self, axis: Axis, value: f64) -> Result<(usize, f64), FieldError> {
        let (o, d, n) = match axis {
            Axis::X => (self.axes.origin.x, self.axes.dx, self.axes.nx),
            _ => (self.axes.origin.y, self.axes.dy, self.axes.ny),
        };
        let f = (value - o) / d;
        let last = (n - 1) as f64;
        if !(f >= -EDGE_SLACK && f <= last + EDGE_SLACK) {
            return Err(FieldError::Domain {
                axis,
                value,
                min: o,
                max: o + last * d,
            });
        }
        let f = f.clamp(0.0, last);
        let i = (f.floor() as usize).min(n - 2);
        Ok((i, f - i as f64))
    }

    fn along(&self, axis: Axis, value: f64) -> Result<f64, FieldError> {
        let (vals, slack) = match axis {
            Axis::Z => (&self.axes.depths, 0.0),
            _ => (&self.axes.times, self.time_clamp),
        };
        if vals.len() == 1 {
            return Ok(vals[0]);
        }
        let (lo, hi) = (vals[0], vals[vals.len() - 1]);
        let eps = EDGE_SLACK * (hi - lo);
        if !(value >= lo - slack - eps && value <= hi + slack + eps) {
            return Err(FieldError::Domain {
                axis,
                value,
                min: lo,
                max: hi,
            });
        }
        Ok(value.clamp(lo, hi))
    }

    /// Spatial stage on one `(time, depth)` layer.
    fn layer(&self, it: usize, iz: usize, (ix, sx): (usize, f64), (iy, sy): (usize, f64)) -> (f64, f64) {
        let a = &self.axes;
        let at = |x: usize, y: usize| {
            let k = a.index(it, iz, y, x);
            (self.u[k], self.v[k])
        };
        match self.methods.spatial {
            SpatialMethod::Nearest => {
                let x = if sx <= 0.5 { ix } else { ix + 1 };
                let y = if sy <= 0.5 { iy } else { iy + 1 };
                at(x, y)
            }
            SpatialMethod::Bilinear => {
                let (u00, v00) = at(ix, iy);
                let (u10, v10) = at(ix + 1, iy);
                let (u01, v01) = at(ix, iy + 1);
                let (u11, v11) = at(ix + 1, iy + 1);
                let bl = |c00: f64, c10: f64, c01: f64, c11: f64| {
                    let bottom = c00 + sx * (c10 - c00);
                    let top = c01 + sx * (c11 - c01);
                    bottom + sy * (top - bottom)
                };
                (bl(u00, u10, u01, u11), bl(v00, v10, v01, v11))
            }
            SpatialMethod::Bicubic => {
                let wx = catmull_rom_weights(sx);
                let wy = catmull_rom_weights(sy);
                let clamp = |i: isize, n: usize| i.clamp(0, n as isize - 1) as usize;
                let (mut u, mut v) = (0.0, 0.0);
                for (j, wyj) in wy.iter().enumerate() {
                    let y = clamp(iy as isize + j as isize - 1, a.ny);
                    let (mut ru, mut rv) = (0.0, 0.0);
                    for (i, wxi) in wx.iter().enumerate() {
                        let x = clamp(ix as isize + i as isize - 1, a.nx);
                        let (cu, cv) = at(x, y);
                        ru += wxi * cu;
                        rv += wxi * cv;
                    }
                    u += wyj * ru;
                    v += wyj * rv;
                }
                (u, v)
            }
        }
    }
}

impl FlowField for GridField {
    fn sample(&self, p: Vec2, z: f64, t: f64) -> Result<CurrentSample, FieldError> {
        let hx = self.horizontal(Axis::X, p.x)?;
        let hy = self.horizontal(Axis::Y, p.y)?;
        let z = self.along(Axis::Z, z)?;
        let t = self.along(Axis::T, t)?;

        let a = &self.axes;
        let rz = interp::stencil(self.methods.depth, &a.depths, z);
        let rt = interp::stencil(self.methods.time, &a.times, t);
        let zs = &a.depths[rz.clone()];
        let ts = &a.times[rt.clone()];

        // at most 6 samples per 1-D stencil
        let mut tu = [0.0; 6];
        let mut tv = [0.0; 6];
        for (k, it) in rt.clone().enumerate() {
            let mut zu = [0.0; 6];
            let mut zv = [0.0; 6];
            for (j, iz) in rz.clone().enumerate() {
                let (u, v) = self.layer(it, iz, hx, hy);
                zu[j] = u;
                zv[j] = v;
            }
            let nz = zs.len();
            tu[k] = interp::interpolate(self.methods.depth, zs, &zu[..nz], z);
            tv[k] = interp::interpolate(self.methods.depth, zs, &zv[..nz], z);
        }
        let nt = ts.len();
        Ok(CurrentSample::new(
            interp::interpolate(self.methods.time, ts, &tu[..nt], t),
            interp::interpolate(self.methods.time, ts, &tv[..nt], t),
        ))
    }

    fn gradient(&self, p: Vec2, z: f64, t: f64) -> Result<CurrentGradient, FieldError> {
        finite_difference_gradient(self, p, z, t, self.fd_step)
    }

    fn period(&self) -> Option<f64> {
        None
    }

    fn extent(&self) -> Option<Rect> {
        Some(self.axes.extent())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn axes(nx: usize, ny: usize, depths: Vec<f64>, times: Vec<f64>) -> GridAxes {
        GridAxes {
            nx,
            ny,
            origin: Vec2::new(0.0, 0.0),
            dx: 1.0,
            dy: 0.5,
            depths,
            times,
        }
    }

    #[test]
    fn constant_field_is_reproduced_by_every_method() {
        let spatial = [SpatialMethod::Nearest, SpatialMethod::Bilinear, SpatialMethod::Bicubic];
        let oned = [Method1D::Nearest, Method1D::Linear, Method1D::Cubic, Method1D::Akima];
        for s in spatial {
            for m in oned {
                let f = GridFieldBuilder::new(axes(
                    5,
                    4,
                    vec![0.0, 10.0, 20.0, 50.0, 100.0],
                    vec![0.0, 1.0, 2.0, 3.0, 4.0],
                ))
                .methods(InterpMethods {
                    spatial: s,
                    depth: m,
                    time: m,
                })
                .build_from_fn(|_, _, _, _| (0.25, -0.75))
                .unwrap();
                for &(x, y, z, t) in &[(0.3, 0.2, 5.0, 0.5), (3.9, 1.4, 77.0, 3.2), (4.0, 1.5, 100.0, 4.0)] {
                    let c = f.sample(Vec2::new(x, y), z, t).unwrap();
                    assert!((c.u - 0.25).abs() < 1e-14 && (c.v + 0.75).abs() < 1e-14, "{s:?}/{m:?}");
                }
            }
        }
    }

    #[test]
    fn bilinear_cell_center_is_corner_mean() {
        let f = GridFieldBuilder::new(axes(2, 2, vec![0.0], vec![0.0]))
            .build(vec![1.0, 2.0, 4.0, 9.0], vec![0.0, 0.0, 0.0, 4.0])
            .unwrap();
        let c = f.sample(Vec2::new(0.5, 0.25), 0.0, 0.0).unwrap();
        assert!((c.u - 4.0).abs() < 1e-15);
        assert!((c.v - 1.0).abs() < 1e-15);
    }

    #[test]
    fn akima_in_time_reproduces_linear_trend() {
        let times = vec![0.0, 1.0, 2.0, 3.0, 4.0];
        let f = GridFieldBuilder::new(axes(2, 2, vec![0.0], times))
            .methods(InterpMethods {
                time: Method1D::Akima,
                ..Default::default()
            })
            .build_from_fn(|_, _, _, t| (0.5 + 0.25 * t, -t))
            .unwrap();
        for t in [0.5, 1.5, 2.5, 3.5] {
            let c = f.sample(Vec2::new(0.5, 0.2), 0.0, t).unwrap();
            assert!((c.u - (0.5 + 0.25 * t)).abs() < 1e-14);
            assert!((c.v + t).abs() < 1e-14);
        }
    }

    #[test]
    fn nearest_returns_stored_sample() {
        let f = GridFieldBuilder::new(axes(3, 3, vec![0.0, 1.0], vec![0.0, 1.0]))
            .methods(InterpMethods {
                spatial: SpatialMethod::Nearest,
                depth: Method1D::Nearest,
                time: Method1D::Nearest,
            })
            .build_from_fn(|x, y, z, t| (x + 10.0 * y + 100.0 * z, 1000.0 * t))
            .unwrap();
        let c = f.sample(Vec2::new(1.2, 0.6), 0.8, 0.3).unwrap();
        assert_eq!(c.u, 1.0 + 5.0 + 100.0);
        assert_eq!(c.v, 0.0);
    }

    #[test]
    fn out_of_domain_reports_axis() {
        let f = GridFieldBuilder::new(axes(3, 3, vec![0.0, 1.0], vec![0.0, 1.0]))
            .build_from_fn(|_, _, _, _| (0.0, 0.0))
            .unwrap();
        let axis_of = |r: Result<CurrentSample, FieldError>| match r {
            Err(FieldError::Domain { axis, .. }) => Some(axis),
            _ => None,
        };
        assert_eq!(axis_of(f.sample(Vec2::new(-0.1, 0.0), 0.0, 0.0)), Some(Axis::X));
        assert_eq!(axis_of(f.sample(Vec2::new(0.0, 1.1), 0.0, 0.0)), Some(Axis::Y));
        assert_eq!(axis_of(f.sample(Vec2::new(0.0, 0.0), 2.0, 0.0)), Some(Axis::Z));
        assert_eq!(axis_of(f.sample(Vec2::new(0.0, 0.0), 0.0, 1.5)), Some(Axis::T));
    }

    #[test]
    fn time_clamp_tolerance() {
        let f = GridFieldBuilder::new(axes(2, 2, vec![0.0], vec![0.0, 1.0]))
            .time_clamp(0.5)
            .build_from_fn(|_, _, _, t| (t, 0.0))
            .unwrap();
        assert_eq!(f.sample(Vec2::ZERO, 0.0, 1.4).unwrap().u, 1.0);
        assert!(f.sample(Vec2::ZERO, 0.0, 1.6).is_err());
    }

    #[test]
    fn gradient_of_linear_field_and_stencil_exit() {
        let f = GridFieldBuilder::new(axes(5, 5, vec![0.0], vec![0.0]))
            .build_from_fn(|_, y, _, _| (-y, 0.0))
            .unwrap();
        let g = f.gradient(Vec2::new(2.0, 1.0), 0.0, 0.0).unwrap();
        assert!((g.u_y + 1.0).abs() < 1e-10);
        assert!(g.u_x.abs() < 1e-12 && g.v_x.abs() < 1e-12 && g.v_y.abs() < 1e-12);
        assert!(f.gradient(Vec2::new(0.0, 1.0), 0.0, 0.0).is_err());
    }

    #[test]
    fn validation_errors() {
        let b = GridFieldBuilder::new(axes(3, 3, vec![0.0, 1.0], vec![0.0])).methods(InterpMethods {
            depth: Method1D::Akima,
            ..Default::default()
        });
        assert!(b.build_from_fn(|_, _, _, _| (0.0, 0.0)).is_err());
        let b = GridFieldBuilder::new(axes(3, 3, vec![1.0, 0.0], vec![0.0]));
        assert!(b.build_from_fn(|_, _, _, _| (0.0, 0.0)).is_err());
        let b = GridFieldBuilder::new(axes(3, 3, vec![0.0], vec![0.0]));
        assert!(b.build(vec![0.0; 8], vec![0.0; 9]).is_err());
    }
}
