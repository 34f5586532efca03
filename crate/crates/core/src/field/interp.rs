//! One- and two-dimensional interpolation kernels.
//!
//! The 1-D routines work on arbitrary strictly increasing abscissae and are
//! used both for the depth/time stages of the gridded field and for the
//! travel-time-versus-departure curve. Each method touches only a small
//! stencil around the query; [`stencil`] reports which samples are needed so
//! callers can avoid materializing the rest.

use serde::{Deserialize, Serialize};
use std::ops::Range;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum InterpError {
    #[error("abscissae must be finite and strictly increasing (violated at index {0})")]
    NotIncreasing(usize),
    #[error("x and y lengths differ ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("at least {need} samples required, got {got}")]
    TooFewSamples { need: usize, got: usize },
}

/// One-dimensional interpolation method.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method1D {
    Nearest,
    Linear,
    /// Cubic Hermite with centred finite-difference slopes (Catmull-Rom on
    /// uniform spacing).
    Cubic,
    Akima,
}

impl Method1D {
    /// Minimum number of samples the method needs along its axis.
    pub fn min_samples(self) -> usize {
        match self {
            Method1D::Nearest => 1,
            Method1D::Linear => 2,
            Method1D::Cubic | Method1D::Akima => 3,
        }
    }
}

pub fn check_abscissae(xs: &[f64]) -> Result<(), InterpError> {
    for (i, w) in xs.windows(2).enumerate() {
        if !(w[1] > w[0]) || !w[0].is_finite() || !w[1].is_finite() {
            return Err(InterpError::NotIncreasing(i + 1));
        }
    }
    if xs.len() == 1 && !xs[0].is_finite() {
        return Err(InterpError::NotIncreasing(0));
    }
    Ok(())
}

/// Index `i` of the interval `[xs[i], xs[i+1]]` containing `x`, clamped to the
/// valid interval range. Requires `xs.len() >= 2`.
pub fn locate(xs: &[f64], x: f64) -> usize {
    debug_assert!(xs.len() >= 2);
    let last = xs.len() - 2;
    match xs.partition_point(|&v| v <= x) {
        0 => 0,
        p => (p - 1).min(last),
    }
}

/// Sample indices that `method` reads when evaluating at `x`.
pub fn stencil(method: Method1D, xs: &[f64], x: f64) -> Range<usize> {
    let n = xs.len();
    if n == 1 {
        return 0..1;
    }
    let i = locate(xs, x);
    match method {
        Method1D::Nearest => {
            let j = if x - xs[i] <= xs[i + 1] - x { i } else { i + 1 };
            j..j + 1
        }
        Method1D::Linear => i..i + 2,
        Method1D::Cubic => i.saturating_sub(1)..(i + 3).min(n),
        Method1D::Akima => i.saturating_sub(2)..(i + 4).min(n),
    }
}

/// Evaluate `method` over the samples `(xs, ys)` at `x`. `x` is expected to lie
/// within `[xs[0], xs[n-1]]`; outside it the end interval is extended.
pub fn interpolate(method: Method1D, xs: &[f64], ys: &[f64], x: f64) -> f64 {
    debug_assert_eq!(xs.len(), ys.len());
    let n = xs.len();
    if n == 1 {
        return ys[0];
    }
    let i = locate(xs, x);
    match method {
        Method1D::Nearest => {
            if x - xs[i] <= xs[i + 1] - x {
                ys[i]
            } else {
                ys[i + 1]
            }
        }
        Method1D::Linear => linear(xs[i], xs[i + 1], ys[i], ys[i + 1], x),
        _ if n == 2 => linear(xs[0], xs[1], ys[0], ys[1], x),
        Method1D::Cubic => {
            let d0 = fd_slope(xs, ys, i);
            let d1 = fd_slope(xs, ys, i + 1);
            hermite(xs[i], xs[i + 1], ys[i], ys[i + 1], d0, d1, x)
        }
        Method1D::Akima => {
            let d0 = akima_slope(xs, ys, i);
            let d1 = akima_slope(xs, ys, i + 1);
            hermite(xs[i], xs[i + 1], ys[i], ys[i + 1], d0, d1, x)
        }
    }
}

/// Convenience wrapper: evaluate using only the stencil around `x`.
pub fn interpolate_local(method: Method1D, xs: &[f64], ys: &[f64], x: f64) -> f64 {
    let r = stencil(method, xs, x);
    interpolate(method, &xs[r.clone()], &ys[r], x)
}

#[inline]
fn linear(x0: f64, x1: f64, y0: f64, y1: f64, x: f64) -> f64 {
    let s = (x - x0) / (x1 - x0);
    y0 + s * (y1 - y0)
}

#[inline]
fn hermite(x0: f64, x1: f64, y0: f64, y1: f64, d0: f64, d1: f64, x: f64) -> f64 {
    let h = x1 - x0;
    let s = (x - x0) / h;
    let s2 = s * s;
    let s3 = s2 * s;
    let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
    let h10 = s3 - 2.0 * s2 + s;
    let h01 = -2.0 * s3 + 3.0 * s2;
    let h11 = s3 - s2;
    h00 * y0 + h10 * h * d0 + h01 * y1 + h11 * h * d1
}

fn fd_slope(xs: &[f64], ys: &[f64], i: usize) -> f64 {
    let n = xs.len();
    if i == 0 {
        (ys[1] - ys[0]) / (xs[1] - xs[0])
    } else if i == n - 1 {
        (ys[n - 1] - ys[n - 2]) / (xs[n - 1] - xs[n - 2])
    } else {
        (ys[i + 1] - ys[i - 1]) / (xs[i + 1] - xs[i - 1])
    }
}

/// Secant slope `m_j` for `j ∈ [-2, n]`, with Akima's linear extension past
/// both ends. Requires `n >= 3`.
fn secant(xs: &[f64], ys: &[f64], j: isize) -> f64 {
    let n = xs.len() as isize;
    let raw = |k: isize| {
        let k = k as usize;
        (ys[k + 1] - ys[k]) / (xs[k + 1] - xs[k])
    };
    if j < 0 {
        // m_{-1} = 2m_0 - m_1, m_{-2} = 2m_{-1} - m_0
        let m0 = raw(0);
        let m1 = raw(1);
        let mm1 = 2.0 * m0 - m1;
        if j == -1 {
            mm1
        } else {
            2.0 * mm1 - m0
        }
    } else if j > n - 2 {
        let a = raw(n - 2);
        let b = raw(n - 3);
        let e1 = 2.0 * a - b;
        if j == n - 1 {
            e1
        } else {
            2.0 * e1 - a
        }
    } else {
        raw(j)
    }
}

fn akima_slope(xs: &[f64], ys: &[f64], i: usize) -> f64 {
    let i = i as isize;
    let m_2 = secant(xs, ys, i - 2);
    let m_1 = secant(xs, ys, i - 1);
    let m0 = secant(xs, ys, i);
    let m1 = secant(xs, ys, i + 1);
    let w1 = (m1 - m0).abs();
    let w2 = (m_1 - m_2).abs();
    let den = w1 + w2;
    if den <= f64::EPSILON * (m1.abs() + m0.abs() + m_1.abs() + m_2.abs()).max(f64::MIN_POSITIVE) {
        0.5 * (m_1 + m0)
    } else {
        (w1 * m_1 + w2 * m0) / den
    }
}

/// Akima interpolant through a full set of support points. Falls back to
/// piecewise-linear interpolation when fewer than five points are given.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AkimaSpline {
    xs: Vec<f64>,
    ys: Vec<f64>,
    slopes: Option<Vec<f64>>,
}

impl AkimaSpline {
    pub const MIN_POINTS: usize = 5;

    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self, InterpError> {
        if xs.len() != ys.len() {
            return Err(InterpError::LengthMismatch(xs.len(), ys.len()));
        }
        if xs.len() < 2 {
            return Err(InterpError::TooFewSamples { need: 2, got: xs.len() });
        }
        check_abscissae(&xs)?;
        let slopes = (xs.len() >= Self::MIN_POINTS).then(|| (0..xs.len()).map(|i| akima_slope(&xs, &ys, i)).collect());
        Ok(AkimaSpline { xs, ys, slopes })
    }

    pub fn is_linear_fallback(&self) -> bool {
        self.slopes.is_none()
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn ys(&self) -> &[f64] {
        &self.ys
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.xs[0], self.xs[self.xs.len() - 1])
    }

    pub fn eval(&self, x: f64) -> f64 {
        let i = locate(&self.xs, x);
        let (x0, x1, y0, y1) = (self.xs[i], self.xs[i + 1], self.ys[i], self.ys[i + 1]);
        match &self.slopes {
            Some(d) => hermite(x0, x1, y0, y1, d[i], d[i + 1], x),
            None => linear(x0, x1, y0, y1, x),
        }
    }
}

/// Catmull-Rom weights for the samples at offsets −1, 0, 1, 2 and fractional
/// position `s ∈ [0, 1]` between offsets 0 and 1.
#[inline]
pub fn catmull_rom_weights(s: f64) -> [f64; 4] {
    let s2 = s * s;
    let s3 = s2 * s;
    [
        0.5 * (-s3 + 2.0 * s2 - s),
        0.5 * (3.0 * s3 - 5.0 * s2 + 2.0),
        0.5 * (-3.0 * s3 + 4.0 * s2 + s),
        0.5 * (s3 - s2),
    ]
}
