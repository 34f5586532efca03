//! Meandering eastward jet: a kinematic stand-in for the Gulf Stream.
//!
//! Stream function
//!
//! ```text
//! ψ(x, y, t) = 1 − tanh(η),   η = (y − B(t)·cos kξ) / √(1 + k²B(t)²·sin² kξ),
//! ξ = x − c·t,                B(t) = B0 + ε·cos(ω t + phase)
//! ```
//!
//! with `u = −∂ψ/∂y` and `v = ∂ψ/∂x`. Velocities and their first spatial
//! derivatives are evaluated in closed form.

use super::{CurrentGradient, CurrentSample, FieldError, FlowField};
use crate::geom::Vec2;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, TAU};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JetParams {
    /// Mean meander amplitude.
    #[serde(default = "defaults::b0")]
    pub b0: f64,
    /// Amplitude of the meander oscillation.
    #[serde(default = "defaults::eps")]
    pub eps: f64,
    /// Angular frequency of the meander oscillation.
    #[serde(default = "defaults::omega")]
    pub omega: f64,
    /// Phase of the meander oscillation (not a vehicle heading).
    #[serde(default = "defaults::phase")]
    pub phase: f64,
    /// Wavenumber.
    #[serde(default = "defaults::k")]
    pub k: f64,
    /// Phase speed of the travelling meander.
    #[serde(default = "defaults::c")]
    pub c: f64,
}

mod defaults {
    pub fn b0() -> f64 {
        1.2
    }
    pub fn eps() -> f64 {
        0.3
    }
    pub fn omega() -> f64 {
        0.4
    }
    pub fn phase() -> f64 {
        std::f64::consts::FRAC_PI_2
    }
    pub fn k() -> f64 {
        0.84
    }
    pub fn c() -> f64 {
        0.12
    }
}

impl Default for JetParams {
    fn default() -> Self {
        JetParams {
            b0: 1.2,
            eps: 0.3,
            omega: 0.4,
            phase: FRAC_PI_2,
            k: 0.84,
            c: 0.12,
        }
    }
}

impl JetParams {
    pub fn validate(&self) -> Result<(), FieldError> {
        let all = [self.b0, self.eps, self.omega, self.phase, self.k, self.c];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(FieldError::Argument("jet parameters must be finite".into()));
        }
        if self.k <= 0.0 {
            return Err(FieldError::Argument("jet wavenumber k must be positive".into()));
        }
        if self.eps < 0.0 {
            return Err(FieldError::Argument(
                "jet oscillation amplitude eps must be >= 0".into(),
            ));
        }
        Ok(())
    }

    /// Meander amplitude `B(t)`.
    pub fn amplitude(&self, t: f64) -> f64 {
        self.b0 + self.eps * (self.omega * t + self.phase).cos()
    }

    /// Stream function `ψ(x, y, t)`.
    pub fn stream_function(&self, p: Vec2, t: f64) -> f64 {
        let b = self.amplitude(t);
        let kx = self.k * (p.x - self.c * t);
        let (s, co) = kx.sin_cos();
        let eta = (p.y - b * co) / (1.0 + self.k * self.k * b * b * s * s).sqrt();
        1.0 - eta.tanh()
    }
}

/// The meandering-jet current field. Depth-independent.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Jet {
    pub params: JetParams,
}

/// η and its first and second x/y derivatives (η_yy is identically zero).
struct Eta {
    eta: f64,
    x: f64,
    y: f64,
    xx: f64,
    xy: f64,
}

impl Jet {
    pub fn new(params: JetParams) -> Result<Self, FieldError> {
        params.validate()?;
        Ok(Jet { params })
    }

    fn eta(&self, p: Vec2, t: f64) -> Eta {
        let JetParams { k, c, .. } = self.params;
        let b = self.params.amplitude(t);
        let (s, co) = (k * (p.x - c * t)).sin_cos();

        // a = kB sin(kξ), S = √(1 + a²), N = y − B cos(kξ)
        let a = k * b * s;
        let a_x = k * k * b * co;
        let a_xx = -k * k * k * b * s;
        let big_s = (1.0 + a * a).sqrt();
        let s_x = a * a_x / big_s;
        let s_xx = (a_x * a_x + a * a_xx) / big_s - (a * a_x).powi(2) / big_s.powi(3);
        let n = p.y - b * co;
        let n_x = b * k * s;
        let n_xx = b * k * k * co;

        let inv_s = 1.0 / big_s;
        let inv_s2 = inv_s * inv_s;
        Eta {
            eta: n * inv_s,
            y: inv_s,
            x: n_x * inv_s - n * s_x * inv_s2,
            xy: -s_x * inv_s2,
            xx: n_xx * inv_s - 2.0 * n_x * s_x * inv_s2 - n * s_xx * inv_s2 + 2.0 * n * s_x * s_x * inv_s2 * inv_s,
        }
    }
}

impl FlowField for Jet {
    fn sample(&self, p: Vec2, _z: f64, t: f64) -> Result<CurrentSample, FieldError> {
        let e = self.eta(p, t);
        // ψ = 1 − tanh η  ⇒  ∂ψ = −sech²η · ∂η
        let th = e.eta.tanh();
        let sech2 = 1.0 - th * th;
        Ok(CurrentSample::new(sech2 * e.y, -sech2 * e.x))
    }

    fn gradient(&self, p: Vec2, _z: f64, t: f64) -> Result<CurrentGradient, FieldError> {
        let e = self.eta(p, t);
        let th = e.eta.tanh();
        let q = 1.0 - th * th;
        let dq = -2.0 * th * q;
        // u = q·η_y, v = −q·η_x
        let u_x = dq * e.x * e.y + q * e.xy;
        let u_y = dq * e.y * e.y;
        let v_x = -(dq * e.x * e.x + q * e.xx);
        let v_y = -(dq * e.x * e.y + q * e.xy);
        Ok(CurrentGradient { u_x, u_y, v_x, v_y })
    }

    fn period(&self) -> Option<f64> {
        (self.params.omega != 0.0 && self.params.eps != 0.0).then(|| TAU / self.params.omega.abs())
    }
}
