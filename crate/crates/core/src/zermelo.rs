//! Zermelo's navigation equations: vehicle kinematics in a current field and
//! the heading law of time-optimal steering,
//!
//! ```text
//! dx/dt = u + v·cos θ
//! dy/dt = v_c + v·sin θ
//! dθ/dt = −u_y·cos²θ + (u_x − v_y)·cos θ·sin θ + v_x·sin²θ
//! ```

use crate::field::{CurrentGradient, CurrentSample, FieldError, FlowField};
use crate::geom::{wrap_angle, Vec2};
use serde::{Deserialize, Serialize};

/// Heading rate of a time-optimal trajectory.
#[inline]
pub fn heading_rate(g: &CurrentGradient, theta: f64) -> f64 {
    let (s, c) = theta.sin_cos();
    -g.u_y * c * c + (g.u_x - g.v_y) * c * s + g.v_x * s * s
}

/// Heading `θ` that makes the velocity over ground point along unit vector
/// `dir`, i.e. `current + v·(cos θ, sin θ) ∥ dir` with positive progress.
/// `None` when the current makes that course unreachable.
pub fn heading_for_course(dir: Vec2, current: CurrentSample, v_veh: f64) -> Option<f64> {
    let w = crate::cost::speed_along_path(dir, current, v_veh)?;
    if w <= 0.0 {
        return None;
    }
    let heading = (dir * w - current.as_vec()) * (1.0 / v_veh);
    Some(heading.angle())
}

/// Course over ground for heading `theta`.
#[inline]
pub fn course_over_ground(current: CurrentSample, theta: f64, v_veh: f64) -> f64 {
    (current.as_vec() + Vec2::from_angle(theta) * v_veh).angle()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryState {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    /// Heading in `(−π, π]`.
    pub theta: f64,
}

impl TrajectoryState {
    pub fn position(&self) -> Vec2 {
        Vec2::new(self.x, self.y)
    }
}

/// Time derivative of `(x, y, θ)`; two field evaluations (sample + gradient).
fn rhs<F: FlowField + ?Sized>(
    field: &F,
    p: Vec2,
    theta: f64,
    z: f64,
    t: f64,
    v_veh: f64,
) -> Result<[f64; 3], FieldError> {
    let c = field.sample(p, z, t)?;
    let g = field.gradient(p, z, t)?;
    let (s, co) = theta.sin_cos();
    Ok([c.u + v_veh * co, c.v + v_veh * s, heading_rate(&g, theta)])
}

/// One classical RK4 step. Returns the new state; each step makes four
/// sample and four gradient calls.
pub fn rk4_step<F: FlowField + ?Sized>(
    field: &F,
    s: &TrajectoryState,
    dt: f64,
    z: f64,
    v_veh: f64,
) -> Result<TrajectoryState, FieldError> {
    let p = s.position();
    let k1 = rhs(field, p, s.theta, z, s.t, v_veh)?;
    let at = |k: &[f64; 3], f: f64| (Vec2::new(p.x + f * k[0], p.y + f * k[1]), s.theta + f * k[2]);
    let (p2, th2) = at(&k1, 0.5 * dt);
    let k2 = rhs(field, p2, th2, z, s.t + 0.5 * dt, v_veh)?;
    let (p3, th3) = at(&k2, 0.5 * dt);
    let k3 = rhs(field, p3, th3, z, s.t + 0.5 * dt, v_veh)?;
    let (p4, th4) = at(&k3, dt);
    let k4 = rhs(field, p4, th4, z, s.t + dt, v_veh)?;
    let comb = |i: usize| (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]) * dt / 6.0;
    Ok(TrajectoryState {
        t: s.t + dt,
        x: p.x + comb(0),
        y: p.y + comb(1),
        theta: wrap_angle(s.theta + comb(2)),
    })
}
