//! Optimal course estimate used by the Zermelo successor filter.

use crate::cost::VehicleSpec;
use crate::field::{FieldError, FlowField};
use crate::geom::Vec2;
use crate::zermelo::{course_over_ground, heading_for_course, rk4_step, TrajectoryState};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptDir {
    /// Course over ground at the end of the integration.
    pub course: f64,
    /// The course could not be reproduced by any heading; `course` is the raw
    /// direction of the previous edge.
    pub fallback: bool,
    /// Current-model calls (samples and gradients) spent.
    pub model_calls: u64,
}

/// Integrate the time-optimal heading law from the midpoint of the previous
/// edge `from → to`, starting with the heading that reproduces the edge's
/// course, for `horizon` time units in `steps` RK4 steps. `t_mid` is the time
/// at the midpoint.
pub fn cal_optdir<F: FlowField + ?Sized>(
    field: &F,
    from: Vec2,
    to: Vec2,
    t_mid: f64,
    horizon: f64,
    steps: usize,
    veh: &VehicleSpec,
) -> Result<OptDir, FieldError> {
    let d = to - from;
    let dir = d
        .normalized()
        .ok_or_else(|| FieldError::Argument("previous edge is degenerate".into()))?;
    let start = from.lerp(to, 0.5);
    let z = veh.depth;
    let c0 = field.sample(start, z, t_mid)?;
    let mut calls = 1u64;
    let Some(theta0) = heading_for_course(dir, c0, veh.speed) else {
        return Ok(OptDir {
            course: dir.angle(),
            fallback: true,
            model_calls: calls,
        });
    };
    let mut s = TrajectoryState {
        t: t_mid,
        x: start.x,
        y: start.y,
        theta: theta0,
    };
    let n = steps.max(1);
    let dt = horizon / n as f64;
    for _ in 0..n {
        s = rk4_step(field, &s, dt, z, veh.speed)?;
        calls += 8;
    }
    let c_end = field.sample(s.position(), z, s.t)?;
    calls += 1;
    Ok(OptDir {
        course: course_over_ground(c_end, s.theta, veh.speed),
        fallback: false,
        model_calls: calls,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{Affine, Uniform};

    #[test]
    fn uniform_current_keeps_edge_course() {
        let veh = VehicleSpec::new(0.5);
        let from = Vec2::new(0.0, 0.0);
        let to = Vec2::new(1.2, 0.4);
        let r = cal_optdir(&Uniform::new(0.2, -0.1), from, to, 0.0, 2.0, 8, &veh).unwrap();
        assert!(!r.fallback);
        assert!(crate::geom::angle_between(r.course, (to - from).angle()) < 1e-12);
    }

    #[test]
    fn too_strong_current_falls_back() {
        let veh = VehicleSpec::new(0.5);
        let r = cal_optdir(
            &Uniform::new(0.0, -1.0),
            Vec2::ZERO,
            Vec2::new(1.0, 0.0),
            0.0,
            1.0,
            4,
            &veh,
        )
        .unwrap();
        assert!(r.fallback);
        assert_eq!(r.course, 0.0);
    }

    #[test]
    fn shear_turns_course() {
        // u = -y: heading rate is +1 at θ = 0, course turns left
        let veh = VehicleSpec::new(0.5);
        let r = cal_optdir(
            &Affine::shear(-1.0),
            Vec2::new(-0.5, 0.0),
            Vec2::new(0.5, 0.0),
            0.0,
            0.2,
            8,
            &veh,
        )
        .unwrap();
        assert!(r.course > 0.0);
    }
}
