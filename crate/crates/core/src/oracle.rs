//! Continuous time-optimal reference trajectories.
//!
//! Extremals of the minimum-time problem follow the Zermelo heading law, so
//! the only free parameter of a trajectory leaving a given point is its
//! initial heading. [`solve_bvp_shooting`] scans that heading, bisects on the
//! signed miss distance at closest approach to the goal and keeps the
//! earliest arrival.

use crate::cost::VehicleSpec;
use crate::field::{FieldError, FlowField};
use crate::geom::{Rect, Vec2};
use crate::zermelo::{rk4_step, TrajectoryState};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;
use std::io::Write;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("invalid oracle argument: {0}")]
    Argument(String),
    #[error("no trajectory reaches the goal within {t_max} time units (closest miss {best_miss})")]
    Unreachable { t_max: f64, best_miss: f64 },
    #[error(transparent)]
    Field(#[from] FieldError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub states: Vec<TrajectoryState>,
    /// Integration stopped early because the vehicle left the field or the
    /// allowed region.
    pub exited: bool,
}

impl Trajectory {
    pub fn positions(&self) -> Vec<Vec2> {
        self.states.iter().map(|s| s.position()).collect()
    }

    /// CSV with header `t,x,y,theta`.
    pub fn write_csv<W: Write>(&self, w: W) -> csv::Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["t", "x", "y", "theta"])?;
        for s in &self.states {
            out.write_record(&[s.t.to_string(), s.x.to_string(), s.y.to_string(), s.theta.to_string()])?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Integrate position and heading with fixed-step RK4 from `t0` to `t_end`.
/// The last step is shortened to land on `t_end`. Leaving the field's domain
/// or `region` truncates the trajectory and sets `exited`.
#[allow(clippy::too_many_arguments)]
pub fn integrate_zermelo<F: FlowField + ?Sized>(
    field: &F,
    start: Vec2,
    theta0: f64,
    t0: f64,
    t_end: f64,
    dt: f64,
    veh: &VehicleSpec,
    region: Option<Rect>,
) -> Result<Trajectory, OracleError> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(OracleError::Argument("dt must be positive".into()));
    }
    if !(t_end >= t0) {
        return Err(OracleError::Argument("t_end must not precede t0".into()));
    }
    let mut s = TrajectoryState {
        t: t0,
        x: start.x,
        y: start.y,
        theta: crate::geom::wrap_angle(theta0),
    };
    let n = ((t_end - t0) / dt).ceil() as usize;
    let mut states = Vec::with_capacity(n + 1);
    states.push(s);
    for k in 0..n {
        let h = if k + 1 == n { t_end - s.t } else { dt };
        if h <= 0.0 {
            break;
        }
        match rk4_step(field, &s, h, veh.depth, veh.speed) {
            Ok(next) if region.is_none_or(|r| r.contains(next.position())) => {
                s = next;
                states.push(s);
            }
            Ok(_) | Err(FieldError::Domain { .. }) => return Ok(Trajectory { states, exited: true }),
            Err(e) => return Err(e.into()),
        }
    }
    Ok(Trajectory { states, exited: false })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShootingOptions {
    /// Number of initial headings in the multistart scan.
    pub starts: usize,
    /// Goal tolerance ρ.
    pub rho: f64,
    /// RK4 step.
    pub dt: f64,
    /// Integration cap measured from `t0`.
    pub t_max: f64,
    /// Bisection stops when the heading bracket is narrower than this.
    pub theta_tol: f64,
    /// Trajectories leaving this region are cut off.
    pub region: Option<Rect>,
}

impl ShootingOptions {
    /// Defaults for a problem on a grid of spacing `cell` with straight-line
    /// distance `dist`: ρ = cell/10, 64 starts, step 0.01, cap 10·dist/v.
    pub fn new(cell: f64, dist: f64, v_veh: f64) -> Self {
        ShootingOptions {
            starts: 64,
            rho: cell / 10.0,
            dt: 0.01,
            t_max: 10.0 * dist / v_veh,
            theta_tol: 1e-10,
            region: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BvpSolution {
    /// Trajectory from the start up to the arrival time.
    pub trajectory: Trajectory,
    pub theta0: f64,
    pub travel_time: f64,
    /// Distance to the goal at arrival.
    pub miss: f64,
    /// Number of headings that reached the goal.
    pub candidates: usize,
}

/// Closest approach of one shot.
#[derive(Debug, Clone, Copy)]
struct Approach {
    /// Distance, signed positive when the goal lies left of the track.
    signed: f64,
    t: f64,
}

struct Shot<'a, F: ?Sized> {
    field: &'a F,
    start: Vec2,
    goal: Vec2,
    t0: f64,
    veh: &'a VehicleSpec,
    opt: &'a ShootingOptions,
}

impl<F: FlowField + ?Sized + Sync> Shot<'_, F> {
    fn fire(&self, theta0: f64) -> Result<Option<Approach>, OracleError> {
        let tr = integrate_zermelo(
            self.field,
            self.start,
            theta0,
            self.t0,
            self.t0 + self.opt.t_max,
            self.opt.dt,
            self.veh,
            self.opt.region,
        )?;
        if tr.states.len() < 2 {
            return Ok(None);
        }
        let mut best: Option<(f64, usize)> = None;
        for (k, w) in tr.states.windows(2).enumerate() {
            let d = crate::geom::point_segment_distance(self.goal, w[0].position(), w[1].position());
            if best.is_none_or(|(b, _)| d < b) {
                best = Some((d, k));
            }
        }
        let (_, k) = best.expect("at least one segment");
        self.refine(&tr.states[k]).map(Some)
    }

    /// Closest approach within the RK4 step starting at `s`, located by
    /// bisection on the sign of d|p − g|²/dt.
    fn refine(&self, s: &TrajectoryState) -> Result<Approach, OracleError> {
        let at = |tau: f64| -> Result<(Vec2, Vec2), OracleError> {
            let st = if tau > 0.0 {
                rk4_step(self.field, s, tau, self.veh.depth, self.veh.speed)?
            } else {
                *s
            };
            let c = self.field.sample(st.position(), self.veh.depth, st.t)?;
            let vel = c.as_vec() + Vec2::from_angle(st.theta) * self.veh.speed;
            Ok((st.position(), vel))
        };
        let rate = |p: Vec2, v: Vec2| (p - self.goal).dot(v);
        let (mut lo, mut hi) = (0.0, 2.0 * self.opt.dt);
        let (p_lo, v_lo) = at(lo)?;
        let (p_hi, v_hi) = at(hi)?;
        let (p, v, tau) = if rate(p_lo, v_lo) >= 0.0 {
            (p_lo, v_lo, lo)
        } else if rate(p_hi, v_hi) <= 0.0 {
            (p_hi, v_hi, hi)
        } else {
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                let (pm, vm) = at(mid)?;
                if rate(pm, vm) < 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let tau = 0.5 * (lo + hi);
            let (pm, vm) = at(tau)?;
            (pm, vm, tau)
        };
        let d = p.distance(self.goal);
        let side = v.cross(self.goal - p);
        Ok(Approach {
            signed: if side >= 0.0 { d } else { -d },
            t: s.t + tau,
        })
    }
}

/// Shoot from `start` at `t0` for the time-optimal trajectory reaching `goal`.
pub fn solve_bvp_shooting<F: FlowField + ?Sized + Sync>(
    field: &F,
    start: Vec2,
    goal: Vec2,
    t0: f64,
    veh: &VehicleSpec,
    opt: &ShootingOptions,
) -> Result<BvpSolution, OracleError> {
    if opt.starts < 3 || !(opt.rho > 0.0) || !(opt.dt > 0.0) || !(opt.t_max > 0.0) {
        return Err(OracleError::Argument(
            "starts ≥ 3, rho, dt and t_max > 0 required".into(),
        ));
    }
    if start.distance(goal) <= opt.rho {
        return Err(OracleError::Argument("start already within rho of the goal".into()));
    }
    let shot = Shot {
        field,
        start,
        goal,
        t0,
        veh,
        opt,
    };
    let thetas: Vec<f64> = (0..opt.starts)
        .map(|i| -std::f64::consts::PI + TAU * i as f64 / opt.starts as f64)
        .collect();
    let scan: Vec<Option<Approach>> = thetas.par_iter().map(|&th| shot.fire(th)).collect::<Result<_, _>>()?;

    let mut best_miss = f64::INFINITY;
    let mut hits: Vec<(f64, Approach)> = Vec::new();
    for i in 0..opt.starts {
        let j = (i + 1) % opt.starts;
        let (Some(a), Some(b)) = (scan[i], scan[j]) else {
            continue;
        };
        best_miss = best_miss.min(a.signed.abs());
        if a.signed == 0.0 {
            hits.push((thetas[i], a));
            continue;
        }
        if a.signed.signum() == b.signed.signum() || b.signed == 0.0 {
            continue;
        }
        let hi_theta = if j == 0 { thetas[0] + TAU } else { thetas[j] };
        if let Some(hit) = bisect(&shot, thetas[i], hi_theta, a, opt)? {
            hits.push(hit);
        }
    }
    let Some(&(theta0, app)) = hits
        .iter()
        .filter(|(_, a)| a.signed.abs() <= opt.rho)
        .min_by(|x, y| x.1.t.total_cmp(&y.1.t))
    else {
        return Err(OracleError::Unreachable {
            t_max: opt.t_max,
            best_miss,
        });
    };
    let mut trajectory = integrate_zermelo(field, start, theta0, t0, app.t, opt.dt, veh, opt.region)?;
    // the last step may be shorter than dt; it ends at the closest approach
    trajectory.exited = false;
    let end = trajectory.states.last().map(|s| s.position()).unwrap_or(start);
    Ok(BvpSolution {
        theta0: crate::geom::wrap_angle(theta0),
        travel_time: app.t - t0,
        miss: end.distance(goal),
        candidates: hits.len(),
        trajectory,
    })
}

/// Bisection on the signed miss between headings `lo` and `hi`. A sign
/// change whose miss does not shrink below ρ is a jump between different
/// closest-approach branches and is discarded.
fn bisect<F: FlowField + ?Sized + Sync>(
    shot: &Shot<'_, F>,
    mut lo: f64,
    mut hi: f64,
    a_lo: Approach,
    opt: &ShootingOptions,
) -> Result<Option<(f64, Approach)>, OracleError> {
    let s_lo = a_lo.signed.signum();
    let mut best = (lo, a_lo);
    while hi - lo > opt.theta_tol {
        let mid = 0.5 * (lo + hi);
        let Some(m) = shot.fire(mid)? else {
            return Ok(None);
        };
        if m.signed.abs() < best.1.signed.abs() {
            best = (mid, m);
        }
        if m.signed == 0.0 {
            break;
        }
        if m.signed.signum() == s_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((best.1.signed.abs() <= opt.rho).then_some(best))
}
