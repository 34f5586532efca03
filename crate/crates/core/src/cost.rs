//! Time-dependent edge weights.
//!
//! The effective speed along a path direction is the positive root of the
//! line/circle intersection between the path line and the circle of radius
//! `v_veh_bf` centred on the current vector. An edge is traversed in
//! sub-segments whose length is chosen by step doubling; each sub-segment
//! uses the mean of the currents at its two ends.

use crate::field::{CurrentSample, FieldError, FlowField};
use crate::geom::Vec2;
use serde::{Deserialize, Serialize};

/// Simplified glider dive profile between two depths.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiveProfile {
    /// Shallow turning depth.
    pub climb_to: f64,
    /// Deep turning depth.
    pub dive_up: f64,
    /// Through-water distance per unit horizontal distance (>= 1).
    #[serde(default = "default_glide")]
    pub glide_factor: f64,
    /// Depth levels used for the depth average.
    #[serde(default = "default_levels")]
    pub levels: usize,
}

fn default_glide() -> f64 {
    1.0
}

fn default_levels() -> usize {
    5
}

impl DiveProfile {
    pub fn validate(&self) -> Result<(), FieldError> {
        if !(self.climb_to >= 0.0 && self.dive_up > self.climb_to) {
            return Err(FieldError::Argument(format!(
                "dive profile needs dive_up > climb_to >= 0 (got {} / {})",
                self.dive_up, self.climb_to
            )));
        }
        if !(self.glide_factor >= 1.0) || !self.glide_factor.is_finite() {
            return Err(FieldError::Argument("glide factor must be >= 1".into()));
        }
        if self.levels == 0 {
            return Err(FieldError::Argument(
                "dive profile needs at least one depth level".into(),
            ));
        }
        Ok(())
    }

    /// Uniformly spaced sampling depths from `climb_to` to `dive_up`.
    pub fn depths(&self) -> Vec<f64> {
        if self.levels == 1 {
            return vec![0.5 * (self.climb_to + self.dive_up)];
        }
        let step = (self.dive_up - self.climb_to) / (self.levels - 1) as f64;
        (0..self.levels).map(|i| self.climb_to + i as f64 * step).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VehicleSpec {
    /// Speed through the water.
    pub speed: f64,
    /// Operating depth when no dive profile is given.
    #[serde(default)]
    pub depth: f64,
    #[serde(default)]
    pub dive: Option<DiveProfile>,
}

impl VehicleSpec {
    pub fn new(speed: f64) -> Self {
        VehicleSpec {
            speed,
            depth: 0.0,
            dive: None,
        }
    }

    pub fn validate(&self) -> Result<(), FieldError> {
        if !(self.speed > 0.0) || !self.speed.is_finite() {
            return Err(FieldError::Argument(format!(
                "vehicle speed must be positive, got {}",
                self.speed
            )));
        }
        if let Some(d) = &self.dive {
            d.validate()?;
        }
        Ok(())
    }
}

/// Step-size control for the sub-segment integration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StepControl {
    /// Initial sub-segment length as a fraction of the edge.
    pub h0: f64,
    /// Relative tolerance on sub-segment travel time.
    pub tol: f64,
    pub h_min: f64,
    pub h_max: f64,
    /// Cost assigned to infeasible edges.
    pub penalty: f64,
}

impl Default for StepControl {
    fn default() -> Self {
        StepControl {
            h0: 0.5,
            tol: 1e-4,
            h_min: 1.0 / 1024.0,
            h_max: 1.0,
            penalty: 1e12,
        }
    }
}

impl StepControl {
    pub fn validate(&self) -> Result<(), FieldError> {
        let ok = self.h_min > 0.0
            && self.h_min <= self.h0
            && self.h0 <= self.h_max
            && self.h_max <= 1.0
            && self.tol > 0.0
            && self.penalty.is_finite()
            && self.penalty > 0.0;
        if ok {
            Ok(())
        } else {
            Err(FieldError::Argument(format!(
                "step control needs 0 < h_min <= h0 <= h_max <= 1, tol > 0 and a finite positive penalty: {self:?}"
            )))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EdgeCost {
    pub travel_time: f64,
    pub feasible: bool,
    /// Current-model calls spent on this edge.
    pub cmc: u64,
}

/// Effective speed along unit direction `dir` for a vehicle with speed
/// `v_veh` through water in `current`. `None` when the discriminant is not
/// strictly positive (the path cannot be held). The result may be negative
/// (the vehicle stays on the line but drifts backwards).
#[inline]
pub fn speed_along_path(dir: Vec2, current: CurrentSample, v_veh: f64) -> Option<f64> {
    let c = current.as_vec();
    let along = dir.dot(c);
    let disc = along * along + v_veh * v_veh - c.dot(c);
    (disc > 0.0).then(|| along + disc.sqrt())
}

/// Travel time for a segment of length `len` at mean current `c`, or `None`
/// when infeasible or drifting backwards.
#[inline]
fn segment_time(len: f64, dir: Vec2, c: CurrentSample, v_veh: f64) -> Option<f64> {
    match speed_along_path(dir, c, v_veh) {
        Some(w) if w > 0.0 => Some(len / w),
        _ => None,
    }
}

struct Step {
    dt: f64,
    end: CurrentSample,
}

/// Shared accumulation for the surface and dive-profile cost functions.
/// `current` returns the current at a position and time and counts its own
/// model calls.
fn integrate<S>(
    mut current: S,
    a: Vec2,
    b: Vec2,
    t_start: f64,
    v_veh: f64,
    ctl: &StepControl,
) -> Result<Option<f64>, FieldError>
where
    S: FnMut(Vec2, f64) -> Result<CurrentSample, FieldError>,
{
    let d = b - a;
    let len = d.norm();
    let dir = d * (1.0 / len);
    let mut c = current(a, t_start)?;

    // One sub-segment [s, s + h] entered at time t with current c0. The end
    // current is sampled at the arrival time predicted from c0.
    let mut step = |s: f64, h: f64, t: f64, c0: CurrentSample| -> Result<Option<Step>, FieldError> {
        let seg = h * len;
        let t_pred = t + segment_time(seg, dir, c0, v_veh).unwrap_or(seg / v_veh);
        let end_s = s + h;
        let p = if end_s >= 1.0 { b } else { a.lerp(b, end_s) };
        let end = current(p, t_pred)?;
        Ok(segment_time(seg, dir, c0.mean(end), v_veh).map(|dt| Step { dt, end }))
    };

    let mut s = 0.0;
    let mut t = t_start;
    let mut h = ctl.h0;
    let mut cached_full: Option<Option<Step>> = None;

    while s < 1.0 {
        let last = h >= 1.0 - s;
        if last {
            h = 1.0 - s;
        }
        let full = match cached_full.take() {
            Some(f) => f,
            None => step(s, h, t, c)?,
        };
        let half = 0.5 * h;
        let first = step(s, half, t, c)?;
        let second = match &first {
            Some(f) => step(s + half, half, t + f.dt, f.end)?,
            None => None,
        };
        let can_refine = half >= ctl.h_min;

        let (Some(first), Some(second)) = (first, second) else {
            if can_refine {
                h = half;
                continue;
            }
            return Ok(None);
        };
        let fine = first.dt + second.dt;
        let err = match &full {
            Some(f) => (f.dt - fine).abs() / fine,
            None => f64::INFINITY,
        };
        if err > ctl.tol && can_refine {
            cached_full = Some(Some(first));
            h = half;
            continue;
        }
        t += fine;
        s = if last { 1.0 } else { s + h };
        c = second.end;
        if err * 8.0 < ctl.tol {
            h = (2.0 * h).min(ctl.h_max);
        }
    }
    Ok(Some(t - t_start))
}

fn finish(result: Option<f64>, cmc: u64, ctl: &StepControl) -> EdgeCost {
    match result {
        Some(tt) => EdgeCost {
            travel_time: tt,
            feasible: true,
            cmc,
        },
        None => EdgeCost {
            travel_time: ctl.penalty,
            feasible: false,
            cmc,
        },
    }
}

fn check_edge(a: Vec2, b: Vec2) -> Result<(), FieldError> {
    if a == b || !a.is_finite() || !b.is_finite() {
        return Err(FieldError::Argument(
            "edge endpoints must be distinct and finite".into(),
        ));
    }
    Ok(())
}

/// Travel time from `a` to `b` departing at `t_start`, at the vehicle's
/// operating depth.
pub fn edge_travel_time<F: FlowField + ?Sized>(
    field: &F,
    a: Vec2,
    b: Vec2,
    t_start: f64,
    veh: &VehicleSpec,
    ctl: &StepControl,
) -> Result<EdgeCost, FieldError> {
    check_edge(a, b)?;
    let mut cmc = 0u64;
    let r = integrate(
        |p, t| {
            cmc += 1;
            field.sample(p, veh.depth, t)
        },
        a,
        b,
        t_start,
        veh.speed,
        ctl,
    )?;
    Ok(finish(r, cmc, ctl))
}

/// Travel time along `a → b` for a gliding vehicle: the current is averaged
/// over the dive band and the horizontal speed is the through-water speed
/// divided by the glide factor.
pub fn dive_profile_travel_time<F: FlowField + ?Sized>(
    field: &F,
    a: Vec2,
    b: Vec2,
    t_start: f64,
    veh: &VehicleSpec,
    ctl: &StepControl,
) -> Result<EdgeCost, FieldError> {
    check_edge(a, b)?;
    let dive = veh
        .dive
        .as_ref()
        .ok_or_else(|| FieldError::Argument("vehicle has no dive profile".into()))?;
    let depths = dive.depths();
    let inv = 1.0 / depths.len() as f64;
    let mut cmc = 0u64;
    let r = integrate(
        |p, t| {
            let (mut u, mut v) = (0.0, 0.0);
            for &z in &depths {
                cmc += 1;
                let c = field.sample(p, z, t)?;
                u += c.u;
                v += c.v;
            }
            Ok(CurrentSample::new(u * inv, v * inv))
        },
        a,
        b,
        t_start,
        veh.speed / dive.glide_factor,
        ctl,
    )?;
    Ok(finish(r, cmc, ctl))
}

/// Edge weight used by the planners: dive-profile cost when the vehicle has a
/// dive profile, surface cost otherwise.
pub fn edge_cost<F: FlowField + ?Sized>(
    field: &F,
    a: Vec2,
    b: Vec2,
    t_start: f64,
    veh: &VehicleSpec,
    ctl: &StepControl,
) -> Result<EdgeCost, FieldError> {
    if veh.dive.is_some() {
        dive_profile_travel_time(field, a, b, t_start, veh, ctl)
    } else {
        edge_travel_time(field, a, b, t_start, veh, ctl)
    }
}
