//! Departure-time optimization.
//!
//! The travel time as a function of departure time is expensive (one route
//! search per value) and not unimodal. The finder samples it on a coarse grid
//! of support points, reconstructs the curve with an Akima spline, brackets
//! the global minimum of the reconstruction, and refines inside the bracket
//! with a scalar minimizer that calls the planner directly.

use crate::field::interp::{AkimaSpline, InterpError};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::io::Write;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DepartureError {
    #[error("invalid departure window or spacing: {0}")]
    Argument(String),
    #[error("fewer than two support points have a finite travel time")]
    NoFeasibleDeparture,
    #[error(transparent)]
    Interp(#[from] InterpError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SupportPoint {
    pub t_dep: f64,
    /// `+∞` when the planner failed.
    pub t_trav: f64,
}

/// Planner outcome for one departure time; failures become `+∞`.
fn eval<P, E>(planner: &P, t: f64) -> f64
where
    P: Fn(f64) -> Result<f64, E>,
{
    match planner(t) {
        Ok(v) if v.is_finite() => v,
        _ => f64::INFINITY,
    }
}

/// Evaluate the planner at `⌈(b − a)/dt⌉ + 1` equally spaced departures
/// covering `window = (a, b)`. Evaluations run on the current rayon pool.
pub fn scan_departures<P, E>(planner: &P, window: (f64, f64), dt: f64) -> Result<Vec<SupportPoint>, DepartureError>
where
    P: Fn(f64) -> Result<f64, E> + Sync,
{
    let (a, b) = window;
    if !(a.is_finite() && b.is_finite() && b > a) {
        return Err(DepartureError::Argument(format!("window ({a}, {b}) is empty")));
    }
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(DepartureError::Argument(format!("dt = {dt} must be positive")));
    }
    let intervals = (((b - a) / dt) - 1e-9).ceil().max(1.0) as usize;
    let step = (b - a) / intervals as f64;
    let pts = (0..=intervals)
        .into_par_iter()
        .map(|i| {
            let t_dep = if i == intervals { b } else { a + step * i as f64 };
            SupportPoint {
                t_dep,
                t_trav: eval(planner, t_dep),
            }
        })
        .collect();
    Ok(pts)
}

/// Akima curve through the support points with finite travel time.
pub fn akima_fit(points: &[SupportPoint]) -> Result<AkimaSpline, DepartureError> {
    let (xs, ys): (Vec<f64>, Vec<f64>) = points
        .iter()
        .filter(|p| p.t_trav.is_finite())
        .map(|p| (p.t_dep, p.t_trav))
        .unzip();
    if xs.len() < 2 {
        return Err(DepartureError::NoFeasibleDeparture);
    }
    Ok(AkimaSpline::new(xs, ys)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bracket {
    pub lo: f64,
    /// Minimizer of the fitted curve.
    pub mid: f64,
    pub hi: f64,
    /// The fitted minimum sits on the window boundary.
    pub at_boundary: bool,
}

/// Samples per support interval when locating the fitted minimum.
const BRACKET_SAMPLES: usize = 64;

/// Bracket the global minimum of `curve`: its dense argmin and the
/// neighbouring support abscissae. Ties go to the earlier departure.
pub fn bracket_global_min(curve: &AkimaSpline) -> Result<Bracket, DepartureError> {
    let xs = curve.xs();
    if xs.len() < 3 {
        return Err(DepartureError::Argument(
            "bracketing needs at least three support points".into(),
        ));
    }
    let mut best = (xs[0], curve.eval(xs[0]));
    for w in xs.windows(2) {
        for k in 1..=BRACKET_SAMPLES {
            let t = w[0] + (w[1] - w[0]) * k as f64 / BRACKET_SAMPLES as f64;
            let v = curve.eval(t);
            if v < best.1 {
                best = (t, v);
            }
        }
    }
    let t = best.0;
    let n = xs.len();
    let i_hi = xs.partition_point(|&x| x <= t).min(n - 1);
    let i_lo = xs.partition_point(|&x| x < t).saturating_sub(1);
    let at_boundary = t <= xs[0] || t >= xs[n - 1];
    let (lo, hi) = if t <= xs[0] {
        (xs[0], xs[1])
    } else if t >= xs[n - 1] {
        (xs[n - 2], xs[n - 1])
    } else {
        (xs[i_lo], xs[i_hi])
    };
    Ok(Bracket {
        lo,
        mid: t,
        hi,
        at_boundary,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Refiner {
    #[default]
    Brent,
    Golden,
    Fibonacci,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Refinement {
    pub t_opt: f64,
    pub t_trav: f64,
    /// Every planner evaluation in call order.
    pub evaluations: Vec<SupportPoint>,
    /// The best evaluation is not better than a bracket end: the function is
    /// not unimodal inside the bracket.
    pub non_unimodal: bool,
}

const MAX_REFINE_ITERS: usize = 200;
const GOLDEN: f64 = 0.381_966_011_250_105_2;

struct Recorder<'a, P> {
    planner: &'a P,
    log: Vec<SupportPoint>,
}

impl<P, E> Recorder<'_, P>
where
    P: Fn(f64) -> Result<f64, E>,
{
    fn call(&mut self, t: f64) -> f64 {
        let v = eval(self.planner, t);
        self.log.push(SupportPoint { t_dep: t, t_trav: v });
        v
    }

    fn finish(self, ends: (f64, f64)) -> Refinement {
        let best = self
            .log
            .iter()
            .copied()
            .min_by(|a, b| a.t_trav.total_cmp(&b.t_trav).then(a.t_dep.total_cmp(&b.t_dep)))
            .expect("at least one evaluation");
        Refinement {
            t_opt: best.t_dep,
            t_trav: best.t_trav,
            non_unimodal: best.t_trav > ends.0.min(ends.1),
            evaluations: self.log,
        }
    }
}

/// Minimize the planner inside `bracket` until the remaining interval is at
/// most `tol`. `ends` are the known values at `bracket.lo` and `bracket.hi`,
/// used only for the unimodality diagnostic.
pub fn refine<P, E>(
    planner: &P,
    bracket: &Bracket,
    ends: (f64, f64),
    tol: f64,
    method: Refiner,
) -> Result<Refinement, DepartureError>
where
    P: Fn(f64) -> Result<f64, E>,
{
    if !(bracket.lo < bracket.hi) || !(tol > 0.0) {
        return Err(DepartureError::Argument(
            "bracket must be non-empty and tol positive".into(),
        ));
    }
    let mut rec = Recorder {
        planner,
        log: Vec::new(),
    };
    match method {
        Refiner::Brent => brent(&mut rec, bracket, tol),
        Refiner::Golden => golden(&mut rec, bracket.lo, bracket.hi, tol),
        Refiner::Fibonacci => fibonacci(&mut rec, bracket.lo, bracket.hi, tol),
    }
    Ok(rec.finish(ends))
}

/// Brent's minimizer (parabolic interpolation with golden-section fallback).
pub fn refine_brent<P, E>(
    planner: &P,
    bracket: &Bracket,
    ends: (f64, f64),
    tol: f64,
) -> Result<Refinement, DepartureError>
where
    P: Fn(f64) -> Result<f64, E>,
{
    refine(planner, bracket, ends, tol, Refiner::Brent)
}

fn brent<P, E>(rec: &mut Recorder<'_, P>, br: &Bracket, tol: f64)
where
    P: Fn(f64) -> Result<f64, E>,
{
    let (mut a, mut b) = (br.lo, br.hi);
    let mut x = br.mid.clamp(a, b);
    if x == a || x == b {
        x = a + GOLDEN * (b - a);
    }
    let (mut w, mut v) = (x, x);
    let mut fx = rec.call(x);
    let (mut fw, mut fv) = (fx, fx);
    let (mut d, mut e) = (0.0f64, 0.0f64);
    // stop once the interval is at most `tol`
    let tol1 = 0.25 * tol;
    let tol2 = 2.0 * tol1;
    for _ in 0..MAX_REFINE_ITERS {
        let xm = 0.5 * (a + b);
        if (x - xm).abs() <= tol2 - 0.5 * (b - a) {
            break;
        }
        let mut golden_step = true;
        if e.abs() > tol1 && fx.is_finite() && fw.is_finite() && fv.is_finite() {
            let r = (x - w) * (fx - fv);
            let mut q = (x - v) * (fx - fw);
            let mut p = (x - v) * q - (x - w) * r;
            q = 2.0 * (q - r);
            if q > 0.0 {
                p = -p;
            }
            q = q.abs();
            let e_old = e;
            if p.abs() < (0.5 * q * e_old).abs() && p > q * (a - x) && p < q * (b - x) {
                e = d;
                d = p / q;
                let u = x + d;
                if u - a < tol2 || b - u < tol2 {
                    d = if xm >= x { tol1 } else { -tol1 };
                }
                golden_step = false;
            }
        }
        if golden_step {
            e = if x >= xm { a - x } else { b - x };
            d = GOLDEN * e;
        }
        let u = if d.abs() >= tol1 { x + d } else { x + tol1.copysign(d) };
        let fu = rec.call(u);
        if fu <= fx {
            if u >= x {
                a = x;
            } else {
                b = x;
            }
            (v, fv) = (w, fw);
            (w, fw) = (x, fx);
            (x, fx) = (u, fu);
        } else {
            if u < x {
                a = u;
            } else {
                b = u;
            }
            if fu <= fw || w == x {
                (v, fv) = (w, fw);
                (w, fw) = (u, fu);
            } else if fu <= fv || v == x || v == w {
                (v, fv) = (u, fu);
            }
        }
    }
}

fn golden<P, E>(rec: &mut Recorder<'_, P>, mut a: f64, mut b: f64, tol: f64)
where
    P: Fn(f64) -> Result<f64, E>,
{
    let mut c = a + GOLDEN * (b - a);
    let mut d = b - GOLDEN * (b - a);
    let mut fc = rec.call(c);
    let mut fd = rec.call(d);
    for _ in 0..MAX_REFINE_ITERS {
        if b - a <= tol {
            break;
        }
        if fc <= fd {
            b = d;
            (d, fd) = (c, fc);
            c = a + GOLDEN * (b - a);
            fc = rec.call(c);
        } else {
            a = c;
            (c, fc) = (d, fd);
            d = b - GOLDEN * (b - a);
            fd = rec.call(d);
        }
    }
}

fn fibonacci<P, E>(rec: &mut Recorder<'_, P>, mut a: f64, mut b: f64, tol: f64)
where
    P: Fn(f64) -> Result<f64, E>,
{
    // F[n] ≥ (b − a)/tol gives a final interval of at most tol
    let mut fib = vec![1.0f64, 1.0];
    while fib[fib.len() - 1] < (b - a) / tol && fib.len() < MAX_REFINE_ITERS {
        let k = fib.len();
        fib.push(fib[k - 1] + fib[k - 2]);
    }
    let n = fib.len() - 1;
    if n < 2 {
        rec.call(0.5 * (a + b));
        return;
    }
    let mut c = a + fib[n - 2] / fib[n] * (b - a);
    let mut d = a + fib[n - 1] / fib[n] * (b - a);
    let mut fc = rec.call(c);
    let mut fd = rec.call(d);
    for k in (2..n).rev() {
        if fc <= fd {
            b = d;
            (d, fd) = (c, fc);
            c = a + fib[k - 2] / fib[k] * (b - a);
            if k > 2 {
                fc = rec.call(c);
            }
        } else {
            a = c;
            (c, fc) = (d, fd);
            d = a + fib[k - 1] / fib[k] * (b - a);
            if k > 2 {
                fd = rec.call(d);
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DepartureOptions {
    pub window: (f64, f64),
    /// Support spacing Δt_dep.
    pub dt: f64,
    /// Refinement stopping interval.
    pub tol: f64,
    pub refiner: Refiner,
    /// Latest time the forecast covers; departures whose arrival falls past
    /// it are discarded.
    pub horizon: Option<f64>,
}

impl DepartureOptions {
    /// Δt_dep = period/8 when the field has a period, window/16 otherwise;
    /// tol = Δt_dep/100.
    pub fn new(window: (f64, f64), period: Option<f64>) -> Self {
        let dt = match period {
            Some(p) if p > 0.0 && p.is_finite() => p / 8.0,
            _ => (window.1 - window.0) / 16.0,
        };
        DepartureOptions {
            window,
            dt,
            tol: dt / 100.0,
            refiner: Refiner::Brent,
            horizon: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DepartureResult {
    pub support: Vec<SupportPoint>,
    pub bracket: Bracket,
    pub refinement: Refinement,
    pub t_opt: f64,
    pub t_trav: f64,
    /// Planner calls: support scan plus refinement.
    pub planner_calls: usize,
    /// Departures discarded because their arrival passes the horizon.
    pub past_horizon: usize,
    pub refiner: Refiner,
}

impl DepartureResult {
    /// CSV with header `t_dep,t_trav,source`; support rows first, then the
    /// refinement evaluations in call order.
    pub fn write_scan_csv<W: Write>(&self, w: W) -> csv::Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["t_dep", "t_trav", "source"])?;
        let label = match self.refiner {
            Refiner::Brent => "brent",
            Refiner::Golden => "golden",
            Refiner::Fibonacci => "fibonacci",
        };
        for (pts, src) in [(&self.support, "support"), (&self.refinement.evaluations, label)] {
            for p in pts {
                out.write_record(&[p.t_dep.to_string(), p.t_trav.to_string(), src.to_string()])?;
            }
        }
        out.flush()?;
        Ok(())
    }
}

/// Support scan, Akima reconstruction, bracketing and refinement.
/// `scan_planner` produces the support points (it may run on a coarser
/// graph); `refine_planner` is used inside the bracket.
pub fn find_optimal_departure<S, R, E1, E2>(
    scan_planner: &S,
    refine_planner: &R,
    opt: &DepartureOptions,
) -> Result<DepartureResult, DepartureError>
where
    S: Fn(f64) -> Result<f64, E1> + Sync,
    R: Fn(f64) -> Result<f64, E2>,
{
    let horizon = opt.horizon;
    let beyond = |t: f64, v: f64| horizon.is_some_and(|h| t + v > h);
    let mut support = scan_departures(scan_planner, opt.window, opt.dt)?;
    let mut past_horizon = 0;
    for p in &mut support {
        if p.t_trav.is_finite() && beyond(p.t_dep, p.t_trav) {
            p.t_trav = f64::INFINITY;
            past_horizon += 1;
        }
    }
    let curve = akima_fit(&support)?;
    let bracket = bracket_global_min(&curve)?;
    let value_at = |t: f64| {
        support
            .iter()
            .find(|p| p.t_dep == t)
            .map_or(f64::INFINITY, |p| p.t_trav)
    };
    let ends = (value_at(bracket.lo), value_at(bracket.hi));
    let limited = |t: f64| -> Result<f64, E2> {
        let v = refine_planner(t)?;
        Ok(if beyond(t, v) { f64::INFINITY } else { v })
    };
    let mut refinement = refine(&limited, &bracket, ends, opt.tol, opt.refiner)?;
    past_horizon += refinement.evaluations.iter().filter(|p| p.t_trav.is_infinite()).count();

    // the answer is never worse than the best support point
    let best_support = support
        .iter()
        .copied()
        .min_by(|a, b| a.t_trav.total_cmp(&b.t_trav).then(a.t_dep.total_cmp(&b.t_dep)))
        .expect("scan is non-empty");
    let (t_opt, t_trav) = if best_support.t_trav < refinement.t_trav {
        refinement.non_unimodal = true;
        (best_support.t_dep, best_support.t_trav)
    } else {
        (refinement.t_opt, refinement.t_trav)
    };
    Ok(DepartureResult {
        planner_calls: support.len() + refinement.evaluations.len(),
        support,
        bracket,
        t_opt,
        t_trav,
        past_horizon,
        refinement,
        refiner: opt.refiner,
    })
}
