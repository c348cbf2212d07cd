//! Sweeps of `a ↦ F_κ(a)` and location of its fixed points.

use rayon::prelude::*;
use serde::Serialize;

use crate::ergodic::{eval_f, solve_ergodic};
use crate::error::{MfgError, Result};
use crate::grid::Grid1D;
use crate::linearized::solve_linearized;

/// Width of the excluded neighbourhood of 1 in contraction checks.
pub const DELTA: f64 = 0.05;
/// Probe used for the steep-region slope `F'(1 - τ₀/κ)`.
pub const TAU0: f64 = 0.5;
/// Probes reported alongside `TAU0`.
pub const SLOPE_PROBES: [f64; 3] = [0.1, 0.5, 1.0];
/// Bisection target for `|F(a) - a|`.
pub const FIXED_POINT_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FMapTable {
    pub kappa: f64,
    pub a_samples: Vec<f64>,
    pub f_values: Vec<f64>,
    pub fprime_values: Vec<f64>,
}

impl FMapTable {
    pub fn len(&self) -> usize {
        self.a_samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a_samples.is_empty()
    }

    /// Slope at the sample closest to `a`.
    pub fn fprime_near(&self, a: f64) -> f64 {
        let i = self
            .a_samples
            .iter()
            .enumerate()
            .min_by(|x, y| (x.1 - a).abs().total_cmp(&(y.1 - a).abs()))
            .map(|(i, _)| i)
            .expect("non-empty table");
        self.fprime_values[i]
    }
}

/// `(F, F')` at one value of `a`.
pub fn eval_map(a: f64, kappa: f64, grid: Grid1D) -> Result<(f64, f64)> {
    let sol = solve_ergodic(a, kappa, grid).map_err(|e| MfgError::SweepFailure {
        a,
        source: Box::new(e),
    })?;
    let lin = solve_linearized(&sol);
    Ok((eval_f(&sol), lin.fprime_quadratic))
}

/// Samples `F` and `F'` on a uniform grid of `[0, 1]` with `n_samples` points,
/// plus the probes `1 - τ/κ`, and mirrors them to `[1, 2]` through
/// `F(2 - a) = 2 - F(a)`, `F'(2 - a) = F'(a)`.
pub fn sweep_fmap(kappa: f64, n_samples: usize, grid: Grid1D) -> Result<FMapTable> {
    if n_samples < 11 {
        return Err(MfgError::Precondition(format!(
            "need at least 11 samples, got {n_samples}"
        )));
    }
    if !(kappa > 0.0) {
        return Err(MfgError::Precondition(format!("kappa must be positive, got {kappa}")));
    }
    let mut left: Vec<f64> = (0..n_samples).map(|i| i as f64 / (n_samples - 1) as f64).collect();
    for tau in SLOPE_PROBES {
        let a = 1.0 - tau / kappa;
        if a > 0.0 {
            left.push(a);
        }
    }
    left.sort_by(f64::total_cmp);
    left.dedup_by(|x, y| (*x - *y).abs() < 1e-14);

    let values: Vec<(f64, f64)> = left
        .par_iter()
        .map(|&a| eval_map(a, kappa, grid))
        .collect::<Result<_>>()?;

    let mut a_samples = left.clone();
    let mut f_values: Vec<f64> = values.iter().map(|v| v.0).collect();
    let mut fprime_values: Vec<f64> = values.iter().map(|v| v.1).collect();
    for i in (0..left.len()).rev() {
        if left[i] < 1.0 {
            a_samples.push(2.0 - left[i]);
            f_values.push(2.0 - values[i].0);
            fprime_values.push(values[i].1);
        }
    }
    Ok(FMapTable { kappa, a_samples, f_values, fprime_values })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FixedPointKind {
    Incoherent,
    SelfOrganizing,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FixedPoint {
    pub a: f64,
    pub kind: FixedPointKind,
    /// `F(a) - a` from a fresh solve.
    pub residual: f64,
    /// Sample bracket the root was refined from; `None` for `a = 1` and mirrors.
    pub bracket: Option<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FixedPointReport {
    pub kappa: f64,
    /// Sorted by `a`.
    pub fixed_points: Vec<FixedPoint>,
    /// Sign changes of `F(a) - a` among samples in `[0, 1)`.
    pub sign_changes: usize,
    /// Sign changes expected from the slope at 1: one if `F'(1) > 1`, else none.
    pub expected_sign_changes: usize,
    pub anomaly: bool,
    pub notes: Vec<String>,
    /// Largest sampled `F'` on `[0, 1 - DELTA]`.
    pub contraction_bound: f64,
    /// `F'(1 - TAU0/κ)`.
    pub near_one_slope: f64,
    /// `(τ, F'(1 - τ/κ))` for each of `SLOPE_PROBES`.
    pub slope_probes: Vec<(f64, f64)>,
    pub threshold_estimate: Option<f64>,
}

impl FixedPointReport {
    pub fn count(&self) -> usize {
        self.fixed_points.len()
    }

    pub fn self_organizing(&self) -> Option<f64> {
        self.fixed_points
            .iter()
            .find(|p| p.kind == FixedPointKind::SelfOrganizing && p.a < 1.0)
            .map(|p| p.a)
    }

    /// True for exactly `{ā, 1, 2 - ā}` with no anomaly.
    pub fn has_three_point_structure(&self) -> bool {
        !self.anomaly
            && self.count() == 3
            && self.fixed_points.iter().filter(|p| p.kind == FixedPointKind::Incoherent).count() == 1
    }
}

fn g(a: f64, kappa: f64, grid: Grid1D) -> Result<f64> {
    let sol = solve_ergodic(a, kappa, grid).map_err(|e| MfgError::SweepFailure {
        a,
        source: Box::new(e),
    })?;
    Ok(eval_f(&sol) - a)
}

/// Bisection on `F(a) - a` with fresh solves. Returns `(a*, g(a*))`.
pub fn refine_root(lo: f64, hi: f64, kappa: f64, grid: Grid1D) -> Result<(f64, f64)> {
    let (mut lo, mut hi) = (lo, hi);
    let mut g_lo = g(lo, kappa, grid)?;
    let mut best = (lo, g_lo);
    let g_hi = g(hi, kappa, grid)?;
    if g_hi.abs() < best.1.abs() {
        best = (hi, g_hi);
    }
    for _ in 0..200 {
        if best.1.abs() <= FIXED_POINT_TOL && hi - lo < 1e-12 {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let g_mid = g(mid, kappa, grid)?;
        if g_mid.abs() < best.1.abs() {
            best = (mid, g_mid);
        }
        if g_mid == 0.0 {
            break;
        }
        if (g_mid > 0.0) == (g_lo > 0.0) {
            lo = mid;
            g_lo = g_mid;
        } else {
            hi = mid;
        }
    }
    Ok(best)
}

/// Brackets sign changes of `F(a) - a` on the table, refines them, verifies
/// `a = 1` and adds mirror images.
pub fn find_fixed_points(table: &FMapTable, grid: Grid1D) -> Result<FixedPointReport> {
    let kappa = table.kappa;
    let mut notes = Vec::new();

    let below: Vec<(f64, f64)> = table
        .a_samples
        .iter()
        .zip(&table.f_values)
        .filter(|(a, _)| **a < 1.0)
        .map(|(a, f)| (*a, f - a))
        .collect();
    let brackets: Vec<(f64, f64)> = below
        .windows(2)
        .filter(|w| (w[0].1 > 0.0) != (w[1].1 > 0.0))
        .map(|w| (w[0].0, w[1].0))
        .collect();
    let slope_at_one = table.fprime_near(1.0);
    let expected = usize::from(slope_at_one > 1.0);
    let mut anomaly = brackets.len() != expected;
    if anomaly {
        notes.push(format!(
            "{} sign changes of F(a) - a on [0, 1), expected {} from F'(1) = {}",
            brackets.len(),
            expected,
            slope_at_one
        ));
    }

    let refined: Vec<(f64, f64)> = brackets
        .par_iter()
        .map(|&(lo, hi)| refine_root(lo, hi, kappa, grid))
        .collect::<Result<_>>()?;

    let mut points = Vec::new();
    let g_one = g(1.0, kappa, grid)?;
    if g_one.abs() > FIXED_POINT_TOL {
        anomaly = true;
        notes.push(format!("F(1) - 1 = {g_one:e}"));
    }
    points.push(FixedPoint { a: 1.0, kind: FixedPointKind::Incoherent, residual: g_one, bracket: None });
    for (&(a, res), &br) in refined.iter().zip(&brackets) {
        if res.abs() > FIXED_POINT_TOL {
            anomaly = true;
            notes.push(format!("bisection stalled at a = {a} with residual {res:e}"));
        }
        points.push(FixedPoint {
            a,
            kind: FixedPointKind::SelfOrganizing,
            residual: res,
            bracket: Some(br),
        });
        let mirror = 2.0 - a;
        let res_m = g(mirror, kappa, grid)?;
        if res_m.abs() > FIXED_POINT_TOL {
            anomaly = true;
            notes.push(format!("mirror point {mirror} has residual {res_m:e}"));
        }
        points.push(FixedPoint {
            a: mirror,
            kind: FixedPointKind::SelfOrganizing,
            residual: res_m,
            bracket: None,
        });
    }
    points.sort_by(|x, y| x.a.total_cmp(&y.a));

    let contraction_bound = table
        .a_samples
        .iter()
        .zip(&table.fprime_values)
        .filter(|(a, _)| **a <= 1.0 - DELTA + 1e-12)
        .map(|(_, fp)| *fp)
        .fold(f64::NEG_INFINITY, f64::max);
    let slope_probes: Vec<(f64, f64)> = SLOPE_PROBES
        .iter()
        .map(|&tau| (tau, table.fprime_near(1.0 - tau / kappa)))
        .collect();
    let near_one_slope = table.fprime_near(1.0 - TAU0 / kappa);

    Ok(FixedPointReport {
        kappa,
        fixed_points: points,
        sign_changes: brackets.len(),
        expected_sign_changes: expected,
        anomaly,
        notes,
        contraction_bound,
        near_one_slope,
        slope_probes,
        threshold_estimate: None,
    })
}

/// Empirical threshold: smallest sampled `κ` from which every larger sampled
/// `κ` shows exactly `{ā, 1, 2 - ā}` with no anomaly.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThresholdEstimate {
    pub kappa0: f64,
    /// `(κ, number of fixed points, anomaly)` for every sampled `κ`.
    pub per_kappa: Vec<(f64, usize, bool)>,
}

pub fn estimate_threshold(kappas: &[f64], grid: Grid1D, n_samples: usize) -> Result<ThresholdEstimate> {
    if kappas.len() < 2 {
        return Err(MfgError::Precondition("need at least two values of kappa".into()));
    }
    if kappas.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(MfgError::Precondition("kappa values must be strictly increasing".into()));
    }
    let reports: Vec<FixedPointReport> = kappas
        .par_iter()
        .map(|&k| sweep_fmap(k, n_samples, grid).and_then(|t| find_fixed_points(&t, grid)))
        .collect::<Result<_>>()?;
    let per_kappa: Vec<(f64, usize, bool)> =
        reports.iter().map(|r| (r.kappa, r.count(), r.anomaly)).collect();
    let mut start = None;
    for (i, r) in reports.iter().enumerate().rev() {
        if r.has_three_point_structure() {
            start = Some(i);
        } else {
            break;
        }
    }
    match start {
        Some(i) => Ok(ThresholdEstimate { kappa0: kappas[i], per_kappa }),
        None => Err(MfgError::ThresholdNotFound {
            counts: per_kappa.iter().map(|(k, c, _)| (*k, *c)).collect(),
        }),
    }
}

/// Orbit `a, F(a), F(F(a)), ...` of length `steps + 1`.
pub fn iterate_map(a0: f64, kappa: f64, grid: Grid1D, steps: usize) -> Result<Vec<f64>> {
    let mut orbit = vec![a0];
    let mut a = a0;
    for _ in 0..steps {
        a = eval_f(&solve_ergodic(a, kappa, grid)?);
        orbit.push(a);
    }
    Ok(orbit)
}
