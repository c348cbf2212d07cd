//! Stability constants and decay lemmas: weighted Poincaré constant, fourth
//! moment `Q`, the integral-inequality decay lemma, the pointwise bound from a
//! time average, envelope fits for the stationary fields and the Lyapunov check.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::ergodic::{rescale, ErgodicSolution};
use crate::error::{MfgError, Result};
use crate::grid::{diff_values, laplacian_values, pairwise_sum, Grid1D};
use crate::linearized::LinearizedSolution;
use crate::tridiag::SymTridiag;

/// Envelope checks use `a ∈ [0, 1 - ENVELOPE_DELTA]`.
pub const ENVELOPE_DELTA: f64 = 0.05;

/// `C_P = 1 / gap` of `f ↦ -(μ f')'/μ` with Neumann conditions.
///
/// The generalized problem `S f = λ D f` is symmetrized as `D^{-1/2} S D^{-1/2}`;
/// its lowest eigenvalue is 0 (constants) and the second is the gap.
pub fn poincare_constant(grid: &Grid1D, mu: &[f64]) -> Result<f64> {
    let n = grid.n_cells();
    if mu.len() != n {
        return Err(MfgError::LengthMismatch { expected: n, got: mu.len() });
    }
    if let Some(i) = mu.iter().position(|&m| !(m > 0.0 && m.is_finite())) {
        return Err(MfgError::Precondition(format!("weight must be positive, node {i} has {}", mu[i])));
    }
    let inv_h2 = 1.0 / (grid.spacing() * grid.spacing());
    let face: Vec<f64> = (1..n).map(|f| (mu[f - 1] * mu[f]).sqrt()).collect();
    let diag = (0..n)
        .map(|i| {
            let left = if i > 0 { face[i - 1] } else { 0.0 };
            let right = if i + 1 < n { face[i] } else { 0.0 };
            (left + right) * inv_h2 / mu[i]
        })
        .collect();
    let off = (0..n - 1).map(|i| -face[i] * inv_h2 / (mu[i] * mu[i + 1]).sqrt()).collect();
    let gap = SymTridiag::new(diag, off).kth_eigenvalue(1);
    if !(gap > 0.0) {
        return Err(MfgError::Precondition(format!("non-positive spectral gap {gap}")));
    }
    Ok(1.0 / gap)
}

/// `Q` in both variables: `∫ κ x⁴ m̄` and `∫ y⁴ μ̄`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QValue {
    pub physical: f64,
    pub rescaled: f64,
}

pub fn compute_q(stationary: &ErgodicSolution) -> QValue {
    let kappa = stationary.kappa;
    let grid = stationary.grid;
    let m = stationary.m.values();
    let phys: Vec<f64> = grid.nodes().iter().zip(m).map(|(x, m)| kappa * x.powi(4) * m).collect();
    let r = rescale(stationary);
    QValue {
        physical: grid.spacing() * pairwise_sum(&phys),
        rescaled: fourth_moment(&r.grid, r.mu.values()),
    }
}

/// `∫ y⁴ ρ(y) dy` on `grid`.
pub fn fourth_moment(grid: &Grid1D, rho: &[f64]) -> f64 {
    let t: Vec<f64> = grid.nodes().iter().zip(rho).map(|(y, r)| y.powi(4) * r).collect();
    grid.spacing() * pairwise_sum(&t)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StabilityConstants {
    pub kappa: f64,
    pub c_p: f64,
    pub q: f64,
    /// `√(C_P / Q)`.
    pub c_dom: f64,
    /// `16 (C_P + 1/C_P + 1/Q)`.
    pub c_turnpike: f64,
    /// `(log 2 / C_turnpike) κ^{1/4}`.
    pub omega: f64,
    /// `4 (C_P + 1/C_P + 1/Q) κ^{1/4}`, the integral-inequality constant in stretched time.
    pub c_integral: f64,
}

impl StabilityConstants {
    pub fn from_stationary(stationary: &ErgodicSolution) -> Result<Self> {
        let r = rescale(stationary);
        let c_p = poincare_constant(&r.grid, r.mu.values())?;
        let q = compute_q(stationary).rescaled;
        Ok(Self::from_parts(stationary.kappa, c_p, q))
    }

    pub fn from_parts(kappa: f64, c_p: f64, q: f64) -> Self {
        let sum = c_p + 1.0 / c_p + 1.0 / q;
        let c_turnpike = 16.0 * sum;
        Self {
            kappa,
            c_p,
            q,
            c_dom: (c_p / q).sqrt(),
            c_turnpike,
            omega: std::f64::consts::LN_2 / c_turnpike * kappa.powf(0.25),
            c_integral: 4.0 * sum * kappa.powf(0.25),
        }
    }
}

/// Integrals of a uniformly sampled series between sample points, with the
/// Euler-Maclaurin end correction (fourth order for smooth data).
#[derive(Debug, Clone)]
pub struct SeriesIntegrator {
    step: f64,
    values: Vec<f64>,
    slopes: Vec<f64>,
    prefix: Vec<f64>,
}

impl SeriesIntegrator {
    pub fn new(step: f64, values: &[f64]) -> Self {
        let n = values.len();
        let slopes = if n >= 3 {
            (0..n)
                .map(|i| {
                    if i == 0 {
                        (-3.0 * values[0] + 4.0 * values[1] - values[2]) / (2.0 * step)
                    } else if i + 1 == n {
                        (3.0 * values[n - 1] - 4.0 * values[n - 2] + values[n - 3]) / (2.0 * step)
                    } else {
                        (values[i + 1] - values[i - 1]) / (2.0 * step)
                    }
                })
                .collect()
        } else {
            vec![0.0; n]
        };
        let mut prefix = vec![0.0; n];
        for i in 1..n {
            prefix[i] = prefix[i - 1] + 0.5 * step * (values[i - 1] + values[i]);
        }
        Self { step, values: values.to_vec(), slopes, prefix }
    }

    /// `∫_{t_i}^{t_j}`.
    pub fn between(&self, i: usize, j: usize) -> f64 {
        let trap = self.prefix[j] - self.prefix[i];
        trap - self.step * self.step / 12.0 * (self.slopes[j] - self.slopes[i])
    }

    /// `∫_{t_i}^{t_i + width}` with a cubic Hermite piece past the last whole sample.
    pub fn window(&self, i: usize, width: f64) -> f64 {
        let whole = (width / self.step + 1e-9).floor() as usize;
        let j = (i + whole).min(self.values.len() - 1);
        let mut total = self.between(i, j);
        let rest = width - (j - i) as f64 * self.step;
        if rest > 1e-12 * self.step && j + 1 < self.values.len() {
            let s = (rest / self.step).min(1.0);
            let (s2, s3, s4) = (s * s, s * s * s, s * s * s * s);
            let h00 = s - s3 + 0.5 * s4;
            let h10 = 0.5 * s2 - 2.0 * s3 / 3.0 + 0.25 * s4;
            let h01 = s3 - 0.5 * s4;
            let h11 = -s3 / 3.0 + 0.25 * s4;
            total += self.step
                * (self.values[j] * h00
                    + self.step * self.slopes[j] * h10
                    + self.values[j + 1] * h01
                    + self.step * self.slopes[j + 1] * h11);
        }
        total
    }
}

/// A sampled pair violating `∫_{t₁}^{t₂} Φ ≤ C[Φ(t₁) + Φ(t₂)]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PairViolation {
    pub t1: f64,
    pub t2: f64,
    pub integral: f64,
    pub bound: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecayWindow {
    pub t: f64,
    /// `(1/4C) ∫_t^{t+4C} Φ`.
    pub average: f64,
    /// `4 (e^{-ωt} + e^{-ω(T-t)}) [Φ(0) + Φ(T)]`.
    pub bound: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayReport {
    pub c: f64,
    pub horizon: f64,
    /// `T ≥ 8C`.
    pub applicable: bool,
    pub pairs_checked: usize,
    pub hypothesis_holds: bool,
    /// At most 100 violating pairs.
    pub violations: Vec<PairViolation>,
    /// `log 2 / (4C)`.
    pub omega: f64,
    /// Empty unless the lemma applies and its hypothesis held.
    pub windows: Vec<DecayWindow>,
    pub all_windows_hold: bool,
}

/// Relative slack allowed for quadrature error in the pair hypothesis.
const PAIR_TOL: f64 = 1e-9;
const EXHAUSTIVE_PAIRS_UP_TO: usize = 2000;
const RANDOM_PAIRS: usize = 1_000_000;

/// Checks `∫_{t₁}^{t₂} Φ ≤ C[Φ(t₁) + Φ(t₂)]` over sampled pairs and, where it
/// holds and `T ≥ 8C`, compares windowed averages with the exponential bound.
/// Samples must be uniform in time and nonnegative.
pub fn decay_from_integral_inequality(times: &[f64], phi: &[f64], c: f64, seed: u64) -> Result<DecayReport> {
    let n = phi.len();
    if times.len() != n || n < 3 {
        return Err(MfgError::Precondition("need at least three matching samples".into()));
    }
    if let Some(i) = phi.iter().position(|&p| !(p >= 0.0)) {
        return Err(MfgError::Precondition(format!("sample {i} is negative: {}", phi[i])));
    }
    if !(c > 0.0) {
        return Err(MfgError::Precondition(format!("C must be positive, got {c}")));
    }
    let step = times[1] - times[0];
    if times.windows(2).any(|w| ((w[1] - w[0]) - step).abs() > 1e-9 * step) {
        return Err(MfgError::Precondition("samples must be uniform in time".into()));
    }
    let horizon = times[n - 1] - times[0];
    let integ = SeriesIntegrator::new(step, phi);
    let mut violations = Vec::new();
    let mut pairs_checked = 0;
    let mut holds = true;
    let mut check = |i: usize, j: usize| {
        let lhs = integ.between(i, j);
        let rhs = c * (phi[i] + phi[j]);
        if lhs > rhs * (1.0 + PAIR_TOL) + f64::MIN_POSITIVE {
            holds = false;
            if violations.len() < 100 {
                violations.push(PairViolation { t1: times[i], t2: times[j], integral: lhs, bound: rhs });
            }
        }
    };
    if n <= EXHAUSTIVE_PAIRS_UP_TO {
        for i in 0..n {
            for j in i + 1..n {
                check(i, j);
                pairs_checked += 1;
            }
        }
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..RANDOM_PAIRS {
            let i = rng.gen_range(0..n - 1);
            let j = rng.gen_range(i + 1..n);
            check(i, j);
            pairs_checked += 1;
        }
    }

    let applicable = horizon >= 8.0 * c;
    let omega = std::f64::consts::LN_2 / (4.0 * c);
    let mut windows = Vec::new();
    if applicable && holds {
        let width = 4.0 * c;
        let ends = phi[0] + phi[n - 1];
        for i in 0..n {
            let t = times[i] - times[0];
            if t > horizon - width + 1e-12 * horizon {
                break;
            }
            let average = integ.window(i, width) / width;
            let bound = 4.0 * ((-omega * t).exp() + (-omega * (horizon - t)).exp()) * ends;
            windows.push(DecayWindow {
                t: times[i],
                average,
                bound,
                holds: average <= bound * (1.0 + PAIR_TOL) + f64::MIN_POSITIVE,
            });
        }
    }
    let all_windows_hold = windows.iter().all(|w| w.holds);
    Ok(DecayReport {
        c,
        horizon,
        applicable,
        pairs_checked,
        hypothesis_holds: holds,
        violations,
        omega,
        windows,
        all_windows_hold,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PointwiseBound {
    /// `∫ f` over the sampled interval (trapezoid).
    pub integral: f64,
    pub length: f64,
    /// `2L ∫f + (∫f / ℓ)²`, with `ℓ = t₂ - t₁`.
    pub bound: f64,
    /// `max f²` over the samples.
    pub max_f_squared: f64,
    pub holds: bool,
}

/// Bound on `f²` from the average of a nonnegative Lipschitz `f`:
/// `f(t)² ≤ f(τ)² + 2L∫f` where `f(τ)` is the mean value.
pub fn pointwise_from_average(times: &[f64], f: &[f64], lipschitz: f64) -> Result<PointwiseBound> {
    let n = f.len();
    if times.len() != n || n < 2 {
        return Err(MfgError::Precondition("need at least two matching samples".into()));
    }
    if let Some(i) = f.iter().position(|&v| !(v >= 0.0)) {
        return Err(MfgError::Precondition(format!("sample {i} is negative: {}", f[i])));
    }
    if times.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(MfgError::Precondition("times must be increasing".into()));
    }
    let max_slope = times
        .windows(2)
        .zip(f.windows(2))
        .map(|(t, v)| ((v[1] - v[0]) / (t[1] - t[0])).abs())
        .fold(0.0, f64::max);
    if lipschitz < max_slope * (1.0 - 1e-12) {
        return Err(MfgError::Precondition(format!(
            "Lipschitz bound {lipschitz} is below the sampled slope {max_slope}"
        )));
    }
    let integral: f64 = times.windows(2).zip(f.windows(2)).map(|(t, v)| 0.5 * (t[1] - t[0]) * (v[0] + v[1])).sum();
    let length = times[n - 1] - times[0];
    let mean = integral / length;
    let bound = 2.0 * lipschitz * integral + mean * mean;
    let max_f_squared = f.iter().map(|v| v * v).fold(0.0, f64::max);
    Ok(PointwiseBound {
        integral,
        length,
        bound,
        max_f_squared,
        holds: max_f_squared <= bound * (1.0 + 1e-12),
    })
}

/// Two-sided quadratic envelope `c₁ y - c₃ ≤ g ≤ c₂ y + c₃`, `y = κ^{1/2} x²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadraticEnvelope {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
}

impl QuadraticEnvelope {
    /// Band widened by the relative `margin`: `c₁(1 - margin)`, `c₂(1 + margin)`, `c₃(1 + margin)`.
    pub fn widened(&self, margin: f64) -> Self {
        Self { c1: self.c1 * (1.0 - margin), c2: self.c2 * (1.0 + margin), c3: self.c3 * (1.0 + margin) }
    }

    /// Smallest margin `min(g - c₁y + c₃, c₂y + c₃ - g)` over the data.
    pub fn slack(&self, data: &[(f64, f64)]) -> f64 {
        data.iter()
            .map(|&(y, g)| (g - self.c1 * y + self.c3).min(self.c2 * y + self.c3 - g))
            .fold(f64::INFINITY, f64::min)
    }
}

/// Feasible envelope of least width at `y = 1`, `(c₂ - c₁) + 2c₃`. For fixed
/// `c₃` the best `c₂` and `c₁` are explicit; `c₃` is scanned on a geometric grid.
pub fn fit_quadratic_envelope(data: &[(f64, f64)]) -> Result<QuadraticEnvelope> {
    if data.iter().any(|&(y, _)| !(y > 0.0)) {
        return Err(MfgError::EnvelopeInfeasible("abscissae must be positive".into()));
    }
    let floor = data.iter().map(|&(_, g)| (-g).max(0.0)).fold(0.0, f64::max);
    let spread = data.iter().map(|&(_, g)| g.abs()).fold(0.0, f64::max).max(1.0);
    let mut best: Option<(f64, QuadraticEnvelope)> = None;
    for k in 0..=800 {
        let c3 = floor + spread * 1e-8 * 10f64.powf(k as f64 * 8.0 / 800.0);
        let c2 = data.iter().map(|&(y, g)| (g - c3) / y).fold(f64::NEG_INFINITY, f64::max).max(0.0);
        let c1 = data.iter().map(|&(y, g)| (g + c3) / y).fold(f64::INFINITY, f64::min);
        if c1 > 0.0 && c2 >= c1 {
            let width = c2 - c1 + 2.0 * c3;
            if best.is_none_or(|(w, _)| width < w) {
                best = Some((width, QuadraticEnvelope { c1, c2, c3 }));
            }
        }
    }
    best.map(|(_, e)| e)
        .ok_or_else(|| MfgError::EnvelopeInfeasible("no positive lower constant".into()))
}

/// One-sided envelope `|g| ≤ c̄₁ y + c̄₂` minimizing `c̄₁ + c̄₂`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AbsEnvelope {
    pub c1: f64,
    pub c2: f64,
}

impl AbsEnvelope {
    pub fn widened(&self, margin: f64) -> Self {
        Self { c1: self.c1 * (1.0 + margin), c2: self.c2 * (1.0 + margin) }
    }

    pub fn slack(&self, data: &[(f64, f64)]) -> f64 {
        data.iter().map(|&(y, g)| self.c1 * y + self.c2 - g.abs()).fold(f64::INFINITY, f64::min)
    }
}

pub fn fit_abs_envelope(data: &[(f64, f64)]) -> Result<AbsEnvelope> {
    if data.iter().any(|&(y, _)| !(y > 0.0)) {
        return Err(MfgError::EnvelopeInfeasible("abscissae must be positive".into()));
    }
    let spread = data.iter().map(|&(_, g)| g.abs()).fold(0.0, f64::max).max(1e-300);
    let mut best: Option<AbsEnvelope> = None;
    for k in 0..=400 {
        let c2 = if k == 0 { 0.0 } else { spread * 1e-8 * 10f64.powf(k as f64 * 8.0 / 400.0) };
        let c1 = data.iter().map(|&(y, g)| (g.abs() - c2) / y).fold(0.0, f64::max);
        let cand = AbsEnvelope { c1, c2 };
        if best.is_none_or(|b| c1 + c2 < b.c1 + b.c2) {
            best = Some(cand);
        }
    }
    Ok(best.expect("at least one candidate"))
}

/// `π² + 1/12 - 1/(8π²)`: value of `∫₀¹ |ψ'|² + (x²/4)ψ²` for `ψ = √2 sin(πx)`.
pub fn bump_ell() -> f64 {
    let pi2 = std::f64::consts::PI.powi(2);
    pi2 + 1.0 / 12.0 - 1.0 / (8.0 * pi2)
}

/// Constants fitted jointly over a set of stationary and linearized solutions.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnvelopeReport {
    /// `c₁ κ^{1/2}x² - c₃ ≤ u ≤ c₂ κ^{1/2}x² + c₃`.
    pub value: QuadraticEnvelope,
    /// `c₁ κ^{1/2}x² - log C ≤ -(log m - ¼ log κ) ≤ c₂ κ^{1/2}x² + log C`; `c3` holds `log C`.
    pub density: QuadraticEnvelope,
    /// `|v| ≤ c̄₁ κ^{1/2}x² + c̄₂`.
    pub linearized: AbsEnvelope,
    /// Largest `E κ^{-1/2}` over the inputs.
    pub ell_fit: f64,
    /// Bound from the bump test function.
    pub ell_bump: f64,
    /// Smallest `E` over the inputs (must be `≥ 0`).
    pub min_energy: f64,
    /// Least-squares slope of `log m` against `x²` near the origin, per input.
    pub log_density_slopes: Vec<f64>,
    pub value_slack: f64,
    pub density_slack: f64,
    pub linearized_slack: f64,
    /// Every slack is nonnegative up to rounding, `c₁ > 0` for both bands and
    /// `0 ≤ E ≤ ℓ κ^{1/2}` with the bump `ℓ` for every input.
    pub feasible: bool,
}

/// Rounding allowance for slacks, relative to the data magnitude.
pub const ENVELOPE_TOL: f64 = 1e-9;

/// `slack ≥ -ENVELOPE_TOL · (1 + max|g|)`.
pub fn slack_ok(slack: f64, data: &[(f64, f64)]) -> bool {
    let scale = data.iter().map(|&(_, g)| g.abs()).fold(0.0, f64::max);
    slack >= -ENVELOPE_TOL * (1.0 + scale)
}

fn check_delta(sol: &ErgodicSolution) -> Result<()> {
    if !(sol.a >= 0.0 && sol.a <= 1.0 - ENVELOPE_DELTA + 1e-12) {
        return Err(MfgError::Precondition(format!(
            "envelopes are fitted for a in [0, {}], got {}",
            1.0 - ENVELOPE_DELTA,
            sol.a
        )));
    }
    Ok(())
}

/// Data `(κ^{1/2}x², u)` for the value envelope.
pub fn value_data(sol: &ErgodicSolution) -> Vec<(f64, f64)> {
    let root = sol.kappa.sqrt();
    sol.grid.nodes().iter().zip(sol.u.values()).map(|(x, u)| (root * x * x, *u)).collect()
}

/// Data `(κ^{1/2}x², -(log m - ¼ log κ))` for the density envelope.
pub fn density_data(sol: &ErgodicSolution) -> Vec<(f64, f64)> {
    let root = sol.kappa.sqrt();
    let shift = 0.25 * sol.kappa.ln();
    sol.grid.nodes().iter().zip(sol.m.values()).map(|(x, m)| (root * x * x, -(m.ln() - shift))).collect()
}

/// Data `(κ^{1/2}x², v)` for the linearized envelope.
pub fn linearized_data(lin: &LinearizedSolution) -> Vec<(f64, f64)> {
    let root = lin.base.kappa.sqrt();
    lin.base.grid.nodes().iter().zip(lin.v.values()).map(|(x, v)| (root * x * x, *v)).collect()
}

/// Slope of the least-squares line of `log m` against `x²` over nodes with `κ^{1/2}x² ≤ 4`.
pub fn log_density_slope(sol: &ErgodicSolution) -> f64 {
    let root = sol.kappa.sqrt();
    let pts: Vec<(f64, f64)> = sol
        .grid
        .nodes()
        .iter()
        .zip(sol.m.values())
        .filter(|(x, _)| root * *x * *x <= 4.0)
        .map(|(x, m)| (x * x, m.ln()))
        .collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

/// Joint fit of all envelope constants over `inputs`.
pub fn fit_envelopes(inputs: &[LinearizedSolution]) -> Result<EnvelopeReport> {
    if inputs.is_empty() {
        return Err(MfgError::Precondition("no solutions to fit".into()));
    }
    for lin in inputs {
        check_delta(&lin.base)?;
    }
    let value: Vec<(f64, f64)> = inputs.iter().flat_map(|l| value_data(&l.base)).collect();
    let density: Vec<(f64, f64)> = inputs.iter().flat_map(|l| density_data(&l.base)).collect();
    let lin_data: Vec<(f64, f64)> = inputs.iter().flat_map(linearized_data).collect();
    let value_env = fit_quadratic_envelope(&value)?;
    let density_env = fit_quadratic_envelope(&density)?;
    let lin_env = fit_abs_envelope(&lin_data)?;
    let ell_fit = inputs
        .iter()
        .map(|l| l.base.ground_energy / l.base.kappa.sqrt())
        .fold(f64::NEG_INFINITY, f64::max);
    let min_energy = inputs.iter().map(|l| l.base.ground_energy).fold(f64::INFINITY, f64::min);
    let ell_bump = bump_ell();
    let value_slack = value_env.slack(&value);
    let density_slack = density_env.slack(&density);
    let linearized_slack = lin_env.slack(&lin_data);
    let feasible = slack_ok(value_slack, &value)
        && slack_ok(density_slack, &density)
        && slack_ok(linearized_slack, &lin_data)
        && value_env.c1 > 0.0
        && density_env.c1 > 0.0
        && min_energy >= 0.0
        && ell_fit <= ell_bump;
    Ok(EnvelopeReport {
        value: value_env,
        density: density_env,
        linearized: lin_env,
        ell_fit,
        ell_bump,
        min_energy,
        log_density_slopes: inputs.iter().map(|l| log_density_slope(&l.base)).collect(),
        value_slack,
        density_slack,
        linearized_slack,
        feasible,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LyapunovReport {
    pub radius: f64,
    /// `min_{|x| ≥ r} L φ / φ`.
    pub beta: f64,
    /// `max_{|x| < r} (βφ - Lφ)⁺`.
    pub gamma: f64,
    pub feasible: bool,
    /// No node lies outside the ball.
    pub vacuous: bool,
}

/// Lyapunov check for `φ = w̄ - w̄(0) + 1` and `Lφ = -φ'' + φ' w̄_x`.
pub fn verify_lyapunov(grid: &Grid1D, w_bar: &[f64], radius: f64) -> Result<LyapunovReport> {
    if w_bar.len() != grid.n_cells() {
        return Err(MfgError::LengthMismatch { expected: grid.n_cells(), got: w_bar.len() });
    }
    if !(radius > 0.0) {
        return Err(MfgError::Precondition(format!("radius must be positive, got {radius}")));
    }
    let w0 = w_bar[grid.center_index()];
    let phi: Vec<f64> = w_bar.iter().map(|w| w - w0 + 1.0).collect();
    let dphi = diff_values(grid, &phi);
    let d2phi = laplacian_values(grid, &phi);
    let dw = diff_values(grid, w_bar);
    let lphi: Vec<f64> = (0..phi.len()).map(|i| -d2phi[i] + dphi[i] * dw[i]).collect();
    let nodes = grid.nodes();
    let outside: Vec<usize> = (0..phi.len()).filter(|&i| nodes[i].abs() >= radius).collect();
    if outside.is_empty() {
        return Ok(LyapunovReport { radius, beta: 0.0, gamma: 0.0, feasible: false, vacuous: true });
    }
    let beta = outside.iter().map(|&i| lphi[i] / phi[i]).fold(f64::INFINITY, f64::min);
    let gamma = (0..phi.len())
        .filter(|&i| nodes[i].abs() < radius)
        .map(|i| (beta * phi[i] - lphi[i]).max(0.0))
        .fold(0.0, f64::max);
    Ok(LyapunovReport { radius, beta, gamma, feasible: beta > 0.0, vacuous: false })
}

/// Radius from `r² δ / 12 ≥ ℓ`.
pub fn lyapunov_radius(ell: f64, delta: f64) -> f64 {
    (12.0 * ell / delta).sqrt()
}

/// One randomized case of [`lemma_suites`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LemmaCase {
    pub suite: &'static str,
    pub case: usize,
    /// `ρ` for the cosh family, the knot count for piecewise-linear inputs.
    pub parameter: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LemmaSuiteReport {
    pub seed: u64,
    pub cases: Vec<LemmaCase>,
    pub passed: usize,
    pub total: usize,
}

impl LemmaSuiteReport {
    pub fn all_passed(&self) -> bool {
        self.passed == self.total
    }
}

/// `Φ = cosh(ρ(t - T/2))` on `[0, 16/ρ]` satisfies the pair hypothesis with `C = 1/ρ`.
fn cosh_case(rho: f64) -> Result<bool> {
    let t_end = 16.0 / rho;
    let n = 2000;
    let times: Vec<f64> = (0..n).map(|i| t_end * i as f64 / (n - 1) as f64).collect();
    let phi: Vec<f64> = times.iter().map(|t| (rho * (t - 0.5 * t_end)).cosh()).collect();
    let r = decay_from_integral_inequality(&times, &phi, 1.0 / rho, 0)?;
    Ok(r.applicable && r.hypothesis_holds && !r.windows.is_empty() && r.all_windows_hold)
}

fn piecewise_linear_case(rng: &mut ChaCha8Rng) -> Result<(usize, bool)> {
    let inner = rng.gen_range(1..12);
    let mut knots: Vec<f64> = (0..inner).map(|_| rng.gen_range(0.0..10.0)).collect();
    knots.extend([0.0, 10.0]);
    knots.sort_by(f64::total_cmp);
    let heights: Vec<f64> = (0..knots.len()).map(|_| rng.gen_range(0.0..5.0)).collect();
    let n = 1001;
    let times: Vec<f64> = (0..n).map(|i| 10.0 * i as f64 / (n - 1) as f64).collect();
    let f: Vec<f64> = times
        .iter()
        .map(|&t| {
            let j = knots.partition_point(|&k| k <= t).clamp(1, knots.len() - 1);
            let (t0, t1) = (knots[j - 1], knots[j]);
            if t1 > t0 {
                heights[j - 1] + (heights[j] - heights[j - 1]) * (t - t0) / (t1 - t0)
            } else {
                heights[j]
            }
        })
        .collect();
    let lip = f.windows(2).map(|w| (w[1] - w[0]).abs()).fold(0.0, f64::max) / (times[1] - times[0]);
    Ok((knots.len(), pointwise_from_average(&times, &f, lip)?.holds))
}

/// Seeded checks of the two lemmas: 20 cosh profiles, 100 piecewise-linear
/// nonnegative functions and identically zero inputs.
pub fn lemma_suites(seed: u64) -> Result<LemmaSuiteReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cases = Vec::new();
    for case in 0..20 {
        let rho = rng.gen_range(0.2..5.0);
        cases.push(LemmaCase { suite: "cosh", case, parameter: rho, passed: cosh_case(rho)? });
    }
    for case in 0..100 {
        let (knots, passed) = piecewise_linear_case(&mut rng)?;
        cases.push(LemmaCase { suite: "piecewise_linear", case, parameter: knots as f64, passed });
    }
    let times: Vec<f64> = (0..200).map(|i| i as f64 * 0.1).collect();
    let zeros = vec![0.0; times.len()];
    let d = decay_from_integral_inequality(&times, &zeros, 1.0, seed)?;
    let p = pointwise_from_average(&times, &zeros, 0.0)?;
    cases.push(LemmaCase { suite: "zero_decay", case: 0, parameter: 0.0, passed: d.hypothesis_holds && d.all_windows_hold });
    cases.push(LemmaCase { suite: "zero_pointwise", case: 0, parameter: 0.0, passed: p.holds && p.bound == 0.0 });
    let passed = cases.iter().filter(|c| c.passed).count();
    Ok(LemmaSuiteReport { seed, total: cases.len(), passed, cases })
}
