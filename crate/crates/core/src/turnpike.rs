//! Quantitative turnpike checks along a computed trajectory: the domination
//! hypothesis, the integral inequality for `Φ`, windowed exponential decay,
//! the moment and energy lemmas, and the physical-scale time-averaged bound.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::analysis::{decay_from_integral_inequality, DecayReport, SeriesIntegrator, StabilityConstants};
use crate::dynamic::{compute_phi, duality_check, solve_mfg, DeviationFields, DualityCheck, DynamicTrajectory, MfgParams};
use crate::equilibrium::{find_fixed_points, sweep_fmap};
use crate::ergodic::{solve_ergodic, ErgodicSolution};
use crate::error::{MfgError, Result};
use crate::grid::{integrate_values, Grid1D, Parity, ScalarField};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TurnpikeConfig {
    pub kappa: f64,
    pub horizon: f64,
    pub n_cells: usize,
    /// `m(0) ∝ m̄ (1 + ε cos x)`.
    pub perturbation: f64,
    /// Defaults to `h²/2` when `None`.
    pub dt: Option<f64>,
    pub theta: f64,
    pub tol: f64,
    pub max_iter: usize,
    /// Random pairs for the integral inequalities.
    pub pairs: usize,
    pub seed: u64,
    /// Samples of the map used to locate `ā`.
    pub fmap_samples: usize,
}

impl Default for TurnpikeConfig {
    fn default() -> Self {
        Self {
            kappa: 100.0,
            horizon: 2.0,
            n_cells: 256,
            perturbation: 0.05,
            dt: None,
            theta: 0.5,
            tol: 1e-10,
            max_iter: 200,
            pairs: 100,
            seed: 7,
            fmap_samples: 41,
        }
    }
}

/// `m̄ (1 + ε cos x)` renormalized to unit mass.
pub fn perturbed_density(stationary: &ErgodicSolution, eps: f64) -> Result<ScalarField> {
    let grid = stationary.grid;
    let raw: Vec<f64> = grid.nodes().iter().zip(stationary.m.values()).map(|(x, m)| m * (1.0 + eps * x.cos())).collect();
    if let Some(node) = raw.iter().position(|&m| !(m > 0.0)) {
        return Err(MfgError::PositivityLost { what: "perturbed initial density", step: 0, node });
    }
    let mass = integrate_values(&grid, &raw);
    ScalarField::symmetrized(grid, raw.into_iter().map(|m| m / mass).collect(), Parity::Even)
}

/// Self-organizing stationary state on `grid`.
pub fn self_organizing_state(kappa: f64, grid: Grid1D, samples: usize) -> Result<ErgodicSolution> {
    let table = sweep_fmap(kappa, samples, grid)?;
    let report = find_fixed_points(&table, grid)?;
    let a_bar = report
        .self_organizing()
        .ok_or_else(|| MfgError::Precondition(format!("no self-organizing state at kappa = {kappa}")))?;
    solve_ergodic(a_bar, kappa, grid)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HypothesisMonitor {
    /// `c κ^{1/4}` with `c = √(C_P/Q)`.
    pub threshold: f64,
    /// `max_x m(t, x) / m̄(x)` per step.
    #[serde(skip)]
    pub ratios: Vec<f64>,
    pub max_ratio: f64,
    pub holds_all: bool,
}

impl HypothesisMonitor {
    pub fn holds_at(&self, k: usize) -> bool {
        self.ratios[k] <= self.threshold
    }
}

pub fn monitor_hypothesis(traj: &DynamicTrajectory, stationary: &ErgodicSolution, constants: &StabilityConstants) -> HypothesisMonitor {
    let threshold = constants.c_dom * constants.kappa.powf(0.25);
    let m_bar = stationary.m.values();
    let ratios: Vec<f64> = traj
        .m
        .iter()
        .map(|m| m.values().iter().zip(m_bar).map(|(m, mb)| m / mb).fold(0.0, f64::max))
        .collect();
    let max_ratio = ratios.iter().cloned().fold(0.0, f64::max);
    HypothesisMonitor { threshold, ratios, max_ratio, holds_all: max_ratio <= threshold }
}

/// Outcome of an inequality checked on sampled pairs `t₁ < t₂`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PairCheck {
    pub constant: f64,
    pub pairs: usize,
    pub violations: usize,
    /// Largest `lhs / rhs`.
    pub worst_ratio: f64,
    pub holds: bool,
}

/// Summary of a [`DecayReport`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecaySummary {
    pub c: f64,
    pub applicable: bool,
    pub hypothesis_holds: bool,
    pub pairs_checked: usize,
    pub violations: usize,
    pub omega: f64,
    pub windows: usize,
    /// Largest `average / bound` over the windows.
    pub worst_ratio: f64,
    /// Applicable, hypothesis held, at least one window and every window held.
    pub holds: bool,
}

impl DecaySummary {
    pub fn from_report(r: &DecayReport) -> Self {
        let worst_ratio = r
            .windows
            .iter()
            .map(|w| if w.bound > 0.0 { w.average / w.bound } else if w.average > 0.0 { f64::INFINITY } else { 0.0 })
            .fold(0.0, f64::max);
        Self {
            c: r.c,
            applicable: r.applicable,
            hypothesis_holds: r.hypothesis_holds,
            pairs_checked: r.pairs_checked,
            violations: r.violations.len(),
            omega: r.omega,
            windows: r.windows.len(),
            worst_ratio,
            holds: r.applicable && r.hypothesis_holds && !r.windows.is_empty() && r.all_windows_hold,
        }
    }
}

/// Physical-scale time-averaged bound with windows cut at `T`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WindowedBound {
    /// `C κ^{-1/4}` in physical time.
    pub window: f64,
    /// The window is longer than the horizon, so every window is cut at `T`.
    pub truncated: bool,
    pub k: f64,
    pub omega: f64,
    pub windows: usize,
    pub worst_ratio: f64,
    pub holds: bool,
}

/// The pointwise density bound needs `t ≥ Cκ^{1/4}` in stretched time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PointwiseDensityBound {
    /// Earliest stretched time at which the bound is asserted.
    pub start: f64,
    pub horizon: f64,
    pub applicable: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TurnpikeReport {
    pub kappa: f64,
    pub horizon: f64,
    pub n_cells: usize,
    pub dt: f64,
    pub a_bar: f64,
    pub constants: StabilityConstants,
    pub converged: bool,
    pub iterations: usize,
    pub picard_residual: f64,
    pub max_mass_drift: f64,
    pub min_density: f64,
    pub hypothesis: HypothesisMonitor,
    /// `4 Σ_{t=0,T} ∫ |u_x - ū_x|² m̄ + Q|m - m̄|²/m̄`.
    pub k_const: f64,
    /// `(log 2 / C) κ^{1/4}`, physical time.
    pub omega_theory: f64,
    /// Least-squares decay rate of `Φ` on `[0.2T, 0.5T]`, physical time.
    pub omega_fit: Option<f64>,
    pub phi_initial: f64,
    pub phi_mid: f64,
    pub phi_final: f64,
    /// `∫Φ ≤ 4(C_P + 1/C_P + 1/Q)κ^{1/4} (Φ(t₁) + Φ(t₂))` on random pairs.
    pub integral_inequality: PairCheck,
    /// Window lemma with the constant above.
    pub decay_nominal: DecaySummary,
    /// Window lemma with `1.05 × max ∫Φ / (Φ(t₁) + Φ(t₂))` over all pairs.
    pub decay_empirical: DecaySummary,
    pub windowed_bound: WindowedBound,
    pub pointwise_density: PointwiseDensityBound,
    /// `(∫V_κζ)² ≤ (Q/4) ∫ζ²/μ̄` at every step; `constant` is `Q/4`.
    pub moment_bound: PairCheck,
    /// `∫X + C_P X(t₂) ≤ κ^{1/2}(C_P²/Q) ∫Y + C_P X(t₁)`.
    pub energy_inequality: PairCheck,
    pub duality: DualityCheck,
}

impl TurnpikeReport {
    /// The checks asserted on a run where the domination hypothesis holds.
    pub fn passed(&self) -> bool {
        self.converged
            && self.hypothesis.holds_all
            && self.integral_inequality.holds
            && self.decay_empirical.holds
            && self.moment_bound.holds
            && self.energy_inequality.holds
            && self.duality.holds
            && self.omega_fit.is_some_and(|w| w > 0.0)
    }
}

/// Everything produced by one run.
#[derive(Debug, Clone)]
pub struct TurnpikeRun {
    pub report: TurnpikeReport,
    pub stationary: ErgodicSolution,
    pub trajectory: DynamicTrajectory,
    pub deviation: DeviationFields,
    pub decay_nominal: DecayReport,
    pub decay_empirical: DecayReport,
}

/// Solves the perturbed problem of `cfg` and analyses it.
pub fn run_turnpike(cfg: &TurnpikeConfig) -> Result<TurnpikeRun> {
    let grid = Grid1D::physical(cfg.n_cells)?;
    let stationary = self_organizing_state(cfg.kappa, grid, cfg.fmap_samples)?;
    let m0 = perturbed_density(&stationary, cfg.perturbation)?;
    let mut params = MfgParams::new(cfg.kappa, cfg.horizon, grid);
    if let Some(dt) = cfg.dt {
        params.dt = dt;
    }
    params.theta = cfg.theta;
    params.tol = cfg.tol;
    params.max_iter = cfg.max_iter;
    let trajectory = solve_mfg(&m0, &stationary.u, &params)?;
    analyse(trajectory, stationary, cfg.pairs, cfg.seed)
}

fn random_pairs(n: usize, count: usize, seed: u64) -> Vec<(usize, usize)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let i = rng.gen_range(0..n - 1);
            (i, rng.gen_range(i + 1..n))
        })
        .collect()
}

fn ratio(lhs: f64, rhs: f64) -> f64 {
    if rhs > 0.0 {
        lhs / rhs
    } else if lhs > 0.0 {
        f64::INFINITY
    } else {
        0.0
    }
}

/// Relative slack for inequalities that hold exactly in the continuum.
const QUADRATURE_TOL: f64 = 1e-9;

/// Runs every check on a computed trajectory around `stationary`.
pub fn analyse(trajectory: DynamicTrajectory, stationary: ErgodicSolution, pairs: usize, seed: u64) -> Result<TurnpikeRun> {
    if trajectory.steps() < 2 {
        return Err(MfgError::Precondition("trajectory needs at least three time levels".into()));
    }
    let constants = StabilityConstants::from_stationary(&stationary)?;
    let deviation = compute_phi(&trajectory, &stationary)?;
    let hypothesis = monitor_hypothesis(&trajectory, &stationary, &constants);
    let kappa = trajectory.kappa;
    let root = kappa.sqrt();
    let quarter = kappa.powf(0.25);
    let q = constants.q;
    let c_p = constants.c_p;
    let phi = &deviation.phi;
    let n = phi.len();
    let ds = deviation.times[1] - deviation.times[0];
    let s_end = deviation.times[n - 1];
    let integ = SeriesIntegrator::new(ds, phi);
    let sample = random_pairs(n, pairs, seed);

    let c_int = constants.c_integral;
    let mut worst = 0.0_f64;
    let mut violations = 0;
    for &(i, j) in &sample {
        let r = ratio(integ.between(i, j), c_int * (phi[i] + phi[j]));
        worst = worst.max(r);
        if r > 1.0 + QUADRATURE_TOL {
            violations += 1;
        }
    }
    let integral_inequality = PairCheck { constant: c_int, pairs: sample.len(), violations, worst_ratio: worst, holds: violations == 0 };

    let decay_nominal = decay_from_integral_inequality(&deviation.times, phi, c_int, seed)?;
    let mut c_emp = 0.0_f64;
    for i in 0..n {
        for j in i + 1..n {
            c_emp = c_emp.max(ratio(integ.between(i, j), phi[i] + phi[j]));
        }
    }
    let c_emp = 1.05 * c_emp;
    let decay_empirical = if c_emp.is_finite() && c_emp > 0.0 {
        decay_from_integral_inequality(&deviation.times, phi, c_emp, seed)?
    } else {
        // Φ vanishes identically: every bound holds with any constant.
        decay_from_integral_inequality(&deviation.times, phi, s_end / 8.0, seed)?
    };

    // Physical scale: `∫ dτ` of the physical integrand equals `κ^{-1/2} ∫ ds` of it.
    let phys = &deviation.phi_physical;
    let k_const = 4.0 * (phys[0] + phys[n - 1]);
    let omega_theory = constants.omega;
    let window_s = constants.c_turnpike * quarter;
    let integ_phys = SeriesIntegrator::new(ds, phys);
    let mut worst_w = 0.0_f64;
    let mut windows = 0;
    let mut ok = true;
    for i in 0..n - 1 {
        let t = trajectory.times[i];
        let width = window_s.min(s_end - deviation.times[i]);
        let lhs = integ_phys.window(i, width) / root;
        let rhs = k_const * ((-omega_theory * t).exp() + (-omega_theory * (trajectory.horizon() - t)).exp());
        let r = ratio(lhs, rhs);
        worst_w = worst_w.max(r);
        ok &= r <= 1.0 + QUADRATURE_TOL;
        windows += 1;
    }
    let windowed_bound = WindowedBound {
        window: constants.c_turnpike / quarter,
        truncated: window_s > s_end,
        k: k_const,
        omega: omega_theory,
        windows,
        worst_ratio: worst_w,
        holds: ok,
    };
    let pointwise_density = PointwiseDensityBound { start: window_s, horizon: s_end, applicable: window_s <= s_end };

    let mut worst_m = 0.0_f64;
    let mut viol_m = 0;
    for k in 0..n {
        let r = ratio(deviation.potential_moment[k].powi(2), 0.25 * q * deviation.density_energy[k]);
        worst_m = worst_m.max(r);
        if r > 1.0 + QUADRATURE_TOL {
            viol_m += 1;
        }
    }
    let moment_bound = PairCheck { constant: 0.25 * q, pairs: n, violations: viol_m, worst_ratio: worst_m, holds: viol_m == 0 };

    let x_int = SeriesIntegrator::new(ds, &deviation.density_energy);
    let y_int = SeriesIntegrator::new(ds, &deviation.gradient_energy);
    let x = &deviation.density_energy;
    let coef = root * c_p * c_p / q;
    let tol = 10.0 * (ds + deviation.grid.spacing().powi(2));
    let mut worst_e = 0.0_f64;
    let mut viol_e = 0;
    for &(i, j) in &sample {
        let lhs = x_int.between(i, j) + c_p * x[j];
        let rhs = coef * y_int.between(i, j) + c_p * x[i];
        let r = ratio(lhs, rhs);
        worst_e = worst_e.max(r);
        if r > 1.0 + tol {
            viol_e += 1;
        }
    }
    let energy_inequality = PairCheck { constant: coef, pairs: sample.len(), violations: viol_e, worst_ratio: worst_e, holds: viol_e == 0 };

    let duality = duality_check(&deviation, &stationary);
    let omega_fit = fit_decay_rate(&deviation.times, phi, 0.2 * s_end, 0.5 * s_end).map(|w| w * root);

    let report = TurnpikeReport {
        kappa,
        horizon: trajectory.horizon(),
        n_cells: trajectory.grid.n_cells(),
        dt: trajectory.dt,
        a_bar: stationary.a,
        constants,
        converged: trajectory.converged,
        iterations: trajectory.iterations,
        picard_residual: trajectory.residual_history.last().copied().unwrap_or(f64::NAN),
        max_mass_drift: trajectory.max_mass_drift,
        min_density: trajectory.min_density,
        hypothesis,
        k_const,
        omega_theory,
        omega_fit,
        phi_initial: phi[0],
        phi_mid: phi[n / 2],
        phi_final: phi[n - 1],
        integral_inequality,
        decay_nominal: DecaySummary::from_report(&decay_nominal),
        decay_empirical: DecaySummary::from_report(&decay_empirical),
        windowed_bound,
        pointwise_density,
        moment_bound,
        energy_inequality,
        duality,
    };
    Ok(TurnpikeRun { report, stationary, trajectory, deviation, decay_nominal, decay_empirical })
}

/// `-slope` of the least-squares line of `log Φ` against time over `[from, to]`,
/// skipping non-positive samples. `None` with fewer than two usable samples.
pub fn fit_decay_rate(times: &[f64], phi: &[f64], from: f64, to: f64) -> Option<f64> {
    let pts: Vec<(f64, f64)> = times
        .iter()
        .zip(phi)
        .filter(|(t, p)| **t >= from && **t <= to && **p > 0.0)
        .map(|(t, p)| (*t, p.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mt = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let ml = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let stl: f64 = pts.iter().map(|p| (p.0 - mt) * (p.1 - ml)).sum();
    let stt: f64 = pts.iter().map(|p| (p.0 - mt).powi(2)).sum();
    Some(-stl / stt)
}
