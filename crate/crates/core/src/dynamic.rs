//! Finite-horizon forward-backward system
//!
//! ```text
//! -u_t - u_xx + ½u_x² = κV(x)[1 - ∫V m(t)]
//!  m_t - m_xx - (m u_x)_x = 0
//! ```
//!
//! on `[-π, π]` with Neumann conditions, `m(0) = m₀`, `u(T) = u_T`.
//!
//! The backward equation is solved through `φ = e^{-u/2}`, which turns it into
//! the linear `φ_t + φ_xx = ½ b(t) V φ`; the forward equation uses an implicit
//! Scharfetter-Gummel flux whose discrete stationary state is exactly `e^{-u}`.
//! Time levels pair as in the usual implicit MFG scheme: the step producing
//! `u^k` sees the coupling of `m^{k+1}`, the step producing `m^{k+1}` the drift
//! of `u^k`.

use serde::Serialize;

use crate::analysis::compute_q;
use crate::ergodic::{schrodinger_matrix, ErgodicSolution};
use crate::error::{MfgError, Result};
use crate::grid::{
    integrate_values, pairwise_sum, potential, potential_rescaled, Grid1D, Parity, ScalarField,
};
use crate::tridiag::thomas;

/// Solver settings for [`solve_mfg`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MfgParams {
    pub kappa: f64,
    pub horizon: f64,
    pub dt: f64,
    /// Initial damping of the Picard update, in `(0, 1]`.
    pub theta: f64,
    /// Stop when `sup_t ‖m^{k+1} - m^k‖_{L¹} ≤ tol`.
    pub tol: f64,
    pub max_iter: usize,
}

impl MfgParams {
    /// Defaults: `dt = h²/2` (rounded so that `T/dt` is an integer), `θ = 0.5`,
    /// `tol = 1e-10`, 200 iterations.
    pub fn new(kappa: f64, horizon: f64, grid: Grid1D) -> Self {
        let h = grid.spacing();
        Self { kappa, horizon, dt: 0.5 * h * h, theta: 0.5, tol: 1e-10, max_iter: 200 }
    }

    /// Number of steps and the step actually used.
    pub fn steps(&self) -> (usize, f64) {
        let n = (self.horizon / self.dt).ceil().max(1.0) as usize;
        (n, self.horizon / n as f64)
    }

    fn validate(&self) -> Result<()> {
        if !(self.kappa > 0.0) {
            return Err(MfgError::Precondition(format!("kappa must be positive, got {}", self.kappa)));
        }
        if !(self.horizon > 0.0 && self.dt > 0.0) {
            return Err(MfgError::Precondition("horizon and dt must be positive".into()));
        }
        if !(self.theta > 0.0 && self.theta <= 1.0) {
            return Err(MfgError::Precondition(format!("theta must lie in (0, 1], got {}", self.theta)));
        }
        if !(self.tol > 0.0) {
            return Err(MfgError::Precondition(format!("tol must be positive, got {}", self.tol)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DynamicTrajectory {
    pub grid: Grid1D,
    pub kappa: f64,
    pub dt: f64,
    /// `t_k = k dt`, `k = 0..=N`.
    pub times: Vec<f64>,
    pub u: Vec<ScalarField>,
    pub m: Vec<ScalarField>,
    /// `b(t_k) = κ[1 - ∫V m(t_k)]`.
    pub coupling: Vec<f64>,
    pub converged: bool,
    pub iterations: usize,
    /// `sup_t ‖m^{k+1} - m^k‖_{L¹}` per Picard iteration.
    pub residual_history: Vec<f64>,
    /// Damping in force at the last iteration.
    pub theta: f64,
    /// Largest `|∫m(t_{k+1}) - ∫m(t_k)|` in the final forward sweep.
    pub max_mass_drift: f64,
    /// Smallest density value over all nodes and steps.
    pub min_density: f64,
}

impl DynamicTrajectory {
    pub fn horizon(&self) -> f64 {
        *self.times.last().expect("non-empty")
    }

    pub fn steps(&self) -> usize {
        self.times.len() - 1
    }
}

fn coupling(grid: &Grid1D, pot: &[f64], m: &[f64], kappa: f64) -> f64 {
    let vm: Vec<f64> = pot.iter().zip(m).map(|(v, m)| v * m).collect();
    kappa * (1.0 - integrate_values(grid, &vm))
}

fn sup_abs(xs: &[f64]) -> f64 {
    xs.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
}

fn check_even(f: &ScalarField, what: &str) -> Result<()> {
    if f.parity() != Parity::Even {
        let vals = f.values();
        let n = vals.len();
        let defect = (0..n / 2).map(|i| (vals[i] - vals[n - 1 - i]).abs()).fold(0.0, f64::max);
        if defect > 1e-10 * sup_abs(vals).max(1.0) {
            return Err(MfgError::Precondition(format!("{what} must be even (defect {defect:e})")));
        }
    }
    Ok(())
}

/// Backward sweep for `u` given densities at every time level.
///
/// Implicit step `(I + dt(-D² + ½b^{k+1}V)) φ^k = φ^{k+1}`, with the Neumann
/// matrix shared with the eigensolver, so a stationary density reproduces
/// `ū + const(t)` to rounding.
pub fn solve_hjb_backward(
    m_traj: &[ScalarField],
    terminal_u: &ScalarField,
    kappa: f64,
    dt: f64,
) -> Result<Vec<ScalarField>> {
    let grid = terminal_u.grid();
    let steps = m_traj.len();
    if steps < 2 {
        return Err(MfgError::Precondition("need at least two time levels".into()));
    }
    if m_traj.iter().any(|m| m.grid() != grid) {
        return Err(MfgError::ScaleMismatch("density and terminal value live on different grids".into()));
    }
    check_even(terminal_u, "terminal value")?;
    let pot: Vec<f64> = grid.nodes().into_iter().map(potential).collect();
    let mut out = vec![ScalarField::zeros(grid); steps];

    let ut = terminal_u.values();
    let u_min = ut.iter().cloned().fold(f64::INFINITY, f64::min);
    let mut phi: Vec<f64> = ut.iter().map(|u| (-(u - u_min) / 2.0).exp()).collect();
    let mut log_scale = -u_min / 2.0;
    out[steps - 1] = ScalarField::symmetrized(grid, ut.to_vec(), Parity::Even)?;

    for k in (0..steps - 1).rev() {
        let b = coupling(&grid, &pot, m_traj[k + 1].values(), kappa);
        let q: Vec<f64> = pot.iter().map(|v| 0.5 * b * v).collect();
        let t = schrodinger_matrix(&grid, &q);
        let diag: Vec<f64> = t.diag.iter().map(|d| 1.0 + dt * d).collect();
        let off: Vec<f64> = t.off.iter().map(|o| dt * o).collect();
        let mut next = thomas(&off, &diag, &off, &phi)?;
        if let Some(node) = next.iter().position(|&p| !(p > 0.0)) {
            return Err(MfgError::PositivityLost { what: "backward Cole-Hopf step", step: k, node });
        }
        let scale = sup_abs(&next);
        next.iter_mut().for_each(|p| *p /= scale);
        log_scale += scale.ln();
        phi = next;
        let u: Vec<f64> = phi.iter().map(|p| -2.0 * (p.ln() + log_scale)).collect();
        out[k] = ScalarField::symmetrized(grid, u, Parity::Even)?;
    }
    Ok(out)
}

/// `B(z) = z / (e^z - 1)`, the Bernoulli function of the exponential fit.
pub fn bernoulli(z: f64) -> f64 {
    if z == 0.0 {
        1.0
    } else {
        z / z.exp_m1()
    }
}

/// One implicit Scharfetter-Gummel step for `m_t = (m_x + m u_x)_x` with drift `u`.
///
/// Face flux `G_{i+½} = (B(-Δ_i) m_{i+1} - B(Δ_i) m_i) / h`, `Δ_i = u_{i+1} - u_i`,
/// zero at both ends. Columns of the matrix sum to one, so mass is conserved
/// by construction, and the matrix is an M-matrix, so positivity is kept.
pub fn fp_step(grid: &Grid1D, u: &[f64], m: &[f64], dt: f64) -> Result<Vec<f64>> {
    let n = grid.n_cells();
    let r = dt / (grid.spacing() * grid.spacing());
    let delta: Vec<f64> = u.windows(2).map(|w| w[1] - w[0]).collect();
    let bp: Vec<f64> = delta.iter().map(|&d| bernoulli(d)).collect();
    let bm: Vec<f64> = delta.iter().map(|&d| bernoulli(-d)).collect();
    let mut diag = vec![1.0; n];
    for i in 0..n {
        if i + 1 < n {
            diag[i] += r * bp[i];
        }
        if i > 0 {
            diag[i] += r * bm[i - 1];
        }
    }
    let upper: Vec<f64> = bm.iter().map(|b| -r * b).collect();
    let lower: Vec<f64> = bp.iter().map(|b| -r * b).collect();
    thomas(&lower, &diag, &upper, m)
}

/// Forward sweep for the density; `m^{k+1}` uses the drift `u^k`.
pub fn solve_fp_forward(u_traj: &[ScalarField], initial_m: &ScalarField, dt: f64) -> Result<Vec<ScalarField>> {
    Ok(forward_with_diagnostics(u_traj, initial_m, dt)?.0)
}

fn forward_with_diagnostics(
    u_traj: &[ScalarField],
    initial_m: &ScalarField,
    dt: f64,
) -> Result<(Vec<ScalarField>, f64, f64)> {
    let grid = initial_m.grid();
    if u_traj.iter().any(|u| u.grid() != grid) {
        return Err(MfgError::ScaleMismatch("value and density live on different grids".into()));
    }
    let m0 = initial_m.values();
    if let Some(node) = m0.iter().position(|&m| !(m > 0.0)) {
        return Err(MfgError::PositivityLost { what: "initial density", step: 0, node });
    }
    let mass0 = integrate_values(&grid, m0);
    if (mass0 - 1.0).abs() > 1e-10 {
        return Err(MfgError::Precondition(format!("initial density has mass {mass0}")));
    }
    check_even(initial_m, "initial density")?;

    let mut out = Vec::with_capacity(u_traj.len());
    out.push(ScalarField::symmetrized(grid, m0.to_vec(), Parity::Even)?);
    let mut current = m0.to_vec();
    let mut mass = mass0;
    let mut drift = 0.0_f64;
    let mut min_density = m0.iter().cloned().fold(f64::INFINITY, f64::min);
    let steps = u_traj.len().saturating_sub(1);
    for (k, u) in u_traj.iter().take(steps).enumerate() {
        let next = fp_step(&grid, u.values(), &current, dt)?;
        if let Some(node) = next.iter().position(|&m| !(m > 0.0)) {
            return Err(MfgError::PositivityLost { what: "Fokker-Planck step", step: k + 1, node });
        }
        let new_mass = integrate_values(&grid, &next);
        drift = drift.max((new_mass - mass).abs());
        mass = new_mass;
        min_density = next.iter().cloned().fold(min_density, f64::min);
        out.push(ScalarField::symmetrized(grid, next.clone(), Parity::Even)?);
        current = next;
    }
    Ok((out, drift, min_density))
}

/// Damped Picard iteration between the two sweeps.
///
/// The returned trajectory pairs `u = HJB(m^k)` with `m = FP(u)`, so both
/// equations hold up to the coupling lag, which is below `tol`.
pub fn solve_mfg(initial_m: &ScalarField, terminal_u: &ScalarField, params: &MfgParams) -> Result<DynamicTrajectory> {
    solve_mfg_from(initial_m, terminal_u, params, None)
}

/// As [`solve_mfg`], starting the Picard loop from `guess` instead of the
/// constant-in-time `initial_m`.
pub fn solve_mfg_from(
    initial_m: &ScalarField,
    terminal_u: &ScalarField,
    params: &MfgParams,
    guess: Option<Vec<ScalarField>>,
) -> Result<DynamicTrajectory> {
    params.validate()?;
    let grid = initial_m.grid();
    if terminal_u.grid() != grid {
        return Err(MfgError::ScaleMismatch("initial and terminal data on different grids".into()));
    }
    let (steps, dt) = params.steps();
    let h = grid.spacing();
    let mut m_iter = match guess {
        Some(g) if g.len() == steps + 1 => g,
        Some(g) => {
            return Err(MfgError::Precondition(format!(
                "guess has {} levels, expected {}",
                g.len(),
                steps + 1
            )))
        }
        None => vec![initial_m.clone(); steps + 1],
    };
    let mut theta = params.theta;
    let mut history = Vec::new();
    let mut converged = false;
    let mut iterations = 0;
    let mut last_change: Option<f64> = None;
    let (mut u, mut m_new, mut drift, mut min_density);
    loop {
        iterations += 1;
        u = solve_hjb_backward(&m_iter, terminal_u, params.kappa, dt)?;
        (m_new, drift, min_density) = forward_with_diagnostics(&u, initial_m, dt)?;
        let change = m_iter
            .iter()
            .zip(&m_new)
            .map(|(a, b)| {
                let d: Vec<f64> = a.values().iter().zip(b.values()).map(|(x, y)| (x - y).abs()).collect();
                h * pairwise_sum(&d)
            })
            .fold(0.0, f64::max);
        if let Some(prev) = last_change {
            if change > prev && theta > 1.0 / 1024.0 {
                theta *= 0.5;
            }
        }
        last_change = Some(change);
        history.push(theta * change);
        if theta * change <= params.tol || change <= params.tol {
            converged = true;
            break;
        }
        if iterations >= params.max_iter {
            break;
        }
        for (a, b) in m_iter.iter_mut().zip(&m_new) {
            let mixed: Vec<f64> =
                a.values().iter().zip(b.values()).map(|(x, y)| (1.0 - theta) * x + theta * y).collect();
            *a = ScalarField::symmetrized(grid, mixed, Parity::Even)?;
        }
    }
    let pot: Vec<f64> = grid.nodes().into_iter().map(potential).collect();
    let coupling_series = m_new.iter().map(|m| coupling(&grid, &pot, m.values(), params.kappa)).collect();
    Ok(DynamicTrajectory {
        grid,
        kappa: params.kappa,
        dt,
        times: (0..=steps).map(|k| k as f64 * dt).collect(),
        u,
        m: m_new,
        coupling: coupling_series,
        converged,
        iterations,
        residual_history: history,
        theta,
        max_mass_drift: drift,
        min_density,
    })
}

/// Deviations from the stationary state in the stretched variables
/// `s = κ^{1/2} t`, `y = κ^{1/4} x`.
#[derive(Debug, Clone, PartialEq)]
pub struct DeviationFields {
    pub grid: Grid1D,
    pub kappa: f64,
    pub q: f64,
    /// Rescaled times `s_k`.
    pub times: Vec<f64>,
    /// `v = w - w̄ - λ̄(T - s)`.
    pub v: Vec<ScalarField>,
    /// `ζ = μ - μ̄`.
    pub zeta: Vec<ScalarField>,
    /// `∫ μ̄ v_x²`.
    pub gradient_energy: Vec<f64>,
    /// `∫ ζ² / μ̄`.
    pub density_energy: Vec<f64>,
    /// `∫ V_κ ζ`.
    pub potential_moment: Vec<f64>,
    /// `∫ ζ`.
    pub zeta_mass: Vec<f64>,
    /// `Φ = ∫ μ̄ v_x² + (Q/κ^{1/2}) ∫ ζ²/μ̄`.
    pub phi: Vec<f64>,
    /// `κ^{1/2} Φ = ∫ |u_x - ū_x|² m̄ + Q |m - m̄|²/m̄` in physical variables.
    pub phi_physical: Vec<f64>,
}

fn face_mean(a: &[f64], f: usize) -> f64 {
    (a[f - 1] * a[f]).sqrt()
}

/// `∫ ρ |g_x|²` with face differences and face-averaged weight.
pub(crate) fn weighted_dirichlet(grid: &Grid1D, weight: &[f64], g: &[f64]) -> f64 {
    let h = grid.spacing();
    let terms: Vec<f64> = (1..g.len())
        .map(|f| {
            let d = (g[f] - g[f - 1]) / h;
            face_mean(weight, f) * d * d
        })
        .collect();
    h * pairwise_sum(&terms)
}

/// Forms `v`, `ζ` and `Φ` along a trajectory around `stationary`.
pub fn compute_phi(traj: &DynamicTrajectory, stationary: &ErgodicSolution) -> Result<DeviationFields> {
    if traj.grid != stationary.grid {
        return Err(MfgError::ScaleMismatch("trajectory and stationary state use different grids".into()));
    }
    if (traj.kappa - stationary.kappa).abs() > 1e-12 * traj.kappa {
        return Err(MfgError::ScaleMismatch(format!(
            "trajectory has kappa {} but stationary state has {}",
            traj.kappa, stationary.kappa
        )));
    }
    let kappa = traj.kappa;
    let n = traj.grid.n_cells();
    let rgrid = Grid1D::rescaled(n, kappa)?;
    let hr = rgrid.spacing();
    let root = kappa.sqrt();
    let quarter = kappa.powf(0.25);
    let q = compute_q(stationary).rescaled;
    let t_end = traj.horizon();
    let lambda_bar = stationary.lambda;

    let mu_bar: Vec<f64> = stationary.m.values().iter().map(|m| m / quarter).collect();
    let w_bar = stationary.u.values();
    let v_kappa: Vec<f64> = rgrid.nodes().into_iter().map(|y| potential_rescaled(y, kappa)).collect();

    let mut out = DeviationFields {
        grid: rgrid,
        kappa,
        q,
        times: traj.times.iter().map(|t| t * root).collect(),
        v: Vec::with_capacity(traj.times.len()),
        zeta: Vec::with_capacity(traj.times.len()),
        gradient_energy: Vec::new(),
        density_energy: Vec::new(),
        potential_moment: Vec::new(),
        zeta_mass: Vec::new(),
        phi: Vec::new(),
        phi_physical: Vec::new(),
    };
    for (k, t) in traj.times.iter().enumerate() {
        let u = traj.u[k].values();
        let m = traj.m[k].values();
        let v: Vec<f64> = (0..n).map(|i| u[i] - w_bar[i] - lambda_bar * (t_end - t)).collect();
        let zeta: Vec<f64> = (0..n).map(|i| m[i] / quarter - mu_bar[i]).collect();
        let grad = weighted_dirichlet(&rgrid, &mu_bar, &v);
        let dens_terms: Vec<f64> = zeta.iter().zip(&mu_bar).map(|(z, mb)| z * z / mb).collect();
        let dens = hr * pairwise_sum(&dens_terms);
        let moment_terms: Vec<f64> = zeta.iter().zip(&v_kappa).map(|(z, vk)| z * vk).collect();
        let phi = grad + q / root * dens;
        out.gradient_energy.push(grad);
        out.density_energy.push(dens);
        out.potential_moment.push(hr * pairwise_sum(&moment_terms));
        out.zeta_mass.push(hr * pairwise_sum(&zeta));
        out.phi.push(phi);
        out.phi_physical.push(root * phi);
        out.v.push(ScalarField::symmetrized(rgrid, v, Parity::Even)?);
        out.zeta.push(ScalarField::symmetrized(rgrid, zeta, Parity::Even)?);
    }
    Ok(out)
}

/// Residuals of `d/ds ∫vζ = -∫ ½(μ + μ̄) v_x² + κ^{-1/2} (∫V_κ ζ)²` at interior steps.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DualityCheck {
    /// Residual at steps `k = 1..N-1`.
    #[serde(skip)]
    pub residuals: Vec<f64>,
    /// Largest magnitude among both sides over the run.
    pub scale: f64,
    /// `10 (ds + h_y²) · scale`.
    pub tolerance: f64,
    pub max_residual: f64,
    pub holds: bool,
}

pub fn duality_check(dev: &DeviationFields, stationary: &ErgodicSolution) -> DualityCheck {
    let grid = dev.grid;
    let hr = grid.spacing();
    let n = grid.n_cells();
    let quarter = dev.kappa.powf(0.25);
    let mu_bar: Vec<f64> = stationary.m.values().iter().map(|m| m / quarter).collect();
    let pairing: Vec<f64> = dev
        .v
        .iter()
        .zip(&dev.zeta)
        .map(|(v, z)| {
            let t: Vec<f64> = v.values().iter().zip(z.values()).map(|(a, b)| a * b).collect();
            hr * pairwise_sum(&t)
        })
        .collect();
    let steps = dev.times.len();
    let ds = if steps > 1 { dev.times[1] - dev.times[0] } else { 0.0 };
    let mut residuals = Vec::new();
    let mut scale = 0.0_f64;
    for k in 1..steps.saturating_sub(1) {
        let lhs = (pairing[k + 1] - pairing[k - 1]) / (2.0 * ds);
        let zeta = dev.zeta[k].values();
        let weight: Vec<f64> = (0..n).map(|i| 0.5 * (zeta[i] + 2.0 * mu_bar[i])).collect();
        let dissipation = weighted_dirichlet(&grid, &weight, dev.v[k].values());
        let forcing = dev.potential_moment[k].powi(2) / dev.kappa.sqrt();
        residuals.push((lhs + dissipation - forcing).abs());
        scale = scale.max(lhs.abs()).max(dissipation).max(forcing);
    }
    let tolerance = 10.0 * (ds + hr * hr) * scale;
    let max_residual = residuals.iter().cloned().fold(0.0, f64::max);
    DualityCheck { residuals, scale, tolerance, max_residual, holds: max_residual <= tolerance }
}

/// Gauge change `u = ũ - κ ∫₀^t ∫cos(y) m(s, y) dy ds`, trapezoid in time.
pub fn gauge_transform(u_tilde: &[ScalarField], m_traj: &[ScalarField], kappa: f64, dt: f64) -> Result<Vec<ScalarField>> {
    apply_gauge(u_tilde, m_traj, kappa, dt, -1.0)
}

/// Inverse of [`gauge_transform`].
pub fn inverse_gauge_transform(u: &[ScalarField], m_traj: &[ScalarField], kappa: f64, dt: f64) -> Result<Vec<ScalarField>> {
    apply_gauge(u, m_traj, kappa, dt, 1.0)
}

/// Running integral `κ ∫₀^{t_k} ∫cos m` at every level.
pub fn gauge_shift(m_traj: &[ScalarField], kappa: f64, dt: f64) -> Vec<f64> {
    let moments: Vec<f64> = m_traj
        .iter()
        .map(|m| {
            let grid = m.grid();
            let c: Vec<f64> = grid.nodes().iter().zip(m.values()).map(|(x, m)| x.cos() * m).collect();
            integrate_values(&grid, &c)
        })
        .collect();
    let mut acc = 0.0;
    let mut out = Vec::with_capacity(moments.len());
    for k in 0..moments.len() {
        if k > 0 {
            acc += 0.5 * dt * (moments[k - 1] + moments[k]);
        }
        out.push(kappa * acc);
    }
    out
}

fn apply_gauge(u: &[ScalarField], m_traj: &[ScalarField], kappa: f64, dt: f64, sign: f64) -> Result<Vec<ScalarField>> {
    if u.len() != m_traj.len() {
        return Err(MfgError::Precondition(format!(
            "value has {} time levels, density has {}",
            u.len(),
            m_traj.len()
        )));
    }
    let shift = gauge_shift(m_traj, kappa, dt);
    u.iter()
        .zip(&shift)
        .map(|(f, s)| {
            let vals = f.values().iter().map(|v| v + sign * s).collect();
            ScalarField::new(f.grid(), vals, f.parity())
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn bernoulli_limits() {
        assert_eq!(bernoulli(0.0), 1.0);
        assert!((bernoulli(1e-10) - 1.0).abs() < 1e-9);
        assert!((bernoulli(-1.0) - bernoulli(1.0) - 1.0).abs() < 1e-15);
        assert!(bernoulli(800.0) >= 0.0 && bernoulli(-800.0) > 799.0);
    }

    #[test]
    fn zero_coupling_keeps_zero_value() {
        let g = Grid1D::physical(32).unwrap();
        let m = vec![ScalarField::constant(g, 0.5 / PI); 5];
        let terminal = ScalarField::zeros(g);
        let u = solve_hjb_backward(&m, &terminal, 0.0, 0.01).unwrap();
        for f in &u {
            assert!(f.sup_norm() < 1e-14);
        }
    }

    #[test]
    fn uniform_density_is_heat_fixed_point() {
        let g = Grid1D::physical(64).unwrap();
        let u = vec![ScalarField::zeros(g); 20];
        let m0 = ScalarField::constant(g, 0.5 / PI);
        let m = solve_fp_forward(&u, &m0, 0.01).unwrap();
        for f in &m {
            assert!(f.values().iter().all(|v| (v - 0.5 / PI).abs() < 1e-14));
        }
    }

    #[test]
    fn gauge_round_trip() {
        let g = Grid1D::physical(32).unwrap();
        let m: Vec<ScalarField> =
            (0..6).map(|k| g.sample(Parity::Even, |x| (1.0 + 0.1 * k as f64 * x.cos()) / (2.0 * PI))).collect();
        let u: Vec<ScalarField> = (0..6).map(|k| g.sample(Parity::Even, |x| k as f64 * x * x)).collect();
        let fwd = gauge_transform(&u, &m, 7.0, 0.1).unwrap();
        let back = inverse_gauge_transform(&fwd, &m, 7.0, 0.1).unwrap();
        for (a, b) in u.iter().zip(&back) {
            for (x, y) in a.values().iter().zip(b.values()) {
                assert!((x - y).abs() <= 1e-12 * x.abs().max(1.0));
            }
        }
    }
}
