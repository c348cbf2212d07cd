//! Ergodic Hamilton-Jacobi problem `-u'' + ½|u'|² + λ = κV(1 - a)` with Neumann
//! conditions, solved through its Schrödinger ground state.
//!
//! With `φ = e^{-u/2}` the equation becomes `-φ'' + ½κ(1 - a)V φ = E φ`, where
//! `E = λ / 2`. Both numbers are kept on [`ErgodicSolution`].

use crate::error::{MfgError, Result};
use crate::grid::{
    diff_values, integrate_values, laplacian_values, pairwise_sum, potential, symmetrize_in_place,
    Grid1D, Parity, ScalarField,
};
use crate::tridiag::SymTridiag;

/// Relative eigen-residual accepted from the inverse iteration.
pub const EIGEN_TOL: f64 = 1e-12;
const MAX_INVERSE_ITERATIONS: usize = 60;

#[derive(Debug, Clone, PartialEq)]
pub struct ErgodicSolution {
    pub a: f64,
    pub kappa: f64,
    pub grid: Grid1D,
    /// Value function, even, zero at the node just right of the origin.
    pub u: ScalarField,
    /// Ergodic constant of the HJB equation.
    pub lambda: f64,
    /// Ground eigenvalue of the Schrödinger form, `lambda / 2`.
    pub ground_energy: f64,
    /// Gibbs density `e^{-u} / ∫e^{-u}`, even, positive, unit mass.
    pub m: ScalarField,
    /// `‖Tφ - Eφ‖∞ / (‖T‖ ‖φ‖∞)` of the discrete eigenpair.
    pub eigen_residual: f64,
    /// Sup of the HJB residual over interior nodes, by centered differences.
    pub hjb_residual: f64,
}

impl ErgodicSolution {
    /// Square root of the density, i.e. the `L²`-normalized ground state.
    pub fn ground_state(&self) -> Vec<f64> {
        self.m.values().iter().map(|m| m.sqrt()).collect()
    }

    /// Potential `V` sampled on the solution grid.
    pub fn potential(&self) -> Vec<f64> {
        self.grid.nodes().into_iter().map(potential).collect()
    }
}

fn check_physical(grid: &Grid1D) -> Result<()> {
    if (grid.half_width() - std::f64::consts::PI).abs() > 1e-12 {
        return Err(MfgError::ScaleMismatch(format!(
            "ergodic problem lives on [-π, π], grid half width is {}",
            grid.half_width()
        )));
    }
    Ok(())
}

/// Solves the ergodic problem for `a ∈ [0, 2]`. For `a > 1` the solution is
/// obtained from `2 - a` by the half-period shift `x ↦ x + π`.
pub fn solve_ergodic(a: f64, kappa: f64, grid: Grid1D) -> Result<ErgodicSolution> {
    if !(0.0..=2.0).contains(&a) {
        return Err(MfgError::Precondition(format!("a must lie in [0, 2], got {a}")));
    }
    if a > 1.0 {
        let mirror = solve_ergodic_direct(2.0 - a, kappa, grid)?;
        Ok(reflect(&mirror))
    } else {
        solve_ergodic_direct(a, kappa, grid)
    }
}

/// Same eigen-solve without the symmetry shortcut; valid for any real `a`.
pub fn solve_ergodic_direct(a: f64, kappa: f64, grid: Grid1D) -> Result<ErgodicSolution> {
    if !(kappa > 0.0 && kappa.is_finite()) {
        return Err(MfgError::Precondition(format!("kappa must be positive, got {kappa}")));
    }
    if !a.is_finite() {
        return Err(MfgError::Precondition(format!("a must be finite, got {a}")));
    }
    check_physical(&grid)?;
    let h = grid.spacing();
    let coupling = 0.5 * kappa * (1.0 - a);
    let q: Vec<f64> = grid.nodes().into_iter().map(|x| coupling * potential(x)).collect();
    let (phi, energy, eigen_residual) = ground_state(&grid, &q)?;

    let norm = (h * pairwise_sum(&phi.iter().map(|p| p * p).collect::<Vec<_>>())).sqrt();
    let phi: Vec<f64> = phi.iter().map(|p| p / norm).collect();
    let mut m: Vec<f64> = phi.iter().map(|p| p * p).collect();
    symmetrize_in_place(&mut m, Parity::Even);
    let log_center = phi[grid.center_index()].ln();
    let mut u: Vec<f64> = phi.iter().map(|p| -2.0 * (p.ln() - log_center)).collect();
    symmetrize_in_place(&mut u, Parity::Even);
    u[grid.center_index()] = 0.0;
    u[grid.center_index() - 1] = 0.0;

    let lambda = 2.0 * energy;
    let hjb_residual = hjb_residual(&grid, &u, lambda, kappa * (1.0 - a));
    Ok(ErgodicSolution {
        a,
        kappa,
        grid,
        u: ScalarField::symmetrized(grid, u, Parity::Even)?,
        lambda,
        ground_energy: energy,
        m: ScalarField::symmetrized(grid, m, Parity::Even)?,
        eigen_residual,
        hjb_residual,
    })
}

/// Neumann Schrödinger matrix `-D² + diag(q)` used by every solver in the crate.
pub(crate) fn schrodinger_matrix(grid: &Grid1D, q: &[f64]) -> SymTridiag {
    let n = grid.n_cells();
    let inv_h2 = 1.0 / (grid.spacing() * grid.spacing());
    let diag = (0..n)
        .map(|i| {
            let lap = if i == 0 || i + 1 == n { inv_h2 } else { 2.0 * inv_h2 };
            lap + q[i]
        })
        .collect();
    SymTridiag::new(diag, vec![-inv_h2; n - 1])
}

/// Ground eigenpair `(φ, E, relative residual)` with `φ > 0`.
fn ground_state(grid: &Grid1D, q: &[f64]) -> Result<(Vec<f64>, f64, f64)> {
    let n = grid.n_cells();
    let h = grid.spacing();
    let t = schrodinger_matrix(grid, q);
    let (g_lo, g_hi) = t.gershgorin();
    let t_norm = g_lo.abs().max(g_hi.abs());
    let (lo, _hi) = t.bracket_eigenvalue(0, 1e-13 * t_norm, 1e-13);
    // Strictly below the ground energy keeps T - σI a Stieltjes matrix, so every
    // Thomas step works on positive quantities.
    let sigma = lo - 1e-6 * (1.0 + lo.abs()) - 1e-11 * t_norm;

    let mut x = vec![1.0; n];
    for _ in 0..MAX_INVERSE_ITERATIONS {
        let mut y = t.solve_shifted(sigma, &x)?;
        symmetrize_in_place(&mut y, Parity::Even);
        let scale = y.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
        let sign = if y[grid.center_index()] < 0.0 { -1.0 } else { 1.0 };
        y.iter_mut().for_each(|v| *v *= sign / scale);
        // Componentwise: the far tail sits many orders below the peak and
        // converges only after the bulk has.
        let change = x
            .iter()
            .zip(&y)
            .map(|(a, b)| if *b > 0.0 { (a - b).abs() / b } else { f64::INFINITY })
            .fold(0.0, f64::max);
        x = y;
        if change <= 64.0 * f64::EPSILON {
            break;
        }
    }
    if let Some(node) = x.iter().position(|&v| !(v > 0.0)) {
        return Err(MfgError::NonPositiveGroundState { node });
    }
    let energy = rayleigh_quotient(h, q, &x);
    let tx = t.apply(&x);
    let sup_x = x.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
    let residual = tx
        .iter()
        .zip(&x)
        .map(|(a, b)| (a - energy * b).abs())
        .fold(0.0, f64::max)
        / (t_norm * sup_x);
    if residual > EIGEN_TOL {
        return Err(MfgError::EigenNonConvergence {
            iterations: MAX_INVERSE_ITERATIONS,
            residual,
        });
    }
    Ok((x, energy, residual))
}

/// Rayleigh quotient in difference form, free of the `4/h²` cancellation.
fn rayleigh_quotient(h: f64, q: &[f64], x: &[f64]) -> f64 {
    let grad: Vec<f64> = x.windows(2).map(|w| (w[1] - w[0]) * (w[1] - w[0])).collect();
    let pot: Vec<f64> = q.iter().zip(x).map(|(q, v)| q * v * v).collect();
    let mass: Vec<f64> = x.iter().map(|v| v * v).collect();
    (pairwise_sum(&grad) / (h * h) + pairwise_sum(&pot)) / pairwise_sum(&mass)
}

/// Sup over interior nodes of `|-u'' + ½u'² + λ - s V|`, with `s = κ(1 - a)`.
fn hjb_residual(grid: &Grid1D, u: &[f64], lambda: f64, strength: f64) -> f64 {
    let du = diff_values(grid, u);
    let d2u = laplacian_values(grid, u);
    let n = u.len();
    (1..n - 1)
        .map(|i| {
            let x = grid.node(i);
            (-d2u[i] + 0.5 * du[i] * du[i] + lambda - strength * potential(x)).abs()
        })
        .fold(0.0, f64::max)
}

/// Maps the solution at `a` to the one at `2 - a` via `x ↦ x + π`.
///
/// `u_{2-a}(x) = u_a(x + π) - u_a(π)`, `m_{2-a}(x) = m_a(x + π)`,
/// `λ_{2-a} = λ_a - 2κ(1 - a)`.
pub fn reflect(sol: &ErgodicSolution) -> ErgodicSolution {
    let n = sol.grid.n_cells();
    let half = n / 2;
    let u = sol.u.values();
    let m = sol.m.values();
    let u0 = u[(sol.grid.center_index() + half) % n];
    let new_u: Vec<f64> = (0..n).map(|i| u[(i + half) % n] - u0).collect();
    let new_m: Vec<f64> = (0..n).map(|i| m[(i + half) % n]).collect();
    let shift = sol.kappa * (1.0 - sol.a);
    let lambda = sol.lambda - 2.0 * shift;
    let a = 2.0 - sol.a;
    let hjb = hjb_residual(&sol.grid, &new_u, lambda, sol.kappa * (1.0 - a));
    ErgodicSolution {
        a,
        kappa: sol.kappa,
        grid: sol.grid,
        u: ScalarField::symmetrized(sol.grid, new_u, Parity::Even).expect("length preserved"),
        lambda,
        ground_energy: sol.ground_energy - shift,
        m: ScalarField::symmetrized(sol.grid, new_m, Parity::Even).expect("length preserved"),
        eigen_residual: sol.eigen_residual,
        hjb_residual: hjb,
    }
}

/// `F_κ(a) = ∫ V m_a`.
pub fn eval_f(sol: &ErgodicSolution) -> f64 {
    let vm: Vec<f64> = sol
        .grid
        .nodes()
        .into_iter()
        .zip(sol.m.values())
        .map(|(x, m)| potential(x) * m)
        .collect();
    integrate_values(&sol.grid, &vm)
}

/// `1 - ∫ m_a cos`, the alternative form of `F_κ(a)`.
pub fn eval_f_cosine(sol: &ErgodicSolution) -> f64 {
    let cm: Vec<f64> = sol
        .grid
        .nodes()
        .into_iter()
        .zip(sol.m.values())
        .map(|(x, m)| x.cos() * m)
        .collect();
    1.0 - integrate_values(&sol.grid, &cm)
}

/// Solution in the stretched variable `x κ^{1/4}`.
#[derive(Debug, Clone, PartialEq)]
pub struct RescaledSolution {
    pub kappa: f64,
    pub a: f64,
    pub grid: Grid1D,
    /// `w(x) = u(x κ^{-1/4})`.
    pub w: ScalarField,
    /// `μ(x) = κ^{-1/4} m(x κ^{-1/4})`.
    pub mu: ScalarField,
    /// Rescaled ergodic constant `κ^{-1/2} λ`.
    pub lambda: f64,
    /// Sup over interior nodes of the rescaled HJB residual.
    pub residual: f64,
}

/// Blow-up to `[-πκ^{1/4}, πκ^{1/4}]`, keeping the cell count.
pub fn rescale(sol: &ErgodicSolution) -> RescaledSolution {
    let kappa = sol.kappa;
    let grid = Grid1D::rescaled(sol.grid.n_cells(), kappa).expect("valid base grid");
    let factor = kappa.powf(-0.25);
    let mu: Vec<f64> = sol.m.values().iter().map(|m| factor * m).collect();
    let lambda = sol.lambda / kappa.sqrt();
    let w = sol.u.values().to_vec();
    let dw = diff_values(&grid, &w);
    let d2w = laplacian_values(&grid, &w);
    let n = w.len();
    let residual = (1..n - 1)
        .map(|i| {
            let vk = crate::grid::potential_rescaled(grid.node(i), kappa);
            (-d2w[i] + 0.5 * dw[i] * dw[i] + lambda - vk * (1.0 - sol.a)).abs()
        })
        .fold(0.0, f64::max);
    RescaledSolution {
        kappa,
        a: sol.a,
        grid,
        w: ScalarField::symmetrized(grid, w, Parity::Even).expect("length preserved"),
        mu: ScalarField::symmetrized(grid, mu, Parity::Even).expect("length preserved"),
        lambda,
        residual,
    }
}
