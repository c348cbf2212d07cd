//! Linearization of the ergodic problem in `a`: `-v'' + v'u' + λ' = -κV`,
//! `v(0) = 0`, the two representations of `F'_κ(a)`, and the corrector `z`
//! used near the incoherent state.
//!
//! Multiplying by `m` turns the equation into `(m v')' = m(λ' + κV)`, so `v'`
//! is an explicit quadrature. Derivatives live on cell faces; face `f`
//! separates cells `f - 1` and `f`, and face `n/2` is the origin.

use crate::ergodic::{eval_f, solve_ergodic, solve_ergodic_direct, ErgodicSolution};
use crate::error::{MfgError, Result};
use crate::grid::{diff_values, laplacian_values, pairwise_sum, Grid1D, Parity, ScalarField};

#[derive(Debug, Clone, PartialEq)]
pub struct LinearizedSolution {
    pub base: ErgodicSolution,
    /// Even, `v(0) = 0` at the origin face.
    pub v: ScalarField,
    /// `v'` on faces `0..=n`.
    pub v_prime_faces: Vec<f64>,
    pub lambda_prime: f64,
    /// `(1/κ) ∫ |v'|² m`.
    pub fprime_quadratic: f64,
    /// `-∫ (λ'/κ + V) v m`.
    pub fprime_bilinear: f64,
    /// `|∫ m (λ' + κV)| / κ`: closure of the flux at the far boundary.
    pub neumann_defect: f64,
    /// Sup over interior nodes of `|-v'' + v'u' + λ' + κV|`.
    pub residual: f64,
    pub z: Option<Corrector>,
}

/// Solution of `-z'' + z'u' = sin(x) u' - (κ + λ')/κ`, `z(0) = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct Corrector {
    pub z: ScalarField,
    /// `z'` on faces `0..=n`.
    pub z_prime_faces: Vec<f64>,
    pub sup_z: f64,
    pub sup_z_prime: f64,
    /// `sup |v - κ(cos x - 1 + z)|` against the linearized solution.
    pub reconstruction_error: f64,
    /// Mismatch of the flux at the origin between the two half-line quadratures.
    pub center_defect: f64,
}

/// Geometric mean of neighbouring cells, `e^{-u}` at the face up to `O(h²)`.
fn face_density(m: &[f64], f: usize) -> f64 {
    (m[f - 1] * m[f]).sqrt()
}

/// Odd face field from tail fluxes on the right half: `g'_f = -Σ_{i ≥ f} h s_i / m_f`.
fn odd_faces_from_tail(grid: &Grid1D, m: &[f64], source: &[f64]) -> (Vec<f64>, f64) {
    let n = grid.n_cells();
    let h = grid.spacing();
    let half = n / 2;
    let mut faces = vec![0.0; n + 1];
    let mut tail = 0.0;
    for f in (half + 1..n).rev() {
        tail += h * source[f];
        faces[f] = -tail / face_density(m, f);
    }
    tail += h * source[half];
    let center_flux = -tail;
    for f in 1..half {
        faces[f] = -faces[n - f];
    }
    (faces, center_flux)
}

/// Cell values from face derivatives with the value 0 at the origin face.
fn integrate_from_origin(grid: &Grid1D, faces: &[f64]) -> Vec<f64> {
    let n = grid.n_cells();
    let h = grid.spacing();
    let half = n / 2;
    let mut vals = vec![0.0; n];
    // Half cell from the origin: trapezoid of g' between 0 and the first node.
    let mut acc = 0.5 * h * 0.5 * (faces[half] + 0.5 * (faces[half] + faces[half + 1]));
    vals[half] = acc;
    for i in half + 1..n {
        acc += h * faces[i];
        vals[i] = acc;
    }
    for i in 0..half {
        vals[i] = vals[n - 1 - i];
    }
    vals
}

/// Solves the linearized problem around `base`.
pub fn solve_linearized(base: &ErgodicSolution) -> LinearizedSolution {
    let grid = base.grid;
    let n = grid.n_cells();
    let h = grid.spacing();
    let kappa = base.kappa;
    let f_val = eval_f(base);
    let lambda_prime = -kappa * f_val;
    let m = base.m.values();
    let pot = base.potential();

    let source: Vec<f64> = (0..n).map(|i| m[i] * (lambda_prime + kappa * pot[i])).collect();
    let (v_prime, _) = odd_faces_from_tail(&grid, m, &source);
    let v = integrate_from_origin(&grid, &v_prime);

    let quad: Vec<f64> = (1..n).map(|f| face_density(m, f) * v_prime[f] * v_prime[f]).collect();
    let fprime_quadratic = h * pairwise_sum(&quad) / kappa;
    let bil: Vec<f64> = (0..n).map(|i| (lambda_prime / kappa + pot[i]) * v[i] * m[i]).collect();
    let fprime_bilinear = -h * pairwise_sum(&bil);
    let neumann_defect = (h * pairwise_sum(&source)).abs() / kappa;

    let du = diff_values(&grid, base.u.values());
    let dv = diff_values(&grid, &v);
    let d2v = laplacian_values(&grid, &v);
    let residual = (1..n - 1)
        .map(|i| (-d2v[i] + dv[i] * du[i] + lambda_prime + kappa * pot[i]).abs())
        .fold(0.0, f64::max);

    LinearizedSolution {
        base: base.clone(),
        v: ScalarField::symmetrized(grid, v, Parity::Even).expect("length preserved"),
        v_prime_faces: v_prime,
        lambda_prime,
        fprime_quadratic,
        fprime_bilinear,
        neumann_defect,
        residual,
        z: None,
    }
}

/// The pair `(F' by the quadratic form, F' by the bilinear form)`.
pub fn fprime_pair(lin: &LinearizedSolution) -> (f64, f64) {
    (lin.fprime_quadratic, lin.fprime_bilinear)
}

impl LinearizedSolution {
    /// Attaches the corrector; same precondition as [`solve_corrector`].
    pub fn with_corrector(mut self, tau_max: f64) -> Result<Self> {
        let z = solve_corrector(&self.base, tau_max, Some(&self))?;
        self.z = Some(z);
        Ok(self)
    }
}

/// Corrector near the incoherent state. Requires `|1 - a| ≤ τ/κ` with
/// `τ = tau_max ≤ 1`. When `lin` is given the reconstruction error against its
/// `v` is filled in, otherwise it is computed from a fresh linearized solve.
pub fn solve_corrector(
    base: &ErgodicSolution,
    tau_max: f64,
    lin: Option<&LinearizedSolution>,
) -> Result<Corrector> {
    if !(tau_max > 0.0 && tau_max <= 1.0) {
        return Err(MfgError::Precondition(format!("tau must lie in (0, 1], got {tau_max}")));
    }
    if (1.0 - base.a).abs() > tau_max / base.kappa * (1.0 + 1e-12) {
        return Err(MfgError::Precondition(format!(
            "corrector needs |1 - a| <= tau/kappa = {}, got a = {}",
            tau_max / base.kappa,
            base.a
        )));
    }
    let grid = base.grid;
    let n = grid.n_cells();
    let kappa = base.kappa;
    let lambda_prime = -kappa * eval_f(base);
    let m = base.m.values();
    let du = diff_values(&grid, base.u.values());
    let nodes = grid.nodes();
    let constant = (kappa + lambda_prime) / kappa;
    let source: Vec<f64> = (0..n).map(|i| m[i] * (constant - nodes[i].sin() * du[i])).collect();
    let (z_prime, center_flux) = odd_faces_from_tail(&grid, m, &source);
    let z = integrate_from_origin(&grid, &z_prime);

    let owned;
    let lin = match lin {
        Some(l) => l,
        None => {
            owned = solve_linearized(base);
            &owned
        }
    };
    let reconstruction_error = (0..n)
        .map(|i| (lin.v.values()[i] - kappa * (nodes[i].cos() - 1.0 + z[i])).abs())
        .fold(0.0, f64::max);
    let sup = |xs: &[f64]| xs.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
    Ok(Corrector {
        sup_z: sup(&z),
        sup_z_prime: sup(&z_prime),
        z: ScalarField::symmetrized(grid, z, Parity::Even)?,
        z_prime_faces: z_prime,
        reconstruction_error,
        center_defect: center_flux.abs() / face_density(m, n / 2),
    })
}

/// Ergodic solve that also accepts `a` slightly outside `[0, 2]`.
fn solve_any(a: f64, kappa: f64, grid: Grid1D) -> Result<ErgodicSolution> {
    if (0.0..=2.0).contains(&a) {
        solve_ergodic(a, kappa, grid)
    } else {
        solve_ergodic_direct(a, kappa, grid)
    }
}

/// Central difference `(F(a + δ) - F(a - δ)) / 2δ` with fresh eigen-solves.
pub fn fprime_finite_difference(a: f64, kappa: f64, grid: Grid1D, step: f64) -> Result<f64> {
    let plus = eval_f(&solve_any(a + step, kappa, grid)?);
    let minus = eval_f(&solve_any(a - step, kappa, grid)?);
    Ok((plus - minus) / (2.0 * step))
}

/// Five-point difference of the ergodic constant, `dλ/da`.
pub fn lambda_prime_finite_difference(a: f64, kappa: f64, grid: Grid1D, step: f64) -> Result<f64> {
    let lam = |s: f64| solve_any(a + s * step, kappa, grid).map(|e| e.lambda);
    let (m2, m1, p1, p2) = (lam(-2.0)?, lam(-1.0)?, lam(1.0)?, lam(2.0)?);
    Ok((m2 - 8.0 * m1 + 8.0 * p1 - p2) / (12.0 * step))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ergodic::solve_ergodic;

    #[test]
    fn incoherent_linearization() {
        let g = Grid1D::physical(4096).unwrap();
        let kappa = 100.0;
        let lin = solve_linearized(&solve_ergodic(1.0, kappa, g).unwrap());
        assert!((lin.lambda_prime + kappa).abs() < 1e-10);
        let err = g
            .nodes()
            .iter()
            .zip(lin.v.values())
            .map(|(x, v)| (v - kappa * (x.cos() - 1.0)).abs())
            .fold(0.0, f64::max);
        assert!(err <= 1e-6 * kappa, "err = {err}");
        assert!((lin.fprime_quadratic - 50.0).abs() < 0.25);
    }

    #[test]
    fn summation_by_parts_is_exact() {
        let g = Grid1D::physical(512).unwrap();
        let lin = solve_linearized(&solve_ergodic(0.4, 60.0, g).unwrap());
        let (q, b) = fprime_pair(&lin);
        assert!(q >= 0.0);
        assert!((q - b).abs() <= 1e-12 * q.max(1.0));
    }

    #[test]
    fn corrector_vanishes_at_one() {
        let g = Grid1D::physical(256).unwrap();
        let base = solve_ergodic(1.0, 100.0, g).unwrap();
        let c = solve_corrector(&base, 0.5, None).unwrap();
        assert!(c.sup_z < 1e-12 && c.sup_z_prime < 1e-12);
    }

    #[test]
    fn corrector_precondition() {
        let g = Grid1D::physical(256).unwrap();
        let base = solve_ergodic(0.9, 100.0, g).unwrap();
        assert!(solve_corrector(&base, 0.5, None).is_err());
        assert!(solve_corrector(&base, 2.0, None).is_err());
    }
}
