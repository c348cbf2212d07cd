//! Tridiagonal kernels: Sturm counts and bisection for symmetric matrices,
//! and the Thomas algorithm for general diagonally dominant systems.

use crate::error::{MfgError, Result};

/// Symmetric tridiagonal matrix with diagonal `diag` and off-diagonal `off`
/// (`off[i]` couples rows `i` and `i + 1`).
#[derive(Debug, Clone, PartialEq)]
pub struct SymTridiag {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
}

impl SymTridiag {
    pub fn new(diag: Vec<f64>, off: Vec<f64>) -> Self {
        assert_eq!(off.len() + 1, diag.len(), "off-diagonal must have n - 1 entries");
        Self { diag, off }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// Number of eigenvalues strictly below `x` (negative pivots of `T - xI = LDLᵀ`).
    pub fn count_below(&self, x: f64) -> usize {
        let mut count = 0;
        let mut d = 1.0;
        for i in 0..self.diag.len() {
            let coupling = if i == 0 { 0.0 } else { self.off[i - 1] * self.off[i - 1] / d };
            d = self.diag[i] - x - coupling;
            if d == 0.0 {
                d = -f64::EPSILON * (self.diag[i].abs() + x.abs()).max(f64::MIN_POSITIVE);
            }
            if d < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// Gershgorin interval containing the spectrum.
    pub fn gershgorin(&self) -> (f64, f64) {
        let n = self.diag.len();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let r = if i > 0 { self.off[i - 1].abs() } else { 0.0 }
                + if i + 1 < n { self.off[i].abs() } else { 0.0 };
            lo = lo.min(self.diag[i] - r);
            hi = hi.max(self.diag[i] + r);
        }
        (lo, hi)
    }

    /// Bracket `[lo, hi]` of the `k`-th smallest eigenvalue (0-based), of width
    /// at most `abs_tol + rel_tol * |λ|`.
    pub fn bracket_eigenvalue(&self, k: usize, abs_tol: f64, rel_tol: f64) -> (f64, f64) {
        assert!(k < self.len());
        let (mut lo, mut hi) = self.gershgorin();
        let pad = 1e-12 * (lo.abs() + hi.abs()).max(1.0);
        lo -= pad;
        hi += pad;
        for _ in 0..256 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.count_below(mid) > k {
                hi = mid;
            } else {
                lo = mid;
            }
            if hi - lo <= abs_tol + rel_tol * mid.abs() {
                break;
            }
        }
        (lo, hi)
    }

    /// `k`-th smallest eigenvalue by bisection on the Sturm count.
    pub fn kth_eigenvalue(&self, k: usize) -> f64 {
        let (lo, hi) = self.bracket_eigenvalue(k, 0.0, 4.0 * f64::EPSILON);
        0.5 * (lo + hi)
    }

    /// `y = T x`.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let n = self.len();
        (0..n)
            .map(|i| {
                let mut s = self.diag[i] * x[i];
                if i > 0 {
                    s += self.off[i - 1] * x[i - 1];
                }
                if i + 1 < n {
                    s += self.off[i] * x[i + 1];
                }
                s
            })
            .collect()
    }

    /// Solves `(T - σI) x = rhs`.
    pub fn solve_shifted(&self, sigma: f64, rhs: &[f64]) -> Result<Vec<f64>> {
        let diag: Vec<f64> = self.diag.iter().map(|d| d - sigma).collect();
        thomas(&self.off, &diag, &self.off, rhs)
    }
}

/// Thomas algorithm for `lower[i-1] x[i-1] + diag[i] x[i] + upper[i] x[i+1] = rhs[i]`.
///
/// No pivoting; intended for diagonally dominant or M-matrix systems.
pub fn thomas(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    assert!(lower.len() + 1 == n && upper.len() + 1 == n && rhs.len() == n);
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut piv = diag[0];
    if piv == 0.0 || !piv.is_finite() {
        return Err(MfgError::SingularPivot { row: 0 });
    }
    if n > 1 {
        c[0] = upper[0] / piv;
    }
    d[0] = rhs[0] / piv;
    for i in 1..n {
        piv = diag[i] - lower[i - 1] * c[i - 1];
        if piv == 0.0 || !piv.is_finite() {
            return Err(MfgError::SingularPivot { row: i });
        }
        if i + 1 < n {
            c[i] = upper[i] / piv;
        }
        d[i] = (rhs[i] - lower[i - 1] * d[i - 1]) / piv;
    }
    for i in (0..n - 1).rev() {
        d[i] -= c[i] * d[i + 1];
    }
    Ok(d)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplace(n: usize) -> SymTridiag {
        SymTridiag::new(vec![2.0; n], vec![-1.0; n - 1])
    }

    #[test]
    fn dirichlet_laplacian_spectrum() {
        let n = 20;
        let t = laplace(n);
        for k in 0..n {
            let exact = 2.0 - 2.0 * ((k + 1) as f64 * std::f64::consts::PI / (n + 1) as f64).cos();
            assert!((t.kth_eigenvalue(k) - exact).abs() < 1e-13, "k = {k}");
        }
        assert_eq!(t.count_below(0.0), 0);
        assert_eq!(t.count_below(4.0), n);
    }

    #[test]
    fn thomas_matches_apply() {
        let t = SymTridiag::new(vec![4.0, 5.0, 6.0, 7.0], vec![1.0, -2.0, 0.5]);
        let x = vec![1.0, -2.0, 3.0, 0.25];
        let b = t.apply(&x);
        let y = t.solve_shifted(0.0, &b).unwrap();
        for (a, e) in y.iter().zip(&x) {
            assert!((a - e).abs() < 1e-14);
        }
    }

    #[test]
    fn zero_pivot_reported() {
        let err = thomas(&[1.0], &[0.0, 1.0], &[1.0], &[1.0, 1.0]).unwrap_err();
        assert_eq!(err, MfgError::SingularPivot { row: 0 });
    }
}
