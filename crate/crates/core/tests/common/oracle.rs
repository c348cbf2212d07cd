//! Fourier cosine Galerkin solver for the ground state of `-φ'' + cVφ = Eφ` on
//! the circle, independent of the finite-difference code.
//!
//! Basis `1/√(2π)`, `cos(kx)/√π`; in it `V = 1 - cos` is `I - C` with `C`
//! tridiagonal (`C₀₁ = 1/√2`, `C_{k,k+1} = 1/2`).

#![allow(dead_code)]

use nalgebra::{DMatrix, SymmetricEigen};

pub const MODES: usize = 160;

pub struct Spectral {
    /// Ground energy `E`; the HJB constant is `2E`.
    pub energy: f64,
    /// `∫ V φ²`.
    pub f: f64,
    /// Second eigenvalue.
    pub energy1: f64,
}

fn cos_matrix(k: usize) -> DMatrix<f64> {
    let mut c = DMatrix::zeros(k, k);
    for j in 0..k - 1 {
        let v = if j == 0 { std::f64::consts::FRAC_1_SQRT_2 } else { 0.5 };
        c[(j, j + 1)] = v;
        c[(j + 1, j)] = v;
    }
    c
}

pub fn ground(a: f64, kappa: f64) -> Spectral {
    let k = MODES;
    let c = 0.5 * kappa * (1.0 - a);
    let cm = cos_matrix(k);
    let mut h = DMatrix::identity(k, k) * c - &cm * c;
    for j in 0..k {
        h[(j, j)] += (j * j) as f64;
    }
    let eig = SymmetricEigen::new(h);
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].partial_cmp(&eig.eigenvalues[j]).unwrap());
    let v = eig.eigenvectors.column(order[0]).into_owned();
    let cos_moment = (v.transpose() * &cm * &v)[(0, 0)];
    Spectral {
        energy: eig.eigenvalues[order[0]],
        f: 1.0 - cos_moment,
        energy1: eig.eigenvalues[order[1]],
    }
}

/// `F_κ(a)` from the spectral ground state.
pub fn f_map(a: f64, kappa: f64) -> f64 {
    ground(a, kappa).f
}

/// Central difference of the spectral `F`.
pub fn f_prime(a: f64, kappa: f64) -> f64 {
    let d = 1e-5;
    (f_map(a + d, kappa) - f_map(a - d, kappa)) / (2.0 * d)
}

/// Root of `F(a) = a` in `[0, 1 - 1/κ]` by bisection on the spectral map.
pub fn self_organizing_root(kappa: f64) -> f64 {
    let (mut lo, mut hi) = (0.0, 1.0 - 2.0 / kappa);
    assert!(f_map(lo, kappa) - lo > 0.0 && f_map(hi, kappa) - hi < 0.0);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if f_map(mid, kappa) - mid > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Root of the Gaussian asymptotic `a = 1 / (2√(κ(1 - a)))`.
pub fn gaussian_root(kappa: f64) -> f64 {
    let (mut lo, mut hi) = (0.0, 0.5);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if 1.0 / (2.0 * (kappa * (1.0 - mid)).sqrt()) - mid > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}
