use std::f64::consts::PI;

use kuramoto_mfg::analysis::{decay_from_integral_inequality, poincare_constant, pointwise_from_average};
use kuramoto_mfg::dynamic::{bernoulli, fp_step};
use kuramoto_mfg::ergodic::{eval_f, solve_ergodic};
use kuramoto_mfg::grid::{diff_neumann, integrate};
use kuramoto_mfg::{Grid1D, Parity, ScalarField};
use proptest::prelude::*;

fn config() -> ProptestConfig {
    ProptestConfig { cases: 48, ..ProptestConfig::default() }
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn f_map_stays_in_unit_interval(a in 0.0f64..1.0, k in 1.0f64..2000.0) {
        let s = solve_ergodic(a, k, Grid1D::physical(256).unwrap()).unwrap();
        let f = eval_f(&s);
        prop_assert!(f > 0.0 && f <= 1.0 + 1e-14);
        prop_assert!(s.m.values().iter().all(|&m| m > 0.0));
        prop_assert!((integrate(&s.m) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn energy_sandwich(a in 0.0f64..1.0, k in 1.0f64..2000.0) {
        // 0 ≤ E ≤ ½κ(1 - a) ∫V/2π, the Rayleigh quotient of the constant.
        let s = solve_ergodic(a, k, Grid1D::physical(256).unwrap()).unwrap();
        prop_assert!(s.ground_energy >= -1e-12);
        prop_assert!(s.ground_energy <= 0.5 * k * (1.0 - a) * (1.0 + 1e-12));
    }

    #[test]
    fn f_is_increasing(a in 0.0f64..0.98, k in 2.0f64..500.0) {
        let g = Grid1D::physical(256).unwrap();
        let lo = eval_f(&solve_ergodic(a, k, g).unwrap());
        let hi = eval_f(&solve_ergodic(a + 0.02, k, g).unwrap());
        prop_assert!(hi > lo);
    }

    #[test]
    fn derivative_of_even_field_has_zero_mean(c in prop::collection::vec(-1.0f64..1.0, 5)) {
        let g = Grid1D::physical(128).unwrap();
        let vals: Vec<f64> = g.nodes().iter().map(|x| c.iter().enumerate().map(|(k, ck)| ck * (k as f64 * x).cos()).sum()).collect();
        let f = ScalarField::symmetrized(g, vals, Parity::Even).unwrap();
        let d = diff_neumann(&f);
        prop_assert!(integrate(&d).abs() < 1e-12);
    }

    #[test]
    fn poincare_inequality_on_random_functions(c in prop::collection::vec(-1.0f64..1.0, 6), k in 10.0f64..1000.0) {
        let g = Grid1D::physical(256).unwrap();
        let s = solve_ergodic(0.1, k, g).unwrap();
        let mu = s.m.values();
        let cp = poincare_constant(&g, mu).unwrap();
        let x = g.nodes();
        let f: Vec<f64> = x.iter().map(|x| c.iter().enumerate().map(|(j, cj)| cj * ((j + 1) as f64 * x / 2.0).sin()).sum()).collect();
        let h = g.spacing();
        let mean: f64 = f.iter().zip(mu).map(|(f, m)| f * m).sum::<f64>() * h;
        let var: f64 = f.iter().zip(mu).map(|(f, m)| (f - mean).powi(2) * m).sum::<f64>() * h;
        let dir: f64 = (1..f.len()).map(|i| ((f[i] - f[i - 1]) / h).powi(2) * (mu[i - 1] * mu[i]).sqrt()).sum::<f64>() * h;
        prop_assert!(var <= cp * dir * (1.0 + 1e-9));
    }

    #[test]
    fn poincare_is_scale_invariant_in_the_weight(scale in 1e-3f64..1e3) {
        let g = Grid1D::new(6.0, 200).unwrap();
        let w: Vec<f64> = g.nodes().iter().map(|y| (-y * y).exp()).collect();
        let ws: Vec<f64> = w.iter().map(|v| v * scale).collect();
        let a = poincare_constant(&g, &w).unwrap();
        let b = poincare_constant(&g, &ws).unwrap();
        prop_assert!((a - b).abs() < 1e-9 * a);
    }

    #[test]
    fn fp_step_conserves_mass_and_sign(c in prop::collection::vec(-3.0f64..3.0, 4), dt in 1e-4f64..1.0, eps in 0.0f64..0.9) {
        let g = Grid1D::physical(64).unwrap();
        let u: Vec<f64> = g.nodes().iter().map(|x| c.iter().enumerate().map(|(k, ck)| ck * (k as f64 * x).cos()).sum()).collect();
        let m: Vec<f64> = g.nodes().iter().map(|x| (1.0 + eps * x.cos()) / (2.0 * PI)).collect();
        let next = fp_step(&g, &u, &m, dt).unwrap();
        let h = g.spacing();
        prop_assert!((next.iter().sum::<f64>() * h - m.iter().sum::<f64>() * h).abs() < 1e-14);
        prop_assert!(next.iter().all(|&v| v > 0.0));
    }

    #[test]
    fn bernoulli_identity(z in -50.0f64..50.0) {
        prop_assert!((bernoulli(-z) - bernoulli(z) - z).abs() < 1e-12 * (1.0 + z.abs()));
        prop_assert!(bernoulli(z) > 0.0);
    }

    #[test]
    fn cosh_family_decays(rho in 0.2f64..5.0) {
        let t_end = 16.0 / rho;
        let times: Vec<f64> = (0..1000).map(|i| t_end * i as f64 / 999.0).collect();
        let phi: Vec<f64> = times.iter().map(|t| (rho * (t - 0.5 * t_end)).cosh()).collect();
        let r = decay_from_integral_inequality(&times, &phi, 1.0 / rho, 0).unwrap();
        prop_assert!(r.applicable && r.hypothesis_holds && r.all_windows_hold);
    }

    #[test]
    fn pointwise_bound_on_sines(amp in 0.0f64..5.0, freq in 0.1f64..5.0, len in 0.5f64..20.0) {
        let times: Vec<f64> = (0..801).map(|i| len * i as f64 / 800.0).collect();
        let f: Vec<f64> = times.iter().map(|t| amp * (1.0 + (freq * t).sin())).collect();
        let lip = f.windows(2).map(|w| (w[1] - w[0]).abs()).fold(0.0, f64::max) / (times[1] - times[0]);
        let b = pointwise_from_average(&times, &f, lip).unwrap();
        prop_assert!(b.holds);
    }
}
