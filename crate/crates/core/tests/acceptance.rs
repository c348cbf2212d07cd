//! Acceptance suite: one PASS/FAIL line per criterion, then a single assertion.
//!
//! Run with `cargo test -p kuramoto-mfg --test acceptance -- --nocapture`.

mod common;

use std::f64::consts::PI;

use common::oracle;
use kuramoto_mfg::analysis::{
    compute_q, decay_from_integral_inequality, fit_envelopes, fourth_moment, poincare_constant,
    pointwise_from_average,
};
use kuramoto_mfg::dynamic::{compute_phi, solve_fp_forward, solve_mfg, MfgParams};
use kuramoto_mfg::equilibrium::{find_fixed_points, sweep_fmap};
use kuramoto_mfg::ergodic::{eval_f, reflect, rescale, solve_ergodic, solve_ergodic_direct};
use kuramoto_mfg::grid::integrate;
use kuramoto_mfg::linearized::{fprime_finite_difference, lambda_prime_finite_difference, solve_linearized};
use kuramoto_mfg::turnpike::{run_turnpike, self_organizing_state, TurnpikeConfig};
use kuramoto_mfg::{Grid1D, Parity, ScalarField};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Ledger {
    lines: Vec<(usize, bool, String)>,
    /// Smallest density seen in any run of the suite.
    min_density: f64,
}

impl Ledger {
    fn record(&mut self, id: usize, name: &str, pass: bool, detail: String) {
        let line = format!("{} [{id:2}] {name}: {detail}", if pass { "PASS" } else { "FAIL" });
        println!("{line}");
        self.lines.push((id, pass, line));
    }

    fn see(&mut self, m: &[f64]) {
        self.min_density = m.iter().cloned().fold(self.min_density, f64::min);
    }
}

fn sup_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn incoherent(l: &mut Ledger) {
    let mut worst = (0.0_f64, 0.0_f64, 0.0_f64);
    for &k in &[16.0, 100.0, 1600.0] {
        let s = solve_ergodic(1.0, k, Grid1D::physical(1024).unwrap()).unwrap();
        l.see(s.m.values());
        worst.0 = worst.0.max(s.lambda.abs());
        worst.1 = worst.1.max(s.u.sup_norm());
        worst.2 = worst.2.max(s.m.values().iter().map(|m| (m - 0.5 / PI).abs()).fold(0.0, f64::max));
    }
    let pass = worst.0 <= 1e-10 && worst.1 <= 1e-10 && worst.2 <= 1e-10;
    l.record(1, "incoherent state", pass, format!("|λ| {:.1e}, |u| {:.1e}, |m - 1/2π| {:.1e} (tol 1e-10)", worst.0, worst.1, worst.2));
}

fn critical_slope(l: &mut Ledger) {
    let g = Grid1D::physical(2048).unwrap();
    let mut worst = 0.0_f64;
    for &k in &[16.0, 100.0, 400.0] {
        let lin = solve_linearized(&solve_ergodic(1.0, k, g).unwrap());
        let fd = fprime_finite_difference(1.0, k, g, 1e-4).unwrap();
        for v in [lin.fprime_quadratic, lin.fprime_bilinear, fd] {
            worst = worst.max((v / (k / 2.0) - 1.0).abs());
        }
    }
    l.record(2, "F'(1) = κ/2 three ways", worst <= 5e-3, format!("max relative deviation {worst:.2e} (tol 5e-3)"));
}

fn lambda_identity(l: &mut Ledger) {
    let g = Grid1D::physical(1024).unwrap();
    let k = 100.0;
    let mut worst = 0.0_f64;
    for i in 0..=20 {
        let a = i as f64 / 20.0;
        let f = eval_f(&solve_ergodic(a, k, g).unwrap());
        let dl = lambda_prime_finite_difference(a, k, g, 2.5e-4).unwrap();
        worst = worst.max((dl + k * f).abs());
    }
    l.record(3, "λ' = -κF", worst <= 1e-8 * k, format!("max |λ' + κF| {worst:.2e} (tol {:.0e})", 1e-8 * k));
}

fn symmetry(l: &mut Ledger) {
    let g = Grid1D::physical(1024).unwrap();
    let k = 100.0;
    let h2 = g.spacing().powi(2);
    let (mut df, mut du, mut dl) = (0.0_f64, 0.0_f64, 0.0_f64);
    let mut ok = true;
    for &a in &[0.0, 0.25, 0.5] {
        let base = solve_ergodic(a, k, g).unwrap();
        let direct = solve_ergodic_direct(2.0 - a, k, g).unwrap();
        let shifted = reflect(&base);
        let e_f = (eval_f(&direct) - (2.0 - eval_f(&base))).abs();
        let e_u = sup_dist(direct.u.values(), shifted.u.values());
        let e_l = (direct.lambda - (base.lambda - 2.0 * k * (1.0 - a))).abs();
        ok &= e_f <= 1e-8 && e_u <= h2 * base.u.sup_norm().max(1.0) && e_l <= h2 * k;
        df = df.max(e_f);
        du = du.max(e_u);
        dl = dl.max(e_l);
    }
    l.record(4, "half-period symmetry", ok, format!("|ΔF| {df:.1e} (tol 1e-8), |Δu| {du:.1e}, |Δλ| {dl:.1e} (tol h²·scale, h² = {h2:.1e})"));
}

fn max_slope(kappa: f64, g: Grid1D) -> f64 {
    (0..=95)
        .map(|i| solve_linearized(&solve_ergodic(i as f64 / 100.0, kappa, g).unwrap()).fprime_quadratic)
        .fold(0.0, f64::max)
}

fn derivative_scaling(l: &mut Ledger) {
    let g = Grid1D::physical(2048).unwrap();
    let r = max_slope(6400.0, g) / max_slope(400.0, g);
    let pass = (0.125..=0.5).contains(&r);
    l.record(5, "M(6400)/M(400)", pass, format!("ratio {r:.4} (range [0.125, 0.5])"));
}

fn steep_region(l: &mut Ledger) {
    let g = Grid1D::physical(2048).unwrap();
    let mut worst = f64::INFINITY;
    for &k in &[100.0, 400.0] {
        for &tau in &[0.1, 0.5] {
            let lin = solve_linearized(&solve_ergodic(1.0 - tau / k, k, g).unwrap());
            worst = worst.min(lin.fprime_quadratic / (k / 4.0));
        }
    }
    l.record(6, "F'(1 - τ/κ) ≥ κ/4", worst >= 1.0, format!("min F'/(κ/4) {worst:.4}"));
}

fn fixed_points(l: &mut Ledger) {
    let g = Grid1D::physical(2048).unwrap();
    let mut ok = true;
    let mut worst_res = 0.0_f64;
    let mut detail = String::new();
    for &k in &[50.0, 100.0, 400.0] {
        let table = sweep_fmap(k, 41, g).unwrap();
        let rep = find_fixed_points(&table, g).unwrap();
        ok &= rep.has_three_point_structure();
        for p in &rep.fixed_points {
            worst_res = worst_res.max(p.residual.abs());
        }
        if k == 400.0 {
            let a_bar = rep.self_organizing().unwrap_or(f64::NAN);
            let root = oracle::gaussian_root(k);
            let rel = (a_bar / root - 1.0).abs();
            ok &= rel <= 0.1;
            detail = format!("ā(400) {a_bar:.6} vs oracle {root:.6} (rel {rel:.3}, tol 0.1)");
        }
    }
    ok &= worst_res <= 1e-10;
    l.record(7, "three fixed points", ok, format!("max |F(a*) - a*| {worst_res:.1e}; {detail}"));
}

fn eigen_asymptotic(l: &mut Ledger) {
    let k = 1e4;
    let g = Grid1D::physical(4096).unwrap();
    let mut worst = 0.0_f64;
    for &a in &[0.0, 0.5] {
        let s = solve_ergodic(a, k, g).unwrap();
        let target = (1.0_f64 - a).sqrt() / 2.0;
        worst = worst.max((s.ground_energy / k.sqrt() / target - 1.0).abs());
    }
    l.record(8, "E κ^{-1/2} → √(1-a)/2", worst <= 0.02, format!("max relative deviation {worst:.2e} (tol 2e-2)"));
}

fn envelopes(l: &mut Ledger) {
    let g = Grid1D::physical(2048).unwrap();
    let mut inputs = Vec::new();
    for &k in &[100.0, 400.0, 1600.0] {
        for &a in &[0.0, 0.5, 0.9] {
            inputs.push(solve_linearized(&solve_ergodic(a, k, g).unwrap()));
        }
    }
    let r = fit_envelopes(&inputs).unwrap();
    l.record(
        9,
        "envelopes",
        r.feasible,
        format!(
            "u ({:.4}, {:.4}, {:.1e}), m ({:.4}, {:.4}, {:.3}), v ({:.4}, {:.4}); slacks {:.1e}/{:.1e}/{:.1e}; ℓ {:.4} ≤ {:.4}",
            r.value.c1, r.value.c2, r.value.c3, r.density.c1, r.density.c2, r.density.c3, r.linearized.c1,
            r.linearized.c2, r.value_slack, r.density_slack, r.linearized_slack, r.ell_fit, r.ell_bump
        ),
    );
}

fn gaussian(n: usize, half: f64) -> (Grid1D, Vec<f64>) {
    let g = Grid1D::new(half, n).unwrap();
    let w = g.nodes().iter().map(|y| (-0.5 * y * y).exp() / (2.0 * PI).sqrt()).collect();
    (g, w)
}

fn poincare(l: &mut Ledger, states: &[(f64, kuramoto_mfg::ergodic::ErgodicSolution)]) {
    let (g, w) = gaussian(2000, 10.0);
    let cp = poincare_constant(&g, &w).unwrap();
    let cp_of = |k: f64| {
        let s = &states.iter().find(|(kk, _)| *kk == k).unwrap().1;
        let r = rescale(s);
        poincare_constant(&r.grid, r.mu.values()).unwrap()
    };
    let ratio = cp_of(100.0) / cp_of(1600.0);
    let pass = (cp - 1.0).abs() <= 0.02 && (2.0 / 3.0..=1.5).contains(&ratio);
    l.record(10, "Poincaré constant", pass, format!("Gaussian C_P {cp:.6} (1 ± 0.02); C_P(100)/C_P(1600) {ratio:.4}"));
}

fn fourth(l: &mut Ledger, states: &[(f64, kuramoto_mfg::ergodic::ErgodicSolution)]) {
    let (g, w) = gaussian(2000, 10.0);
    let q = fourth_moment(&g, &w);
    let qs: Vec<f64> = states.iter().map(|(_, s)| compute_q(s).rescaled).collect();
    let spread = qs.iter().cloned().fold(0.0, f64::max) / qs.iter().cloned().fold(f64::INFINITY, f64::min);
    let pass = (q / 3.0 - 1.0).abs() <= 5e-3 && spread <= 2.0;
    l.record(11, "fourth moment Q", pass, format!("Gaussian Q {q:.7} (3 ± 0.5%); Q(100, 400, 1600) {qs:.4?}, max/min {spread:.4}"));
}

fn stationarity(l: &mut Ledger) {
    let g = Grid1D::physical(256).unwrap();
    let st = self_organizing_state(100.0, g, 41).unwrap();
    let traj = solve_mfg(&st.m, &st.u, &MfgParams::new(100.0, 0.5, g)).unwrap();
    for m in &traj.m {
        l.see(m.values());
    }
    let dev = compute_phi(&traj, &st).unwrap();
    let max_phi = dev.phi.iter().cloned().fold(0.0, f64::max);
    l.record(12, "stationary data is a fixed point", max_phi <= 1e-10, format!("max Φ {max_phi:.1e} after {} iteration(s) (tol 1e-10)", traj.iterations));
}

fn turnpike(l: &mut Ledger) {
    let run = run_turnpike(&TurnpikeConfig::default()).unwrap();
    for m in &run.trajectory.m {
        l.see(m.values());
    }
    let r = &run.report;
    let omega_fit = r.omega_fit.unwrap_or(f64::NAN);
    let pass = r.converged
        && r.hypothesis.holds_all
        && r.integral_inequality.holds
        && r.integral_inequality.pairs == 100
        && r.decay_empirical.holds
        && r.windowed_bound.holds
        && omega_fit > 0.0;
    l.record(
        13,
        "turnpike run",
        pass,
        format!(
            "max m/m̄ {:.4} ≤ {:.3}; integral inequality worst {:.3} on {} pairs (C {:.2}); window lemma C {:.3}: {} windows, worst {:.3} \
             (C {:.1} needs T ≥ 8C, applicable {}); windowed bound worst {:.3}; ω_fit {:.2}",
            r.hypothesis.max_ratio,
            r.hypothesis.threshold,
            r.integral_inequality.worst_ratio,
            r.integral_inequality.pairs,
            r.integral_inequality.constant,
            r.decay_empirical.c,
            r.decay_empirical.windows,
            r.decay_empirical.worst_ratio,
            r.decay_nominal.c,
            r.decay_nominal.applicable,
            r.windowed_bound.worst_ratio,
            omega_fit
        ),
    );
    let d = &r.duality;
    l.record(14, "duality identity", d.holds, format!("max residual {:.2e} ≤ {:.2e} (scale {:.2e})", d.max_residual, d.tolerance, d.scale));
}

fn lemma_suites(l: &mut Ledger) {
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    let mut cosh_ok = 0;
    for _ in 0..20 {
        let rho: f64 = rng.gen_range(0.2..5.0);
        let t_end = 16.0 / rho;
        let n = 2000;
        let times: Vec<f64> = (0..n).map(|i| t_end * i as f64 / (n - 1) as f64).collect();
        let phi: Vec<f64> = times.iter().map(|t| (rho * (t - 0.5 * t_end)).cosh()).collect();
        let r = decay_from_integral_inequality(&times, &phi, 1.0 / rho, 1).unwrap();
        if r.applicable && r.hypothesis_holds && r.all_windows_hold && !r.windows.is_empty() {
            cosh_ok += 1;
        }
    }
    let mut pw_ok = 0;
    for _ in 0..100 {
        let knots = rng.gen_range(2..12);
        let mut kt: Vec<f64> = (0..knots).map(|_| rng.gen_range(0.0..10.0)).collect();
        kt.push(0.0);
        kt.push(10.0);
        kt.sort_by(f64::total_cmp);
        let kv: Vec<f64> = (0..kt.len()).map(|_| rng.gen_range(0.0..5.0)).collect();
        let n = 1001;
        let times: Vec<f64> = (0..n).map(|i| 10.0 * i as f64 / (n - 1) as f64).collect();
        let f: Vec<f64> = times
            .iter()
            .map(|&t| {
                let j = kt.partition_point(|&x| x <= t).clamp(1, kt.len() - 1);
                let (t0, t1) = (kt[j - 1], kt[j]);
                if t1 > t0 {
                    kv[j - 1] + (kv[j] - kv[j - 1]) * (t - t0) / (t1 - t0)
                } else {
                    kv[j]
                }
            })
            .collect();
        let lip = f.windows(2).map(|w| (w[1] - w[0]).abs()).fold(0.0, f64::max) / (times[1] - times[0]);
        if pointwise_from_average(&times, &f, lip).map(|b| b.holds).unwrap_or(false) {
            pw_ok += 1;
        }
    }
    let times: Vec<f64> = (0..200).map(|i| i as f64 * 0.1).collect();
    let zeros = vec![0.0; 200];
    let z1 = decay_from_integral_inequality(&times, &zeros, 1.0, 1).unwrap();
    let z2 = pointwise_from_average(&times, &zeros, 0.0).unwrap();
    let zero_ok = z1.applicable && z1.hypothesis_holds && z1.all_windows_hold && z2.holds && z2.bound == 0.0;
    let pass = cosh_ok == 20 && pw_ok == 100 && zero_ok;
    l.record(15, "lemma suites", pass, format!("cosh family {cosh_ok}/20, piecewise-linear {pw_ok}/100, zero inputs {zero_ok}"));
}

fn fokker_planck(l: &mut Ledger) {
    let g = Grid1D::physical(256).unwrap();
    let dt = 1e-3;
    let steps = 2000;
    let m0 = g.sample(Parity::Even, |x| (1.0 + 0.5 * x.cos()) / (2.0 * PI));
    let u = vec![ScalarField::zeros(g); steps + 1];
    let ms = solve_fp_forward(&u, &m0, dt).unwrap();
    let cos: Vec<f64> = g.nodes().iter().map(|x| x.cos()).collect();
    let cos = ScalarField::new(g, cos, Parity::Even).unwrap();
    let amp = |m: &ScalarField| integrate(&m.mul(&cos));
    let a0 = amp(&ms[0]);
    let mut worst = 0.0_f64;
    let mut drift = 0.0_f64;
    for (k, m) in ms.iter().enumerate() {
        let t = k as f64 * dt;
        worst = worst.max((amp(m) / a0 / (-t).exp() - 1.0).abs());
        if k > 0 {
            drift = drift.max((integrate(m) - integrate(&ms[k - 1])).abs());
        }
        l.see(m.values());
    }
    let positive = l.min_density > 0.0;
    let pass = worst <= 0.02 && drift <= 1e-14 && positive;
    l.record(
        16,
        "Fokker-Planck physics",
        pass,
        format!("cos mode max relative error {worst:.2e} (tol 2e-2); mass drift per step {drift:.1e} (tol 1e-14); min density over suite {:.2e}", l.min_density),
    );
}

// Runs without the libtest harness so the criterion lines always reach stdout.
fn main() {
    let mut l = Ledger { lines: Vec::new(), min_density: f64::INFINITY };
    incoherent(&mut l);
    critical_slope(&mut l);
    lambda_identity(&mut l);
    symmetry(&mut l);
    derivative_scaling(&mut l);
    steep_region(&mut l);
    fixed_points(&mut l);
    eigen_asymptotic(&mut l);
    envelopes(&mut l);
    let g = Grid1D::physical(2048).unwrap();
    let states: Vec<_> = [100.0, 400.0, 1600.0]
        .iter()
        .map(|&k| {
            let s = self_organizing_state(k, g, 41).unwrap();
            l.see(s.m.values());
            (k, s)
        })
        .collect();
    poincare(&mut l, &states);
    fourth(&mut l, &states);
    stationarity(&mut l);
    turnpike(&mut l);
    lemma_suites(&mut l);
    fokker_planck(&mut l);

    let failed: Vec<usize> = l.lines.iter().filter(|(_, p, _)| !p).map(|(i, _, _)| *i).collect();
    println!("{} of {} criteria passed", l.lines.len() - failed.len(), l.lines.len());
    assert_eq!(l.lines.len(), 16);
    if !failed.is_empty() {
        eprintln!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
