//! One function per command. Each writes its files and records the checks it asserts.

use anyhow::Result;
use kuramoto_mfg::analysis::{
    bump_ell, fit_envelopes, lemma_suites, lyapunov_radius, verify_lyapunov, StabilityConstants,
};
use kuramoto_mfg::dynamic::{compute_phi, solve_mfg, MfgParams};
use kuramoto_mfg::equilibrium::{estimate_threshold, find_fixed_points, sweep_fmap, FIXED_POINT_TOL};
use kuramoto_mfg::ergodic::{eval_f, rescale, solve_ergodic, EIGEN_TOL};
use kuramoto_mfg::grid::integrate;
use kuramoto_mfg::linearized::solve_linearized;
use kuramoto_mfg::turnpike::{monitor_hypothesis, perturbed_density, run_turnpike, self_organizing_state, TurnpikeConfig};
use kuramoto_mfg::{Grid1D, MfgError};
use serde::Serialize;

use crate::config::{Command, RunConfig};
use crate::output::{tag, Outputs, Table};

pub fn run(cfg: &RunConfig, out: &mut Outputs) -> Result<()> {
    match cfg.command {
        Command::Ergodic => ergodic(cfg, out),
        Command::Fmap => fmap(cfg, out),
        Command::FixedPoints => fixed_points(cfg, out),
        Command::Threshold => threshold(cfg, out),
        Command::Dynamic => dynamic(cfg, out),
        Command::Turnpike => turnpike(cfg, out),
        Command::Constants => constants(cfg, out),
        Command::Lemmas => lemmas(cfg, out),
    }
}

fn grid(cfg: &RunConfig) -> Result<Grid1D> {
    Ok(Grid1D::physical(cfg.n_cells)?)
}

fn ergodic(cfg: &RunConfig, out: &mut Outputs) -> Result<()> {
    #[derive(Serialize)]
    struct Header {
        a: f64,
        kappa: f64,
        lambda: f64,
        ground_energy: f64,
        f: f64,
        eigen_residual: f64,
        hjb_residual: f64,
    }
    let g = grid(cfg)?;
    for &kappa in &cfg.kappa {
        for &a in &cfg.a {
            let s = solve_ergodic(a, kappa, g)?;
            let mut t = Table::new(&["x", "u", "m"]);
            for ((x, u), m) in g.nodes().iter().zip(s.u.values()).zip(s.m.values()) {
                t.push(vec![(*x).into(), (*u).into(), (*m).into()]);
            }
            let stem = format!("ergodic_{}_{}", tag(kappa), tag(a));
            out.table(&format!("{stem}.csv"), &t)?;
            out.json(
                &format!("{stem}.json"),
                &Header {
                    a,
                    kappa,
                    lambda: s.lambda,
                    ground_energy: s.ground_energy,
                    f: eval_f(&s),
                    eigen_residual: s.eigen_residual,
                    hjb_residual: s.hjb_residual,
                },
            )?;
            let mass = integrate(&s.m);
            out.check(
                &format!("{stem}.eigen_residual"),
                s.eigen_residual <= EIGEN_TOL,
                format!("{:e} <= {EIGEN_TOL:e}", s.eigen_residual),
            );
            out.check(&format!("{stem}.unit_mass"), (mass - 1.0).abs() <= 1e-12, format!("mass {mass}"));
        }
    }
    Ok(())
}

fn fmap(cfg: &RunConfig, out: &mut Outputs) -> Result<()> {
    let g = grid(cfg)?;
    for &kappa in &cfg.kappa {
        let table = sweep_fmap(kappa, cfg.samples, g)?;
        let mut order: Vec<usize> = (0..table.len()).collect();
        order.sort_by(|&i, &j| table.a_samples[i].total_cmp(&table.a_samples[j]));
        let mut t = Table::new(&["a", "F", "F_prime"]);
        for &i in &order {
            t.push(vec![table.a_samples[i].into(), table.f_values[i].into(), table.fprime_values[i].into()]);
        }
        out.table(&format!("fmap_{}.csv", tag(kappa)), &t)?;
        let monotone = order.windows(2).all(|w| table.f_values[w[1]] >= table.f_values[w[0]]);
        let positive = table.fprime_values.iter().all(|&d| d >= 0.0);
        out.check(&format!("fmap_{}.monotone", tag(kappa)), monotone && positive, "F nondecreasing and F' >= 0");
    }
    Ok(())
}

fn fixed_points(cfg: &RunConfig, out: &mut Outputs) -> Result<()> {
    let g = grid(cfg)?;
    let mut t = Table::new(&["kappa", "a", "kind", "residual"]);
    let mut reports = Vec::new();
    for &kappa in &cfg.kappa {
        let rep = find_fixed_points(&sweep_fmap(kappa, cfg.samples, g)?, g)?;
        for p in &rep.fixed_points {
            let kind = serde_json::to_value(p.kind)?.as_str().unwrap_or_default().to_string();
            t.push(vec![kappa.into(), p.a.into(), kind.as_str().into(), p.residual.into()]);
        }
        let worst = rep.fixed_points.iter().map(|p| p.residual.abs()).fold(0.0, f64::max);
        out.check(
            &format!("fixed_points_{}.residual", tag(kappa)),
            worst <= FIXED_POINT_TOL,
            format!("max |F(a) - a| = {worst:e}"),
        );
        let notes = if rep.notes.is_empty() { "no anomaly".to_string() } else { rep.notes.join("; ") };
        out.check(&format!("fixed_points_{}.consistent", tag(kappa)), !rep.anomaly, notes);
        reports.push(rep);
    }
    out.table("fixed_points.csv", &t)?;
    out.json("fixed_points.json", &reports)
}

fn threshold(cfg: &RunConfig, out: &mut Outputs) -> Result<()> {
    let g = grid(cfg)?;
    match estimate_threshold(&cfg.kappa, g, cfg.samples) {
        Ok(est) => {
            let mut t = Table::new(&["kappa", "fixed_points", "anomaly"]);
            for &(k, c, an) in &est.per_kappa {
                t.push(vec![k.into(), c.into(), an.into()]);
            }
            out.table("threshold.csv", &t)?;
            out.json("threshold.json", &est)?;
            out.check("threshold.found", true, format!("kappa0 = {}", est.kappa0));
        }
        Err(MfgError::ThresholdNotFound { counts }) => {
            let mut t = Table::new(&["kappa", "fixed_points", "anomaly"]);
            for &(k, c) in &counts {
                t.push(vec![k.into(), c.into(), "unknown".into()]);
            }
            out.table("threshold.csv", &t)?;
            out.check("threshold.found", false, "largest sampled kappa lacks the three-point structure");
        }
        Err(e) => return Err(e.into()),
    }
    Ok(())
}

fn dynamic(cfg: &RunConfig, out: &mut Outputs) -> Result<()> {
    let g = grid(cfg)?;
    let kappa = cfg.kappa0();
    let st = self_organizing_state(kappa, g, cfg.samples)?;
    let m0 = perturbed_density(&st, cfg.perturb)?;
    let mut p = MfgParams::new(kappa, cfg.horizon, g);
    if let Some(dt) = cfg.dt {
        p.dt = dt;
    }
    p.theta = cfg.theta;
    p.tol = cfg.tol;
    let traj = solve_mfg(&m0, &st.u, &p)?;
    let dev = compute_phi(&traj, &st)?;
    let c = StabilityConstants::from_stationary(&st)?;
    let hyp = monitor_hypothesis(&traj, &st, &c);

    let mut t = Table::new(&["t", "coupling", "mass", "phi", "max_ratio"]);
    for k in 0..traj.times.len() {
        t.push(vec![
            traj.times[k].into(),
            traj.coupling[k].into(),
            integrate(&traj.m[k]).into(),
            dev.phi[k].into(),
            hyp.ratios[k].into(),
        ]);
    }
    out.table("dynamic.csv", &t)?;
    let mid = traj.times.len() / 2;
    let last = traj.times.len() - 1;
    let mut f = Table::new(&["x", "m_bar", "m_0", "m_mid", "m_T", "u_0", "u_mid", "u_T"]);
    for (i, x) in g.nodes().into_iter().enumerate() {
        f.push(vec![
            x.into(),
            st.m.values()[i].into(),
            traj.m[0].values()[i].into(),
            traj.m[mid].values()[i].into(),
            traj.m[last].values()[i].into(),
            traj.u[0].values()[i].into(),
            traj.u[mid].values()[i].into(),
            traj.u[last].values()[i].into(),
        ]);
    }
    out.table("fields.csv", &f)?;
    let mut hist = Table::new(&["iteration", "residual"]);
    for (i, r) in traj.residual_history.iter().enumerate() {
        hist.push(vec![(i + 1).into(), (*r).into()]);
    }
    out.table("picard.csv", &hist)?;
    out.check("dynamic.converged", traj.converged, format!("{} iterations", traj.iterations));
    out.check("dynamic.mass", traj.max_mass_drift <= 1e-13, format!("max drift per step {:e}", traj.max_mass_drift));
    out.check("dynamic.positivity", traj.min_density > 0.0, format!("min density {:e}", traj.min_density));
    Ok(())
}

fn turnpike(cfg: &RunConfig, out: &mut Outputs) -> Result<()> {
    let tc = TurnpikeConfig {
        kappa: cfg.kappa0(),
        horizon: cfg.horizon,
        n_cells: cfg.n_cells,
        perturbation: cfg.perturb,
        dt: cfg.dt,
        theta: cfg.theta,
        tol: cfg.tol,
        pairs: cfg.pairs,
        seed: cfg.seed,
        fmap_samples: cfg.samples,
        ..TurnpikeConfig::default()
    };
    let run = run_turnpike(&tc)?;
    let r = &run.report;
    let mut t = Table::new(&["t", "s", "phi", "phi_physical", "max_ratio", "hypothesis_ok"]);
    for k in 0..run.trajectory.times.len() {
        t.push(vec![
            run.trajectory.times[k].into(),
            run.deviation.times[k].into(),
            run.deviation.phi[k].into(),
            run.deviation.phi_physical[k].into(),
            r.hypothesis.ratios[k].into(),
            r.hypothesis.holds_at(k).into(),
        ]);
    }
    out.table("phi.csv", &t)?;
    let mut w = Table::new(&["s", "average", "bound", "holds"]);
    for win in &run.decay_empirical.windows {
        w.push(vec![win.t.into(), win.average.into(), win.bound.into(), win.holds.into()]);
    }
    out.table("windows.csv", &w)?;
    out.json("report.json", r)?;

    let omega = r.omega_fit.unwrap_or(f64::NAN);
    out.check("turnpike.converged", r.converged, format!("{} iterations", r.iterations));
    out.check(
        "turnpike.hypothesis",
        r.hypothesis.holds_all,
        format!("max m/m_bar {} vs {}", r.hypothesis.max_ratio, r.hypothesis.threshold),
    );
    out.check(
        "turnpike.integral_inequality",
        r.integral_inequality.holds,
        format!("{} violations in {} pairs", r.integral_inequality.violations, r.integral_inequality.pairs),
    );
    out.check(
        "turnpike.window_lemma",
        r.decay_empirical.holds,
        format!("C = {}, worst ratio {}", r.decay_empirical.c, r.decay_empirical.worst_ratio),
    );
    out.check("turnpike.windowed_bound", r.windowed_bound.holds, format!("worst ratio {}", r.windowed_bound.worst_ratio));
    out.check("turnpike.moment_bound", r.moment_bound.holds, format!("worst ratio {}", r.moment_bound.worst_ratio));
    out.check(
        "turnpike.energy_inequality",
        r.energy_inequality.holds,
        format!("worst ratio {}", r.energy_inequality.worst_ratio),
    );
    out.check("turnpike.duality", r.duality.holds, format!("{:e} <= {:e}", r.duality.max_residual, r.duality.tolerance));
    out.check("turnpike.decay_rate", omega > 0.0, format!("omega_fit = {omega}"));
    Ok(())
}

fn constants(cfg: &RunConfig, out: &mut Outputs) -> Result<()> {
    #[derive(Serialize)]
    struct Lyapunov {
        kappa: f64,
        ell: f64,
        radius: f64,
        beta: f64,
        gamma: f64,
        feasible: bool,
    }
    let g = grid(cfg)?;
    let mut t = Table::new(&[
        "kappa", "a_bar", "c_p", "q", "c_dom", "c_turnpike", "omega", "c_integral", "lyapunov_radius", "lyapunov_beta",
    ]);
    let mut lyap = Vec::new();
    for &kappa in &cfg.kappa {
        let st = self_organizing_state(kappa, g, cfg.samples)?;
        let c = StabilityConstants::from_stationary(&st)?;
        let r = rescale(&st);
        let ell = st.ground_energy / kappa.sqrt();
        let radius = lyapunov_radius(ell, 1.0 - st.a);
        let l = verify_lyapunov(&r.grid, r.w.values(), radius)?;
        t.push(vec![
            kappa.into(),
            st.a.into(),
            c.c_p.into(),
            c.q.into(),
            c.c_dom.into(),
            c.c_turnpike.into(),
            c.omega.into(),
            c.c_integral.into(),
            radius.into(),
            l.beta.into(),
        ]);
        out.check(&format!("lyapunov_{}", tag(kappa)), l.feasible, format!("beta = {}", l.beta));
        lyap.push(Lyapunov { kappa, ell, radius, beta: l.beta, gamma: l.gamma, feasible: l.feasible });
    }
    out.table("constants.csv", &t)?;
    out.json("lyapunov.json", &lyap)?;

    let mut inputs = Vec::new();
    for &kappa in &cfg.kappa {
        for &a in &cfg.a {
            inputs.push(solve_linearized(&solve_ergodic(a, kappa, g)?));
        }
    }
    let env = fit_envelopes(&inputs)?;
    out.json("envelopes.json", &env)?;
    out.check(
        "envelopes.feasible",
        env.feasible,
        format!(
            "slacks {:e} / {:e} / {:e}, ell {} vs {}",
            env.value_slack,
            env.density_slack,
            env.linearized_slack,
            env.ell_fit,
            bump_ell()
        ),
    );
    Ok(())
}

fn lemmas(cfg: &RunConfig, out: &mut Outputs) -> Result<()> {
    let rep = lemma_suites(cfg.seed)?;
    let mut t = Table::new(&["suite", "case", "parameter", "passed"]);
    for c in &rep.cases {
        t.push(vec![c.suite.into(), c.case.into(), c.parameter.into(), c.passed.into()]);
    }
    out.table("lemmas.csv", &t)?;
    for suite in ["cosh", "piecewise_linear", "zero_decay", "zero_pointwise"] {
        let cases: Vec<_> = rep.cases.iter().filter(|c| c.suite == suite).collect();
        let passed = cases.iter().filter(|c| c.passed).count();
        out.check(&format!("lemmas.{suite}"), passed == cases.len(), format!("{passed}/{}", cases.len()));
    }
    Ok(())
}
