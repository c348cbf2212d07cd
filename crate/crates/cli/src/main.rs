//! `kmfg`: runs the Kuramoto mean field game experiments and writes CSV/JSON
//! outputs plus a manifest.
//!
//! Exit status: 0 when every check passed, 2 when a check failed, 1 on usage
//! or input errors.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::Result;
use clap::Parser;

use config::{RawConfig, RunConfig, OUT_ENV};
use output::Outputs;

#[derive(Debug, Parser)]
#[command(name = "kmfg", version, about = "Kuramoto mean field game experiments")]
struct Cli {
    /// ergodic, fmap, fixed-points, threshold, dynamic, turnpike, constants or lemmas.
    command: Option<String>,
    /// `key = value` configuration file; flags override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Coupling strength, or a comma-separated list.
    #[arg(long, allow_hyphen_values = true)]
    kappa: Option<String>,
    /// Order parameter, or a comma-separated list.
    #[arg(long, allow_hyphen_values = true)]
    a: Option<String>,
    /// Number of grid cells (even, at least 8).
    #[arg(long = "n")]
    n_cells: Option<String>,
    /// Time horizon.
    #[arg(long = "T")]
    horizon: Option<String>,
    #[arg(long)]
    dt: Option<String>,
    /// Initial Picard damping in (0, 1].
    #[arg(long)]
    theta: Option<String>,
    #[arg(long)]
    tol: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    /// Output directory; defaults to $KURAMOTO_MFG_OUT, then ./kmfg-out.
    #[arg(long = "out")]
    out_dir: Option<String>,
    /// Samples of the map on [0, 1].
    #[arg(long)]
    samples: Option<String>,
    /// Relative size of the cos x perturbation of the initial density.
    #[arg(long)]
    perturb: Option<String>,
    /// Random pairs for the integral inequalities.
    #[arg(long)]
    pairs: Option<String>,
}

impl Cli {
    fn raw(&self) -> Result<RawConfig> {
        let mut raw = match &self.config {
            Some(p) => RawConfig::from_file(p)?,
            None => RawConfig::default(),
        };
        let mut flags = RawConfig::default();
        let pairs = [
            ("command", &self.command),
            ("kappa", &self.kappa),
            ("a", &self.a),
            ("n_cells", &self.n_cells),
            ("T", &self.horizon),
            ("dt", &self.dt),
            ("theta", &self.theta),
            ("tol", &self.tol),
            ("seed", &self.seed),
            ("out_dir", &self.out_dir),
            ("samples", &self.samples),
            ("perturb", &self.perturb),
            ("pairs", &self.pairs),
        ];
        for (k, v) in pairs {
            if let Some(v) = v {
                flags.set(k, v.as_str())?;
            }
        }
        raw.merge(flags);
        Ok(raw)
    }
}

enum Outcome {
    Passed,
    Failed(Vec<String>),
}

fn execute(cli: &Cli) -> Result<Outcome> {
    let cfg = RunConfig::resolve(&cli.raw()?, std::env::var(OUT_ENV).ok())?;
    let start = Instant::now();
    let mut out = Outputs::create(&cfg.out_dir)?;
    commands::run(&cfg, &mut out)?;
    let checks = out.finish(&cfg, start.elapsed().as_secs_f64())?;
    for c in &checks {
        println!("{} {}: {}", if c.passed { "ok  " } else { "FAIL" }, c.name, c.detail);
    }
    let failed: Vec<String> = checks.iter().filter(|c| !c.passed).map(|c| c.name.clone()).collect();
    Ok(if failed.is_empty() { Outcome::Passed } else { Outcome::Failed(failed) })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(&cli) {
        Ok(Outcome::Passed) => ExitCode::SUCCESS,
        Ok(Outcome::Failed(names)) => {
            eprintln!("check failed: {}", names.join(", "));
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
