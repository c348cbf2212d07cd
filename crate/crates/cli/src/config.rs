//! Run configuration: a line-based `key = value` file, then command-line
//! overrides, then validation.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use serde::Serialize;

/// Environment variable consulted for the default output directory.
pub const OUT_ENV: &str = "KURAMOTO_MFG_OUT";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Ergodic,
    Fmap,
    FixedPoints,
    Threshold,
    Dynamic,
    Turnpike,
    Constants,
    Lemmas,
}

impl Command {
    pub const ALL: [Command; 8] = [
        Command::Ergodic,
        Command::Fmap,
        Command::FixedPoints,
        Command::Threshold,
        Command::Dynamic,
        Command::Turnpike,
        Command::Constants,
        Command::Lemmas,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::Ergodic => "ergodic",
            Command::Fmap => "fmap",
            Command::FixedPoints => "fixed-points",
            Command::Threshold => "threshold",
            Command::Dynamic => "dynamic",
            Command::Turnpike => "turnpike",
            Command::Constants => "constants",
            Command::Lemmas => "lemmas",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| anyhow!("unknown command `{s}`; expected one of {}", Self::names()))
    }

    fn names() -> String {
        Self::ALL.map(|c| c.name()).join(", ")
    }

    fn default_kappas(self) -> Vec<f64> {
        match self {
            Command::Threshold => vec![1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0],
            Command::Constants => vec![100.0, 400.0, 1600.0],
            _ => vec![100.0],
        }
    }

    fn default_n(self) -> usize {
        match self {
            Command::Dynamic | Command::Turnpike => 256,
            Command::Threshold => 512,
            _ => 1024,
        }
    }

    fn default_a(self) -> Vec<f64> {
        match self {
            Command::Constants => vec![0.0, 0.5, 0.9],
            _ => vec![0.0],
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Recognized keys, with the accepted aliases.
const KEYS: [(&str, &[&str]); 13] = [
    ("command", &[]),
    ("kappa", &[]),
    ("a", &[]),
    ("n_cells", &["n"]),
    ("T", &["horizon"]),
    ("dt", &[]),
    ("theta", &[]),
    ("tol", &[]),
    ("seed", &[]),
    ("out_dir", &["out"]),
    ("samples", &[]),
    ("perturb", &[]),
    ("pairs", &[]),
];

fn canonical(key: &str) -> Result<&'static str> {
    KEYS.iter()
        .find(|(k, aliases)| *k == key || aliases.contains(&key))
        .map(|(k, _)| *k)
        .ok_or_else(|| anyhow!("unknown configuration key `{key}`"))
}

/// Raw `key = value` pairs, later entries overriding earlier ones.
#[derive(Debug, Clone, Default)]
pub struct RawConfig {
    entries: BTreeMap<&'static str, String>,
}

impl RawConfig {
    pub fn set(&mut self, key: &str, value: impl Into<String>) -> Result<()> {
        self.entries.insert(canonical(key)?, value.into());
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    /// Parses a config file. `#` starts a comment; blank lines are skipped.
    pub fn parse_text(text: &str) -> Result<Self> {
        let mut raw = Self::default();
        for (no, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| anyhow!("line {}: expected `key = value`", no + 1))?;
            raw.set(k.trim(), v.trim()).with_context(|| format!("line {}", no + 1))?;
        }
        Ok(raw)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("cannot read config {}", path.display()))?;
        Self::parse_text(&text).with_context(|| format!("in config {}", path.display()))
    }

    pub fn merge(&mut self, other: RawConfig) {
        self.entries.extend(other.entries);
    }
}

/// Validated configuration of one run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: Command,
    pub kappa: Vec<f64>,
    pub a: Vec<f64>,
    pub n_cells: usize,
    #[serde(rename = "T")]
    pub horizon: f64,
    pub dt: Option<f64>,
    pub theta: f64,
    pub tol: f64,
    pub seed: u64,
    pub out_dir: PathBuf,
    pub samples: usize,
    pub perturb: f64,
    pub pairs: usize,
}

fn parse_f64(key: &str, v: &str) -> Result<f64> {
    v.trim().parse::<f64>().map_err(|_| anyhow!("`{key}` expects a number, got `{v}`"))
}

fn parse_list(key: &str, v: &str) -> Result<Vec<f64>> {
    let out: Vec<f64> = v.split(',').map(|s| parse_f64(key, s)).collect::<Result<_>>()?;
    if out.is_empty() {
        bail!("`{key}` is empty");
    }
    Ok(out)
}

fn parse_usize(key: &str, v: &str) -> Result<usize> {
    v.trim().parse::<usize>().map_err(|_| anyhow!("`{key}` expects a nonnegative integer, got `{v}`"))
}

impl RunConfig {
    /// Resolves defaults and checks ranges. `env_out` is the value of [`OUT_ENV`].
    pub fn resolve(raw: &RawConfig, env_out: Option<String>) -> Result<Self> {
        let command = Command::parse(raw.get("command").ok_or_else(|| anyhow!("no command given"))?)?;
        let list = |key: &str, default: Vec<f64>| raw.get(key).map_or(Ok(default), |v| parse_list(key, v));
        let num = |key: &str, default: f64| raw.get(key).map_or(Ok(default), |v| parse_f64(key, v));
        let int = |key: &str, default: usize| raw.get(key).map_or(Ok(default), |v| parse_usize(key, v));
        let cfg = Self {
            command,
            kappa: list("kappa", command.default_kappas())?,
            a: list("a", command.default_a())?,
            n_cells: int("n_cells", command.default_n())?,
            horizon: num("T", 2.0)?,
            dt: raw.get("dt").map(|v| parse_f64("dt", v)).transpose()?,
            theta: num("theta", 0.5)?,
            tol: num("tol", 1e-10)?,
            seed: raw
                .get("seed")
                .map_or(Ok(7), |v| v.trim().parse::<u64>().map_err(|_| anyhow!("`seed` expects an integer, got `{v}`")))?,
            out_dir: raw
                .get("out_dir")
                .map(String::from)
                .or(env_out)
                .map_or_else(|| PathBuf::from("kmfg-out"), PathBuf::from),
            samples: int("samples", 41)?,
            perturb: num("perturb", 0.05)?,
            pairs: int("pairs", 100)?,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<()> {
        if let Some(k) = self.kappa.iter().find(|k| !(**k > 0.0 && k.is_finite())) {
            bail!("kappa must be positive, got {k}");
        }
        if let Some(a) = self.a.iter().find(|a| !(0.0..=2.0).contains(*a)) {
            bail!("a must lie in [0, 2], got {a}");
        }
        if self.n_cells < 8 || !self.n_cells.is_multiple_of(2) {
            bail!("n_cells must be even and at least 8, got {}", self.n_cells);
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            bail!("T must be positive, got {}", self.horizon);
        }
        if let Some(dt) = self.dt {
            if !(dt > 0.0 && dt <= self.horizon) {
                bail!("dt must lie in (0, T], got {dt}");
            }
        }
        if !(self.theta > 0.0 && self.theta <= 1.0) {
            bail!("theta must lie in (0, 1], got {}", self.theta);
        }
        if self.tol.is_nan() || self.tol <= 0.0 {
            bail!("tol must be positive, got {}", self.tol);
        }
        if self.samples < 11 {
            bail!("samples must be at least 11, got {}", self.samples);
        }
        if !(0.0..1.0).contains(&self.perturb) {
            bail!("perturb must lie in [0, 1), got {}", self.perturb);
        }
        if self.command == Command::Threshold && self.kappa.len() < 2 {
            bail!("threshold needs at least two kappa values");
        }
        Ok(())
    }

    /// First entry of the `κ` list, for commands that take a single value.
    pub fn kappa0(&self) -> f64 {
        self.kappa[0]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_then_override() {
        let mut raw = RawConfig::parse_text("command = fmap\nkappa = 50, 100 # two\n\nn = 64\n").unwrap();
        let mut cli = RawConfig::default();
        cli.set("kappa", "400").unwrap();
        raw.merge(cli);
        let cfg = RunConfig::resolve(&raw, None).unwrap();
        assert_eq!(cfg.command, Command::Fmap);
        assert_eq!(cfg.kappa, vec![400.0]);
        assert_eq!(cfg.n_cells, 64);
        assert_eq!(cfg.out_dir, PathBuf::from("kmfg-out"));
    }

    #[test]
    fn env_sets_default_out_dir_only() {
        let raw = RawConfig::parse_text("command = lemmas").unwrap();
        let cfg = RunConfig::resolve(&raw, Some("/tmp/x".into())).unwrap();
        assert_eq!(cfg.out_dir, PathBuf::from("/tmp/x"));
        let raw = RawConfig::parse_text("command = lemmas\nout_dir = y").unwrap();
        let cfg = RunConfig::resolve(&raw, Some("/tmp/x".into())).unwrap();
        assert_eq!(cfg.out_dir, PathBuf::from("y"));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(RawConfig::parse_text("colour = red").is_err());
        assert!(RawConfig::parse_text("kappa 3").is_err());
        for text in [
            "command = nope",
            "command = fmap\nkappa = -1",
            "command = fmap\nn = 9",
            "command = dynamic\ntheta = 0",
            "command = dynamic\ntol = 0",
            "command = fmap\nkappa = abc",
            "command = threshold\nkappa = 4",
            "kappa = 4",
        ] {
            let raw = RawConfig::parse_text(text).unwrap();
            assert!(RunConfig::resolve(&raw, None).is_err(), "{text}");
        }
    }
}
