//! Deterministic CSV and JSON writers, content digests and the run manifest.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::RunConfig;

/// `{:.16e}`: 17 significant digits, enough to round-trip every `f64`.
pub fn fmt_num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        format!("{x}")
    }
}

/// Comma-separated table with a header row and LF line endings.
#[derive(Debug, Clone)]
pub struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

pub enum Cell {
    Num(f64),
    Int(usize),
    Text(String),
    Bool(bool),
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x)
    }
}

impl From<bool> for Cell {
    fn from(x: bool) -> Self {
        Cell::Bool(x)
    }
}

impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Cell::Text(x.to_string())
    }
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.header.len(), "row width");
        self.rows.push(
            row.into_iter()
                .map(|c| match c {
                    Cell::Num(x) => fmt_num(x),
                    Cell::Int(i) => i.to_string(),
                    Cell::Text(s) => s,
                    Cell::Bool(b) => b.to_string(),
                })
                .collect(),
        );
    }

    pub fn render(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for r in &self.rows {
            out.push_str(&r.join(","));
            out.push('\n');
        }
        out
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct FileEntry {
    pub name: String,
    pub bytes: usize,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckEntry {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

/// Collects outputs of a run in `out_dir`.
#[derive(Debug)]
pub struct Outputs {
    dir: PathBuf,
    files: Vec<FileEntry>,
    checks: Vec<CheckEntry>,
}

impl Outputs {
    pub fn create(dir: &Path) -> Result<Self> {
        std::fs::create_dir_all(dir).with_context(|| format!("cannot create output directory {}", dir.display()))?;
        Ok(Self { dir: dir.to_path_buf(), files: Vec::new(), checks: Vec::new() })
    }

    pub fn write(&mut self, name: &str, contents: &str) -> Result<()> {
        let path = self.dir.join(name);
        std::fs::write(&path, contents).with_context(|| format!("cannot write {}", path.display()))?;
        self.files.push(FileEntry {
            name: name.to_string(),
            bytes: contents.len(),
            sha256: hex::encode(Sha256::digest(contents.as_bytes())),
        });
        Ok(())
    }

    pub fn table(&mut self, name: &str, t: &Table) -> Result<()> {
        self.write(name, &t.render())
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let mut s = serde_json::to_string_pretty(value)?;
        s.push('\n');
        self.write(name, &s)
    }

    pub fn check(&mut self, name: &str, passed: bool, detail: impl Into<String>) {
        self.checks.push(CheckEntry { name: name.to_string(), passed, detail: detail.into() });
    }

    pub fn failed(&self) -> Vec<&CheckEntry> {
        self.checks.iter().filter(|c| !c.passed).collect()
    }

    /// Writes `manifest.json`, which lists every other file with its digest.
    pub fn finish(mut self, cfg: &RunConfig, wall_seconds: f64) -> Result<Vec<CheckEntry>> {
        #[derive(Serialize)]
        struct Manifest<'a> {
            command: &'a str,
            inputs: &'a RunConfig,
            cli_version: &'a str,
            library_version: &'a str,
            wall_time_seconds: f64,
            files: &'a [FileEntry],
            checks: &'a [CheckEntry],
            passed: bool,
        }
        let failed = self.failed().is_empty();
        let m = Manifest {
            command: cfg.command.name(),
            inputs: cfg,
            cli_version: env!("CARGO_PKG_VERSION"),
            library_version: kuramoto_mfg::VERSION,
            wall_time_seconds: wall_seconds,
            files: &self.files,
            checks: &self.checks,
            passed: failed,
        };
        let mut s = serde_json::to_string_pretty(&m)?;
        s.push('\n');
        let path = self.dir.join("manifest.json");
        std::fs::write(&path, s).with_context(|| format!("cannot write {}", path.display()))?;
        Ok(std::mem::take(&mut self.checks))
    }
}

/// `100` for whole numbers, otherwise the shortest round-trip form, for file names.
pub fn tag(x: f64) -> String {
    let mut s = String::new();
    write!(s, "{x}").expect("string write");
    s
}
