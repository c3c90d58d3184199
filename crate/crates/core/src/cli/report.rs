//! Run reports: a canonical body hashed with SHA-256, wall-clock timings kept
//! outside the hash, and append-only run directories.

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::config::RunConfig;
use crate::certify::{CertificationReport, Check, Sign};
use crate::error::{Error, Result};
use crate::grassmann::CriticalPlaneRecord;
use crate::kscalar::ScanResult;

pub const SCHEMA: &str = "kscal-report/1";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanEntry {
    pub scan: ScanResult,
    pub checks: Vec<Check>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriticalPlaneEntry {
    pub model: String,
    pub k: usize,
    pub sign: Sign,
    pub plane: CriticalPlaneRecord,
    pub checks: Vec<Check>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorEntry {
    pub model: String,
    pub k: usize,
    pub p: Option<usize>,
    pub kind: String,
    pub message: String,
}

impl ErrorEntry {
    pub fn new(model: &str, k: usize, p: Option<usize>, err: &Error) -> Self {
        let kind = match err {
            Error::Domain(_) => "domain",
            Error::Model(_) => "model",
            Error::Numeric(_) => "numeric",
            Error::Schema(_) => "schema",
            Error::Precondition(_) => "precondition",
            Error::Config(_) => "config",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
        };
        Self { model: model.to_string(), k, p, kind: kind.to_string(), message: err.to_string() }
    }
}

/// Everything that is reproducible from `(config, seed, version)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportBody {
    pub schema: String,
    pub tool_version: String,
    pub command: String,
    pub config: RunConfig,
    pub model: String,
    pub dimension: usize,
    pub scans: Vec<ScanEntry>,
    pub critical_planes: Vec<CriticalPlaneEntry>,
    pub certifications: Vec<CertificationReport>,
    pub errors: Vec<ErrorEntry>,
    pub all_passed: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub stage: String,
    pub seconds: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    #[serde(flatten)]
    pub body: ReportBody,
    /// SHA-256 of the JSON serialization of `body`.
    pub canonical_hash: String,
    pub timings: Vec<Timing>,
}

pub const CSV_COLUMNS: [&str; 9] = ["model", "k", "p", "check", "anchor", "value", "bound", "slack", "pass"];

/// One CSV row per `(model, k, p, check)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub model: String,
    pub k: usize,
    pub p: Option<usize>,
    pub check: String,
    pub anchor: String,
    pub value: f64,
    pub bound: f64,
    pub slack: f64,
    pub pass: bool,
}

impl ReportBody {
    pub fn new(command: &str, config: RunConfig, model: &str, dimension: usize) -> Self {
        Self {
            schema: SCHEMA.to_string(),
            tool_version: TOOL_VERSION.to_string(),
            command: command.to_string(),
            config,
            model: model.to_string(),
            dimension,
            scans: Vec::new(),
            critical_planes: Vec::new(),
            certifications: Vec::new(),
            errors: Vec::new(),
            all_passed: false,
        }
    }

    pub fn rows(&self) -> Vec<SummaryRow> {
        let row = |k: usize, p: Option<usize>, c: &Check| SummaryRow {
            model: self.model.clone(),
            k,
            p,
            check: c.name.clone(),
            anchor: c.anchor.clone(),
            value: c.value,
            bound: c.bound,
            slack: c.slack,
            pass: c.pass,
        };
        let mut out = Vec::new();
        for s in &self.scans {
            out.extend(s.checks.iter().map(|c| row(s.scan.k, None, c)));
        }
        for cp in &self.critical_planes {
            out.extend(cp.checks.iter().map(|c| row(cp.k, None, c)));
        }
        for cert in &self.certifications {
            out.extend(cert.checks.iter().map(|c| row(cert.k, cert.p, c)));
        }
        out
    }

    fn checks(&self) -> impl Iterator<Item = &Check> {
        self.scans
            .iter()
            .flat_map(|s| &s.checks)
            .chain(self.critical_planes.iter().flat_map(|c| &c.checks))
            .chain(self.certifications.iter().flat_map(|c| &c.checks))
    }

    /// No error entries and every check passes.
    pub fn evaluate(&mut self) {
        self.all_passed = self.errors.is_empty() && self.checks().all(|c| c.pass);
    }

    pub fn canonical_hash(&self) -> Result<String> {
        let bytes = serde_json::to_vec(self)?;
        Ok(format!("{:x}", Sha256::digest(&bytes)))
    }

    pub fn finish(mut self, timings: Vec<Timing>) -> Result<RunReport> {
        self.evaluate();
        let canonical_hash = self.canonical_hash()?;
        Ok(RunReport { body: self, canonical_hash, timings })
    }
}

impl RunReport {
    /// Exit status: 0 when everything passed, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.body.all_passed {
            0
        } else {
            1
        }
    }

    /// Writes `report.json` and `summary.csv` into a fresh directory
    /// `<out>/<hash16>-<unix seconds>[-n]` and returns it. Existing run
    /// directories are never reused.
    pub fn persist(&self, out: &Path) -> Result<PathBuf> {
        std::fs::create_dir_all(out)?;
        let ts = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        let stem = format!("{}-{ts}", &self.canonical_hash[..16]);
        let dir = (0..)
            .map(|n| if n == 0 { out.join(&stem) } else { out.join(format!("{stem}-{n}")) })
            .find_map(|d| match std::fs::create_dir(&d) {
                Ok(()) => Some(Ok(d)),
                Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => None,
                Err(e) => Some(Err(e)),
            })
            .expect("unbounded search")?;
        let json = serde_json::to_string_pretty(self)?;
        std::fs::write(dir.join("report.json"), json + "\n")?;
        let mut w = csv::WriterBuilder::new()
            .has_headers(false)
            .from_path(dir.join("summary.csv"))
            .map_err(csv_error)?;
        w.write_record(CSV_COLUMNS).map_err(csv_error)?;
        for row in self.body.rows() {
            w.serialize(row).map_err(csv_error)?;
        }
        w.flush()?;
        Ok(dir)
    }
}

fn csv_error(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}
