//! Command-line front end: `moments`, `scan`, `minimize` and `certify`.
//!
//! Exit status is 0 when every requested check passes, 1 when a report was
//! written with failures or error entries, and 2 for an invalid
//! configuration.

pub mod config;
pub mod report;

use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

pub use config::{Overrides, ResolvedRun, RunConfig, RunTolerances, SampleTarget, Samples};
pub use report::{CriticalPlaneEntry, ErrorEntry, ReportBody, RunReport, ScanEntry, SummaryRow, Timing};

use crate::certify::{anchors, bounds_report, critical_plane_checks, tuple_report, Check, CheckKind, Sign};
use crate::error::{Error, Result};
use crate::grassmann::minimize_sk;
use crate::kscalar::positivity_scan;
use crate::moments::{mc_average, McEstimate, MomentTable};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "kscal", version, about = "k-scalar curvature of Kähler curvature tensors")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exact sphere moments with a Monte Carlo cross-check.
    Moments(MomentsArgs),
    /// Sample S_k over Haar-random planes.
    Scan(RunArgs),
    /// Minimize S_k over the Grassmannian.
    Minimize(RunArgs),
    /// Minimize, then certify bounds and tuple positivity at the minimizer.
    Certify(RunArgs),
}

#[derive(Debug, Args)]
pub struct MomentsArgs {
    /// Complex dimension of the sphere.
    #[arg(long, default_value_t = 2)]
    pub k: usize,
    /// Total degree `|α| + |β|` of the tabulated monomials.
    #[arg(long, default_value_t = 4)]
    pub max_order: usize,
    /// Monte Carlo samples.
    #[arg(long, default_value_t = 200_000)]
    pub samples: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// JSON run configuration.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Plane ranks, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub k: Option<Vec<usize>>,
    /// Form degrees, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub p: Option<Vec<usize>>,
    /// Compact model, e.g. `constant_hsc:m=4,c=1` or `perturbed:m=3,epsilon=0.05,seed=7`.
    #[arg(long)]
    pub model: Option<String>,
    /// Curvature tensor JSON file.
    #[arg(long)]
    pub tensor_file: Option<PathBuf>,
    /// Directory receiving run directories.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Planes for `scan`, restarts for `minimize`, probes for `certify`.
    #[arg(long)]
    pub samples: Option<u64>,
    /// Gradient, identity and slack tolerance.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Sign of S_k to certify: `positive` or `negative`.
    #[arg(long, value_parser = parse_sign)]
    pub sign: Option<Sign>,
}

fn parse_sign(text: &str) -> std::result::Result<Sign, String> {
    match text {
        "positive" | "+" => Ok(Sign::Positive),
        "negative" | "-" => Ok(Sign::Negative),
        other => Err(format!("expected `positive` or `negative`, got `{other}`")),
    }
}

impl RunArgs {
    pub fn overrides(&self) -> Overrides {
        Overrides {
            seed: self.seed,
            k: self.k.clone(),
            p: self.p.clone(),
            model: self.model.clone(),
            tensor_file: self.tensor_file.clone(),
            out: self.out.clone(),
            sign: self.sign,
            samples: self.samples,
            tol: self.tol,
        }
    }

    /// Defaults, then the config file, then flags; validated.
    pub fn resolve(&self, target: SampleTarget) -> Result<ResolvedRun> {
        let base = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        base.apply(&self.overrides(), target)?.resolve()
    }
}

/// One tabulated monomial `Π |z_i|^{2α_i}`.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentRow {
    pub alpha: Vec<u32>,
    pub exact: num_rational::BigRational,
    pub value: f64,
    pub mc: McEstimate,
}

impl MomentRow {
    /// Monte Carlo mean within four standard errors of the exact value.
    pub fn agrees(&self) -> bool {
        self.mc.agrees_with(self.value, 4.0)
    }

    pub fn monomial(&self) -> String {
        let parts: Vec<String> = self
            .alpha
            .iter()
            .enumerate()
            .filter(|(_, &a)| a > 0)
            .map(|(i, &a)| format!("|z{}|^{}", i + 1, 2 * a))
            .collect();
        if parts.is_empty() {
            "1".into()
        } else {
            parts.join(" ")
        }
    }
}

/// Every nonzero monomial of total degree `max_order` on the sphere of
/// `C^k`, exactly and by Monte Carlo. Odd degrees have no nonzero rows.
pub fn cmd_moments(k: usize, max_order: usize, samples: u64, seed: u64) -> Result<Vec<MomentRow>> {
    if k == 0 {
        return Err(Error::Config("k must be at least 1".into()));
    }
    if max_order % 2 == 1 {
        return Ok(Vec::new());
    }
    let half = max_order / 2;
    let table = MomentTable::new(k, half)?;
    table
        .iter()
        .filter(|(alpha, _)| alpha.iter().sum::<u32>() as usize == half)
        .enumerate()
        .map(|(i, (alpha, exact))| {
            let a = alpha.clone();
            let mc = mc_average(
                |z| a.iter().zip(z).map(|(&e, w)| w.norm_sqr().powi(e as i32)).product(),
                k,
                samples,
                seed.wrapping_add(i as u64),
            )?;
            let value = num_traits::ToPrimitive::to_f64(exact).unwrap_or(f64::NAN);
            Ok(MomentRow { alpha: alpha.clone(), exact: exact.clone(), value, mc })
        })
        .collect()
}

struct Stopwatch {
    start: Instant,
    timings: Vec<Timing>,
}

impl Stopwatch {
    fn new() -> Self {
        Self { start: Instant::now(), timings: Vec::new() }
    }

    fn lap(&mut self, stage: String) {
        let now = Instant::now();
        self.timings.push(Timing { stage, seconds: (now - self.start).as_secs_f64() });
        self.start = now;
    }
}

/// Scan every requested rank; the route-agreement check compares the trace
/// and moment evaluations on every sampled plane.
pub fn cmd_scan(run: &ResolvedRun) -> Result<RunReport> {
    let c = &run.config;
    let mut body = ReportBody::new("scan", c.clone(), &run.label, run.dim);
    let mut clock = Stopwatch::new();
    for &k in &c.k {
        match positivity_scan(&run.model, &run.label, k, c.samples.planes, c.samples.points, c.seed) {
            Ok(scan) => {
                let check = Check::from_probes(
                    "scan.route_agreement",
                    anchors::ROUTE_AGREEMENT,
                    CheckKind::Identity,
                    c.tolerances.identity,
                    scan.samples.iter().map(|s| (s.route_residual, 0.0)),
                );
                body.scans.push(ScanEntry { scan, checks: vec![check] });
            }
            Err(e) => body.errors.push(ErrorEntry::new(&run.label, k, None, &e)),
        }
        clock.lap(format!("scan k={k}"));
    }
    body.finish(clock.timings)
}

/// Minimize `S_k` of `sign·R` at the model's base point for every requested rank.
pub fn cmd_minimize(run: &ResolvedRun) -> Result<RunReport> {
    let c = &run.config;
    let mut body = ReportBody::new("minimize", c.clone(), &run.label, run.dim);
    let mut clock = Stopwatch::new();
    let oriented = c.sign.orient(&run.model.tensor()?);
    let opts = run.minimize_options();
    let tol = c.tolerances.checks();
    for &k in &c.k {
        match minimize_sk(&oriented, k, &opts) {
            Ok(cp) => {
                if !cp.converged {
                    let e = Error::Numeric(format!(
                        "descent stopped at gradient norm {:.3e} after {} iterations",
                        cp.gradient_norm, cp.iterations
                    ));
                    body.errors.push(ErrorEntry::new(&run.label, k, None, &e));
                }
                body.critical_planes.push(CriticalPlaneEntry {
                    model: run.label.clone(),
                    k,
                    sign: c.sign,
                    plane: cp.record(),
                    checks: critical_plane_checks(&cp, &tol),
                });
            }
            Err(e) => body.errors.push(ErrorEntry::new(&run.label, k, None, &e)),
        }
        clock.lap(format!("minimize k={k}"));
    }
    body.finish(clock.timings)
}

/// For every rank: minimize `S_k` of `sign·R`, certify the bounds at the
/// minimizer (one report with `p` unset), then the tuple checks for every
/// requested degree. A sign that does not hold becomes a precondition error.
pub fn cmd_certify(run: &ResolvedRun) -> Result<RunReport> {
    let c = &run.config;
    let mut body = ReportBody::new("certify", c.clone(), &run.label, run.dim);
    let mut clock = Stopwatch::new();
    let oriented = c.sign.orient(&run.model.tensor()?);
    let opts = run.vanishing_options();
    for &k in &c.k {
        let cp = match minimize_sk(&oriented, k, &opts.minimize) {
            Ok(cp) => cp,
            Err(e) => {
                body.errors.push(ErrorEntry::new(&run.label, k, None, &e));
                continue;
            }
        };
        match bounds_report(&oriented, &run.label, &cp, c.sign, &opts.probes) {
            Ok(report) => body.certifications.push(report),
            Err(e) => {
                body.errors.push(ErrorEntry::new(&run.label, k, None, &e));
                clock.lap(format!("certify k={k}"));
                continue;
            }
        }
        for p in run.degrees(k) {
            match tuple_report(&oriented, &run.label, &cp, p, c.sign, &opts) {
                Ok(report) => body.certifications.push(report),
                Err(e) => body.errors.push(ErrorEntry::new(&run.label, k, Some(p), &e)),
            }
        }
        clock.lap(format!("certify k={k}"));
    }
    body.finish(clock.timings)
}

fn print_moments(args: &MomentsArgs) -> Result<()> {
    let rows = cmd_moments(args.k, args.max_order, args.samples, args.seed)?;
    println!("# sphere S^{} in C^{}, degree {}, {} MC samples", 2 * args.k - 1, args.k, args.max_order, args.samples);
    println!("{:<28} {:>14} {:>20} {:>20} {:>12} {:>7}", "monomial", "exact", "value", "mc_mean", "mc_stderr", "agree");
    for row in &rows {
        println!(
            "{:<28} {:>14} {:>20.15} {:>20.15} {:>12.3e} {:>7}",
            row.monomial(),
            row.exact.to_string(),
            row.value,
            row.mc.mean,
            row.mc.stderr,
            if row.agrees() { "yes" } else { "no" }
        );
    }
    Ok(())
}

fn summarize(report: &RunReport, dir: &std::path::Path) {
    let rows = report.body.rows();
    let failed: Vec<&SummaryRow> = rows.iter().filter(|r| !r.pass).collect();
    println!("report: {}", dir.join("report.json").display());
    println!("hash:   {}", report.canonical_hash);
    println!("checks: {} passed, {} failed", rows.len() - failed.len(), failed.len());
    for r in failed {
        println!(
            "  FAIL k={} p={} {} [{}]: value {:.6e} bound {:.6e} slack {:.3e}",
            r.k,
            r.p.map(|p| p.to_string()).unwrap_or_else(|| "-".into()),
            r.check,
            r.anchor,
            r.value,
            r.bound,
            r.slack
        );
    }
    for e in &report.body.errors {
        println!("  ERROR k={} p={:?} {}: {}", e.k, e.p, e.kind, e.message);
    }
}

/// Runs a parsed command line and returns the process exit status.
pub fn run(cli: Cli) -> i32 {
    let (args, target, command): (&RunArgs, SampleTarget, fn(&ResolvedRun) -> Result<RunReport>) = match &cli.command {
        Command::Moments(args) => {
            return match print_moments(args) {
                Ok(()) => EXIT_OK,
                Err(e) => {
                    eprintln!("error: {e}");
                    EXIT_CONFIG
                }
            }
        }
        Command::Scan(a) => (a, SampleTarget::Planes, cmd_scan),
        Command::Minimize(a) => (a, SampleTarget::Restarts, cmd_minimize),
        Command::Certify(a) => (a, SampleTarget::Probes, cmd_certify),
    };
    let resolved = match args.resolve(target) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
    };
    let outcome = command(&resolved).and_then(|report| {
        let dir = report.persist(&resolved.config.out)?;
        Ok((report, dir))
    });
    match outcome {
        Ok((report, dir)) => {
            summarize(&report, &dir);
            report.exit_code()
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_FAILED
        }
    }
}
