//! Run configuration. Precedence: built-in defaults < JSON config file <
//! command-line flags.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::catalog::{MetricModel, ModelSpec, NamedPotential};
use crate::certify::{ProbeOptions, Sign, Tolerances, VanishingOptions};
use crate::error::{Error, Result};
use crate::grassmann::MinimizeOptions;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Samples {
    /// Haar planes per point in scans and in the descent warm start.
    pub planes: u64,
    /// Points sampled in potential charts; other models ignore it.
    pub points: u64,
    /// Random probes per check.
    pub probes: usize,
    /// Random descent restarts beyond the warm start.
    pub restarts: usize,
    /// Subsets enumerated exhaustively up to this count, sampled beyond.
    pub max_subsets: usize,
    /// Tuples sampled when the dimension is too large to enumerate them.
    pub tuples: usize,
}

impl Default for Samples {
    fn default() -> Self {
        Self { planes: 256, points: 1, probes: 200, restarts: 8, max_subsets: 512, tuples: 64 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunTolerances {
    /// Descent stops once the gradient norm is below this.
    pub gradient: f64,
    pub identity: f64,
    pub slack: f64,
    pub strict: f64,
    pub criticality: f64,
}

impl Default for RunTolerances {
    fn default() -> Self {
        let t = Tolerances::default();
        Self {
            gradient: 1e-8,
            identity: t.identity,
            slack: t.slack,
            strict: t.strict,
            criticality: t.criticality,
        }
    }
}

impl RunTolerances {
    pub fn checks(&self) -> Tolerances {
        Tolerances {
            identity: self.identity,
            slack: self.slack,
            strict: self.strict,
            criticality: self.criticality,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub model: Option<ModelSpec>,
    /// Label used in reports; derived from the model when absent.
    pub model_id: Option<String>,
    pub k: Vec<usize>,
    /// Form degrees for certification; `k..=m` for each `k` when absent.
    pub p: Option<Vec<usize>>,
    pub sign: Sign,
    pub seed: u64,
    pub samples: Samples,
    pub tolerances: RunTolerances,
    pub max_iter: usize,
    pub out: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            model: None,
            model_id: None,
            k: vec![2],
            p: None,
            sign: Sign::Positive,
            seed: 0,
            samples: Samples::default(),
            tolerances: RunTolerances::default(),
            max_iter: 10_000,
            out: PathBuf::from("runs"),
        }
    }
}

/// Command-line overrides; `None` keeps the config value.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub k: Option<Vec<usize>>,
    pub p: Option<Vec<usize>>,
    pub model: Option<String>,
    pub tensor_file: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub sign: Option<Sign>,
    /// Applied to the sample count the command consumes most.
    pub samples: Option<u64>,
    /// Applied to the gradient, identity and slack tolerances.
    pub tol: Option<f64>,
}

/// Which sample count `--samples` overrides.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SampleTarget {
    Planes,
    Restarts,
    Probes,
}

/// A validated configuration with its model built.
#[derive(Clone, Debug)]
pub struct ResolvedRun {
    pub config: RunConfig,
    pub model: MetricModel,
    pub label: String,
    pub dim: usize,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn apply(mut self, o: &Overrides, target: SampleTarget) -> Result<Self> {
        if o.model.is_some() && o.tensor_file.is_some() {
            return Err(Error::Config("--model and --tensor-file are mutually exclusive".into()));
        }
        if let Some(text) = &o.model {
            self.model = Some(ModelSpec::parse_compact(text)?);
            self.model_id = None;
        }
        if let Some(path) = &o.tensor_file {
            self.model = Some(ModelSpec::File { path: path.clone() });
            self.model_id = None;
        }
        if let Some(seed) = o.seed {
            self.seed = seed;
        }
        if let Some(k) = &o.k {
            self.k = k.clone();
        }
        if let Some(p) = &o.p {
            self.p = Some(p.clone());
        }
        if let Some(out) = &o.out {
            self.out = out.clone();
        }
        if let Some(sign) = o.sign {
            self.sign = sign;
        }
        if let Some(n) = o.samples {
            match target {
                SampleTarget::Planes => self.samples.planes = n,
                SampleTarget::Restarts => self.samples.restarts = n as usize,
                SampleTarget::Probes => self.samples.probes = n as usize,
            }
        }
        if let Some(t) = o.tol {
            self.tolerances.gradient = t;
            self.tolerances.identity = t;
            self.tolerances.slack = t;
        }
        Ok(self)
    }

    /// Checks every invariant and builds the model.
    pub fn resolve(self) -> Result<ResolvedRun> {
        let spec = self.model.clone().ok_or_else(|| Error::Config("no model given (config `model`, --model or --tensor-file)".into()))?;
        let t = &self.tolerances;
        if !(t.gradient.is_finite() && t.gradient > 0.0) {
            return Err(Error::Config(format!("tolerance `gradient` must be positive, got {}", t.gradient)));
        }
        t.checks().validate()?;
        if self.k.is_empty() {
            return Err(Error::Config("k list is empty".into()));
        }
        if self.samples.planes == 0 || self.samples.points == 0 {
            return Err(Error::Config("plane and point sample counts must be positive".into()));
        }
        if self.max_iter == 0 {
            return Err(Error::Config("max_iter must be positive".into()));
        }
        let model = spec.build().map_err(|e| match e {
            Error::Config(_) => e,
            other => Error::Config(format!("model: {other}")),
        })?;
        let m = model.dim();
        for &k in &self.k {
            if k == 0 || k > m {
                return Err(Error::Config(format!("k = {k} outside 1..={m}")));
            }
            if let Some(ps) = &self.p {
                if let Some(&p) = ps.iter().find(|&&p| p < k || p > m) {
                    return Err(Error::Config(format!("need k ≤ p ≤ m, got k = {k}, p = {p}, m = {m}")));
                }
            }
        }
        let label = self.model_id.clone().unwrap_or_else(|| model_label(&spec));
        Ok(ResolvedRun { config: self, model, label, dim: m })
    }
}

impl ResolvedRun {
    /// Degrees certified for rank `k`.
    pub fn degrees(&self, k: usize) -> Vec<usize> {
        match &self.config.p {
            Some(ps) => ps.clone(),
            None => (k..=self.dim).collect(),
        }
    }

    pub fn minimize_options(&self) -> MinimizeOptions {
        let c = &self.config;
        MinimizeOptions {
            restarts: c.samples.restarts,
            seed: c.seed,
            tol: c.tolerances.gradient,
            max_iter: c.max_iter,
            scan_planes: c.samples.planes,
            second_variation_probes: c.samples.probes,
            ..MinimizeOptions::default()
        }
    }

    pub fn probe_options(&self) -> ProbeOptions {
        let c = &self.config;
        ProbeOptions {
            probes: c.samples.probes,
            seed: c.seed,
            max_subsets: c.samples.max_subsets,
            tolerances: c.tolerances.checks(),
        }
    }

    pub fn vanishing_options(&self) -> VanishingOptions {
        VanishingOptions {
            minimize: self.minimize_options(),
            probes: self.probe_options(),
            sampled_tuples: self.config.samples.tuples,
        }
    }
}

/// Short human-readable label, e.g. `constant_hsc(m=4,c=1)`.
pub fn model_label(spec: &ModelSpec) -> String {
    match spec {
        ModelSpec::ConstantHsc { m, c } => format!("constant_hsc(m={m},c={c})"),
        ModelSpec::Flat { m } => format!("flat(m={m})"),
        ModelSpec::Product { a, b } => format!("product({},{})", model_label(a), model_label(b)),
        ModelSpec::Perturbed { m, c, epsilon, seed } => {
            format!("perturbed(m={m},c={c},epsilon={epsilon},seed={seed})")
        }
        ModelSpec::Potential { m, potential, .. } => {
            let name = match potential {
                NamedPotential::Flat => "flat".to_string(),
                NamedPotential::FubiniStudy => "fubini_study".to_string(),
                NamedPotential::QuarticBump { epsilon } => format!("quartic_bump,epsilon={epsilon}"),
                NamedPotential::PerturbedFubiniStudy { epsilon, seed } => {
                    format!("perturbed_fubini_study,epsilon={epsilon},seed={seed}")
                }
            };
            format!("potential(m={m},{name})")
        }
        ModelSpec::File { path } => format!("file({})", path.display()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_then_file_then_flags() {
        let cfg = RunConfig::from_json(r#"{"model": {"kind": "constant_hsc", "m": 4, "c": 1.0}, "seed": 3, "k": [2, 3]}"#)
            .unwrap();
        assert_eq!(cfg.seed, 3);
        assert_eq!(cfg.samples, Samples::default());
        let o = Overrides { seed: Some(9), samples: Some(17), tol: Some(1e-6), ..Default::default() };
        let cfg = cfg.apply(&o, SampleTarget::Probes).unwrap();
        assert_eq!((cfg.seed, cfg.k.clone(), cfg.samples.probes), (9, vec![2, 3], 17));
        assert_eq!(cfg.tolerances.slack, 1e-6);
        assert_eq!(cfg.tolerances.strict, RunTolerances::default().strict);
        let run = cfg.resolve().unwrap();
        assert_eq!(run.dim, 4);
        assert_eq!(run.degrees(3), vec![3, 4]);
        assert_eq!(run.label, "constant_hsc(m=4,c=1)");
    }

    #[test]
    fn invalid_configs_are_config_errors() {
        let bad = [
            r#"{"model": {"kind": "flat", "m": 3}, "unknown": 1}"#,
            r#"{"model": {"kind": "flat", "m": 3}, "k": [4]}"#,
            r#"{"model": {"kind": "flat", "m": 3}, "k": [3], "p": [2]}"#,
            r#"{"model": {"kind": "flat", "m": 3}, "tolerances": {"slack": 0.0}}"#,
            r#"{"model": {"kind": "flat", "m": 3}, "tolerances": {"gradient": -1.0}}"#,
            r#"{"k": [2]}"#,
        ];
        for text in bad {
            let err = RunConfig::from_json(text).and_then(|c| c.resolve().map(|_| ())).unwrap_err();
            assert!(matches!(err, Error::Config(_)), "{text}: {err}");
        }
    }

    #[test]
    fn compact_model_flag_replaces_config_model() {
        let cfg = RunConfig::from_json(r#"{"model": {"kind": "flat", "m": 3}, "model_id": "f"}"#).unwrap();
        let o = Overrides { model: Some("constant_hsc:m=2,c=-1".into()), ..Default::default() };
        let run = cfg.apply(&o, SampleTarget::Planes).unwrap().resolve().unwrap();
        assert_eq!(run.label, "constant_hsc(m=2,c=-1)");
        let o = Overrides { model: Some("flat:m=2".into()), tensor_file: Some("x.json".into()), ..Default::default() };
        assert!(RunConfig::default().apply(&o, SampleTarget::Planes).is_err());
    }
}
