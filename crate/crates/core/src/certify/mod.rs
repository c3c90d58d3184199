//! Pointwise checks at critical planes of `S_k`.
//!
//! Every check is reported with its raw numbers: the worst observed value, the
//! bound it is compared with, the slack, and the tolerance, so pass/fail can be
//! recomputed from the report alone.

pub mod bounds;
pub mod forms;
pub mod normal_form;
pub mod vanishing;

use serde::{Deserialize, Serialize};

use crate::curvature::CurvatureTensor;
use crate::grassmann::CriticalPlaneRecord;

pub use bounds::{check_k_plane_bounds, check_two_plane_bounds, BoundsFragment, ProbeOptions};
pub use forms::{bochner_curvature_term, FormCoefficients};
pub use normal_form::{skew_normal_form, SkewNormalForm};
pub use vanishing::{
    bounds_report, critical_plane_checks, tuple_decomposition, tuple_report, vanishing_certificate, vanishing_checks,
    TupleDecomposition, VanishingOptions,
};

/// Anchor strings carried verbatim by every report entry.
pub mod anchors {
    /// `∮R(E, Ē′, Z, Z̄) = ∮R(E′, Ē, Z, Z̄) = 0` for `E ∈ Σ`, `E′ ⊥ Σ`.
    pub const MIXED_TERM: &str = "mixed-term-vanishes";
    /// `∮R(E, Ē, Z, Z̄) + R(E′, Ē′, Z, Z̄) ≥ S₂/6` on a minimizing 2-plane.
    pub const PAIR_BOUND: &str = "pair-lower-bound";
    /// `∮R(E′, Ē′, Z, Z̄) ≥ S_k/(k(k+1))` for unit `E′ ⊥ Σ`.
    pub const COMPLEMENT_BOUND: &str = "complement-lower-bound";
    /// `∮R(E′, Ē′, Z, Z̄) + Σ_{j∈I} R(E_j, Ē_j, Z, Z̄) ≥ S_k/(k(k+1))` in a
    /// frame diagonalizing the restricted Ricci tensor.
    pub const SUBSET_BOUND: &str = "subset-lower-bound";
    /// `Σ_{j≤k} R(E_p, Ē_i, E_j, Ē_j) = 0` for `p > k`, `i ≤ k`.
    pub const CRITICALITY: &str = "restricted-ricci-mixed-block-vanishes";
    /// Second variation of `S_k` is nonnegative at a minimizer.
    pub const SECOND_VARIATION: &str = "second-variation-nonnegative";
    /// Singular-value telescoping reproduces the averaged tuple sum.
    pub const TELESCOPING: &str = "tuple-telescoping-identity";
    /// The averaged tuple sum dominates its telescoping lower bound.
    pub const TUPLE_BOUND: &str = "tuple-dominates-telescoping-bound";
    /// Every averaged tuple sum `∮ Σ_{i∈I} R_{vv̄iī}` is strictly positive.
    pub const TUPLE_POSITIVITY: &str = "tuple-positivity";
    /// The telescoping lower bound itself is strictly positive.
    pub const BOUND_POSITIVITY: &str = "telescoping-bound-positivity";
    /// In the diagonalizing frame the averaged curvature term of a form is
    /// `Σ_I |a_I|² ∮ Σ_{i∈I} R_{vv̄iī}`.
    pub const BOCHNER_DIAGONAL: &str = "bochner-term-diagonal-reduction";
    /// `S_k` by frame trace and by sphere moments agree on sampled planes.
    pub const ROUTE_AGREEMENT: &str = "trace-moment-route-agreement";
}

/// Tolerance for identities.
pub const IDENTITY_TOL: f64 = 1e-8;
/// Allowed negative slack for inequalities.
pub const SLACK_TOL: f64 = 1e-8;
/// Minimum magnitude for a strictly signed quantity.
pub const STRICT_THRESHOLD: f64 = 1e-10;
/// Planes with a larger criticality residual are refused.
pub const CRITICALITY_GATE: f64 = 1e-6;

/// Tolerance ladder applied by every check.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub identity: f64,
    pub slack: f64,
    pub strict: f64,
    pub criticality: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            identity: IDENTITY_TOL,
            slack: SLACK_TOL,
            strict: STRICT_THRESHOLD,
            criticality: CRITICALITY_GATE,
        }
    }
}

impl Tolerances {
    pub fn validate(&self) -> crate::Result<()> {
        for (name, v) in [
            ("identity", self.identity),
            ("slack", self.slack),
            ("strict", self.strict),
            ("criticality", self.criticality),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(crate::Error::Config(format!("tolerance `{name}` must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckKind {
    /// `|value - bound| ≤ tolerance`.
    Identity,
    /// `value - bound ≥ -tolerance`.
    LowerBound,
    /// `value > bound`.
    Strict,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub anchor: String,
    pub kind: CheckKind,
    /// Worst observed value.
    pub value: f64,
    pub bound: f64,
    pub slack: f64,
    pub tolerance: f64,
    pub samples: usize,
    pub pass: bool,
    /// Slack of every probe, in probe order.
    #[serde(skip)]
    pub per_probe: Vec<f64>,
}

fn slack_of(kind: CheckKind, value: f64, bound: f64) -> f64 {
    match kind {
        CheckKind::Identity => -(value - bound).abs(),
        CheckKind::LowerBound | CheckKind::Strict => value - bound,
    }
}

impl Check {
    /// Builds a check from `(value, bound)` per probe, keeping the worst probe.
    pub fn from_probes(
        name: &str,
        anchor: &str,
        kind: CheckKind,
        tolerance: f64,
        probes: impl IntoIterator<Item = (f64, f64)>,
    ) -> Self {
        let mut per_probe = Vec::new();
        let mut worst: Option<(f64, f64, f64)> = None;
        for (value, bound) in probes {
            let slack = slack_of(kind, value, bound);
            per_probe.push(slack);
            // NaN slack is always the worst
            let replace = match worst {
                None => true,
                Some((_, _, s)) => slack.is_nan() || (!s.is_nan() && slack < s),
            };
            if replace {
                worst = Some((value, bound, slack));
            }
        }
        let (value, bound, slack) = worst.unwrap_or((0.0, 0.0, 0.0));
        let pass = match kind {
            CheckKind::Identity | CheckKind::LowerBound => slack >= -tolerance,
            CheckKind::Strict => slack > 0.0,
        };
        Self {
            name: name.to_string(),
            anchor: anchor.to_string(),
            kind,
            value,
            bound,
            slack,
            tolerance,
            samples: per_probe.len(),
            pass,
            per_probe,
        }
    }

    /// Recomputes pass/fail from the recorded numbers.
    pub fn recomputed_pass(&self) -> bool {
        let slack = slack_of(self.kind, self.value, self.bound);
        match self.kind {
            CheckKind::Identity | CheckKind::LowerBound => slack >= -self.tolerance,
            CheckKind::Strict => slack > 0.0,
        }
    }
}

/// Which sign of `S_k` is being certified.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sign {
    #[default]
    Positive,
    Negative,
}

impl Sign {
    pub fn factor(self) -> f64 {
        match self {
            Sign::Positive => 1.0,
            Sign::Negative => -1.0,
        }
    }

    /// `R` for the positive sign, `-R` for the negative one: the sign to
    /// certify becomes positivity of the oriented tensor.
    pub fn orient(self, r: &CurvatureTensor) -> CurvatureTensor {
        match self {
            Sign::Positive => r.clone(),
            Sign::Negative => -r,
        }
    }
}

/// Certification of one `(model, k, p)` at one critical plane.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificationReport {
    pub model: String,
    pub k: usize,
    pub p: Option<usize>,
    pub sign: Sign,
    /// Critical plane of the oriented tensor `sign·R`.
    pub plane: CriticalPlaneRecord,
    /// `S_k` of the oriented tensor at the plane.
    pub s_k: f64,
    pub checks: Vec<Check>,
    /// Restricted-Ricci-frame subsets used by the subset bound (0-based).
    pub subsets: Vec<Vec<usize>>,
    pub tuples: usize,
    pub implication: Option<String>,
}

impl CertificationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn check_worst_probe_and_pass_rules() {
        let c = Check::from_probes("x", "a", CheckKind::LowerBound, 1e-8, [(1.0, 0.5), (0.2, 0.5), (3.0, 0.5)]);
        assert_eq!(c.value, 0.2);
        assert!(!c.pass && !c.recomputed_pass());
        assert_eq!(c.samples, 3);
        let c = Check::from_probes("x", "a", CheckKind::Identity, 1e-8, [(1e-9, 0.0), (-2e-9, 0.0)]);
        assert!(c.pass && (c.slack + 2e-9).abs() < 1e-20);
        let c = Check::from_probes("x", "a", CheckKind::Strict, 0.0, [(1e-10, 1e-10)]);
        assert!(!c.pass);
        let c = Check::from_probes("x", "a", CheckKind::LowerBound, 1e-8, [(1.0, 0.0), (f64::NAN, 0.0)]);
        assert!(!c.pass);
    }

    #[test]
    fn empty_probe_set_passes_vacuously() {
        let c = Check::from_probes("x", "a", CheckKind::LowerBound, 1e-8, std::iter::empty());
        assert!(c.pass);
        assert_eq!(c.samples, 0);
    }
}
