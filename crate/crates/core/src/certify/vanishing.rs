//! Positivity of averaged tuple sums `∮ Σ_{i∈I} R_{vv̄iī} dθ(v)` at a minimizing
//! plane, directly and through the singular-value telescoping lower bound.
//!
//! Let `D₁…D_p` span the tuple's coordinate directions and `Σ` be the minimizing
//! k-plane, `k ≤ p`. Aligning frames by the SVD of `F*D` gives
//! `D_j = μ_j E_j + β_j E′_j` for `j ≤ k` (`μ` increasing, `μ² + β² = 1`,
//! `E′_j ⊥ Σ`) and `D_j ⊥ Σ` for `j > k`. With `q(X) = ∮R(X, X̄, Z, Z̄)`:
//!
//! ```text
//! Σ_j q(D_j) = μ₁² Σ_i q(E_i)
//!            + Σ_{j=2}^{k} [(μ_j² - μ_{j-1}²)(Σ_{i≥j} q(E_i) + q(E′_{j-1})) + β_j² q(E′_{j-1})]
//!            + β_k² q(E′_k) + Σ_{j>k} q(D_j)
//! ```
//!
//! and `Σ_i q(E_i) = S_k/k`. Each bracketed group and each `q` of a vector
//! orthogonal to `Σ` is at least `S_k/(k(k+1))` at a minimizer.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::bounds::{check_k_plane_bounds, check_two_plane_bounds, ProbeOptions, SphereAverage};
use super::forms::{bochner_curvature_term, increasing_tuples, FormCoefficients};
use super::{anchors, CertificationReport, Check, CheckKind, Sign, Tolerances};
use crate::curvature::{CurvatureTensor, TangentPlane};
use crate::error::{Error, Result};
use crate::grassmann::{minimize_sk, CriticalPlane, MinimizeOptions};
use crate::kscalar::s_k_trace;
use crate::linalg::{self, CMatrix, CVector, C64};

/// Full enumeration of `p`-tuples up to this ambient dimension.
pub const MAX_ENUMERATED_DIM: usize = 8;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct VanishingOptions {
    pub minimize: MinimizeOptions,
    pub probes: ProbeOptions,
    /// Tuples sampled when the ambient dimension exceeds [`MAX_ENUMERATED_DIM`].
    pub sampled_tuples: usize,
}

/// Both routes for one tuple.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TupleDecomposition {
    /// `Σ_j ∮R(v, v̄, D_j, D̄_j)` by moment contraction.
    pub direct: f64,
    /// The telescoping sum of the aligned frames.
    pub reconstruction: f64,
    /// Telescoping sum with each group replaced by its lower bound.
    pub lower_bound: f64,
    /// Singular values of `F*D`, increasing.
    pub mu: Vec<f64>,
}

/// Hermitian form `q(X) = Σ_cd X_c X̄_d Q_cd` with `Q = (1/k) · plane Ricci`.
fn q_matrix(r: &CurvatureTensor, plane: &TangentPlane) -> CMatrix {
    r.plane_ricci(plane) / C64::from(plane.rank() as f64)
}

fn q_form(q: &CMatrix, x: &CVector) -> f64 {
    // Σ_cd x_c Q_cd x̄_d
    (x.transpose() * q * x.conjugate())[(0, 0)].re
}

/// Direct and telescoped evaluation of `Σ_j q(D_j)` for an orthonormal
/// `m × p` frame `d` with `p ≥ k`.
pub fn tuple_decomposition(r: &CurvatureTensor, plane: &TangentPlane, d: &CMatrix) -> Result<TupleDecomposition> {
    let (m, p) = d.shape();
    let k = plane.rank();
    if m != r.dim() || p < k || p > m {
        return Err(Error::Domain(format!("tuple frame {m}×{p} invalid for k = {k}")));
    }
    if linalg::unitarity_defect(d) > 1e-10 {
        return Err(Error::Domain("tuple frame must be orthonormal".into()));
    }
    let avg = SphereAverage::new(r, plane);
    let direct: f64 = (0..p).map(|j| avg.q(&d.column(j).into_owned())).sum();

    let q = q_matrix(r, plane);
    let f = plane.frame();
    let svd = (f.adjoint() * d).svd(true, true);
    let u = svd.u.expect("requested");
    let v_t = svd.v_t.expect("requested");
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| svd.singular_values[a].total_cmp(&svd.singular_values[b]));
    let mu: Vec<f64> = order.iter().map(|&i| svd.singular_values[i].min(1.0)).collect();
    let beta2: Vec<f64> = mu.iter().map(|m| (1.0 - m * m).max(0.0)).collect();
    // F*D = U S V*, so (F U)*(D V) = S
    let v = v_t.adjoint();
    let e: Vec<CVector> = order.iter().map(|&i| f * u.column(i)).collect();
    let dv: Vec<CVector> = order.iter().map(|&i| d * v.column(i)).collect();
    let q_e: Vec<f64> = e.iter().map(|x| q_form(&q, x)).collect();
    let q_prime: Vec<f64> = (0..k)
        .map(|j| {
            let b = beta2[j].sqrt();
            if b <= 1e-12 {
                return 0.0;
            }
            let ep = (&dv[j] - &e[j] * C64::from(mu[j])) / C64::from(b);
            q_form(&q, &ep)
        })
        .collect();
    let ordered_v = CMatrix::from_columns(&order.iter().map(|&i| v.column(i)).collect::<Vec<_>>());
    let extra = d * linalg::orthogonal_complement(&ordered_v);
    let q_extra: f64 = (0..extra.ncols()).map(|j| q_form(&q, &extra.column(j).into_owned())).sum();

    let s = s_k_trace(r, plane);
    let b = s / (k * (k + 1)) as f64;
    let mut recon = mu[0] * mu[0] * q_e.iter().sum::<f64>();
    let mut bound = mu[0] * mu[0] * s / k as f64;
    for j in 1..k {
        let dmu = mu[j] * mu[j] - mu[j - 1] * mu[j - 1];
        let tail: f64 = q_e[j..].iter().sum();
        recon += dmu * (tail + q_prime[j - 1]) + beta2[j] * q_prime[j - 1];
        bound += (dmu + beta2[j]) * b;
    }
    recon += beta2[k - 1] * q_prime[k - 1] + q_extra;
    bound += beta2[k - 1] * b + (p - k) as f64 * b;
    Ok(TupleDecomposition { direct, reconstruction: recon, lower_bound: bound, mu })
}

/// Frame diagonalizing `Q_cd = ∮R(v, v̄, e_c, ē_d) dθ(v)` over the plane.
pub fn averaged_curvature_frame(r: &CurvatureTensor, plane: &TangentPlane) -> (Vec<f64>, CMatrix) {
    // q(e V) = ᵗV Q V̄, so V diagonalizes ᵗQ
    let (values, vectors) = linalg::hermitian_eigen(&q_matrix(r, plane).transpose());
    (values, linalg::canonical_phases(&vectors))
}

fn tuples_for(m: usize, p: usize, sampled: usize, seed: u64) -> Vec<Vec<usize>> {
    if m <= MAX_ENUMERATED_DIM {
        return increasing_tuples(m, p);
    }
    use rand::seq::index::sample;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(4);
    let mut out: Vec<Vec<usize>> = (0..sampled.max(1))
        .map(|_| {
            let mut t = sample(&mut rng, m, p).into_vec();
            t.sort_unstable();
            t
        })
        .collect();
    out.sort();
    out.dedup();
    out
}

/// Tuple checks at a plane that minimizes `S_k` of the (already oriented)
/// tensor. Returns the checks and the number of tuples examined.
pub fn vanishing_checks(
    r: &CurvatureTensor,
    plane: &TangentPlane,
    p: usize,
    opts: &VanishingOptions,
) -> Result<(Vec<Check>, usize)> {
    let m = r.dim();
    let k = plane.rank();
    if !(k <= p && p <= m) {
        return Err(Error::Domain(format!("need k ≤ p ≤ m, got k = {k}, p = {p}, m = {m}")));
    }
    let tol = &opts.probes.tolerances;
    let (diag, frame) = averaged_curvature_frame(r, plane);
    let tuples = tuples_for(m, p, opts.sampled_tuples, opts.probes.seed);
    let decomps: Vec<TupleDecomposition> = tuples
        .par_iter()
        .map(|t| {
            let d = CMatrix::from_columns(&t.iter().map(|&i| frame.column(i)).collect::<Vec<_>>());
            tuple_decomposition(r, plane, &d)
        })
        .collect::<Result<_>>()?;
    let scale = decomps.iter().map(|t| t.direct.abs()).fold(1.0, f64::max);

    // averaged curvature term of a random form against its diagonal reduction
    let mut rng = ChaCha8Rng::seed_from_u64(opts.probes.seed);
    rng.set_stream(5);
    let s = FormCoefficients::random(m, p, &mut rng)?;
    let r_frame = r.conjugate_frame(&frame)?;
    let f_frame = frame.adjoint() * plane.frame();
    let averaged: f64 = (0..k)
        .map(|a| bochner_curvature_term(&r_frame, &s, &f_frame.column(a).into_owned()))
        .sum::<Result<f64>>()?
        / k as f64;
    let reduced: f64 = s.iter().map(|(t, a)| a.norm_sqr() * t.iter().map(|&i| diag[i]).sum::<f64>()).sum();

    let checks = vec![
        Check::from_probes(
            &format!("p{p}.telescoping_identity"),
            anchors::TELESCOPING,
            CheckKind::Identity,
            tol.identity * scale,
            decomps.iter().map(|t| (t.reconstruction, t.direct)),
        ),
        Check::from_probes(
            &format!("p{p}.dominates_bound"),
            anchors::TUPLE_BOUND,
            CheckKind::LowerBound,
            tol.slack,
            decomps.iter().map(|t| (t.direct, t.lower_bound)),
        ),
        Check::from_probes(
            &format!("p{p}.tuple_positivity"),
            anchors::TUPLE_POSITIVITY,
            CheckKind::Strict,
            tol.strict,
            decomps.iter().map(|t| (t.direct, tol.strict)),
        ),
        Check::from_probes(
            &format!("p{p}.bound_positivity"),
            anchors::BOUND_POSITIVITY,
            CheckKind::Strict,
            tol.strict,
            decomps.iter().map(|t| (t.lower_bound, tol.strict)),
        ),
        Check::from_probes(
            &format!("p{p}.bochner_reduction"),
            anchors::BOCHNER_DIAGONAL,
            CheckKind::Identity,
            tol.identity * (1.0 + reduced.abs()),
            [(averaged, reduced)],
        ),
    ];
    Ok((checks, tuples.len()))
}

/// Text attached to a fully passing certificate. It states what the numbers
/// imply; nothing in it is computed.
pub fn implication_text(k: usize, p: usize, sign: Sign) -> String {
    let (word, ineq) = match sign {
        Sign::Positive => ("positive", "> 0"),
        Sign::Negative => ("negative", "< 0"),
    };
    format!(
        "At this point every averaged tuple sum of the oriented curvature is strictly positive, so the \
         curvature term of any nonzero (p,0)-form with p = {p} is strictly positive at a maximum of |s|². \
         If S_{k} {ineq} ({word}) holds at every point of a compact Kähler manifold, the maximum principle \
         then forces h^{{{p},0}} = 0. Only the pointwise algebraic statement is verified numerically."
    )
}

/// Second-order and criticality checks carried by a critical plane.
pub fn critical_plane_checks(cp: &CriticalPlane, tol: &Tolerances) -> Vec<Check> {
    vec![
        Check::from_probes(
            "plane.criticality",
            anchors::CRITICALITY,
            CheckKind::Identity,
            tol.criticality,
            [(cp.criticality_residual, 0.0)],
        ),
        Check::from_probes(
            "plane.second_variation",
            anchors::SECOND_VARIATION,
            CheckKind::LowerBound,
            tol.slack,
            cp.second_variation_sample.iter().map(|&v| (v, 0.0)),
        ),
    ]
}

/// Minimizes `S_k` of `sign·R`, requires the minimum to be positive, and
/// certifies the tuple sums for degree `p` together with the k-plane bounds.
pub fn vanishing_certificate(
    r: &CurvatureTensor,
    model: &str,
    k: usize,
    p: usize,
    sign: Sign,
    opts: &VanishingOptions,
) -> Result<CertificationReport> {
    let m = r.dim();
    if !(1 <= k && k <= p && p <= m) {
        return Err(Error::Domain(format!("need 1 ≤ k ≤ p ≤ m, got k = {k}, p = {p}, m = {m}")));
    }
    let oriented = sign.orient(r);
    let cp = minimize_sk(&oriented, k, &opts.minimize)?;
    let mut report = bounds_report(&oriented, model, &cp, sign, &opts.probes)?;
    let tuples = tuple_report(&oriented, model, &cp, p, sign, opts)?;
    report.p = Some(p);
    report.checks.extend(tuples.checks);
    report.tuples = tuples.tuples;
    report.implication = report.passed().then(|| implication_text(k, p, sign));
    Ok(report)
}

fn require_positive(cp: &CriticalPlane, sign: Sign) -> Result<()> {
    if cp.value > 0.0 {
        return Ok(());
    }
    let (extreme, word) = match sign {
        Sign::Positive => ("minimum", "positive"),
        Sign::Negative => ("maximum", "negative"),
    };
    Err(Error::Precondition(format!(
        "{extreme} of S_{} is {:.6e}, so S_{} is not {word} everywhere",
        cp.k(),
        sign.factor() * cp.value,
        cp.k()
    )))
}

/// Criticality, second-variation and minimality bounds at a critical plane of
/// the oriented tensor; the 2-plane variant is included for `k = 2`.
pub fn bounds_report(
    oriented: &CurvatureTensor,
    model: &str,
    cp: &CriticalPlane,
    sign: Sign,
    opts: &ProbeOptions,
) -> Result<CertificationReport> {
    require_positive(cp, sign)?;
    let mut checks = critical_plane_checks(cp, &opts.tolerances);
    if cp.k() == 2 {
        checks.extend(check_two_plane_bounds(oriented, &cp.plane, opts)?.checks);
    }
    let bounds = check_k_plane_bounds(oriented, &cp.plane, opts)?;
    checks.extend(bounds.checks);
    Ok(CertificationReport {
        model: model.to_string(),
        k: cp.k(),
        p: None,
        sign,
        plane: cp.record(),
        s_k: cp.value,
        checks,
        subsets: bounds.subsets,
        tuples: 0,
        implication: None,
    })
}

/// Tuple checks for degree `p` at a critical plane of the oriented tensor.
pub fn tuple_report(
    oriented: &CurvatureTensor,
    model: &str,
    cp: &CriticalPlane,
    p: usize,
    sign: Sign,
    opts: &VanishingOptions,
) -> Result<CertificationReport> {
    require_positive(cp, sign)?;
    let k = cp.k();
    let (checks, tuples) = vanishing_checks(oriented, &cp.plane, p, opts)?;
    let mut report = CertificationReport {
        model: model.to_string(),
        k,
        p: Some(p),
        sign,
        plane: cp.record(),
        s_k: cp.value,
        checks,
        subsets: Vec::new(),
        tuples,
        implication: None,
    };
    report.implication = report.passed().then(|| implication_text(k, p, sign));
    Ok(report)
}
