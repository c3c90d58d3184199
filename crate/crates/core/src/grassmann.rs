//! Minimization of `S_k(x, ·)` over the complex Grassmannian.
//!
//! A skew-Hermitian generator `a ∈ u(m)` moves a plane along `t ↦ e^{ta}Σ`.
//! With `f(t) = S_k(e^{ta}Σ)` and `X` ranging over the unit sphere of `Σ`,
//!
//! ```text
//! f'(0)  = k(k+1) · avg [ R(aX,X̄,X,X̄) + R(X,\overline{aX},X,X̄) ]
//! f''(0) = k(k+1) · avg [ R(a²X,X̄,X,X̄) + R(X,\overline{a²X},X,X̄) + 4R(aX,\overline{aX},X,X̄)
//!                        + R(aX,X̄,aX,X̄) + R(X,\overline{aX},X,\overline{aX}) ]
//! ```
//!
//! Both are quartic in the sphere coordinates and are evaluated by exact moment
//! contraction. Only the couplings between `Σ` and `Σ⊥` move the plane; the
//! derivative along a horizontal generator with block `B` is
//! `4 Re Σ_{p,i} B_pi ρ_pi`, where `ρ_pi = Σ_{j≤k} R(E_p, Ē_i, E_j, Ē_j)`.

use std::cmp::Ordering;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::catalog::MetricModel;
use crate::curvature::{pull_back, CurvatureTensor, SkewGenerator, TangentPlane, Tensor4};
use crate::error::{Error, Result};
use crate::kscalar::{positivity_scan, s_k_trace, MatrixRecord};
use crate::linalg::{self, CMatrix, SkewExponential, C64};
use crate::moments::average_quartic;

fn check_generator(plane: &TangentPlane, a: &SkewGenerator) -> Result<()> {
    if a.dim() != plane.ambient_dim() {
        return Err(Error::Domain(format!(
            "generator is {}×{} but the plane lives in dimension {}",
            a.dim(),
            a.dim(),
            plane.ambient_dim()
        )));
    }
    Ok(())
}

fn sum_tensors(parts: &[(f64, Tensor4)]) -> C64 {
    parts
        .iter()
        .map(|(w, t)| average_quartic(t) * *w)
        .sum()
}

/// Exact `d/dt S_k(e^{ta}Σ)` at `t = 0`.
pub fn first_variation(r: &CurvatureTensor, plane: &TangentPlane, a: &SkewGenerator) -> Result<f64> {
    check_generator(plane, a)?;
    let f = plane.frame();
    let af = a.matrix() * f;
    let t = r.components();
    let avg = sum_tensors(&[
        (1.0, pull_back(t, &af, f, f, f)),
        (1.0, pull_back(t, f, &af, f, f)),
    ]);
    let k = plane.rank() as f64;
    Ok(k * (k + 1.0) * avg.re)
}

/// Exact `d²/dt² S_k(e^{ta}Σ)` at `t = 0`.
pub fn second_variation(r: &CurvatureTensor, plane: &TangentPlane, a: &SkewGenerator) -> Result<f64> {
    check_generator(plane, a)?;
    let f = plane.frame();
    let af = a.matrix() * f;
    let aaf = a.matrix() * &af;
    let t = r.components();
    let avg = sum_tensors(&[
        (1.0, pull_back(t, &aaf, f, f, f)),
        (1.0, pull_back(t, f, &aaf, f, f)),
        (4.0, pull_back(t, &af, &af, f, f)),
        (1.0, pull_back(t, &af, f, &af, f)),
        (1.0, pull_back(t, f, &af, f, &af)),
    ]);
    let k = plane.rank() as f64;
    Ok(k * (k + 1.0) * avg.re)
}

/// `ρ_pi = Σ_{j≤k} R(E_p, Ē_i, E_j, Ē_j)` for `E_p` in the complement basis
/// (rows) and `E_i` in the plane frame (columns).
pub fn mixed_ricci_block(r: &CurvatureTensor, plane: &TangentPlane, complement: &CMatrix) -> CMatrix {
    let ric = r.plane_ricci(plane);
    // Σ_ab C_ap M_ab conj(F_bi)
    complement.transpose() * ric * plane.frame().conjugate()
}

/// Steepest-descent generator: the horizontal `G` with
/// `first_variation(R, Σ, a) = -⟨G, a⟩` for every `a`, so that
/// `first_variation(R, Σ, G) = -‖G‖²`. Its block is `B = -2·conj(ρ)`.
pub fn riemannian_gradient(r: &CurvatureTensor, plane: &TangentPlane) -> SkewGenerator {
    let m = plane.ambient_dim();
    let k = plane.rank();
    if k == m {
        return SkewGenerator::zeros(m);
    }
    let complement = plane.complement();
    let rho = mixed_ricci_block(r, plane, &complement);
    let block = rho.conjugate() * C64::from(-2.0);
    descent_from_block(plane, &complement, &block)
}

fn descent_from_block(plane: &TangentPlane, complement: &CMatrix, block: &CMatrix) -> SkewGenerator {
    // C B F* - F B* C*
    let upper = complement * block * plane.frame().adjoint();
    let a = &upper - upper.adjoint();
    SkewGenerator::new(a).expect("horizontal construction is skew-Hermitian")
}

/// `max_{p>k, i≤k} |Σ_{j≤k} R(E_p, Ē_i, E_j, Ē_j)|` over the orthonormal completion.
pub fn criticality_residual(r: &CurvatureTensor, plane: &TangentPlane) -> f64 {
    if plane.rank() == plane.ambient_dim() {
        return 0.0;
    }
    let complement = plane.complement();
    linalg::max_abs(&mixed_ricci_block(r, plane, &complement))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MinimizeOptions {
    pub restarts: usize,
    pub seed: u64,
    /// Stop when the descent generator's Frobenius norm is at most `tol`.
    pub tol: f64,
    pub max_iter: usize,
    pub armijo: f64,
    pub initial_step: f64,
    pub max_halvings: usize,
    /// Planes sampled to produce the warm start; zero disables it.
    pub scan_planes: u64,
    /// Random generators at which the second variation is sampled on return.
    pub second_variation_probes: usize,
}

impl Default for MinimizeOptions {
    fn default() -> Self {
        Self {
            restarts: 8,
            seed: 0,
            tol: 1e-8,
            max_iter: 10_000,
            armijo: 1e-4,
            initial_step: 1.0,
            max_halvings: 60,
            scan_planes: 64,
            second_variation_probes: 16,
        }
    }
}

/// Outcome of one descent run.
#[derive(Clone, Debug)]
pub struct DescentRun {
    pub plane: TangentPlane,
    pub value: f64,
    pub gradient_norm: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Objective after every accepted step, starting with the initial value.
    pub history: Vec<f64>,
}

/// Riemannian gradient descent with the exact unitary retraction and Armijo
/// backtracking (step `initial_step`, halving, at most `max_halvings` times).
///
/// Once the predicted decrease falls below [`objective_noise`], a step is also
/// accepted when the objective stays within the noise and the gradient shrinks.
pub fn descend(r: &CurvatureTensor, start: &TangentPlane, opts: &MinimizeOptions) -> DescentRun {
    let mut plane = start.clone();
    let mut value = s_k_trace(r, &plane);
    let mut history = vec![value];
    let mut iterations = 0;
    loop {
        let g = riemannian_gradient(r, &plane);
        let norm = g.norm();
        if norm <= opts.tol {
            return DescentRun { plane, value, gradient_norm: norm, iterations, converged: true, history };
        }
        if iterations >= opts.max_iter {
            return DescentRun { plane, value, gradient_norm: norm, iterations, converged: false, history };
        }
        let slope = -norm * norm;
        let exp = SkewExponential::new(g.matrix());
        let noise = objective_noise(value);
        let mut step = opts.initial_step;
        let mut accepted = None;
        for _ in 0..=opts.max_halvings {
            let moved = exp.at(step) * plane.frame();
            if let Ok(candidate) = TangentPlane::new(moved) {
                let v = s_k_trace(r, &candidate);
                let predicted = opts.armijo * step * slope;
                if v <= value + predicted {
                    accepted = Some((candidate, v));
                    break;
                }
                // decrease below rounding: accept only if the gradient shrinks
                if -predicted <= noise
                    && v <= value + noise
                    && riemannian_gradient(r, &candidate).norm() < norm
                {
                    accepted = Some((candidate, v));
                    break;
                }
            }
            step *= 0.5;
        }
        match accepted {
            Some((candidate, v)) => {
                plane = candidate;
                value = v;
                history.push(v);
                iterations += 1;
            }
            None => {
                // no decrease representable in double precision
                return DescentRun { plane, value, gradient_norm: norm, iterations, converged: false, history };
            }
        }
    }
}

/// Resolution of `S_k` in double precision: objective changes below this are
/// indistinguishable from rounding in the frame.
pub fn objective_noise(value: f64) -> f64 {
    8.0 * f64::EPSILON * (1.0 + value.abs())
}

/// A plane returned by [`minimize_sk`] with its first- and second-order diagnostics.
#[derive(Clone, Debug)]
pub struct CriticalPlane {
    pub plane: TangentPlane,
    pub value: f64,
    pub gradient_norm: f64,
    pub criticality_residual: f64,
    pub second_variation_sample: Vec<f64>,
    pub converged: bool,
    pub iterations: usize,
    /// Start that produced the plane: 0 is the scan warm start when enabled.
    pub start_index: usize,
    pub starts: usize,
    /// Best value among the warm-start scan samples (if a scan ran).
    pub scan_min: Option<f64>,
    pub tol: f64,
}

impl CriticalPlane {
    pub fn k(&self) -> usize {
        self.plane.rank()
    }

    pub fn record(&self) -> CriticalPlaneRecord {
        CriticalPlaneRecord {
            frame: MatrixRecord::from(self.plane.frame()),
            value: self.value,
            gradient_norm: self.gradient_norm,
            criticality_residual: self.criticality_residual,
            second_variation_sample: self.second_variation_sample.clone(),
            min_second_variation: self
                .second_variation_sample
                .iter()
                .copied()
                .fold(f64::INFINITY, f64::min),
            converged: self.converged,
            iterations: self.iterations,
            start_index: self.start_index,
            starts: self.starts,
            scan_min: self.scan_min,
            tol: self.tol,
        }
    }
}

/// Serializable form of [`CriticalPlane`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriticalPlaneRecord {
    pub frame: MatrixRecord,
    pub value: f64,
    pub gradient_norm: f64,
    pub criticality_residual: f64,
    pub second_variation_sample: Vec<f64>,
    pub min_second_variation: f64,
    pub converged: bool,
    pub iterations: usize,
    pub start_index: usize,
    pub starts: usize,
    pub scan_min: Option<f64>,
    pub tol: f64,
}

fn rank_runs(a: &(usize, DescentRun), b: &(usize, DescentRun)) -> Ordering {
    let (ra, rb) = (&a.1, &b.1);
    let scale = 1.0 + ra.value.abs().max(rb.value.abs());
    if (ra.value - rb.value).abs() > 1e-12 * scale {
        return ra.value.total_cmp(&rb.value);
    }
    if ra.gradient_norm != rb.gradient_norm {
        return ra.gradient_norm.total_cmp(&rb.gradient_norm);
    }
    // canonical frame: the projector is basis independent
    let pa = ra.plane.projector();
    let pb = rb.plane.projector();
    for (x, y) in pa.iter().zip(pb.iter()) {
        let ord = x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im));
        if ord != Ordering::Equal {
            return ord;
        }
    }
    a.0.cmp(&b.0)
}

/// Multistart minimization of `S_k` over `Gr(k, m)`: the best plane of a Haar
/// scan plus `restarts` Haar-random starts, each descended independently.
///
/// A run that hits the iteration cap is returned with `converged = false`.
pub fn minimize_sk(r: &CurvatureTensor, k: usize, opts: &MinimizeOptions) -> Result<CriticalPlane> {
    let m = r.dim();
    if k == 0 || k > m {
        return Err(Error::Domain(format!("plane rank {k} invalid in dimension {m}")));
    }
    let mut starts = Vec::new();
    let mut scan_min = None;
    if opts.scan_planes > 0 {
        let scan = positivity_scan(&MetricModel::Tensor(r.clone()), "minimize", k, opts.scan_planes, 1, opts.seed)?;
        scan_min = Some(scan.min_value);
        starts.push(scan.best_plane());
    }
    for i in 0..opts.restarts {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed.wrapping_add(0x5EED));
        rng.set_stream(i as u64);
        starts.push(TangentPlane::random(m, k, &mut rng));
    }
    if starts.is_empty() {
        return Err(Error::Domain("minimization needs at least one start".into()));
    }
    minimize_from(r, &starts, opts, scan_min)
}

/// Descends from each of the given planes and returns the best result.
pub fn minimize_from(
    r: &CurvatureTensor,
    starts: &[TangentPlane],
    opts: &MinimizeOptions,
    scan_min: Option<f64>,
) -> Result<CriticalPlane> {
    let runs: Vec<(usize, DescentRun)> = starts
        .par_iter()
        .enumerate()
        .map(|(i, s)| (i, descend(r, s, opts)))
        .collect();
    let (start_index, best) = runs
        .into_iter()
        .min_by(rank_runs)
        .ok_or_else(|| Error::Domain("minimization needs at least one start".into()))?;

    let m = r.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed.wrapping_add(0xD2));
    let second_variation_sample = (0..opts.second_variation_probes)
        .map(|_| second_variation(r, &best.plane, &SkewGenerator::random(m, &mut rng)))
        .collect::<Result<Vec<_>>>()?;
    Ok(CriticalPlane {
        criticality_residual: criticality_residual(r, &best.plane),
        value: best.value,
        gradient_norm: best.gradient_norm,
        converged: best.converged,
        iterations: best.iterations,
        plane: best.plane,
        second_variation_sample,
        start_index,
        starts: starts.len(),
        scan_min,
        tol: opts.tol,
    })
}
