//! First-order consequences of minimality: the mixed term vanishes and the
//! sphere averages `q(E) = ∮R(E, Ē, Z, Z̄) dθ(Z)` over a minimizing plane are
//! bounded below by `S_k/(k(k+1))` on the complement and on frame subsets.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{anchors, Check, CheckKind, Tolerances};
use crate::curvature::{diagonalize_restricted_ricci, CurvatureTensor, TangentPlane};
use crate::error::{Error, Result};
use crate::grassmann::criticality_residual;
use crate::kscalar::s_k_trace;
use crate::linalg::{self, CMatrix, CVector, C64};
use crate::moments::average_quadratic;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeOptions {
    /// Haar-random probes on top of the structured frame vectors.
    pub probes: usize,
    pub seed: u64,
    /// Subsets `I` are enumerated exhaustively up to this many, sampled beyond.
    pub max_subsets: usize,
    pub tolerances: Tolerances,
}

impl Default for ProbeOptions {
    fn default() -> Self {
        Self { probes: 200, seed: 0, max_subsets: 512, tolerances: Tolerances::default() }
    }
}

/// `X, Y ↦ ∮R(X, Ȳ, Z, Z̄) dθ(Z)` over the unit sphere of a plane, evaluated by
/// exact moment contraction.
pub struct SphereAverage {
    m: usize,
    k: usize,
    /// `W[i][j] = ᵗF R_ij F̄`, `k × k`, row-major over `(i, j)`.
    blocks: Vec<CMatrix>,
}

impl SphereAverage {
    pub fn new(r: &CurvatureTensor, plane: &TangentPlane) -> Self {
        let m = r.dim();
        let f = plane.frame();
        let t = r.components();
        let mut blocks = Vec::with_capacity(m * m);
        for i in 0..m {
            for j in 0..m {
                let rij = CMatrix::from_fn(m, m, |a, b| t.get(i, j, a, b));
                blocks.push(f.transpose() * rij * f.conjugate());
            }
        }
        Self { m, k: plane.rank(), blocks }
    }

    /// `∮R(X, Ȳ, Z, Z̄) dθ(Z)`.
    pub fn pair(&self, x: &CVector, y: &CVector) -> C64 {
        let mut a = CMatrix::zeros(self.k, self.k);
        for i in 0..self.m {
            for j in 0..self.m {
                let w = x[i] * y[j].conj();
                if w != C64::new(0.0, 0.0) {
                    a += &self.blocks[i * self.m + j] * w;
                }
            }
        }
        average_quadratic(&a)
    }

    /// `q(X) = ∮R(X, X̄, Z, Z̄) dθ(Z)`.
    pub fn q(&self, x: &CVector) -> f64 {
        self.pair(x, x).re
    }
}

/// Checks shared by the 2-plane and k-plane variants.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundsFragment {
    pub s_k: f64,
    pub bound: f64,
    pub criticality_residual: f64,
    pub checks: Vec<Check>,
    pub subsets: Vec<Vec<usize>>,
    /// Complement probes: frame vectors of `Σ⊥` first, then random ones.
    pub complement_probes: usize,
}

fn gate(r: &CurvatureTensor, plane: &TangentPlane, gate_tol: f64) -> Result<f64> {
    if plane.ambient_dim() != r.dim() {
        return Err(Error::Domain("plane and tensor dimensions differ".into()));
    }
    let residual = criticality_residual(r, plane);
    if !(residual <= gate_tol) {
        return Err(Error::Precondition(format!(
            "plane is not critical (residual {residual:.3e} > {gate_tol:e}); the bounds hold only at minimizers"
        )));
    }
    Ok(residual)
}

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn combine(frame: &CMatrix, coeffs: &CVector) -> CVector {
    frame * coeffs
}

/// Unit vectors of `Σ⊥`: the complement basis, then `n` Haar samples.
fn complement_probes(plane: &TangentPlane, n: usize, seed: u64) -> Vec<CVector> {
    let c = plane.complement();
    let d = c.ncols();
    if d == 0 {
        return Vec::new();
    }
    let mut out: Vec<CVector> = (0..d).map(|p| c.column(p).into_owned()).collect();
    let mut rng = rng_for(seed, 1);
    out.extend((0..n).map(|_| combine(&c, &linalg::random_unit_vector(d, &mut rng))));
    out
}

/// `n` Haar-random unit vectors of `Σ`.
fn plane_probes(plane: &TangentPlane, n: usize, seed: u64) -> Vec<CVector> {
    let mut rng = rng_for(seed, 2);
    (0..n)
        .map(|_| combine(plane.frame(), &linalg::random_unit_vector(plane.rank(), &mut rng)))
        .collect()
}

/// Mixed-term probes: every Ricci-frame vector against every complement probe,
/// then random `(E, E′)` pairs.
fn mixed_pairs<'a>(
    frame: &'a [CVector],
    randoms: &'a [CVector],
    complement: &'a [CVector],
    n_structured: usize,
) -> Vec<(&'a CVector, &'a CVector)> {
    let mut pairs = Vec::new();
    for e in frame {
        for ep in complement {
            pairs.push((e, ep));
        }
    }
    let random_c = &complement[n_structured.min(complement.len())..];
    for (e, ep) in randoms.iter().zip(random_c) {
        pairs.push((e, ep));
    }
    pairs
}

fn mixed_check(avg: &SphereAverage, pairs: &[(&CVector, &CVector)], name: &str, tol: f64) -> Check {
    let values: Vec<(f64, f64)> = pairs
        .par_iter()
        .map(|(e, ep)| (avg.pair(e, ep).norm().max(avg.pair(ep, e).norm()), 0.0))
        .collect();
    Check::from_probes(name, anchors::MIXED_TERM, CheckKind::Identity, tol, values)
}

/// Checks at a minimizing 2-plane, for probes `E ∈ Σ`, `E′ ⊥ Σ`:
/// mixed term `∮R(E, Ē′, Z, Z̄) = 0`, `q(E) + q(E′) ≥ S₂/6`, `q(E′) ≥ S₂/6`.
///
/// Refuses planes whose criticality residual exceeds the gate.
pub fn check_two_plane_bounds(r: &CurvatureTensor, plane: &TangentPlane, opts: &ProbeOptions) -> Result<BoundsFragment> {
    if plane.rank() != 2 {
        return Err(Error::Domain(format!("two-plane bounds need k = 2, got {}", plane.rank())));
    }
    let residual = gate(r, plane, opts.tolerances.criticality)?;
    let s = s_k_trace(r, plane);
    let bound = s / 6.0;
    let diag = diagonalize_restricted_ricci(r, plane);
    let avg = SphereAverage::new(r, &diag);

    let frame: Vec<CVector> = (0..2).map(|i| diag.vector(i)).collect();
    let n_structured = diag.complement().ncols();
    let complement = complement_probes(&diag, opts.probes, opts.seed);
    let randoms = plane_probes(&diag, opts.probes, opts.seed);
    let pairs = mixed_pairs(&frame, &randoms, &complement, n_structured);

    let q_pairs: Vec<(f64, f64)> = pairs.par_iter().map(|(e, ep)| (avg.q(e) + avg.q(ep), bound)).collect();
    let q_comp: Vec<(f64, f64)> = complement.par_iter().map(|ep| (avg.q(ep), bound)).collect();
    let checks = vec![
        mixed_check(&avg, &pairs, "two_plane.mixed_term", opts.tolerances.identity),
        Check::from_probes("two_plane.pair_bound", anchors::PAIR_BOUND, CheckKind::LowerBound, opts.tolerances.slack, q_pairs),
        Check::from_probes(
            "two_plane.complement_bound",
            anchors::COMPLEMENT_BOUND,
            CheckKind::LowerBound,
            opts.tolerances.slack,
            q_comp,
        ),
    ];
    Ok(BoundsFragment {
        s_k: s,
        bound,
        criticality_residual: residual,
        checks,
        subsets: Vec::new(),
        complement_probes: complement.len(),
    })
}

/// Non-empty subsets of `0..k` as sorted index lists: exhaustive when there
/// are at most `max` of them, otherwise all singletons, the full set and a
/// seeded sample. Ordered by size, then lexicographically.
pub fn frame_subsets(k: usize, max: usize, seed: u64) -> Vec<Vec<usize>> {
    let to_list = |mask: u64| (0..k).filter(|i| mask >> i & 1 == 1).collect::<Vec<_>>();
    let total = if k >= 64 { u64::MAX } else { (1u64 << k) - 1 };
    let mut masks: Vec<u64> = if total <= max as u64 {
        (1..=total).collect()
    } else {
        use rand::Rng;
        let mut set = std::collections::BTreeSet::new();
        for i in 0..k {
            set.insert(1u64 << i);
        }
        set.insert(total);
        let mut rng = rng_for(seed, 3);
        while set.len() < max.max(k + 1) {
            set.insert(rng.random_range(1..=total));
        }
        set.into_iter().collect()
    };
    masks.sort_by_key(|&mk| (mk.count_ones(), to_list(mk)));
    masks.into_iter().map(to_list).collect()
}

/// Checks at a minimizing k-plane in a frame `E₁…E_k` diagonalizing the
/// restricted Ricci tensor, with bound `S_k/(k(k+1))`:
/// mixed term, `q(E′) + Σ_{j∈I} q(E_j) ≥ bound` for subsets `I`, `q(E′) ≥ bound`.
///
/// Probe order matches [`check_two_plane_bounds`], so for `k = 2` the
/// singleton subsets reproduce its structured pair probes.
pub fn check_k_plane_bounds(r: &CurvatureTensor, plane: &TangentPlane, opts: &ProbeOptions) -> Result<BoundsFragment> {
    let k = plane.rank();
    let residual = gate(r, plane, opts.tolerances.criticality)?;
    let s = s_k_trace(r, plane);
    let bound = s / (k * (k + 1)) as f64;
    let diag = diagonalize_restricted_ricci(r, plane);
    let avg = SphereAverage::new(r, &diag);

    let frame: Vec<CVector> = (0..k).map(|i| diag.vector(i)).collect();
    let n_structured = diag.complement().ncols();
    let complement = complement_probes(&diag, opts.probes, opts.seed);
    let randoms = plane_probes(&diag, opts.probes, opts.seed);
    let pairs = mixed_pairs(&frame, &randoms, &complement, n_structured);

    let q_frame: Vec<f64> = frame.iter().map(|e| avg.q(e)).collect();
    let q_comp: Vec<f64> = complement.par_iter().map(|ep| avg.q(ep)).collect();
    let subsets = frame_subsets(k, opts.max_subsets, opts.seed);
    let subset_values: Vec<(f64, f64)> = subsets
        .iter()
        .flat_map(|set| {
            let partial: f64 = set.iter().map(|&j| q_frame[j]).sum();
            q_comp.iter().map(move |qc| (partial + qc, bound))
        })
        .collect();
    let checks = vec![
        mixed_check(&avg, &pairs, "k_plane.mixed_term", opts.tolerances.identity),
        Check::from_probes("k_plane.subset_bound", anchors::SUBSET_BOUND, CheckKind::LowerBound, opts.tolerances.slack, subset_values),
        Check::from_probes(
            "k_plane.complement_bound",
            anchors::COMPLEMENT_BOUND,
            CheckKind::LowerBound,
            opts.tolerances.slack,
            q_comp.iter().map(|&q| (q, bound)),
        ),
    ];
    Ok(BoundsFragment {
        s_k: s,
        bound,
        criticality_residual: residual,
        checks,
        subsets,
        complement_probes: complement.len(),
    })
}
