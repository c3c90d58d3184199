//! Sphere averages of unitary monomials `Π z_i^{α_i} z̄_i^{β_i}` over the unit
//! sphere of `C^k`.
//!
//! Phase averaging kills every monomial with `α ≠ β`. For `α = β`
//!
//! ```text
//! avg |z_1|^{2α_1} ⋯ |z_k|^{2α_k} = α_1! ⋯ α_k! (k-1)! / (k-1+|α|)!
//! ```
//!
//! All averages downstream are evaluated by exact contraction with these
//! values; [`mc_average`] is an independent Monte Carlo oracle.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::curvature::{CurvatureTensor, Tensor4};
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, C64};

fn factorial(n: u64) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, i| acc * BigInt::from(i))
}

/// Exact average of `Π z_i^{α_i} z̄_i^{β_i}` over the unit sphere of `C^k`.
pub fn monomial_moment(k: usize, alpha: &[i64], beta: &[i64]) -> Result<BigRational> {
    if k == 0 {
        return Err(Error::Domain("sphere dimension k must be positive".into()));
    }
    if alpha.len() != k || beta.len() != k {
        return Err(Error::Domain(format!(
            "multi-indices must have length {k} (got {} and {})",
            alpha.len(),
            beta.len()
        )));
    }
    if alpha.iter().chain(beta).any(|&e| e < 0) {
        return Err(Error::Domain("exponents must be nonnegative".into()));
    }
    if alpha != beta {
        return Ok(BigRational::zero());
    }
    let order: u64 = alpha.iter().map(|&a| a as u64).sum();
    let k = k as u64;
    let numer = alpha
        .iter()
        .fold(factorial(k - 1), |acc, &a| acc * factorial(a as u64));
    let denom = factorial(k - 1 + order);
    Ok(BigRational::new(numer, denom))
}

fn to_f64(q: &BigRational) -> f64 {
    q.to_f64().expect("moment values are representable")
}

/// Nonzero moments (`α = β`) of a fixed sphere, keyed by `α`.
#[derive(Clone, Debug)]
pub struct MomentTable {
    k: usize,
    max_order: usize,
    values: BTreeMap<Vec<u32>, BigRational>,
}

impl MomentTable {
    /// Table of every `α` with `|α| ≤ max_order`.
    pub fn new(k: usize, max_order: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::Domain("sphere dimension k must be positive".into()));
        }
        let mut values = BTreeMap::new();
        let mut alpha = vec![0u32; k];
        fill(&mut alpha, 0, max_order as u32, k, &mut values)?;
        Ok(Self { k, max_order, values })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn max_order(&self) -> usize {
        self.max_order
    }

    /// Average of `Π z^α z̄^β`; `None` when `|α|` exceeds the table order.
    pub fn get(&self, alpha: &[u32], beta: &[u32]) -> Option<BigRational> {
        if alpha.len() != self.k || beta.len() != self.k {
            return None;
        }
        if alpha != beta {
            let order: u32 = alpha.iter().sum();
            return (order as usize <= self.max_order).then(BigRational::zero);
        }
        self.values.get(alpha).cloned()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Vec<u32>, &BigRational)> {
        self.values.iter()
    }
}

fn fill(
    alpha: &mut Vec<u32>,
    pos: usize,
    budget: u32,
    k: usize,
    out: &mut BTreeMap<Vec<u32>, BigRational>,
) -> Result<()> {
    if pos == k {
        let a: Vec<i64> = alpha.iter().map(|&x| x as i64).collect();
        out.insert(alpha.clone(), monomial_moment(k, &a, &a)?);
        return Ok(());
    }
    for e in 0..=budget {
        alpha[pos] = e;
        fill(alpha, pos + 1, budget - e, k, out)?;
    }
    alpha[pos] = 0;
    Ok(())
}

/// Floating-point moments of order 2 and 4 used for contraction.
///
/// Values are taken from the exact rationals and converted once.
#[derive(Clone, Copy, Debug)]
pub struct QuarticMoments {
    pub k: usize,
    /// `avg |z_i|²`
    pub second: f64,
    /// `avg |z_i|⁴`
    pub fourth_same: f64,
    /// `avg |z_i|²|z_j|²`, `i ≠ j`
    pub fourth_mixed: f64,
}

impl QuarticMoments {
    pub fn new(k: usize) -> Self {
        assert!(k >= 1);
        let unit = |pos: &[usize]| {
            let mut a = vec![0i64; k];
            for &p in pos {
                a[p] += 1;
            }
            to_f64(&monomial_moment(k, &a, &a).expect("valid multi-index"))
        };
        Self {
            k,
            second: unit(&[0]),
            fourth_same: unit(&[0, 0]),
            fourth_mixed: if k > 1 { unit(&[0, 1]) } else { 0.0 },
        }
    }

    /// `avg x_i x̄_j x_k x̄_l`.
    pub fn quartic(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        if i == k {
            if j == i && l == i {
                self.fourth_same
            } else {
                0.0
            }
        } else if (j == i && l == k) || (j == k && l == i) {
            self.fourth_mixed
        } else {
            0.0
        }
    }
}

/// `avg Σ T[i][j][k][l] x_i x̄_j x_k x̄_l` over the unit sphere of `C^n`.
pub fn average_quartic(t: &Tensor4) -> C64 {
    let n = t.dim();
    let mom = QuarticMoments::new(n);
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..n {
        for k in 0..n {
            if i == k {
                acc += t.get(i, i, i, i) * mom.fourth_same;
            } else {
                // {j, l} must equal {i, k} as a multiset
                acc += (t.get(i, i, k, k) + t.get(i, k, k, i)) * mom.fourth_mixed;
            }
        }
    }
    acc
}

/// `avg Σ M_ij x_i x̄_j` over the unit sphere of `C^n`.
pub fn average_quadratic(m: &CMatrix) -> C64 {
    let mom = QuarticMoments::new(m.nrows());
    m.diagonal().iter().sum::<C64>() * mom.second
}

/// `avg R(Z, Z̄, Z, Z̄)` over the unit sphere of the tensor's space, by exact
/// moment contraction of every component.
pub fn average_quartic_form(r: &CurvatureTensor) -> f64 {
    average_quartic(r.components()).re
}

/// Monte Carlo mean and standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub samples: u64,
}

impl McEstimate {
    /// `|mean - target| ≤ z · stderr`, with an absolute floor for zero-variance integrands.
    pub fn agrees_with(&self, target: f64, z: f64) -> bool {
        (self.mean - target).abs() <= z * self.stderr + 1e-12 * target.abs().max(1.0)
    }
}

/// Samples per deterministic substream.
const CHUNK: u64 = 1 << 14;

/// Average of `f` over the unit sphere of `C^k` by sampling normalized
/// complex Gaussian vectors.
///
/// Samples are split into fixed-size chunks, chunk `c` drawing from ChaCha
/// stream `c` of `seed`; chunk statistics are merged in chunk order, so the
/// result does not depend on the thread schedule.
pub fn mc_average<F>(f: F, k: usize, n_samples: u64, seed: u64) -> Result<McEstimate>
where
    F: Fn(&[C64]) -> f64 + Sync,
{
    if n_samples < 2 {
        return Err(Error::Domain("Monte Carlo needs at least two samples".into()));
    }
    if k == 0 {
        return Err(Error::Domain("sphere dimension k must be positive".into()));
    }
    let chunks = n_samples.div_ceil(CHUNK);
    let partial: Vec<(u64, f64, f64)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c);
            let count = CHUNK.min(n_samples - c * CHUNK);
            let mut mean = 0.0;
            let mut m2 = 0.0;
            let mut z = vec![C64::new(0.0, 0.0); k];
            for n in 1..=count {
                let v = linalg::random_unit_vector(k, &mut rng);
                z.copy_from_slice(v.as_slice());
                let x = f(&z);
                let delta = x - mean;
                mean += delta / n as f64;
                m2 += delta * (x - mean);
            }
            (count, mean, m2)
        })
        .collect();
    // Chan et al. pairwise merge in chunk order
    let (mut n, mut mean, mut m2) = (0u64, 0.0_f64, 0.0_f64);
    for (nb, mb, m2b) in partial {
        if nb == 0 {
            continue;
        }
        let total = n + nb;
        let delta = mb - mean;
        mean += delta * nb as f64 / total as f64;
        m2 += m2b + delta * delta * (n as f64) * (nb as f64) / total as f64;
        n = total;
    }
    let variance = (m2 / (n - 1) as f64).max(0.0);
    Ok(McEstimate {
        mean,
        stderr: (variance / n as f64).sqrt(),
        samples: n,
    })
}
