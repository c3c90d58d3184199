//! Unitary congruence normal form of complex skew-symmetric matrices.
//!
//! For `ᵗA = -A` there is a unitary `U` with `ᵗU A U = diag(λ₁F, …, λ_rF, 0)`,
//! `F = [[0, 1], [-1, 0]]`, `λ₁ ≥ λ₂ ≥ … ≥ 0`. The `λ_i` are the singular values
//! of `A`, each appearing twice.
//!
//! Construction: with `u₁` a top eigenvector of `A*A` (eigenvalue `λ²`), the
//! vector `u₂ = -conj(A u₁)/λ` is a unit vector orthogonal to `u₁` with
//! `ᵗu₁ A u₂ = λ`, and `span(u₁, u₂)^⊥` is invariant in the sense that
//! `ᵗu_i A w = 0` for every `w` in it. Recurse on the complement.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kscalar::MatrixRecord;
use crate::linalg::{self, CMatrix, C64};

/// Relative width of the top eigenvalue cluster of `A*A`.
const CLUSTER_TOL: f64 = 1e-8;

#[derive(Clone, Debug)]
pub struct SkewNormalForm {
    pub u: CMatrix,
    /// Nonincreasing, length `⌊m/2⌋`, zero padded.
    pub lambda: Vec<f64>,
}

impl SkewNormalForm {
    /// `diag(λ₁F, …, λ_rF, 0)`.
    pub fn block_matrix(&self) -> CMatrix {
        let m = self.u.nrows();
        let mut b = CMatrix::zeros(m, m);
        for (i, &l) in self.lambda.iter().enumerate() {
            b[(2 * i, 2 * i + 1)] = C64::from(l);
            b[(2 * i + 1, 2 * i)] = C64::from(-l);
        }
        b
    }

    /// `max |ᵗU A U - diag(λ_iF)|`.
    pub fn reconstruction_residual(&self, a: &CMatrix) -> f64 {
        linalg::max_abs(&(self.u.transpose() * a * &self.u - self.block_matrix()))
    }

    pub fn record(&self) -> SkewNormalFormRecord {
        SkewNormalFormRecord {
            u: MatrixRecord::from(&self.u),
            lambda: self.lambda.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SkewNormalFormRecord {
    pub u: MatrixRecord,
    pub lambda: Vec<f64>,
}

fn skew_defect(a: &CMatrix) -> f64 {
    linalg::max_abs(&(a + a.transpose()))
}

/// Top eigenvector of the Hermitian `h`, chosen deterministically inside a
/// degenerate top cluster: the normalized projection of the coordinate vector
/// with the largest weight in the cluster.
fn top_vector(h: &CMatrix) -> (f64, Vec<C64>) {
    let n = h.nrows();
    let (values, vectors) = linalg::hermitian_eigen(h);
    let top = values[n - 1];
    let cutoff = top - CLUSTER_TOL * top.abs().max(f64::MIN_POSITIVE);
    let cluster: Vec<usize> = (0..n).filter(|&i| values[i] >= cutoff).collect();
    if cluster.len() == 1 {
        return (top.max(0.0), vectors.column(n - 1).iter().copied().collect());
    }
    // weight of e_r in the cluster: Σ_c |V_rc|²
    let weight = |r: usize| cluster.iter().map(|&c| vectors[(r, c)].norm_sqr()).sum::<f64>();
    let mut best = 0;
    for r in 1..n {
        if weight(r) > weight(best) * (1.0 + 1e-12) {
            best = r;
        }
    }
    // P e_best = Σ_c V_c conj(V_best,c)
    let mut v = vec![C64::new(0.0, 0.0); n];
    for &c in &cluster {
        let coeff = vectors[(best, c)].conj();
        for (r, slot) in v.iter_mut().enumerate() {
            *slot += vectors[(r, c)] * coeff;
        }
    }
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    for z in v.iter_mut() {
        *z /= norm;
    }
    (top.max(0.0), v)
}

pub fn skew_normal_form(a: &CMatrix) -> Result<SkewNormalForm> {
    let m = a.nrows();
    if a.ncols() != m {
        return Err(Error::Domain("skew normal form needs a square matrix".into()));
    }
    let scale = linalg::max_abs(a).max(1.0);
    let defect = skew_defect(a);
    if defect > 1e-12 * scale {
        return Err(Error::Domain(format!(
            "matrix is not skew-symmetric (max |A + ᵗA| = {defect:.3e})"
        )));
    }
    let a = (a - a.transpose()) * C64::from(0.5);
    let negligible = 1e-14 * scale;

    let mut columns: Vec<CMatrix> = Vec::with_capacity(m);
    let mut lambda = Vec::with_capacity(m / 2);
    // orthonormal basis of the part not yet normalized
    let mut basis = CMatrix::identity(m, m);
    while basis.ncols() >= 2 {
        let r = basis.ncols();
        let local = basis.transpose() * &a * &basis;
        let (top, u1_local) = top_vector(&(local.adjoint() * &local));
        let l = top.sqrt();
        if l <= negligible {
            break;
        }
        let u1_local = CMatrix::from_column_slice(r, 1, &u1_local);
        let u2_local = (&local * &u1_local).map(|z| -z.conj() / l);
        let u1 = &basis * &u1_local;
        let u2 = &basis * &u2_local;
        let pair = CMatrix::from_columns(&[u1_local.column(0), u2_local.column(0)]);
        let next = &basis * linalg::orthogonal_complement(&pair);
        columns.push(u1);
        columns.push(u2);
        lambda.push(l);
        basis = next;
    }
    for c in 0..basis.ncols() {
        columns.push(basis.columns(c, 1).into_owned());
    }
    lambda.resize(m / 2, 0.0);
    let refs: Vec<_> = columns.iter().map(|c| c.column(0)).collect();
    let u = CMatrix::from_columns(&refs);
    Ok(SkewNormalForm { u, lambda })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_skew(m: usize, seed: u64) -> CMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = linalg::gaussian_matrix(m, m, &mut rng);
        &g - g.transpose()
    }

    fn paired_singular_values(a: &CMatrix) -> Vec<f64> {
        let mut sv: Vec<f64> = a.clone().svd(false, false).singular_values.iter().copied().collect();
        sv.sort_by(|x, y| y.total_cmp(x));
        sv.chunks(2).filter(|c| c.len() == 2).map(|c| 0.5 * (c[0] + c[1])).collect()
    }

    #[test]
    fn standard_block_is_fixed() {
        let mut a = CMatrix::zeros(2, 2);
        a[(0, 1)] = C64::from(3.0);
        a[(1, 0)] = C64::from(-3.0);
        let nf = skew_normal_form(&a).unwrap();
        assert_eq!(nf.lambda, vec![3.0]);
        assert!(linalg::max_abs(&(&nf.u - CMatrix::identity(2, 2))) < 1e-14);
    }

    #[test]
    fn zero_matrix() {
        let nf = skew_normal_form(&CMatrix::zeros(5, 5)).unwrap();
        assert_eq!(nf.lambda, vec![0.0, 0.0]);
        assert!(linalg::unitarity_defect(&nf.u) < 1e-14);
    }

    #[test]
    fn rejects_non_skew() {
        let mut a = random_skew(3, 1);
        a[(0, 0)] = C64::from(1.0);
        assert!(matches!(skew_normal_form(&a), Err(Error::Domain(_))));
    }

    #[test]
    fn random_six_by_six_matches_svd_oracle() {
        let a = random_skew(6, 2);
        let nf = skew_normal_form(&a).unwrap();
        assert!(nf.reconstruction_residual(&a) < 1e-10);
        assert!(linalg::unitarity_defect(&nf.u) < 1e-12);
        let oracle = paired_singular_values(&a);
        for (l, s) in nf.lambda.iter().zip(&oracle) {
            assert!((l - s).abs() < 1e-10);
        }
    }

    #[test]
    fn degenerate_spectrum_is_handled() {
        // two equal blocks hidden by a random unitary congruence
        let mut b = CMatrix::zeros(4, 4);
        for i in 0..2 {
            b[(2 * i, 2 * i + 1)] = C64::from(2.0);
            b[(2 * i + 1, 2 * i)] = C64::from(-2.0);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let v = linalg::haar_frame(4, 4, &mut rng);
        let a = v.transpose() * b * &v;
        let nf = skew_normal_form(&a).unwrap();
        assert!(nf.reconstruction_residual(&a) < 1e-10);
        assert!((nf.lambda[0] - 2.0).abs() < 1e-12 && (nf.lambda[1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn odd_dimension_and_rank_deficiency() {
        let z = CMatrix::from_fn(5, 1, |i, _| C64::new(i as f64, 1.0));
        let w = CMatrix::from_fn(5, 1, |i, _| C64::new(1.0 + (i * i) as f64, 0.5));
        let a = &z * w.transpose() - &w * z.transpose();
        let nf = skew_normal_form(&a).unwrap();
        assert!(nf.reconstruction_residual(&a) < 1e-10);
        assert!(nf.lambda[0] > 1.0 && nf.lambda[1] < 1e-12);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]
        #[test]
        fn normal_form_invariants(seed in any::<u64>(), half in 1usize..4, odd in any::<bool>()) {
            let m = 2 * half + usize::from(odd);
            let a = random_skew(m, seed);
            let nf = skew_normal_form(&a).unwrap();
            prop_assert!(nf.reconstruction_residual(&a) < 1e-10);
            prop_assert!(linalg::unitarity_defect(&nf.u) < 1e-12);
            prop_assert!(nf.lambda.windows(2).all(|w| w[0] >= w[1]));
            for (l, s) in nf.lambda.iter().zip(paired_singular_values(&a)) {
                prop_assert!((l - s).abs() < 1e-10);
            }
        }
    }
}
