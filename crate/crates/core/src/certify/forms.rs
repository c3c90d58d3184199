//! Pointwise coefficients of holomorphic `(p, 0)`-forms and their curvature term.

use std::collections::BTreeMap;

use rand::Rng;

use crate::curvature::CurvatureTensor;
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, CVector, C64};

/// Coefficients `a_I` of `s = Σ_{i₁<…<i_p} a_I dz^{i₁}∧…∧dz^{i_p}`, extended
/// antisymmetrically to all index tuples.
#[derive(Clone, Debug, PartialEq)]
pub struct FormCoefficients {
    m: usize,
    p: usize,
    /// Keyed by strictly increasing tuples; absent entries are zero.
    coeffs: BTreeMap<Vec<usize>, C64>,
}

/// Sorts `indices` and returns the permutation sign, or `None` on a repeat.
fn sort_with_sign(indices: &[usize]) -> Option<(Vec<usize>, f64)> {
    let mut v = indices.to_vec();
    let mut sign = 1.0;
    // insertion sort counts transpositions
    for i in 1..v.len() {
        let mut j = i;
        while j > 0 && v[j - 1] > v[j] {
            v.swap(j - 1, j);
            sign = -sign;
            j -= 1;
        }
    }
    if v.windows(2).any(|w| w[0] == w[1]) {
        None
    } else {
        Some((v, sign))
    }
}

/// All strictly increasing `p`-tuples from `0..m` in lexicographic order.
pub fn increasing_tuples(m: usize, p: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, m: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if left == 0 {
            out.push(cur.clone());
            return;
        }
        for i in start..=(m - left) {
            cur.push(i);
            rec(i + 1, m, left - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if p <= m {
        rec(0, m, p, &mut Vec::new(), &mut out);
    }
    out
}

impl FormCoefficients {
    pub fn zeros(m: usize, p: usize) -> Result<Self> {
        if p == 0 || p > m {
            return Err(Error::Domain(format!("form degree {p} invalid in dimension {m}")));
        }
        Ok(Self { m, p, coeffs: BTreeMap::new() })
    }

    /// Random coefficients with independent standard complex Gaussian entries.
    pub fn random<R: Rng + ?Sized>(m: usize, p: usize, rng: &mut R) -> Result<Self> {
        let mut s = Self::zeros(m, p)?;
        for t in increasing_tuples(m, p) {
            s.coeffs.insert(t, linalg::complex_gaussian(rng));
        }
        Ok(s)
    }

    /// The 2-form `Σ_{i<j} A_ij dz^i∧dz^j` of a skew-symmetric matrix.
    pub fn from_two_form(a: &CMatrix) -> Result<Self> {
        let m = a.nrows();
        if a.ncols() != m || linalg::max_abs(&(a + a.transpose())) > 1e-12 * linalg::max_abs(a).max(1.0) {
            return Err(Error::Domain("2-form coefficients must be a skew-symmetric square matrix".into()));
        }
        let mut s = Self::zeros(m, 2)?;
        for i in 0..m {
            for j in (i + 1)..m {
                s.set(&[i, j], a[(i, j)])?;
            }
        }
        Ok(s)
    }

    /// `A_ij = a_{ij}` for a 2-form.
    pub fn two_form_matrix(&self) -> Result<CMatrix> {
        if self.p != 2 {
            return Err(Error::Domain("only 2-forms have a coefficient matrix".into()));
        }
        Ok(CMatrix::from_fn(self.m, self.m, |i, j| self.get(&[i, j])))
    }

    pub fn dim(&self) -> usize {
        self.m
    }

    pub fn degree(&self) -> usize {
        self.p
    }

    /// `a_I` for any tuple, with the antisymmetric sign; zero on repeated indices.
    pub fn get(&self, indices: &[usize]) -> C64 {
        assert_eq!(indices.len(), self.p, "tuple length must equal the degree");
        match sort_with_sign(indices) {
            Some((sorted, sign)) => self.coeffs.get(&sorted).map_or(C64::new(0.0, 0.0), |z| z * sign),
            None => C64::new(0.0, 0.0),
        }
    }

    /// Sets `a_I`, storing the sign-adjusted value under the sorted tuple.
    pub fn set(&mut self, indices: &[usize], value: C64) -> Result<()> {
        if indices.len() != self.p || indices.iter().any(|&i| i >= self.m) {
            return Err(Error::Domain(format!("index tuple {indices:?} invalid for a {}-form in dimension {}", self.p, self.m)));
        }
        match sort_with_sign(indices) {
            Some((sorted, sign)) => {
                self.coeffs.insert(sorted, value * sign);
                Ok(())
            }
            None if value == C64::new(0.0, 0.0) => Ok(()),
            None => Err(Error::Domain("coefficient with a repeated index must be zero".into())),
        }
    }

    /// Nonzero entries over increasing tuples.
    pub fn iter(&self) -> impl Iterator<Item = (&Vec<usize>, &C64)> {
        self.coeffs.iter().filter(|(_, z)| **z != C64::new(0.0, 0.0))
    }

    /// `Σ_{I increasing} |a_I|²`.
    pub fn norm_sqr(&self) -> f64 {
        self.coeffs.values().map(|z| z.norm_sqr()).sum()
    }

    pub fn scaled(&self, t: C64) -> Self {
        Self {
            m: self.m,
            p: self.p,
            coeffs: self.coeffs.iter().map(|(k, v)| (k.clone(), v * t)).collect(),
        }
    }

    /// Coefficients in the frame `e'_a = Σ_i U_ia e_i`:
    /// `a'_J = Σ_I det(U[I, J]) a_I`. For `p = 2` this is `ᵗU A U`.
    pub fn transform(&self, u: &CMatrix) -> Result<Self> {
        if u.shape() != (self.m, self.m) {
            return Err(Error::Domain(format!("frame change must be {}×{}", self.m, self.m)));
        }
        let mut out = Self::zeros(self.m, self.p)?;
        for j in increasing_tuples(self.m, self.p) {
            let mut acc = C64::new(0.0, 0.0);
            for (i, a) in self.iter() {
                let minor = CMatrix::from_fn(self.p, self.p, |r, c| u[(i[r], j[c])]);
                acc += minor.determinant() * a;
            }
            out.coeffs.insert(j, acc);
        }
        Ok(out)
    }
}

/// `R_{vv̄il̄} = Σ_ab v_a v̄_b R[a][b][i][l]` as an `m × m` matrix.
fn directional_matrix(r: &CurvatureTensor, v: &CVector) -> CMatrix {
    let m = r.dim();
    let t = r.components();
    CMatrix::from_fn(m, m, |i, l| {
        let mut acc = C64::new(0.0, 0.0);
        for a in 0..m {
            for b in 0..m {
                acc += v[a] * v[b].conj() * t.get(a, b, i, l);
            }
        }
        acc
    })
}

/// Contracts a Hermitian form `h_il` against a form:
/// `Σ_{I increasing} Σ_k Σ_l h_{l i_k} a_I conj(a_{I with i_k → l})`.
///
/// The row index of `h` pairs with the conjugated coefficient. This is the
/// pairing that is unchanged under `e' = eU`, `a' = ᵗU a`, `h' = ᵗU h Ū`.
pub fn contract_with_form(h: &CMatrix, s: &FormCoefficients) -> f64 {
    let m = s.dim();
    let mut acc = C64::new(0.0, 0.0);
    for (tuple, a) in s.iter() {
        for slot in 0..tuple.len() {
            let mut swapped = tuple.clone();
            for l in 0..m {
                swapped[slot] = l;
                let other = s.get(&swapped);
                if other != C64::new(0.0, 0.0) {
                    acc += h[(l, tuple[slot])] * a * other.conj();
                }
            }
        }
    }
    acc.re
}

/// Curvature part of `⟨√-1 ∂∂̄|s|², v∧v̄/√-1⟩` for a `(p, 0)`-form:
/// `Σ_{I increasing} Σ_k Σ_l R_{vv̄ l ī_k} a_I conj(a_{i₁…(l)_k…i_p})`,
/// where `R_{vv̄ l ī} = conj(R_{vv̄ i l̄})`.
pub fn bochner_curvature_term(r: &CurvatureTensor, s: &FormCoefficients, v: &CVector) -> Result<f64> {
    if s.dim() != r.dim() || v.len() != r.dim() {
        return Err(Error::Domain("form, vector and tensor dimensions differ".into()));
    }
    if (v.norm() - 1.0).abs() > 1e-10 {
        return Err(Error::Domain(format!("direction must be a unit vector (|v| = {})", v.norm())));
    }
    Ok(contract_with_form(&directional_matrix(r, v), s))
}

/// `Σ_i (R_{vv̄,2i-1,2i-1} + R_{vv̄,2i,2i}) λ_i²` for a 2-form already in
/// skew normal form with parameters `lambda`.
pub fn normal_form_bochner_term(r: &CurvatureTensor, lambda: &[f64], v: &CVector) -> f64 {
    let h = directional_matrix(r, v);
    lambda
        .iter()
        .enumerate()
        .map(|(i, l)| (h[(2 * i, 2 * i)] + h[(2 * i + 1, 2 * i + 1)]).re * l * l)
        .sum()
}
