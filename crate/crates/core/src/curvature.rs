//! Kähler curvature tensors, complex k-planes and skew-Hermitian generators.
//!
//! Components are stored as `R[i][j][k][l] = R(e_i, ē_j, e_k, ē_l)` in a fixed
//! unitary frame. The metric and `R` are extended complex-linearly in every
//! slot, so for `X = Σ x_i e_i`
//!
//! ```text
//! R(X, X̄, X, X̄) = Σ x_i x̄_j x_k x̄_l R[i][j][k][l].
//! ```
//!
//! A Kähler curvature tensor satisfies `R_{ij̄kl̄} = R_{kj̄il̄} = R_{il̄kj̄}` and
//! `conj(R_{ij̄kl̄}) = R_{jīlk̄}`. With the convention used here the space form
//! of constant holomorphic sectional curvature `c` is
//! `(c/2)(δ_ij δ_kl + δ_il δ_kj)`, i.e. `H ≡ c`.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, CVector, C64};

/// Default absolute tolerance for symmetry checks on O(1)-normalized tensors.
pub const SYMMETRY_TOL: f64 = 1e-10;

/// Unitarity tolerance for frame changes.
pub const UNITARY_TOL: f64 = 1e-10;

/// A dense 4-index complex array `T[p][q][r][s]` with every index in `0..n`.
///
/// This is the general result of pulling a curvature tensor back along four
/// (possibly different) linear maps, so it carries no symmetry guarantees.
#[derive(Clone, Debug, PartialEq)]
pub struct Tensor4 {
    n: usize,
    data: Vec<C64>,
}

impl Tensor4 {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![C64::new(0.0, 0.0); n * n * n * n],
        }
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize, usize, usize) -> C64) -> Self {
        let mut t = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        let idx = t.index(i, j, k, l);
                        t.data[idx] = f(i, j, k, l);
                    }
                }
            }
        }
        t
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize, k: usize, l: usize) -> usize {
        ((i * self.n + j) * self.n + k) * self.n + l
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize, l: usize) -> C64 {
        self.data[self.index(i, j, k, l)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, k: usize, l: usize, value: C64) {
        let idx = self.index(i, j, k, l);
        self.data[idx] = value;
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Contracts the last two slots with a matrix: `M_ab = Σ_kl T[a][b][k][l] P_kl`.
    pub fn contract_last_pair(&self, p: &CMatrix) -> CMatrix {
        let n = self.n;
        let mut out = CMatrix::zeros(n, n);
        for a in 0..n {
            for b in 0..n {
                let base = (a * n + b) * n * n;
                let mut acc = C64::new(0.0, 0.0);
                for k in 0..n {
                    for l in 0..n {
                        acc += self.data[base + k * n + l] * p[(k, l)];
                    }
                }
                out[(a, b)] = acc;
            }
        }
        out
    }

    /// Evaluates `T(X, Ȳ, Z, W̄) = Σ x_i ȳ_j z_k w̄_l T[i][j][k][l]`.
    pub fn evaluate(&self, x: &CVector, y: &CVector, z: &CVector, w: &CVector) -> C64 {
        let n = self.n;
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..n {
            if x[i] == C64::new(0.0, 0.0) {
                continue;
            }
            for j in 0..n {
                let xy = x[i] * y[j].conj();
                if xy == C64::new(0.0, 0.0) {
                    continue;
                }
                for k in 0..n {
                    let xyz = xy * z[k];
                    let base = self.index(i, j, k, 0);
                    for l in 0..n {
                        acc += xyz * w[l].conj() * self.data[base + l];
                    }
                }
            }
        }
        acc
    }
}

/// Pulls `t` back along four `n × q` maps:
/// `T'[p][q][r][s] = Σ A_ip conj(B_jq) C_kr conj(D_ls) T[i][j][k][l]`.
pub fn pull_back(t: &Tensor4, a: &CMatrix, b: &CMatrix, c: &CMatrix, d: &CMatrix) -> Tensor4 {
    let n = t.n;
    let q = a.ncols();
    for mat in [a, b, c, d] {
        assert_eq!(mat.shape(), (n, q), "pull-back maps must be {n}×{q}");
    }
    // Successive single-mode contractions; dims[] tracks the current shape.
    let mut dims = [n, n, n, n];
    let mut cur = t.data.clone();
    for (mode, (mat, conj)) in [(a, false), (b, true), (c, false), (d, true)]
        .into_iter()
        .enumerate()
    {
        let mut next_dims = dims;
        next_dims[mode] = q;
        let mut next = vec![C64::new(0.0, 0.0); next_dims.iter().product()];
        let stride_in = |d: &[usize; 4], idx: [usize; 4]| {
            ((idx[0] * d[1] + idx[1]) * d[2] + idx[2]) * d[3] + idx[3]
        };
        for i0 in 0..next_dims[0] {
            for i1 in 0..next_dims[1] {
                for i2 in 0..next_dims[2] {
                    for i3 in 0..next_dims[3] {
                        let out_idx = [i0, i1, i2, i3];
                        let col = out_idx[mode];
                        let mut acc = C64::new(0.0, 0.0);
                        for src in 0..dims[mode] {
                            let mut in_idx = out_idx;
                            in_idx[mode] = src;
                            let coeff = if conj {
                                mat[(src, col)].conj()
                            } else {
                                mat[(src, col)]
                            };
                            acc += coeff * cur[stride_in(&dims, in_idx)];
                        }
                        next[stride_in(&next_dims, out_idx)] = acc;
                    }
                }
            }
        }
        cur = next;
        dims = next_dims;
    }
    Tensor4 { n: q, data: cur }
}

/// Which symmetry family a violation belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SymmetryKind {
    /// `R[i][j][k][l] = R[k][j][i][l]` or `R[i][j][k][l] = R[i][l][k][j]`.
    PairSymmetry,
    /// `conj(R[i][j][k][l]) = R[j][i][l][k]`.
    HermitianReality,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymmetryViolation {
    pub kind: SymmetryKind,
    pub indices: [usize; 4],
    pub residual: f64,
}

impl fmt::Display for SymmetryViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [i, j, k, l] = self.indices;
        write!(f, "{:?} at ({i},{j},{k},{l}): residual {:.3e}", self.kind, self.residual)
    }
}

/// Kähler curvature tensor in a unitary frame.
#[derive(Clone, Debug, PartialEq)]
pub struct CurvatureTensor {
    components: Tensor4,
    /// Largest change made by symmetrization at construction.
    symmetrization_residual: f64,
}

/// The eight index maps under which Kähler curvature components are related.
/// Each entry returns the member index and whether the value is conjugated.
fn orbit(i: usize, j: usize, k: usize, l: usize) -> [([usize; 4], bool); 8] {
    [
        ([i, j, k, l], false),
        ([k, j, i, l], false),
        ([i, l, k, j], false),
        ([k, l, i, j], false),
        ([j, i, l, k], true),
        ([l, i, j, k], true),
        ([j, k, l, i], true),
        ([l, k, j, i], true),
    ]
}

/// Projects a raw component array onto the Kähler-symmetric subspace.
///
/// Averages are computed once per orbit and written back to every member, so
/// the result is exactly symmetric and the projection is bitwise idempotent.
fn symmetrize(raw: &Tensor4) -> (Tensor4, f64) {
    let n = raw.n;
    let mut out = Tensor4::zeros(n);
    let mut done = vec![false; raw.data.len()];
    let mut residual = 0.0_f64;
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    let idx = raw.index(i, j, k, l);
                    if done[idx] {
                        continue;
                    }
                    let members = orbit(i, j, k, l);
                    let vals = members.map(|(m, conj)| {
                        let v = raw.get(m[0], m[1], m[2], m[3]);
                        if conj {
                            v.conj()
                        } else {
                            v
                        }
                    });
                    // pairwise, so an already symmetric orbit is reproduced bitwise
                    let sum = ((vals[0] + vals[1]) + (vals[2] + vals[3]))
                        + ((vals[4] + vals[5]) + (vals[6] + vals[7]));
                    let avg = sum / 8.0;
                    for (m, conj) in members {
                        let v = if conj { avg.conj() } else { avg };
                        let midx = raw.index(m[0], m[1], m[2], m[3]);
                        residual = residual.max((raw.data[midx] - v).norm());
                        out.data[midx] = v;
                        done[midx] = true;
                    }
                }
            }
        }
    }
    (out, residual)
}

impl CurvatureTensor {
    pub fn zeros(m: usize) -> Self {
        Self {
            components: Tensor4::zeros(m),
            symmetrization_residual: 0.0,
        }
    }

    /// Builds a tensor from raw components, projecting onto the Kähler symmetries.
    pub fn from_components(raw: Tensor4) -> Result<Self> {
        if raw.n == 0 {
            return Err(Error::Domain("curvature tensor needs dimension ≥ 1".into()));
        }
        if raw.data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Numeric("curvature components must be finite".into()));
        }
        let (components, symmetrization_residual) = symmetrize(&raw);
        Ok(Self {
            components,
            symmetrization_residual,
        })
    }

    pub fn from_fn(m: usize, f: impl FnMut(usize, usize, usize, usize) -> C64) -> Result<Self> {
        Self::from_components(Tensor4::from_fn(m, f))
    }

    /// Wraps raw components without symmetrization, for diagnostics with [`validate`](Self::validate).
    pub fn unsymmetrized(raw: Tensor4) -> Self {
        Self {
            components: raw,
            symmetrization_residual: 0.0,
        }
    }

    pub fn dim(&self) -> usize {
        self.components.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize, l: usize) -> C64 {
        self.components.get(i, j, k, l)
    }

    pub fn components(&self) -> &Tensor4 {
        &self.components
    }

    pub fn symmetrization_residual(&self) -> f64 {
        self.symmetrization_residual
    }

    pub fn max_abs(&self) -> f64 {
        self.components.max_abs()
    }

    /// Lists every component where a Kähler symmetry fails by more than `tol`
    /// (absolute, scaled by `max(1, max|R|)`).
    pub fn validate_with_tol(&self, tol: f64) -> Vec<SymmetryViolation> {
        let n = self.dim();
        let scale = self.max_abs().max(1.0);
        let bound = tol * scale;
        let mut out = Vec::new();
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        let v = self.get(i, j, k, l);
                        let pair = (v - self.get(k, j, i, l))
                            .norm()
                            .max((v - self.get(i, l, k, j)).norm());
                        if pair > bound {
                            out.push(SymmetryViolation {
                                kind: SymmetryKind::PairSymmetry,
                                indices: [i, j, k, l],
                                residual: pair,
                            });
                        }
                        let herm = (v.conj() - self.get(j, i, l, k)).norm();
                        if herm > bound {
                            out.push(SymmetryViolation {
                                kind: SymmetryKind::HermitianReality,
                                indices: [i, j, k, l],
                                residual: herm,
                            });
                        }
                    }
                }
            }
        }
        out
    }

    pub fn validate(&self) -> Vec<SymmetryViolation> {
        self.validate_with_tol(SYMMETRY_TOL)
    }

    /// `R(X, X̄, X, X̄)` without normalization (real up to rounding).
    pub fn quartic(&self, x: &CVector) -> f64 {
        self.components.evaluate(x, x, x, x).re
    }

    /// `R(X, Ȳ, Z, W̄)`.
    pub fn evaluate(&self, x: &CVector, y: &CVector, z: &CVector, w: &CVector) -> C64 {
        self.components.evaluate(x, y, z, w)
    }

    /// Holomorphic sectional curvature `R(X,X̄,X,X̄)/|X|⁴`.
    pub fn holomorphic_sectional(&self, x: &CVector) -> Result<f64> {
        self.check_vector(x)?;
        let norm2 = x.norm_squared();
        if norm2 == 0.0 {
            return Err(Error::Domain("holomorphic sectional curvature of the zero vector".into()));
        }
        Ok(self.quartic(x) / (norm2 * norm2))
    }

    fn check_vector(&self, x: &CVector) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::Domain(format!(
                "vector has length {} but tensor dimension is {}",
                x.len(),
                self.dim()
            )));
        }
        Ok(())
    }

    /// Expresses the tensor in the frame `e'_a = Σ_i U_ia e_i`.
    ///
    /// A vector with coordinates `x` in the old frame has coordinates `U* x` in the new one.
    pub fn conjugate_frame(&self, u: &CMatrix) -> Result<Self> {
        let m = self.dim();
        if u.shape() != (m, m) {
            return Err(Error::Domain(format!("frame change must be {m}×{m}")));
        }
        let defect = linalg::unitarity_defect(u);
        if defect > UNITARY_TOL {
            return Err(Error::Domain(format!(
                "frame change is not unitary (defect {defect:.3e})"
            )));
        }
        Self::from_components(pull_back(&self.components, u, u, u, u))
    }

    /// Components `R(F e_a, conj(F e_b), F e_c, conj(F e_d))` on a k-plane.
    pub fn restrict(&self, plane: &TangentPlane) -> Self {
        let f = plane.frame();
        // symmetries are inherited exactly up to rounding, so this cannot fail
        Self::from_components(pull_back(&self.components, f, f, f, f))
            .expect("restriction of a valid tensor is valid")
    }

    /// Block direct sum.
    pub fn direct_sum(&self, other: &Self) -> Self {
        let (ma, mb) = (self.dim(), other.dim());
        let mut t = Tensor4::zeros(ma + mb);
        for i in 0..ma {
            for j in 0..ma {
                for k in 0..ma {
                    for l in 0..ma {
                        t.set(i, j, k, l, self.get(i, j, k, l));
                    }
                }
            }
        }
        for i in 0..mb {
            for j in 0..mb {
                for k in 0..mb {
                    for l in 0..mb {
                        t.set(ma + i, ma + j, ma + k, ma + l, other.get(i, j, k, l));
                    }
                }
            }
        }
        Self {
            components: t,
            symmetrization_residual: self.symmetrization_residual.max(other.symmetrization_residual),
        }
    }

    /// Ricci-type contraction over a plane: `M(X,Ȳ) = Σ_{j≤k} R(X, Ȳ, E_j, Ē_j)`,
    /// returned as the `m × m` matrix `M_ab`.
    pub fn plane_ricci(&self, plane: &TangentPlane) -> CMatrix {
        let f = plane.frame();
        let projector = f * f.adjoint();
        // Σ_j E_jk conj(E_jl) = (F F*)_kl
        self.components.contract_last_pair(&projector)
    }

    /// Restricted Ricci tensor `r_ab = Σ_{j≤k} R(E_a, Ē_b, E_j, Ē_j)`.
    pub fn restricted_ricci(&self, plane: &TangentPlane) -> CMatrix {
        let restricted = self.restrict(plane);
        let k = plane.rank();
        let mut r = CMatrix::zeros(k, k);
        for a in 0..k {
            for b in 0..k {
                r[(a, b)] = (0..k).map(|j| restricted.get(a, b, j, j)).sum();
            }
        }
        r
    }

    /// Scalar curvature `Σ_{i,j} R[i][i][j][j]`.
    pub fn scalar(&self) -> f64 {
        let m = self.dim();
        let mut acc = 0.0;
        for i in 0..m {
            for j in 0..m {
                acc += self.get(i, i, j, j).re;
            }
        }
        acc
    }
}

impl Add for &CurvatureTensor {
    type Output = CurvatureTensor;
    fn add(self, rhs: Self) -> CurvatureTensor {
        assert_eq!(self.dim(), rhs.dim(), "dimension mismatch");
        let data = self
            .components
            .data
            .iter()
            .zip(&rhs.components.data)
            .map(|(a, b)| a + b)
            .collect();
        CurvatureTensor {
            components: Tensor4 { n: self.dim(), data },
            symmetrization_residual: self.symmetrization_residual.max(rhs.symmetrization_residual),
        }
    }
}

impl Sub for &CurvatureTensor {
    type Output = CurvatureTensor;
    fn sub(self, rhs: Self) -> CurvatureTensor {
        self + &(-rhs)
    }
}

impl Mul<f64> for &CurvatureTensor {
    type Output = CurvatureTensor;
    fn mul(self, s: f64) -> CurvatureTensor {
        CurvatureTensor {
            components: Tensor4 {
                n: self.dim(),
                data: self.components.data.iter().map(|z| z * s).collect(),
            },
            symmetrization_residual: self.symmetrization_residual,
        }
    }
}

impl Neg for &CurvatureTensor {
    type Output = CurvatureTensor;
    fn neg(self) -> CurvatureTensor {
        self * -1.0
    }
}

/// An orthonormal k-frame in `C^m` spanning a complex k-plane.
#[derive(Clone, Debug, PartialEq)]
pub struct TangentPlane {
    frame: CMatrix,
}

impl TangentPlane {
    /// Orthonormalizes `frame` (span and column order preserved); rejects rank-deficient input.
    pub fn new(frame: CMatrix) -> Result<Self> {
        let frame = linalg::orthonormalize_columns(&frame)?;
        Ok(Self { frame })
    }

    /// Accepts a frame that is already orthonormal within `1e-10`.
    pub fn from_orthonormal(frame: CMatrix) -> Result<Self> {
        let (m, k) = frame.shape();
        if k == 0 || k > m {
            return Err(Error::Domain(format!("plane rank {k} invalid in dimension {m}")));
        }
        let defect = linalg::unitarity_defect(&frame);
        if defect > UNITARY_TOL {
            return Err(Error::Domain(format!("frame is not orthonormal (defect {defect:.3e})")));
        }
        Ok(Self { frame })
    }

    /// Plane spanned by the listed standard basis vectors.
    pub fn coordinate(m: usize, indices: &[usize]) -> Result<Self> {
        let mut frame = CMatrix::zeros(m, indices.len());
        for (c, &i) in indices.iter().enumerate() {
            if i >= m {
                return Err(Error::Domain(format!("basis index {i} out of range for dimension {m}")));
            }
            frame[(i, c)] = C64::new(1.0, 0.0);
        }
        Self::new(frame)
    }

    /// Haar-random k-plane (orthonormalized complex Gaussian frame).
    pub fn random<R: Rng + ?Sized>(m: usize, k: usize, rng: &mut R) -> Self {
        Self {
            frame: linalg::haar_frame(m, k, rng),
        }
    }

    pub fn frame(&self) -> &CMatrix {
        &self.frame
    }

    pub fn ambient_dim(&self) -> usize {
        self.frame.nrows()
    }

    pub fn rank(&self) -> usize {
        self.frame.ncols()
    }

    pub fn vector(&self, i: usize) -> CVector {
        self.frame.column(i).into_owned()
    }

    /// Orthogonal projector `F F*` onto the plane.
    pub fn projector(&self) -> CMatrix {
        &self.frame * self.frame.adjoint()
    }

    /// Orthonormal basis of the orthogonal complement.
    pub fn complement(&self) -> CMatrix {
        linalg::orthogonal_complement(&self.frame)
    }

    /// Unitary `[F | F⊥]`.
    pub fn full_frame(&self) -> CMatrix {
        let m = self.ambient_dim();
        let k = self.rank();
        let mut q = CMatrix::zeros(m, m);
        q.columns_mut(0, k).copy_from(&self.frame);
        if k < m {
            q.columns_mut(k, m - k).copy_from(&self.complement());
        }
        q
    }

    /// Same plane with frame `F V` for a `k × k` unitary `V`.
    pub fn reframe(&self, v: &CMatrix) -> Result<Self> {
        if v.shape() != (self.rank(), self.rank()) {
            return Err(Error::Domain("reframing matrix has the wrong shape".into()));
        }
        Self::from_orthonormal(&self.frame * v)
    }

    /// The plane `U·Σ` for an `m × m` unitary `U`.
    pub fn transformed(&self, u: &CMatrix) -> Result<Self> {
        let moved = u * &self.frame;
        Self::new(moved)
    }

    /// Largest entry of the difference of projectors.
    pub fn projector_distance(&self, other: &Self) -> f64 {
        linalg::max_abs(&(self.projector() - other.projector()))
    }
}

/// A skew-Hermitian `m × m` matrix `a ∈ u(m)`; `exp(t a)` is unitary for real `t`.
#[derive(Clone, Debug, PartialEq)]
pub struct SkewGenerator {
    matrix: CMatrix,
}

impl SkewGenerator {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::Domain("generator must be square".into()));
        }
        let defect = linalg::skew_hermitian_defect(&matrix);
        let scale = linalg::max_abs(&matrix).max(1.0);
        if defect > 1e-10 * scale {
            return Err(Error::Domain(format!(
                "generator is not skew-Hermitian (defect {defect:.3e})"
            )));
        }
        Ok(Self { matrix })
    }

    pub fn zeros(m: usize) -> Self {
        Self {
            matrix: CMatrix::zeros(m, m),
        }
    }

    /// Unit-norm random generator.
    pub fn random<R: Rng + ?Sized>(m: usize, rng: &mut R) -> Self {
        Self {
            matrix: linalg::random_skew_hermitian(m, rng),
        }
    }

    /// Generator coupling `Σ` with its complement only: in the frame `[F | F⊥]`
    /// it reads `[[0, -B*], [B, 0]]` with `B` of shape `(m-k) × k`.
    pub fn horizontal(plane: &TangentPlane, block: &CMatrix) -> Result<Self> {
        let m = plane.ambient_dim();
        let k = plane.rank();
        if block.shape() != (m - k, k) {
            return Err(Error::Domain(format!(
                "horizontal block must be {}×{k}",
                m - k
            )));
        }
        let q = plane.full_frame();
        let mut local = CMatrix::zeros(m, m);
        local.view_mut((k, 0), (m - k, k)).copy_from(block);
        local.view_mut((0, k), (k, m - k)).copy_from(&(-block.adjoint()));
        Self::new(&q * local * q.adjoint())
    }

    /// Generator `i(Z⊗W̄ + W⊗Z̄)`: `X ↦ i(⟨X,Z⟩ W + ⟨X,W⟩ Z)`.
    pub fn rank_two(z: &CVector, w: &CVector) -> Result<Self> {
        let m = z.len();
        let mut a = CMatrix::zeros(m, m);
        for r in 0..m {
            for c in 0..m {
                a[(r, c)] = linalg::I * (w[r] * z[c].conj() + z[r] * w[c].conj());
            }
        }
        Self::new(a)
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.matrix.norm()
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            matrix: &self.matrix * C64::from(s),
        }
    }

    pub fn exp(&self, t: f64) -> CMatrix {
        linalg::exp_skew_hermitian(&self.matrix, t)
    }

    /// Real Frobenius inner product `Re tr(a* b)`.
    pub fn dot(&self, other: &Self) -> f64 {
        self.matrix
            .iter()
            .zip(other.matrix.iter())
            .map(|(a, b)| (a.conj() * b).re)
            .sum()
    }
}

/// Same plane, frame rotated so the restricted Ricci tensor is diagonal with
/// nonincreasing real diagonal.
pub fn diagonalize_restricted_ricci(r: &CurvatureTensor, plane: &TangentPlane) -> TangentPlane {
    // r' = Vᵀ r V̄ under E' = E V, so V diagonalizes rᵀ
    let ricci = r.restricted_ricci(plane).transpose();
    let (_, mut vectors) = linalg::hermitian_eigen(&ricci);
    // ascending → nonincreasing
    let k = plane.rank();
    let reversed = CMatrix::from_fn(k, k, |row, col| vectors[(row, k - 1 - col)]);
    vectors = linalg::canonical_phases(&reversed);
    TangentPlane::new(plane.frame() * vectors).expect("unitary reframing keeps rank")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{constant_hsc_tensor, product_tensor, random_kahler_tensor};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn space_form_is_valid() {
        assert!(constant_hsc_tensor(3, 2.0).validate().is_empty());
    }

    #[test]
    fn imaginary_diagonal_component_is_a_hermitian_violation() {
        let mut raw = Tensor4::zeros(2);
        raw.set(0, 0, 0, 0, C64::new(0.0, 1.0));
        let violations = CurvatureTensor::unsymmetrized(raw).validate();
        assert!(violations
            .iter()
            .any(|v| v.kind == SymmetryKind::HermitianReality && v.indices == [0, 0, 0, 0]));
    }

    #[test]
    fn broken_pair_symmetry_is_reported() {
        let base = constant_hsc_tensor(4, 1.0);
        let mut raw = base.components().clone();
        raw.set(0, 1, 2, 3, C64::new(0.5, 0.0));
        let violations = CurvatureTensor::unsymmetrized(raw).validate();
        assert!(violations
            .iter()
            .any(|v| v.kind == SymmetryKind::PairSymmetry && v.indices == [0, 1, 2, 3]));
    }

    #[test]
    fn construction_records_symmetrization_residual() {
        let mut raw = constant_hsc_tensor(2, 1.0).components().clone();
        raw.set(0, 0, 0, 0, C64::new(1.0, 0.8));
        let t = CurvatureTensor::from_components(raw).unwrap();
        assert!(t.validate().is_empty());
        assert!((t.symmetrization_residual() - 0.8).abs() < 1e-12);
        assert!((t.get(0, 0, 0, 0) - C64::new(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn holomorphic_sectional_of_space_form_and_zero_vector() {
        let r = constant_hsc_tensor(3, 2.0);
        let mut g = rng(5);
        for _ in 0..20 {
            let x = linalg::random_unit_vector(3, &mut g) * C64::new(1.7, -0.3);
            assert!((r.holomorphic_sectional(&x).unwrap() - 2.0).abs() < 1e-12);
        }
        assert!(matches!(
            r.holomorphic_sectional(&CVector::zeros(3)),
            Err(Error::Domain(_))
        ));
        let zero = CurvatureTensor::zeros(3);
        let x = linalg::random_unit_vector(3, &mut g);
        assert_eq!(zero.holomorphic_sectional(&x).unwrap(), 0.0);
    }

    #[test]
    fn product_vector_in_one_factor_sees_only_that_factor() {
        let mut g = rng(6);
        let a = random_kahler_tensor(2, &mut g);
        let b = random_kahler_tensor(3, &mut g);
        let p = product_tensor(&a, &b);
        let xa = linalg::random_unit_vector(2, &mut g);
        let mut x = CVector::zeros(5);
        x.rows_mut(0, 2).copy_from(&xa);
        let h = p.holomorphic_sectional(&x).unwrap();
        assert!((h - a.holomorphic_sectional(&xa).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn conjugate_frame_cases() {
        let mut g = rng(7);
        let r = random_kahler_tensor(3, &mut g);
        assert_eq!(r.conjugate_frame(&CMatrix::identity(3, 3)).unwrap().max_abs(), r.max_abs());
        let id = r.conjugate_frame(&CMatrix::identity(3, 3)).unwrap();
        assert!((0..81).all(|i| (id.components().as_slice()[i] - r.components().as_slice()[i]).norm() < 1e-15));

        let u = linalg::haar_frame(3, 3, &mut g);
        let s = constant_hsc_tensor(3, 1.5);
        let moved = s.conjugate_frame(&u).unwrap();
        let diff: f64 = moved
            .components()
            .as_slice()
            .iter()
            .zip(s.components().as_slice())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(diff < 1e-13);

        let back = r.conjugate_frame(&u).unwrap().conjugate_frame(&u.adjoint()).unwrap();
        let diff: f64 = back
            .components()
            .as_slice()
            .iter()
            .zip(r.components().as_slice())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(diff < 1e-12);

        let not_unitary = CMatrix::identity(3, 3) * C64::from(1.1);
        assert!(matches!(r.conjugate_frame(&not_unitary), Err(Error::Domain(_))));
    }

    #[test]
    fn restriction_cases() {
        let mut g = rng(8);
        let r = random_kahler_tensor(4, &mut g);
        let full = TangentPlane::coordinate(4, &[0, 1, 2, 3]).unwrap();
        let same = r.restrict(&full);
        let diff = same
            .components()
            .as_slice()
            .iter()
            .zip(r.components().as_slice())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(diff < 1e-14);

        let plane = TangentPlane::random(5, 3, &mut g);
        let restricted = constant_hsc_tensor(5, 0.7).restrict(&plane);
        let expect = constant_hsc_tensor(3, 0.7);
        let diff = restricted
            .components()
            .as_slice()
            .iter()
            .zip(expect.components().as_slice())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(diff < 1e-13);
        assert!(restricted.validate().is_empty());
    }

    #[test]
    fn restricted_ricci_cases() {
        let c = 1.3;
        let mut g = rng(9);
        let plane = TangentPlane::random(4, 2, &mut g);
        let ric = constant_hsc_tensor(4, c).restricted_ricci(&plane);
        assert!((ric[(0, 0)].re - 1.5 * c).abs() < 1e-12);
        assert!((ric[(1, 1)].re - 1.5 * c).abs() < 1e-12);
        assert!(ric[(0, 1)].norm() < 1e-12);

        assert!(linalg::max_abs(&CurvatureTensor::zeros(4).restricted_ricci(&plane)) == 0.0);

        let r = random_kahler_tensor(5, &mut g);
        let plane = TangentPlane::random(5, 3, &mut g);
        assert!(linalg::hermitian_defect(&r.restricted_ricci(&plane)) < 1e-12);
    }

    #[test]
    fn diagonalization_keeps_span_and_diagonalizes() {
        let mut g = rng(10);
        let r = random_kahler_tensor(5, &mut g);
        let plane = TangentPlane::random(5, 3, &mut g);
        let diag = diagonalize_restricted_ricci(&r, &plane);
        assert!(plane.projector_distance(&diag) < 1e-10);
        let ric = r.restricted_ricci(&diag);
        for a in 0..3 {
            for b in 0..3 {
                if a != b {
                    assert!(ric[(a, b)].norm() < 1e-10);
                }
            }
        }
        assert!(ric[(0, 0)].re >= ric[(1, 1)].re && ric[(1, 1)].re >= ric[(2, 2)].re);
    }

    #[test]
    fn diagonalization_of_diagonal_case_only_changes_phases() {
        // product of two lines: restricted Ricci on span(e0, e1) is diag(c1, c2)
        let r = product_tensor(&constant_hsc_tensor(1, 3.0), &constant_hsc_tensor(1, 1.0));
        let plane = TangentPlane::coordinate(2, &[0, 1]).unwrap();
        let diag = diagonalize_restricted_ricci(&r, &plane);
        for c in 0..2 {
            for row in 0..2 {
                let expect = if row == c { 1.0 } else { 0.0 };
                assert!((diag.frame()[(row, c)].norm() - expect).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn horizontal_generator_has_only_mixed_blocks() {
        let mut g = rng(11);
        let plane = TangentPlane::random(4, 2, &mut g);
        let block = linalg::gaussian_matrix(2, 2, &mut g);
        let a = SkewGenerator::horizontal(&plane, &block).unwrap();
        let q = plane.full_frame();
        let local = q.adjoint() * a.matrix() * &q;
        assert!(linalg::max_abs(&local.view((0, 0), (2, 2)).into_owned()) < 1e-12);
        assert!(linalg::max_abs(&local.view((2, 2), (2, 2)).into_owned()) < 1e-12);
        assert!(SkewGenerator::new(CMatrix::identity(3, 3)).is_err());
    }

    #[test]
    fn rank_two_generator_action() {
        let mut g = rng(12);
        let z = linalg::random_unit_vector(3, &mut g);
        let w = linalg::random_unit_vector(3, &mut g);
        let a = SkewGenerator::rank_two(&z, &w).unwrap();
        let x = linalg::gaussian_vector(3, &mut g);
        let ax = a.matrix() * &x;
        let expect = (&w * linalg::inner(&x, &z) + &z * linalg::inner(&x, &w)) * linalg::I;
        assert!((ax - expect).norm() < 1e-12);
    }
}
