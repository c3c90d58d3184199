//! Dense complex linear algebra helpers on top of `nalgebra`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

pub const I: C64 = C64::new(0.0, 1.0);

/// Smallest admissible residual column norm when orthonormalizing a frame.
pub const RANK_THRESHOLD: f64 = 1e-8;

/// Standard complex Gaussian with `E|z|² = 1`.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn gaussian_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    // column-major fill so the draw order is fixed
    let mut out = CMatrix::zeros(rows, cols);
    for c in 0..cols {
        for r in 0..rows {
            out[(r, c)] = complex_gaussian(rng);
        }
    }
    out
}

pub fn gaussian_vector<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CVector {
    CVector::from_fn(n, |_, _| complex_gaussian(rng))
}

/// Uniform point on the unit sphere of `C^n`.
pub fn random_unit_vector<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CVector {
    loop {
        let v = gaussian_vector(n, rng);
        let norm = v.norm();
        if norm > 1e-12 {
            return v / C64::from(norm);
        }
    }
}

/// Hermitian inner product `⟨x, y⟩ = Σ x_i conj(y_i)`.
pub fn inner(x: &CVector, y: &CVector) -> C64 {
    x.iter().zip(y.iter()).map(|(a, b)| a * b.conj()).sum()
}

/// Eigen-decomposition of a Hermitian matrix with eigenvalues in ascending order.
///
/// The input is Hermitian-symmetrized first.
pub fn hermitian_eigen(h: &CMatrix) -> (Vec<f64>, CMatrix) {
    let sym = (h + h.adjoint()) * C64::from(0.5);
    let eig = SymmetricEigen::new(sym);
    let n = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = CMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    (values, vectors)
}

/// Orthonormalizes the columns of `frame`, preserving their span and order.
///
/// Rank is tested first with column-pivoted modified Gram-Schmidt; the frame is
/// rejected when the smallest pivot norm (relative to the largest column norm)
/// falls below [`RANK_THRESHOLD`]. The returned frame is the unpivoted
/// Gram-Schmidt basis with one re-orthogonalization pass.
pub fn orthonormalize_columns(frame: &CMatrix) -> Result<CMatrix> {
    let (rows, cols) = frame.shape();
    if cols == 0 || cols > rows {
        return Err(Error::Domain(format!(
            "cannot orthonormalize {cols} columns in dimension {rows}"
        )));
    }
    if frame.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Domain("frame has non-finite entries".into()));
    }
    let scale = (0..cols)
        .map(|c| frame.column(c).norm())
        .fold(0.0_f64, f64::max);
    if scale == 0.0 {
        return Err(Error::Domain("frame is identically zero".into()));
    }

    let mut work: Vec<CVector> = (0..cols).map(|c| frame.column(c).into_owned()).collect();
    let mut remaining: Vec<usize> = (0..cols).collect();
    let mut min_pivot = f64::INFINITY;
    while !remaining.is_empty() {
        let (pos, &best) = remaining
            .iter()
            .enumerate()
            .max_by(|a, b| work[*a.1].norm().total_cmp(&work[*b.1].norm()))
            .expect("non-empty");
        let norm = work[best].norm();
        min_pivot = min_pivot.min(norm / scale);
        if norm / scale < RANK_THRESHOLD {
            return Err(Error::Domain(format!(
                "degenerate frame: residual column norm {:.3e} below {RANK_THRESHOLD:e}",
                norm / scale
            )));
        }
        let q = &work[best] / C64::from(norm);
        remaining.remove(pos);
        for &other in &remaining {
            let proj = inner(&work[other], &q);
            work[other] -= &q * proj;
        }
    }

    let mut out = CMatrix::zeros(rows, cols);
    for c in 0..cols {
        let mut v = frame.column(c).into_owned();
        for _pass in 0..2 {
            for prev in 0..c {
                let q = out.column(prev).into_owned();
                let proj = inner(&v, &q);
                v -= q * proj;
            }
        }
        let norm = v.norm();
        out.set_column(c, &(v / C64::from(norm)));
    }
    Ok(out)
}

/// Orthonormal basis of the orthogonal complement of the column span of an
/// orthonormal `frame`.
pub fn orthogonal_complement(frame: &CMatrix) -> CMatrix {
    let (m, k) = frame.shape();
    if k == m {
        return CMatrix::zeros(m, 0);
    }
    let projector = CMatrix::identity(m, m) - frame * frame.adjoint();
    let (_, vectors) = hermitian_eigen(&projector);
    // eigenvalue 1 block is at the top of the ascending order
    let basis = vectors.columns(k, m - k).into_owned();
    canonical_phases(&basis)
}

/// Rotates each column by a unit phase so its largest-modulus entry is real positive.
pub fn canonical_phases(frame: &CMatrix) -> CMatrix {
    let mut out = frame.clone();
    for c in 0..frame.ncols() {
        let col = frame.column(c);
        let mut best = C64::new(0.0, 0.0);
        for z in col.iter() {
            if z.norm() > best.norm() + 1e-12 {
                best = *z;
            }
        }
        if best.norm() > 0.0 {
            let phase = best.conj() / C64::from(best.norm());
            for r in 0..frame.nrows() {
                out[(r, c)] *= phase;
            }
        }
    }
    out
}

/// `max |U*U - I|` entrywise.
pub fn unitarity_defect(u: &CMatrix) -> f64 {
    let n = u.ncols();
    let gram = u.adjoint() * u;
    let mut worst = 0.0_f64;
    for r in 0..n {
        for c in 0..n {
            let target = if r == c { 1.0 } else { 0.0 };
            worst = worst.max((gram[(r, c)] - C64::from(target)).norm());
        }
    }
    worst
}

/// `max |A* + A|` entrywise.
pub fn skew_hermitian_defect(a: &CMatrix) -> f64 {
    (a + a.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// `max |A - A*|` entrywise.
pub fn hermitian_defect(a: &CMatrix) -> f64 {
    (a - a.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn max_abs(a: &CMatrix) -> f64 {
    a.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Unitary exponential `exp(t·a)` of a skew-Hermitian `a`, via the Hermitian
/// eigen-decomposition of `i·a`.
pub fn exp_skew_hermitian(a: &CMatrix, t: f64) -> CMatrix {
    SkewExponential::new(a).at(t)
}

/// Cached eigen-decomposition for evaluating `exp(t·a)` at many step sizes.
pub struct SkewExponential {
    values: Vec<f64>,
    vectors: CMatrix,
}

impl SkewExponential {
    pub fn new(a: &CMatrix) -> Self {
        // i·a is Hermitian when a is skew-Hermitian: a = -i·V diag(d) V*
        let h = a * I;
        let (values, vectors) = hermitian_eigen(&h);
        Self { values, vectors }
    }

    pub fn at(&self, t: f64) -> CMatrix {
        let n = self.values.len();
        let mut scaled = self.vectors.clone();
        for c in 0..n {
            let phase = C64::from_polar(1.0, -t * self.values[c]);
            for r in 0..n {
                scaled[(r, c)] *= phase;
            }
        }
        scaled * self.vectors.adjoint()
    }
}

/// `G^{-1/2}` for a Hermitian positive-definite `G`, returning also the smallest eigenvalue.
pub fn inverse_sqrt_hpd(g: &CMatrix) -> Result<(CMatrix, f64)> {
    let (values, vectors) = hermitian_eigen(g);
    let smallest = values.first().copied().unwrap_or(0.0);
    if !(smallest > 0.0) {
        return Err(Error::Model(format!(
            "matrix is not positive definite (smallest eigenvalue {smallest:.3e})"
        )));
    }
    let n = values.len();
    let mut scaled = vectors.clone();
    for c in 0..n {
        let s = C64::from(1.0 / values[c].sqrt());
        for r in 0..n {
            scaled[(r, c)] *= s;
        }
    }
    Ok((scaled * vectors.adjoint(), smallest))
}

/// Haar-random orthonormal `m × k` frame.
pub fn haar_frame<R: Rng + ?Sized>(m: usize, k: usize, rng: &mut R) -> CMatrix {
    loop {
        let g = gaussian_matrix(m, k, rng);
        if let Ok(frame) = orthonormalize_columns(&g) {
            return frame;
        }
    }
}

/// Random skew-Hermitian matrix with unit Frobenius norm.
pub fn random_skew_hermitian<R: Rng + ?Sized>(m: usize, rng: &mut R) -> CMatrix {
    let z = gaussian_matrix(m, m, rng);
    let a = (&z - z.adjoint()) * C64::from(0.5);
    let norm = a.norm();
    a / C64::from(norm)
}
