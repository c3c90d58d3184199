//! k-scalar curvature `S_k(x, Σ)` and sampling scans over the Grassmannian.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::catalog::MetricModel;
use crate::curvature::{CurvatureTensor, TangentPlane};
use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::moments::average_quartic_form;

/// `S_k(Σ) = Σ_{i,j≤k} R(E_i, Ē_i, E_j, Ē_j)` for an orthonormal frame of `Σ`.
pub fn s_k_trace(r: &CurvatureTensor, plane: &TangentPlane) -> f64 {
    let ric = r.plane_ricci(plane);
    let f = plane.frame();
    let mut acc = 0.0;
    for i in 0..plane.rank() {
        let e = f.column(i);
        // Σ_ab e_a conj(e_b) M_ab
        for a in 0..f.nrows() {
            for b in 0..f.nrows() {
                acc += (e[a] * e[b].conj() * ric[(a, b)]).re;
            }
        }
    }
    acc
}

/// `S_k(Σ) = (k(k+1)/2) · avg_{Z ∈ Σ, |Z|=1} H(Z)`, by exact moment contraction
/// of the restricted tensor.
pub fn s_k_moments(r: &CurvatureTensor, plane: &TangentPlane) -> f64 {
    let k = plane.rank() as f64;
    0.5 * k * (k + 1.0) * average_quartic_form(&r.restrict(plane))
}

/// Column-major real/imaginary parts of a complex matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixRecord {
    pub rows: usize,
    pub cols: usize,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

impl From<&CMatrix> for MatrixRecord {
    fn from(m: &CMatrix) -> Self {
        Self {
            rows: m.nrows(),
            cols: m.ncols(),
            re: m.iter().map(|z| z.re).collect(),
            im: m.iter().map(|z| z.im).collect(),
        }
    }
}

impl MatrixRecord {
    pub fn to_matrix(&self) -> CMatrix {
        CMatrix::from_iterator(
            self.rows,
            self.cols,
            self.re
                .iter()
                .zip(&self.im)
                .map(|(&re, &im)| crate::linalg::C64::new(re, im)),
        )
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanSample {
    pub point: u64,
    pub plane: u64,
    pub frame: MatrixRecord,
    pub value: f64,
    /// `|trace route − moment route|`
    pub route_residual: f64,
}

/// Minimum of `S_k` over sampled (point, plane) pairs. The minimum is an upper
/// bound on the infimum, never a certificate of it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanResult {
    pub model: String,
    pub k: usize,
    pub point_samples: u64,
    pub plane_samples: u64,
    pub seed: u64,
    pub samples: Vec<ScanSample>,
    pub min_value: f64,
    pub argmin: usize,
    pub max_route_residual: f64,
}

impl ScanResult {
    pub fn best_sample(&self) -> &ScanSample {
        &self.samples[self.argmin]
    }

    pub fn best_plane(&self) -> TangentPlane {
        TangentPlane::new(self.best_sample().frame.to_matrix()).expect("scan frames are orthonormal")
    }
}

/// Haar-random plane for pair `(point, plane)`: ChaCha stream derived from both indices.
pub fn sample_plane(m: usize, k: usize, seed: u64, point: u64, plane: u64) -> TangentPlane {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ point.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    rng.set_stream(plane);
    TangentPlane::random(m, k, &mut rng)
}

/// Scale of the chart offsets used for additional point samples.
pub const POINT_RADIUS: f64 = 0.1;

/// Samples `S_k` over `point_samples × plane_samples` Haar planes.
pub fn positivity_scan(
    model: &MetricModel,
    model_id: &str,
    k: usize,
    plane_samples: u64,
    point_samples: u64,
    seed: u64,
) -> Result<ScanResult> {
    let m = model.dim();
    if k == 0 || k > m {
        return Err(Error::Domain(format!("plane rank {k} invalid in dimension {m}")));
    }
    if plane_samples == 0 || point_samples == 0 {
        return Err(Error::Domain("sample counts must be at least one".into()));
    }
    let points = if model.varies_with_point() { point_samples } else { 1 };
    let tensors = (0..points)
        .map(|p| model.tensor_at(p, seed, POINT_RADIUS))
        .collect::<Result<Vec<_>>>()?;
    let pairs: Vec<(u64, u64)> = (0..points)
        .flat_map(|p| (0..plane_samples).map(move |s| (p, s)))
        .collect();
    let samples: Vec<ScanSample> = pairs
        .par_iter()
        .map(|&(p, s)| {
            let r = &tensors[p as usize];
            let plane = sample_plane(m, k, seed, p, s);
            let value = s_k_trace(r, &plane);
            let other = s_k_moments(r, &plane);
            ScanSample {
                point: p,
                plane: s,
                frame: MatrixRecord::from(plane.frame()),
                value,
                route_residual: (value - other).abs(),
            }
        })
        .collect();
    let (argmin, min_value) = samples
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |best, (i, s)| {
            if s.value < best.1 {
                (i, s.value)
            } else {
                best
            }
        });
    let max_route_residual = samples.iter().map(|s| s.route_residual).fold(0.0, f64::max);
    Ok(ScanResult {
        model: model_id.to_string(),
        k,
        point_samples: points,
        plane_samples,
        seed,
        samples,
        min_value,
        argmin,
        max_route_residual,
    })
}

/// Average of `S_k` over the coordinate k-sub-planes of a (k+1)-plane's frame.
pub fn coordinate_subplane_average(r: &CurvatureTensor, plane: &TangentPlane) -> f64 {
    let n = plane.rank();
    assert!(n >= 2, "need a plane of rank at least two");
    let mut total = 0.0;
    for skip in 0..n {
        let cols: Vec<usize> = (0..n).filter(|&c| c != skip).collect();
        let frame = plane.frame().select_columns(&cols);
        let sub = TangentPlane::from_orthonormal(frame).expect("subset of an orthonormal frame");
        total += s_k_trace(r, &sub);
    }
    total / n as f64
}
