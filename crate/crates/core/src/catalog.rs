//! Model curvature tensors.
//!
//! Closed-form families (space forms, products, seeded perturbations), a
//! Kähler-potential pipeline evaluated by finite differences at a chart
//! point, and the JSON tensor file format.

use std::fmt;
use std::path::PathBuf;
use std::sync::Arc;

use rand::SeedableRng;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::curvature::{CurvatureTensor, Tensor4};
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, C64};

pub mod tensor_file;

pub use tensor_file::{load_tensor, save_tensor, tensor_from_json, tensor_to_json, LoadedTensor};

/// Space form `R = (c/2)(δ_ij δ_kl + δ_il δ_kj)`, so that `H ≡ c`.
pub fn constant_hsc_tensor(m: usize, c: f64) -> CurvatureTensor {
    assert!(m >= 1, "dimension must be positive");
    let half = 0.5 * c;
    let mut t = Tensor4::zeros(m);
    for i in 0..m {
        for k in 0..m {
            // δ_ij δ_kl
            let v = t.get(i, i, k, k) + half;
            t.set(i, i, k, k, v);
            // δ_il δ_kj
            let v = t.get(i, k, k, i) + half;
            t.set(i, k, k, i, v);
        }
    }
    CurvatureTensor::from_components(t).expect("space form is finite")
}

pub fn flat_tensor(m: usize) -> CurvatureTensor {
    CurvatureTensor::zeros(m)
}

/// Block direct sum; mixed-block components vanish.
pub fn product_tensor(a: &CurvatureTensor, b: &CurvatureTensor) -> CurvatureTensor {
    a.direct_sum(b)
}

/// Random Kähler-symmetric tensor with Gaussian entries before symmetrization.
pub fn random_kahler_tensor<R: Rng + ?Sized>(m: usize, rng: &mut R) -> CurvatureTensor {
    let raw = Tensor4::from_fn(m, |_, _, _, _| linalg::complex_gaussian(rng));
    CurvatureTensor::from_components(raw).expect("gaussian entries are finite")
}

/// Random Kähler-symmetric direction normalized to `max|R| = 1`.
pub fn random_perturbation<R: Rng + ?Sized>(m: usize, rng: &mut R) -> CurvatureTensor {
    let t = random_kahler_tensor(m, rng);
    let scale = t.max_abs();
    &t * (1.0 / scale)
}

/// `constant_hsc(m, c) + ε·P` with `P` a seeded unit-size symmetric perturbation.
pub fn perturbed_constant_hsc(m: usize, c: f64, epsilon: f64, seed: u64) -> CurvatureTensor {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let p = random_perturbation(m, &mut rng);
    &constant_hsc_tensor(m, c) + &(&p * epsilon)
}

/// Holomorphic sectional curvature of the Fubini-Study space form in this normalization.
pub const FUBINI_STUDY_HSC: f64 = 2.0;

/// Real-valued Kähler potential on `C^m`.
pub type PotentialFn = Arc<dyn Fn(&[C64]) -> f64 + Send + Sync>;

/// Named potentials available from configuration files.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum NamedPotential {
    /// `|z|²`
    Flat,
    /// `log(1 + |z|²)`
    FubiniStudy,
    /// `|z|² + ε|z₁|⁴`
    QuarticBump { epsilon: f64 },
    /// `log(1 + |z|²) + ε Σ_{ijkl} c_ijkl z_i z̄_j z_k z̄_l` with seeded Hermitian-symmetric `c`
    PerturbedFubiniStudy { epsilon: f64, seed: u64 },
}

impl NamedPotential {
    pub fn build(&self, m: usize) -> PotentialFn {
        match *self {
            NamedPotential::Flat => Arc::new(|z: &[C64]| z.iter().map(|w| w.norm_sqr()).sum()),
            NamedPotential::FubiniStudy => Arc::new(|z: &[C64]| {
                let r2: f64 = z.iter().map(|w| w.norm_sqr()).sum();
                r2.ln_1p()
            }),
            NamedPotential::QuarticBump { epsilon } => Arc::new(move |z: &[C64]| {
                let r2: f64 = z.iter().map(|w| w.norm_sqr()).sum();
                let a = z[0].norm_sqr();
                r2 + epsilon * a * a
            }),
            NamedPotential::PerturbedFubiniStudy { epsilon, seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let coeffs = random_perturbation(m, &mut rng);
                Arc::new(move |z: &[C64]| {
                    let r2: f64 = z.iter().map(|w| w.norm_sqr()).sum();
                    let x = linalg::CVector::from_column_slice(z);
                    r2.ln_1p() + epsilon * coeffs.quartic(&x)
                })
            }
        }
    }
}

/// Kähler potential evaluated near a chart point.
#[derive(Clone)]
pub struct PotentialChart {
    pub m: usize,
    pub potential: PotentialFn,
    pub point: Vec<C64>,
    /// Smallest finite-difference step of the ladder.
    pub step: f64,
}

impl fmt::Debug for PotentialChart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PotentialChart")
            .field("m", &self.m)
            .field("point", &self.point)
            .field("step", &self.step)
            .finish_non_exhaustive()
    }
}

/// Default base step for potential differentiation.
pub const DEFAULT_FD_STEP: f64 = 1e-3;

impl PotentialChart {
    pub fn new(m: usize, potential: PotentialFn, point: Vec<C64>) -> Self {
        Self {
            m,
            potential,
            point,
            step: DEFAULT_FD_STEP,
        }
    }

    pub fn at_origin(m: usize, potential: PotentialFn) -> Self {
        Self::new(m, potential, vec![C64::new(0.0, 0.0); m])
    }

    pub fn with_step(mut self, step: f64) -> Self {
        self.step = step;
        self
    }
}

/// Curvature at a chart point together with finite-difference diagnostics.
#[derive(Clone, Debug)]
pub struct PotentialCurvature {
    pub tensor: CurvatureTensor,
    /// Metric `g_{ij̄}` at the chart point (coordinate frame).
    pub metric: CMatrix,
    pub metric_min_eigenvalue: f64,
    /// Largest gap between the chosen extrapolation and the one at twice its step.
    pub trust_radius: f64,
}

/// Mixed Wirtinger derivative of `φ` at `z`: the derivative list holds
/// `(index, holomorphic?)`, i.e. `∂_i` for `true` and `∂_ī` for `false`.
///
/// Each Wirtinger operator is a central difference
/// `∂_i = ½(D_{x_i} - i D_{y_i})`, `∂_ī = ½(D_{x_i} + i D_{y_i})`, nested.
fn wirtinger(phi: &PotentialFn, z: &[C64], ops: &[(usize, bool)], h: f64) -> C64 {
    fn rec(phi: &PotentialFn, z: &mut Vec<C64>, ops: &[(usize, bool)], h: f64) -> C64 {
        let Some((&(idx, holo), rest)) = ops.split_first() else {
            return C64::from(phi(z));
        };
        let orig = z[idx];
        let mut diff = |dir: C64| {
            z[idx] = orig + dir * h;
            let plus = rec(phi, z, rest, h);
            z[idx] = orig - dir * h;
            let minus = rec(phi, z, rest, h);
            z[idx] = orig;
            (plus - minus) / (2.0 * h)
        };
        let dx = diff(C64::new(1.0, 0.0));
        let dy = diff(C64::new(0.0, 1.0));
        let sign = if holo { -1.0 } else { 1.0 };
        (dx + linalg::I * sign * dy) * 0.5
    }
    let mut work = z.to_vec();
    rec(phi, &mut work, ops, h)
}

/// Steps `h·2^j`, `j < STEP_LADDER`, tried for every derivative.
const STEP_LADDER: usize = 6;

/// One-level Richardson extrapolation `E(s) = (4D(s/2) - D(s))/3` of a
/// second-order central difference, on the step ladder `s = h·2^j`. Returns
/// the `E(s)` whose gap to `E(2s)` is smallest, and that gap: small steps lose
/// to roundoff, large ones to truncation.
fn richardson(phi: &PotentialFn, z: &[C64], ops: &[(usize, bool)], h: f64) -> (C64, f64) {
    // raw[j] = D(h·2^(j-1))
    let raw: Vec<C64> = (0..=STEP_LADDER)
        .map(|j| wirtinger(phi, z, ops, h * 2f64.powi(j as i32 - 1)))
        .collect();
    let extrapolated: Vec<C64> = raw.windows(2).map(|w| (w[0] * 4.0 - w[1]) / 3.0).collect();
    extrapolated
        .windows(2)
        .map(|w| (w[0], (w[0] - w[1]).norm()))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("ladder has at least two extrapolations")
}

/// Curvature of the Kähler metric `g_{ij̄} = ∂_i∂_j̄ φ` at the chart point, in a
/// `g`-unitary frame.
///
/// `R_{ij̄kl̄} = -∂_k∂_l̄ g_{ij̄} + Σ_{p,q} g^{qp̄} (∂_k g_{ip̄})(∂_l̄ g_{qj̄})`,
/// then transformed by `g^{-1/2}`.
pub fn potential_to_curvature(chart: &PotentialChart) -> Result<PotentialCurvature> {
    let m = chart.m;
    if chart.point.len() != m {
        return Err(Error::Model(format!(
            "chart point has {} coordinates, expected {m}",
            chart.point.len()
        )));
    }
    if !(chart.step > 0.0) {
        return Err(Error::Model("finite-difference step must be positive".into()));
    }
    let phi = &chart.potential;
    let z = &chart.point;
    let h = chart.step;
    let mut trust = 0.0_f64;
    let check = |v: C64| -> Result<C64> {
        if v.re.is_finite() && v.im.is_finite() {
            Ok(v)
        } else {
            Err(Error::Numeric("finite-difference derivative overflowed".into()))
        }
    };

    let mut g = CMatrix::zeros(m, m);
    for i in 0..m {
        for j in 0..m {
            let (v, err) = richardson(phi, z, &[(i, true), (j, false)], h);
            trust = trust.max(err);
            g[(i, j)] = check(v)?;
        }
    }
    let g = (&g + g.adjoint()) * C64::from(0.5);

    // dg[k][i][p] = ∂_k g_{ip̄}
    let mut dg = vec![C64::new(0.0, 0.0); m * m * m];
    for k in 0..m {
        for i in 0..m {
            for p in 0..m {
                let (v, err) = richardson(phi, z, &[(k, true), (i, true), (p, false)], h);
                trust = trust.max(err);
                dg[(k * m + i) * m + p] = check(v)?;
            }
        }
    }

    let (inv_sqrt, min_eig) = linalg::inverse_sqrt_hpd(&g)
        .map_err(|_| Error::Model("metric at the chart point is not positive definite".into()))?;
    if min_eig <= 1e-6 {
        return Err(Error::Model(format!(
            "metric at the chart point is not positive definite (smallest eigenvalue {min_eig:.3e})"
        )));
    }
    let g_inv = g
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Numeric("metric inversion failed".into()))?;

    let mut coord = Tensor4::zeros(m);
    for i in 0..m {
        for j in 0..m {
            for k in 0..m {
                for l in 0..m {
                    let (d4, err) =
                        richardson(phi, z, &[(k, true), (l, false), (i, true), (j, false)], h);
                    trust = trust.max(err);
                    let mut value = -check(d4)?;
                    // ∂_l̄ g_{qj̄} = conj(∂_l g_{jq̄}) since φ is real
                    for p in 0..m {
                        for q in 0..m {
                            value += dg[(k * m + i) * m + p]
                                * g_inv[(p, q)]
                                * dg[(l * m + j) * m + q].conj();
                        }
                    }
                    coord.set(i, j, k, l, value);
                }
            }
        }
    }
    let coord = CurvatureTensor::from_components(coord)?;
    // e_a = Σ_i P_ia ∂_i is unitary iff ᵗP g P̄ = I, i.e. P = conj(g^{-1/2})
    let frame = inv_sqrt.conjugate();
    let unitary = crate::curvature::pull_back(coord.components(), &frame, &frame, &frame, &frame);
    let tensor = CurvatureTensor::from_components(unitary)?;
    Ok(PotentialCurvature {
        tensor,
        metric: g,
        metric_min_eigenvalue: min_eig,
        trust_radius: trust,
    })
}

/// A curvature model: closed-form families, a potential chart or a tensor file.
#[derive(Clone, Debug)]
pub enum MetricModel {
    ConstantHsc { m: usize, c: f64 },
    Flat { m: usize },
    Product(Box<MetricModel>, Box<MetricModel>),
    Perturbed { m: usize, c: f64, epsilon: f64, seed: u64 },
    PotentialChart(PotentialChart),
    Tensor(CurvatureTensor),
}

impl MetricModel {
    pub fn dim(&self) -> usize {
        match self {
            MetricModel::ConstantHsc { m, .. }
            | MetricModel::Flat { m }
            | MetricModel::Perturbed { m, .. } => *m,
            MetricModel::Product(a, b) => a.dim() + b.dim(),
            MetricModel::PotentialChart(chart) => chart.m,
            MetricModel::Tensor(t) => t.dim(),
        }
    }

    /// Curvature at the model's base point.
    pub fn tensor(&self) -> Result<CurvatureTensor> {
        Ok(match self {
            MetricModel::ConstantHsc { m, c } => constant_hsc_tensor(*m, *c),
            MetricModel::Flat { m } => flat_tensor(*m),
            MetricModel::Product(a, b) => product_tensor(&a.tensor()?, &b.tensor()?),
            MetricModel::Perturbed { m, c, epsilon, seed } => {
                perturbed_constant_hsc(*m, *c, *epsilon, *seed)
            }
            MetricModel::PotentialChart(chart) => potential_to_curvature(chart)?.tensor,
            MetricModel::Tensor(t) => t.clone(),
        })
    }

    /// Curvature at the `index`-th sampled point. Only potential charts vary
    /// with the point: point 0 is the chart point, others are Gaussian offsets
    /// of scale `radius` drawn from a per-index stream.
    pub fn tensor_at(&self, index: u64, seed: u64, radius: f64) -> Result<CurvatureTensor> {
        match self {
            MetricModel::PotentialChart(chart) if index > 0 => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(index);
                let point = chart
                    .point
                    .iter()
                    .map(|z| z + linalg::complex_gaussian(&mut rng) * radius)
                    .collect();
                let moved = PotentialChart {
                    point,
                    ..chart.clone()
                };
                Ok(potential_to_curvature(&moved)?.tensor)
            }
            _ => self.tensor(),
        }
    }

    pub fn varies_with_point(&self) -> bool {
        matches!(self, MetricModel::PotentialChart(_))
    }
}

/// Serializable model description used by run configurations.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelSpec {
    ConstantHsc {
        m: usize,
        c: f64,
    },
    Flat {
        m: usize,
    },
    Product {
        a: Box<ModelSpec>,
        b: Box<ModelSpec>,
    },
    Perturbed {
        m: usize,
        #[serde(default = "default_fs_c")]
        c: f64,
        epsilon: f64,
        seed: u64,
    },
    Potential {
        m: usize,
        potential: NamedPotential,
        #[serde(default)]
        point: Option<Vec<[f64; 2]>>,
        #[serde(default)]
        step: Option<f64>,
    },
    File {
        path: PathBuf,
    },
}

fn default_fs_c() -> f64 {
    FUBINI_STUDY_HSC
}

impl ModelSpec {
    pub fn build(&self) -> Result<MetricModel> {
        Ok(match self {
            ModelSpec::ConstantHsc { m, c } => {
                positive_dim(*m)?;
                MetricModel::ConstantHsc { m: *m, c: *c }
            }
            ModelSpec::Flat { m } => {
                positive_dim(*m)?;
                MetricModel::Flat { m: *m }
            }
            ModelSpec::Product { a, b } => {
                MetricModel::Product(Box::new(a.build()?), Box::new(b.build()?))
            }
            ModelSpec::Perturbed { m, c, epsilon, seed } => {
                positive_dim(*m)?;
                MetricModel::Perturbed {
                    m: *m,
                    c: *c,
                    epsilon: *epsilon,
                    seed: *seed,
                }
            }
            ModelSpec::Potential {
                m,
                potential,
                point,
                step,
            } => {
                positive_dim(*m)?;
                let point = match point {
                    Some(p) if p.len() != *m => {
                        return Err(Error::Config(format!(
                            "chart point has {} coordinates, expected {m}",
                            p.len()
                        )))
                    }
                    Some(p) => p.iter().map(|[re, im]| C64::new(*re, *im)).collect(),
                    None => vec![C64::new(0.0, 0.0); *m],
                };
                let mut chart = PotentialChart::new(*m, potential.build(*m), point);
                if let Some(h) = step {
                    if !(*h > 0.0) {
                        return Err(Error::Config("finite-difference step must be positive".into()));
                    }
                    chart.step = *h;
                }
                MetricModel::PotentialChart(chart)
            }
            ModelSpec::File { path } => MetricModel::Tensor(load_tensor(path)?.tensor),
        })
    }

    /// Parses the compact command-line form `name[:key=value,...]`, e.g.
    /// `constant_hsc:m=4,c=1` or `perturbed:m=3,epsilon=0.05,seed=7`.
    pub fn parse_compact(text: &str) -> Result<Self> {
        let (name, rest) = text.split_once(':').unwrap_or((text, ""));
        let mut params = std::collections::BTreeMap::new();
        for pair in rest.split(',').filter(|s| !s.is_empty()) {
            let (k, v) = pair
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("malformed model parameter `{pair}`")))?;
            params.insert(k.trim().to_string(), v.trim().to_string());
        }
        let num = |key: &str| -> Result<f64> {
            params
                .get(key)
                .ok_or_else(|| Error::Config(format!("model `{name}` needs `{key}`")))?
                .parse::<f64>()
                .map_err(|_| Error::Config(format!("model parameter `{key}` is not a number")))
        };
        let int = |key: &str| -> Result<u64> {
            params
                .get(key)
                .ok_or_else(|| Error::Config(format!("model `{name}` needs `{key}`")))?
                .parse::<u64>()
                .map_err(|_| Error::Config(format!("model parameter `{key}` is not an integer")))
        };
        Ok(match name {
            "constant_hsc" => ModelSpec::ConstantHsc {
                m: int("m")? as usize,
                c: num("c")?,
            },
            "flat" => ModelSpec::Flat { m: int("m")? as usize },
            "product" => {
                // product of two constant-HSC factors: m1, c1, m2, c2
                ModelSpec::Product {
                    a: Box::new(ModelSpec::ConstantHsc {
                        m: int("m1")? as usize,
                        c: num("c1")?,
                    }),
                    b: Box::new(ModelSpec::ConstantHsc {
                        m: int("m2")? as usize,
                        c: num("c2")?,
                    }),
                }
            }
            "perturbed" => ModelSpec::Perturbed {
                m: int("m")? as usize,
                c: if params.contains_key("c") { num("c")? } else { FUBINI_STUDY_HSC },
                epsilon: num("epsilon")?,
                seed: int("seed")?,
            },
            "fubini_study" => ModelSpec::Potential {
                m: int("m")? as usize,
                potential: NamedPotential::FubiniStudy,
                point: None,
                step: None,
            },
            other => return Err(Error::Config(format!("unknown model `{other}`"))),
        })
    }
}

fn positive_dim(m: usize) -> Result<()> {
    if m == 0 {
        Err(Error::Config("model dimension must be positive".into()))
    } else {
        Ok(())
    }
}
