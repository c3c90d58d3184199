//! Interpolating k-scalar curvature of Kähler curvature tensors.
//!
//! The k-scalar curvature of a complex k-plane `Σ` is the average of the
//! holomorphic sectional curvature over the unit sphere of `Σ`, scaled by
//! `k(k+1)/2`. It interpolates between holomorphic sectional curvature
//! (`k = 1`) and scalar curvature (`k = m`).
//!
//! The crate is organized bottom-up:
//!
//! - [`curvature`]: curvature tensors with Kähler symmetries, planes, skew generators.
//! - [`catalog`]: model tensors (space forms, products, perturbations, Kähler potentials)
//!   and the JSON tensor file format.
//! - [`moments`]: exact sphere moments of unitary monomials and a seeded Monte Carlo oracle.
//! - [`kscalar`]: k-scalar curvature by trace and by moments, plus sampling scans.
//! - [`grassmann`]: first and second variations and Riemannian descent on the Grassmannian.
//! - [`certify`]: pointwise checks at minimizing planes (mixed-term vanishing, lower bounds,
//!   skew normal form, curvature term of holomorphic forms, tuple positivity).
//! - [`cli`]: run configuration, reports and the `moments`/`scan`/`minimize`/`certify` commands.

pub mod catalog;
pub mod certify;
pub mod cli;
pub mod curvature;
pub mod error;
pub mod grassmann;
pub mod kscalar;
pub mod linalg;
pub mod moments;

pub use catalog::{MetricModel, ModelSpec};
pub use curvature::{CurvatureTensor, SkewGenerator, TangentPlane};
pub use error::{Error, Result};
pub use grassmann::{minimize_sk, CriticalPlane, MinimizeOptions};
pub use kscalar::{positivity_scan, s_k_moments, s_k_trace, ScanResult};
pub use moments::{monomial_moment, MomentTable};
