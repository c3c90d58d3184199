//! JSON tensor files.
//!
//! ```json
//! { "m": 2, "entries": [ {"i":0,"j":0,"k":0,"l":0,"re":1.0,"im":0.0}, ... ] }
//! ```
//!
//! Omitted entries are completed from the Kähler symmetries of the listed ones
//! and default to zero otherwise. The writer emits every component sorted by
//! `(i, j, k, l)`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::curvature::{CurvatureTensor, Tensor4};
use crate::error::{Error, Result};
use crate::linalg::C64;

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TensorFile {
    m: usize,
    entries: Vec<Entry>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Entry {
    i: usize,
    j: usize,
    k: usize,
    l: usize,
    re: f64,
    im: f64,
}

#[derive(Clone, Debug)]
pub struct LoadedTensor {
    pub tensor: CurvatureTensor,
    /// Largest inconsistency among listed entries resolved by symmetrization.
    pub residual: f64,
    pub listed_entries: usize,
}

pub fn tensor_to_json(r: &CurvatureTensor) -> String {
    let m = r.dim();
    let mut entries = Vec::with_capacity(m * m * m * m);
    for i in 0..m {
        for j in 0..m {
            for k in 0..m {
                for l in 0..m {
                    let v = r.get(i, j, k, l);
                    entries.push(Entry { i, j, k, l, re: v.re, im: v.im });
                }
            }
        }
    }
    serde_json::to_string_pretty(&TensorFile { m, entries }).expect("tensor serializes")
}

pub fn save_tensor(r: &CurvatureTensor, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, tensor_to_json(r))?;
    Ok(())
}

pub fn load_tensor(path: impl AsRef<Path>) -> Result<LoadedTensor> {
    let text = std::fs::read_to_string(path)?;
    tensor_from_json(&text)
}

pub fn tensor_from_json(text: &str) -> Result<LoadedTensor> {
    let file: TensorFile =
        serde_json::from_str(text).map_err(|e| Error::Schema(format!("tensor file: {e}")))?;
    let m = file.m;
    if m == 0 {
        return Err(Error::Schema("tensor dimension `m` must be positive".into()));
    }
    let mut raw = Tensor4::zeros(m);
    let mut known = vec![false; m * m * m * m];
    for e in &file.entries {
        if [e.i, e.j, e.k, e.l].iter().any(|&x| x >= m) {
            return Err(Error::Schema(format!(
                "entry ({},{},{},{}) out of range for m = {m}",
                e.i, e.j, e.k, e.l
            )));
        }
        if !e.re.is_finite() || !e.im.is_finite() {
            return Err(Error::Numeric(format!(
                "entry ({},{},{},{}) is not finite",
                e.i, e.j, e.k, e.l
            )));
        }
        raw.set(e.i, e.j, e.k, e.l, C64::new(e.re, e.im));
        known[raw.index(e.i, e.j, e.k, e.l)] = true;
    }
    // fill unlisted entries from a listed member of their symmetry orbit
    let mut completed = raw.clone();
    for i in 0..m {
        for j in 0..m {
            for k in 0..m {
                for l in 0..m {
                    if known[raw.index(i, j, k, l)] {
                        continue;
                    }
                    let related = [
                        ([k, j, i, l], false),
                        ([i, l, k, j], false),
                        ([k, l, i, j], false),
                        ([j, i, l, k], true),
                        ([l, i, j, k], true),
                        ([j, k, l, i], true),
                        ([l, k, j, i], true),
                    ];
                    for (idx, conj) in related {
                        if known[raw.index(idx[0], idx[1], idx[2], idx[3])] {
                            let v = raw.get(idx[0], idx[1], idx[2], idx[3]);
                            completed.set(i, j, k, l, if conj { v.conj() } else { v });
                            break;
                        }
                    }
                }
            }
        }
    }
    let tensor = CurvatureTensor::from_components(completed)?;
    Ok(LoadedTensor {
        residual: tensor.symmetrization_residual(),
        tensor,
        listed_entries: file.entries.len(),
    })
}
