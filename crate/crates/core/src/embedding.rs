//! Preference embedding of ambient points against a model pool.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::models::{AmbientPoint, Dataset, ModelPool};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PreferenceMode {
    /// Gaussian preference `exp(-½(δ/σ)²)` inside the inlier band.
    Continuous,
    /// 1 inside the inlier band.
    Binary,
}

/// Noise level `σ`, inlier multiplier `k` and preference function.
/// The inlier threshold is `ε = k·σ`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EmbeddingConfig {
    sigma: f64,
    k: f64,
    mode: PreferenceMode,
}

impl EmbeddingConfig {
    pub fn new(sigma: f64, k: f64, mode: PreferenceMode) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::config(format!("sigma must be positive, got {sigma}")));
        }
        if !(k > 0.0 && k.is_finite()) {
            return Err(Error::config(format!("k must be positive, got {k}")));
        }
        Ok(Self { sigma, k, mode })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn mode(&self) -> PreferenceMode {
        self.mode
    }

    pub fn epsilon(&self) -> f64 {
        self.k * self.sigma
    }
}

/// A point of the preference space `[0,1]^m`.
#[derive(Clone, Debug, PartialEq)]
pub struct PreferenceVector(Vec<f64>);

impl PreferenceVector {
    /// Wraps raw components; every component must lie in `[0, 1]`.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(i) = values.iter().position(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::config(format!(
                "preference component {i} = {} outside [0, 1]",
                values[i]
            )));
        }
        Ok(Self(values))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn is_binary(&self) -> bool {
        self.0.iter().all(|&v| v == 0.0 || v == 1.0)
    }

    pub fn l1(&self) -> f64 {
        self.0.iter().sum()
    }
}

impl AsRef<[f64]> for PreferenceVector {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

/// Embedded dataset, one row per point in dataset order.
#[derive(Clone, Debug, PartialEq)]
pub struct PreferenceMatrix {
    rows: Vec<PreferenceVector>,
    dim: usize,
}

impl PreferenceMatrix {
    pub fn new(rows: Vec<PreferenceVector>) -> Result<Self> {
        let dim = rows.first().map_or(0, PreferenceVector::dim);
        if dim == 0 {
            return Err(Error::config("preference matrix needs a nonempty first row"));
        }
        if let Some(bad) = rows.iter().find(|r| r.dim() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: bad.dim(),
            });
        }
        Ok(Self { rows, dim })
    }

    pub fn rows(&self) -> &[PreferenceVector] {
        &self.rows
    }

    /// Number of points `n`.
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Number of models `m`.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn to_sparse(&self) -> Vec<SparsePreference> {
        self.rows.par_iter().map(SparsePreference::from_dense).collect()
    }
}

/// Nonzero components of a preference vector, in increasing index order.
///
/// Sums over the support in index order are bit-identical to the dense sums,
/// since adding exact zeros never changes a floating-point accumulator.
#[derive(Clone, Debug, PartialEq)]
pub struct SparsePreference {
    indices: Vec<u32>,
    values: Vec<f64>,
    dim: usize,
    sum: f64,
    sq_norm: f64,
}

impl SparsePreference {
    pub fn from_dense(p: &PreferenceVector) -> Self {
        Self::from_slice(p.values())
    }

    pub(crate) fn from_slice(values: &[f64]) -> Self {
        let mut indices = Vec::new();
        let mut nz = Vec::new();
        let (mut sum, mut sq_norm) = (0.0, 0.0);
        for (i, &v) in values.iter().enumerate() {
            sum += v;
            sq_norm += v * v;
            if v != 0.0 {
                indices.push(i as u32);
                nz.push(v);
            }
        }
        Self {
            indices,
            values: nz,
            dim: values.len(),
            sum,
            sq_norm,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.indices.len()
    }

    pub fn indices(&self) -> &[u32] {
        &self.indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.indices
            .iter()
            .zip(&self.values)
            .map(|(&i, &v)| (i as usize, v))
    }

    pub fn sum(&self) -> f64 {
        self.sum
    }

    pub fn sq_norm(&self) -> f64 {
        self.sq_norm
    }

    pub fn to_dense(&self) -> PreferenceVector {
        let mut out = vec![0.0; self.dim];
        for (i, v) in self.iter() {
            out[i] = v;
        }
        PreferenceVector(out)
    }
}

/// Preference granted to a model at residual `delta`.
pub fn preference_value(delta: f64, cfg: &EmbeddingConfig) -> f64 {
    if !(delta.abs() <= cfg.epsilon()) {
        return 0.0;
    }
    match cfg.mode {
        PreferenceMode::Continuous => {
            let z = delta / cfg.sigma;
            (-0.5 * z * z).exp()
        }
        PreferenceMode::Binary => 1.0,
    }
}

pub fn embed_point(x: &AmbientPoint, pool: &ModelPool, cfg: &EmbeddingConfig) -> PreferenceVector {
    PreferenceVector(
        pool.models()
            .iter()
            .map(|model| preference_value(model.residual(x), cfg))
            .collect(),
    )
}

/// Embeds every point of `data`; rows are computed in parallel but their
/// order and values do not depend on the schedule.
pub fn embed_dataset(data: &Dataset, pool: &ModelPool, cfg: &EmbeddingConfig) -> PreferenceMatrix {
    let rows = data
        .points()
        .par_iter()
        .map(|x| embed_point(x, pool, cfg))
        .collect();
    PreferenceMatrix {
        rows,
        dim: pool.len(),
    }
}
