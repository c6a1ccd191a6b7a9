//! Delay embedding of scalar series, false-nearest-neighbour dimension
//! estimation and the choice of the largest filtration scale.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{GeometryError, PointCloud};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EmbeddingError {
    #[error("series shorter than embedding span")]
    SeriesTooShort,
    #[error("zero-variance series")]
    ZeroVariance,
    #[error("invalid time series {id:?}: {reason}")]
    InvalidSeries { id: String, reason: String },
    #[error("invalid embedding parameters: {0}")]
    InvalidParams(String),
    #[error("cannot choose a scale: no cloud has two or more points")]
    NoExtent,
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    pub id: String,
    pub values: Vec<f64>,
    pub label: Option<i64>,
}

impl TimeSeries {
    pub fn new(
        id: impl Into<String>,
        values: Vec<f64>,
        label: Option<i64>,
    ) -> Result<Self, EmbeddingError> {
        let id = id.into();
        if values.len() < 2 {
            return Err(EmbeddingError::InvalidSeries {
                id,
                reason: "fewer than 2 samples".into(),
            });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(EmbeddingError::InvalidSeries {
                id,
                reason: format!("non-finite value at position {i}"),
            });
        }
        Ok(Self { id, values, label })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Copy with values shifted to zero mean and scaled to unit (population)
    /// standard deviation. Constant series become all zeros.
    pub fn znormalized(&self) -> TimeSeries {
        TimeSeries {
            id: self.id.clone(),
            values: znormalize(&self.values),
            label: self.label,
        }
    }
}

pub fn znormalize(values: &[f64]) -> Vec<f64> {
    let (mean, sd) = mean_std(values);
    if sd == 0.0 {
        return vec![0.0; values.len()];
    }
    values.iter().map(|v| (v - mean) / sd).collect()
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmbeddingParams {
    pub m: usize,
    pub tau: usize,
}

impl EmbeddingParams {
    pub fn new(m: usize, tau: usize) -> Result<Self, EmbeddingError> {
        if m < 2 {
            return Err(EmbeddingError::InvalidParams(format!("m = {m} must be at least 2")));
        }
        if tau < 1 {
            return Err(EmbeddingError::InvalidParams("tau must be at least 1".into()));
        }
        Ok(Self { m, tau })
    }

    /// Number of delay vectors obtainable from a series of length `n`.
    pub fn points_for(&self, n: usize) -> Option<usize> {
        n.checked_sub((self.m - 1) * self.tau).filter(|&k| k > 0)
    }
}

/// Delay vectors `(x_t, x_{t+τ}, …, x_{t+(m−1)τ})` in temporal order.
pub fn takens_embed(series: &TimeSeries, params: EmbeddingParams) -> Result<PointCloud, EmbeddingError> {
    let EmbeddingParams { m, tau } = params;
    let count = params
        .points_for(series.len())
        .ok_or(EmbeddingError::SeriesTooShort)?;
    let mut flat = Vec::with_capacity(count * m);
    for t in 0..count {
        flat.extend((0..m).map(|j| series.values[t + j * tau]));
    }
    Ok(PointCloud::from_flat(m, flat)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FnnParams {
    pub r_tol: f64,
    pub a_tol: f64,
    pub threshold: f64,
}

impl Default for FnnParams {
    fn default() -> Self {
        Self {
            r_tol: 10.0,
            a_tol: 2.0,
            threshold: 0.01,
        }
    }
}

/// Fraction of false nearest neighbours when going from dimension `m` to
/// `m + 1`, over the delay vectors that have an `(m+1)`-th coordinate.
fn fnn_fraction(x: &[f64], m: usize, tau: usize, sd: f64, p: &FnnParams) -> f64 {
    let count = x.len() - m * tau;
    let coord = |t: usize, j: usize| x[t + j * tau];
    let mut false_nn = 0usize;
    for i in 0..count {
        let mut best = (f64::INFINITY, usize::MAX);
        for j in (0..count).filter(|&j| j != i) {
            let d2: f64 = (0..m).map(|k| (coord(i, k) - coord(j, k)).powi(2)).sum();
            if d2 < best.0 {
                best = (d2, j);
            }
        }
        let (d2, j) = best;
        let extra = (coord(i, m) - coord(j, m)).abs();
        let dist = d2.sqrt();
        let ratio_false = if dist > 0.0 {
            extra / dist > p.r_tol
        } else {
            extra > 0.0
        };
        let inflated = (d2 + extra * extra).sqrt();
        if ratio_false || inflated / sd > p.a_tol {
            false_nn += 1;
        }
    }
    false_nn as f64 / count as f64
}

/// Smallest `m ∈ 1..=m_max` whose false-nearest-neighbour fraction is
/// below the threshold, or `m_max` when none is.
pub fn fnn_embedding_dimension(
    series: &TimeSeries,
    tau: usize,
    m_max: usize,
    params: &FnnParams,
) -> Result<usize, EmbeddingError> {
    if m_max < 2 || tau < 1 {
        return Err(EmbeddingError::InvalidParams(format!(
            "FNN needs m_max >= 2 and tau >= 1 (got {m_max}, {tau})"
        )));
    }
    let x = &series.values;
    if x.len() < m_max * tau + 2 {
        return Err(EmbeddingError::SeriesTooShort);
    }
    let (_, sd) = mean_std(x);
    if sd == 0.0 {
        return Err(EmbeddingError::ZeroVariance);
    }
    for m in 1..m_max {
        if fnn_fraction(x, m, tau, sd, params) < params.threshold {
            return Ok(m);
        }
    }
    Ok(m_max)
}

/// Most frequent value, ties going to the smaller one.
pub fn mode(values: &[usize]) -> Option<usize> {
    let mut sorted = values.to_vec();
    sorted.sort_unstable();
    let mut best: Option<(usize, usize)> = None;
    for chunk in sorted.chunk_by(|a, b| a == b) {
        if best.is_none_or(|(_, n)| chunk.len() > n) {
            best = Some((chunk[0], chunk.len()));
        }
    }
    best.map(|(v, _)| v)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "rule", content = "value")]
pub enum MaxScaleRule {
    HalfMedianDiameter,
    Fixed(f64),
}

/// Largest filtration scale for a collection of clouds.
pub fn select_max_scale(clouds: &[PointCloud], rule: MaxScaleRule) -> Result<f64, EmbeddingError> {
    match rule {
        MaxScaleRule::Fixed(r) if r.is_finite() && r > 0.0 => Ok(r),
        MaxScaleRule::Fixed(r) => Err(EmbeddingError::InvalidParams(format!(
            "fixed scale must be positive, got {r}"
        ))),
        MaxScaleRule::HalfMedianDiameter => {
            let mut diam: Vec<f64> = clouds
                .iter()
                .filter(|c| c.len() >= 2)
                .map(PointCloud::diameter)
                .collect();
            if diam.is_empty() {
                return Err(EmbeddingError::NoExtent);
            }
            diam.sort_by(f64::total_cmp);
            let n = diam.len();
            let median = if n % 2 == 1 {
                diam[n / 2]
            } else {
                0.5 * (diam[n / 2 - 1] + diam[n / 2])
            };
            if median > 0.0 {
                Ok(0.5 * median)
            } else {
                Err(EmbeddingError::NoExtent)
            }
        }
    }
}
