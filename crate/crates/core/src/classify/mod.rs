//! Interpretable classifiers over linearized ECS features.

mod adaboost;
mod cv;
mod metrics;
mod roc;
mod stump;

pub use adaboost::{
    adaboost_predict, adaboost_train, alpha_contribution_heatmap, AdaBoostModel, BoostRound,
    RoundTrace, DEFAULT_EPS_MIN,
};
pub use cv::{cross_validated_auc, stratified_folds, ModelKind};
pub use metrics::{evaluate_metrics, Confusion, EvalReport};
pub use roc::{roc_auc, youden_threshold, Roc};
pub use stump::{stump_predict, train_stump, Stump, StumpClassifier};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ecs::EcsMatrix;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ClassifyError {
    #[error("degenerate labels")]
    DegenerateLabels,
    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("labels must be 0 or 1, found {0}")]
    NonBinaryLabel(u8),
    #[error("non-finite feature value at row {row}, feature {feature}")]
    NonFinite { row: usize, feature: usize },
    #[error("empty feature matrix")]
    Empty,
    #[error("too few samples: class {class} has {count}, need at least {folds}")]
    TooFewSamples { class: u8, count: usize, folds: usize },
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
}

/// Grid shape behind a feature vector: feature `f` (1-based) is window
/// `(f − 1) / R + 1`, scale `(f − 1) % R + 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridMeta {
    pub k: usize,
    pub r: usize,
    pub radii: Vec<f64>,
}

impl GridMeta {
    pub fn n_features(&self) -> usize {
        self.k * self.r
    }

    /// 1-based `(window, scale)` of a 1-based feature index.
    pub fn cell(&self, feature: usize) -> (usize, usize) {
        ((feature - 1) / self.r + 1, (feature - 1) % self.r + 1)
    }
}

/// Samples × features, with binary labels (1 = positive class).
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    rows: Vec<Vec<f64>>,
    labels: Vec<u8>,
    meta: GridMeta,
}

impl FeatureMatrix {
    pub fn new(rows: Vec<Vec<f64>>, labels: Vec<u8>, meta: GridMeta) -> Result<Self, ClassifyError> {
        if rows.is_empty() {
            return Err(ClassifyError::Empty);
        }
        if rows.len() != labels.len() {
            return Err(ClassifyError::LengthMismatch {
                expected: rows.len(),
                found: labels.len(),
            });
        }
        let width = meta.n_features();
        if width == 0 {
            return Err(ClassifyError::Empty);
        }
        for (i, row) in rows.iter().enumerate() {
            if row.len() != width {
                return Err(ClassifyError::LengthMismatch {
                    expected: width,
                    found: row.len(),
                });
            }
            if let Some(f) = row.iter().position(|v| !v.is_finite()) {
                return Err(ClassifyError::NonFinite { row: i, feature: f + 1 });
            }
        }
        if let Some(&l) = labels.iter().find(|&&l| l > 1) {
            return Err(ClassifyError::NonBinaryLabel(l));
        }
        Ok(Self { rows, labels, meta })
    }

    pub fn from_surfaces(surfaces: &[EcsMatrix], labels: Vec<u8>) -> Result<Self, ClassifyError> {
        let first = surfaces.first().ok_or(ClassifyError::Empty)?;
        let meta = GridMeta {
            k: first.k(),
            r: first.r(),
            radii: first.grid.radii().to_vec(),
        };
        let rows = surfaces
            .iter()
            .map(|s| s.features().into_iter().map(|v| v as f64).collect())
            .collect();
        Self::new(rows, labels, meta)
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn meta(&self) -> &GridMeta {
        &self.meta
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn n_features(&self) -> usize {
        self.meta.n_features()
    }

    /// Values of 1-based feature `f` across samples.
    pub fn column(&self, f: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r[f - 1]).collect()
    }

    pub fn subset(&self, idx: &[usize]) -> FeatureMatrix {
        FeatureMatrix {
            rows: idx.iter().map(|&i| self.rows[i].clone()).collect(),
            labels: idx.iter().map(|&i| self.labels[i]).collect(),
            meta: self.meta.clone(),
        }
    }
}

pub(crate) fn check_labels(labels: &[u8]) -> Result<(), ClassifyError> {
    if let Some(&l) = labels.iter().find(|&&l| l > 1) {
        return Err(ClassifyError::NonBinaryLabel(l));
    }
    let pos = labels.iter().filter(|&&l| l == 1).count();
    if pos == 0 || pos == labels.len() {
        return Err(ClassifyError::DegenerateLabels);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn feature_numbering() {
        let meta = GridMeta { k: 10, r: 10, radii: vec![] };
        assert_eq!(meta.cell(72), (8, 2));
        assert_eq!(meta.cell(1), (1, 1));
        assert_eq!(meta.cell(100), (10, 10));
        let meta = GridMeta { k: 6, r: 6, radii: vec![] };
        assert_eq!(meta.cell(26), (5, 2));
    }

    #[test]
    fn matrix_validation() {
        let meta = GridMeta { k: 1, r: 2, radii: vec![0.5, 1.0] };
        assert!(FeatureMatrix::new(vec![vec![1.0, 2.0]], vec![1], meta.clone()).is_ok());
        assert!(FeatureMatrix::new(vec![vec![1.0]], vec![1], meta.clone()).is_err());
        assert!(FeatureMatrix::new(vec![vec![1.0, 2.0]], vec![2], meta.clone()).is_err());
        assert!(FeatureMatrix::new(vec![vec![1.0, f64::NAN]], vec![0], meta).is_err());
    }
}
