//! End-to-end steps shared by the command line and the acceptance suite:
//! series → clouds → surfaces → features → model → report.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classify::{
    adaboost_predict, adaboost_train, alpha_contribution_heatmap, cross_validated_auc, evaluate_metrics,
    roc_auc, stratified_folds, train_stump, AdaBoostModel, ClassifyError, EvalReport, FeatureMatrix,
    ModelKind, StumpClassifier, DEFAULT_EPS_MIN,
};
use crate::data::{binary_labels, GridSize, LabeledDataset};
use crate::ecs::{build_ecs, ecs_class_diff, ClassDiff, EcsMatrix, ScaleGrid};
use crate::embedding::{
    fnn_embedding_dimension, mode, select_max_scale, takens_embed, EmbeddingParams, FnnParams, MaxScaleRule,
    TimeSeries,
};
use crate::geometry::{PointCloud, MAX_DIM};
use crate::{child_seed, Error};

/// Largest embedding dimension tried by false nearest neighbours.
pub const FNN_MAX_DIM: usize = MAX_DIM;

/// Per-series FNN dimension, then the mode over the series, clamped to the
/// supported range `2..=4`.
pub fn choose_dimension(series: &[TimeSeries], tau: usize) -> Result<usize, Error> {
    let dims = series
        .par_iter()
        .map(|s| fnn_embedding_dimension(s, tau, FNN_MAX_DIM, &FnnParams::default()))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(mode(&dims).unwrap_or(2).clamp(2, FNN_MAX_DIM))
}

pub fn embed_all(series: &[TimeSeries], params: EmbeddingParams, znorm: bool) -> Result<Vec<PointCloud>, Error> {
    series
        .par_iter()
        .map(|s| {
            let cloud = if znorm {
                takens_embed(&s.znormalized(), params)
            } else {
                takens_embed(s, params)
            };
            cloud.map_err(Error::from)
        })
        .collect()
}

/// Surfaces of every cloud; sample `i` uses jitter seed `child_seed(seed, i)`.
pub fn surfaces(
    series: &[TimeSeries],
    clouds: &[PointCloud],
    k: usize,
    grid: &ScaleGrid,
    seed: u64,
) -> Result<Vec<EcsMatrix>, Error> {
    clouds
        .par_iter()
        .zip(series)
        .enumerate()
        .map(|(i, (c, s))| build_ecs(s.id.clone(), c, k, grid, child_seed(seed, i as u64)).map_err(Error::from))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridScore {
    pub size: usize,
    pub fold_auc: Vec<f64>,
    pub mean_auc: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSearch {
    pub kind: ModelKind,
    pub folds: usize,
    pub scores: Vec<GridScore>,
    pub best: usize,
}

/// Stratified cross-validation over square grids `g × g`. The largest
/// scale is fixed beforehand from the full training split.
pub fn grid_search(
    train: &[TimeSeries],
    clouds: &[PointCloud],
    r_max: f64,
    sizes: &[usize],
    kind: ModelKind,
    folds: usize,
    seed: u64,
) -> Result<GridSearch, Error> {
    let labels = binary_labels(train);
    let fold_of = stratified_folds(&labels, folds, seed)?;
    let mut scores = Vec::with_capacity(sizes.len());
    for &g in sizes {
        let grid = ScaleGrid::uniform(r_max, g)?;
        let surf = surfaces(train, clouds, g, &grid, seed)?;
        let fm = FeatureMatrix::from_surfaces(&surf, labels.clone())?;
        let fold_auc = cross_validated_auc(&fm, &fold_of, kind)?;
        let mean_auc = fold_auc.iter().sum::<f64>() / fold_auc.len() as f64;
        scores.push(GridScore { size: g, fold_auc, mean_auc });
    }
    let best = scores
        .iter()
        .fold(None::<&GridScore>, |b, s| match b {
            Some(b) if b.mean_auc >= s.mean_auc => Some(b),
            _ => Some(s),
        })
        .ok_or_else(|| ClassifyError::InvalidParams("no grid sizes to scan".into()))?
        .size;
    Ok(GridSearch {
        kind,
        folds,
        scores,
        best,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifyConfig {
    pub model: ModelKind,
    /// Fixed grid, or `None` to scan `scan_sizes`.
    pub grid: Option<GridSize>,
    pub scan_sizes: Vec<usize>,
    pub folds: usize,
    /// `None` selects the embedding dimension by false nearest neighbours.
    pub m: Option<usize>,
    pub tau: usize,
    pub r_max: MaxScaleRule,
    pub znorm: bool,
    /// AdaBoost rounds; `None` means one per feature.
    pub rounds: Option<usize>,
    pub seed: u64,
}

impl Default for ClassifyConfig {
    fn default() -> Self {
        Self {
            model: ModelKind::Stump,
            grid: None,
            scan_sizes: (2..=10).collect(),
            folds: 5,
            m: None,
            tau: 1,
            r_max: MaxScaleRule::HalfMedianDiameter,
            znorm: false,
            rounds: None,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum TrainedModel {
    Stump(StumpClassifier),
    AdaBoost(AdaBoostModel),
}

impl TrainedModel {
    /// Predicted label and a score where larger means "more likely 1".
    pub fn predict(&self, row: &[f64]) -> Result<(u8, f64), Error> {
        Ok(match self {
            TrainedModel::Stump(c) => (c.predict(row), c.score(row)),
            TrainedModel::AdaBoost(m) => adaboost_predict(m, row)?,
        })
    }
}

#[derive(Debug, Clone)]
pub struct ClassifyOutcome {
    pub m: usize,
    pub tau: usize,
    pub r_max: f64,
    pub grid: GridSize,
    pub search: Option<GridSearch>,
    pub model: TrainedModel,
    pub report: EvalReport,
    /// ROC points of the test scores.
    pub test_roc: Vec<(f64, f64)>,
    pub train_surfaces: Vec<EcsMatrix>,
    pub test_surfaces: Vec<EcsMatrix>,
    /// Class 1 against class 0 on the training split.
    pub class_diff: ClassDiff,
    pub heatmap: Option<Vec<Vec<f64>>>,
}

pub fn run_classification(ds: &LabeledDataset, cfg: &ClassifyConfig) -> Result<ClassifyOutcome, Error> {
    let m = match cfg.m {
        Some(m) => m,
        None => choose_dimension(&ds.train, cfg.tau)?,
    };
    let params = EmbeddingParams::new(m, cfg.tau)?;
    let train_clouds = embed_all(&ds.train, params, cfg.znorm)?;
    let test_clouds = embed_all(&ds.test, params, cfg.znorm)?;
    let r_max = select_max_scale(&train_clouds, cfg.r_max)?;

    let (grid_size, search) = match cfg.grid {
        Some(g) => (g, None),
        None => {
            let s = grid_search(&ds.train, &train_clouds, r_max, &cfg.scan_sizes, cfg.model, cfg.folds, cfg.seed)?;
            (GridSize { k: s.best, r: s.best }, Some(s))
        }
    };
    let grid = ScaleGrid::uniform(r_max, grid_size.r)?;
    let train_surfaces = surfaces(&ds.train, &train_clouds, grid_size.k, &grid, cfg.seed)?;
    let test_surfaces = surfaces(&ds.test, &test_clouds, grid_size.k, &grid, cfg.seed)?;
    let train_labels = binary_labels(&ds.train);
    let test_labels = binary_labels(&ds.test);
    let train_fm = FeatureMatrix::from_surfaces(&train_surfaces, train_labels.clone())?;
    let test_fm = FeatureMatrix::from_surfaces(&test_surfaces, test_labels.clone())?;

    let model = match cfg.model {
        ModelKind::Stump => TrainedModel::Stump(train_stump(&train_fm)?),
        ModelKind::AdaBoost => {
            let t = cfg.rounds.unwrap_or(train_fm.n_features());
            TrainedModel::AdaBoost(adaboost_train(&train_fm, t, DEFAULT_EPS_MIN)?)
        }
    };
    let (preds, scores): (Vec<u8>, Vec<f64>) = test_fm
        .rows()
        .iter()
        .map(|r| model.predict(r))
        .collect::<Result<Vec<_>, _>>()?
        .into_iter()
        .unzip();
    let report = evaluate_metrics(&preds, &test_labels, &scores)?;
    let test_roc = roc_auc(&scores, &test_labels)?.curve;
    let mut pos = Vec::new();
    let mut neg = Vec::new();
    for (s, &l) in train_surfaces.iter().zip(&train_labels) {
        if l == 1 { pos.push(s.clone()) } else { neg.push(s.clone()) }
    }
    let class_diff = ecs_class_diff(&pos, &neg)?;
    let heatmap = match &model {
        TrainedModel::AdaBoost(m) => Some(alpha_contribution_heatmap(m)),
        TrainedModel::Stump(_) => None,
    };
    Ok(ClassifyOutcome {
        m,
        tau: cfg.tau,
        r_max,
        grid: grid_size,
        search,
        model,
        report,
        test_roc,
        train_surfaces,
        test_surfaces,
        class_diff,
        heatmap,
    })
}

/// Mean within-class and between-class Euler distances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassDistances {
    pub mean_intra_0: f64,
    pub mean_intra_1: f64,
    pub mean_inter: f64,
}

pub fn class_distances(d: &[Vec<f64>], labels: &[u8]) -> ClassDistances {
    let mut sums = [[0.0f64; 2]; 3];
    for i in 0..d.len() {
        for j in i + 1..d.len() {
            let slot = if labels[i] != labels[j] { 2 } else { labels[i] as usize };
            sums[slot][0] += d[i][j];
            sums[slot][1] += 1.0;
        }
    }
    let mean = |s: [f64; 2]| if s[1] > 0.0 { s[0] / s[1] } else { 0.0 };
    ClassDistances {
        mean_intra_0: mean(sums[0]),
        mean_intra_1: mean(sums[1]),
        mean_inter: mean(sums[2]),
    }
}
