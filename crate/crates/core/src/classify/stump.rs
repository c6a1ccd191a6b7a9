use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{roc_auc, youden_threshold, ClassifyError, FeatureMatrix, GridMeta};

/// `h(x) = 1` iff `polarity · x[feature] < polarity · threshold`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stump {
    /// 1-based feature index.
    pub feature: usize,
    pub polarity: i8,
    pub threshold: f64,
}

impl Stump {
    pub fn predict_row(&self, row: &[f64]) -> u8 {
        stump_predict(self, row[self.feature - 1])
    }

    /// Feature value oriented so that larger means "more likely class 1".
    pub fn oriented_score(&self, row: &[f64]) -> f64 {
        -f64::from(self.polarity) * row[self.feature - 1]
    }
}

pub fn stump_predict(stump: &Stump, x: f64) -> u8 {
    let p = f64::from(stump.polarity);
    u8::from(p * x < p * stump.threshold)
}

/// Single-feature classifier picked by training AUC.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StumpClassifier {
    pub stump: Stump,
    /// Orientation-free AUC, `max(auc, 1 − auc)`.
    pub train_auc: f64,
    pub youden_j: f64,
    pub grid: GridMeta,
}

impl StumpClassifier {
    pub fn predict(&self, row: &[f64]) -> u8 {
        self.stump.predict_row(row)
    }

    pub fn score(&self, row: &[f64]) -> f64 {
        self.stump.oriented_score(row)
    }
}

/// Ranks every feature by AUC and thresholds the best one at its Youden
/// point. A feature whose values are larger in class 1 gets polarity −1.
pub fn train_stump(fm: &FeatureMatrix) -> Result<StumpClassifier, ClassifyError> {
    let labels = fm.labels();
    let aucs = (1..=fm.n_features())
        .into_par_iter()
        .map(|f| roc_auc(&fm.column(f), labels).map(|r| r.auc))
        .collect::<Result<Vec<f64>, _>>()?;
    let mut best = 0;
    for (i, a) in aucs.iter().enumerate() {
        if a.max(1.0 - a) > aucs[best].max(1.0 - aucs[best]) {
            best = i;
        }
    }
    let auc = aucs[best];
    let polarity = if auc >= 0.5 { -1 } else { 1 };
    let feature = best + 1;
    let (threshold, youden_j) = youden_threshold(&fm.column(feature), labels, polarity)?;
    Ok(StumpClassifier {
        stump: Stump {
            feature,
            polarity,
            threshold,
        },
        train_auc: auc.max(1.0 - auc),
        youden_j,
        grid: fm.meta().clone(),
    })
}
