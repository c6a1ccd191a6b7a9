use serde::{Deserialize, Serialize};

use super::{roc_auc, ClassifyError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub tp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub fp: usize,
    pub tn: usize,
}

impl Confusion {
    pub fn total(&self) -> usize {
        self.tp + self.fn_ + self.fp + self.tn
    }
}

/// Test-set metrics with class 1 as the positive class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub auc: f64,
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub specificity: f64,
    pub f1: f64,
    pub confusion: Confusion,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

impl EvalReport {
    /// Threshold metrics from counts; `auc` is supplied separately.
    pub fn from_confusion(c: Confusion, auc: f64) -> Self {
        let precision = ratio(c.tp, c.tp + c.fp);
        let recall = ratio(c.tp, c.tp + c.fn_);
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        Self {
            auc,
            accuracy: ratio(c.tp + c.tn, c.total()),
            precision,
            recall,
            specificity: ratio(c.tn, c.tn + c.fp),
            f1,
            confusion: c,
        }
    }
}

pub fn evaluate_metrics(predictions: &[u8], labels: &[u8], scores: &[f64]) -> Result<EvalReport, ClassifyError> {
    for len in [labels.len(), scores.len()] {
        if len != predictions.len() {
            return Err(ClassifyError::LengthMismatch {
                expected: predictions.len(),
                found: len,
            });
        }
    }
    let mut c = Confusion { tp: 0, fn_: 0, fp: 0, tn: 0 };
    for (&p, &l) in predictions.iter().zip(labels) {
        match (p, l) {
            (1, 1) => c.tp += 1,
            (0, 1) => c.fn_ += 1,
            (1, 0) => c.fp += 1,
            (0, 0) => c.tn += 1,
            _ => return Err(ClassifyError::NonBinaryLabel(p.max(l))),
        }
    }
    let auc = roc_auc(scores, labels)?.auc;
    Ok(EvalReport::from_confusion(c, auc))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn table_counts() {
        let c = Confusion { tp: 1553, fn_: 37, fp: 24, tn: 2603 };
        let r = EvalReport::from_confusion(c, 0.9988);
        assert_eq!(c.total(), 4217);
        assert_relative_eq!(r.accuracy, 0.9855, epsilon = 5e-5);
        assert_relative_eq!(r.precision, 0.9848, epsilon = 5e-5);
        assert_relative_eq!(r.recall, 0.9767, epsilon = 5e-5);
    }

    #[test]
    fn degenerate_predictors() {
        let labels = [0, 1, 1, 0];
        let r = evaluate_metrics(&labels, &labels, &[0.0, 1.0, 1.0, 0.0]).unwrap();
        assert_eq!((r.accuracy, r.f1, r.auc), (1.0, 1.0, 1.0));
        let r = evaluate_metrics(&[1; 4], &labels, &[1.0; 4]).unwrap();
        assert_eq!((r.recall, r.specificity), (1.0, 0.0));
        assert!(evaluate_metrics(&[1, 0], &labels, &[0.0; 4]).is_err());
    }
}
