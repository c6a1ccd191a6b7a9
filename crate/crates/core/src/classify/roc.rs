use serde::Serialize;

use super::{check_labels, ClassifyError};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Roc {
    pub auc: f64,
    /// `(fpr, tpr)` from `(0, 0)` to `(1, 1)`, one point per distinct score.
    pub curve: Vec<(f64, f64)>,
}

fn check_lengths(scores: &[f64], labels: &[u8]) -> Result<(), ClassifyError> {
    if scores.len() != labels.len() {
        return Err(ClassifyError::LengthMismatch {
            expected: scores.len(),
            found: labels.len(),
        });
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(ClassifyError::InvalidParams("NaN score".into()));
    }
    check_labels(labels)
}

/// Groups of tied scores in ascending order, as `(score, positives, negatives)`.
fn tie_groups(scores: &[f64], labels: &[u8]) -> Vec<(f64, usize, usize)> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    let mut groups: Vec<(f64, usize, usize)> = Vec::new();
    for i in order {
        let pos = labels[i] as usize;
        match groups.last_mut() {
            Some(g) if g.0 == scores[i] => {
                g.1 += pos;
                g.2 += 1 - pos;
            }
            _ => groups.push((scores[i], pos, 1 - pos)),
        }
    }
    groups
}

/// Area under the ROC curve (Mann–Whitney with midranks), where a larger
/// score means "more likely positive".
pub fn roc_auc(scores: &[f64], labels: &[u8]) -> Result<Roc, ClassifyError> {
    check_lengths(scores, labels)?;
    let groups = tie_groups(scores, labels);
    let n_pos = labels.iter().filter(|&&l| l == 1).count();
    let n_neg = labels.len() - n_pos;
    // rank sum of the positives, ties at their midrank
    let mut rank_sum = 0.0;
    let mut below = 0usize;
    for &(_, p, n) in &groups {
        let size = p + n;
        let midrank = below as f64 + (size as f64 + 1.0) / 2.0;
        rank_sum += p as f64 * midrank;
        below += size;
    }
    let u = rank_sum - (n_pos * (n_pos + 1)) as f64 / 2.0;
    let auc = u / (n_pos as f64 * n_neg as f64);

    let mut curve = vec![(0.0, 0.0)];
    let (mut tp, mut fp) = (0usize, 0usize);
    for &(_, p, n) in groups.iter().rev() {
        tp += p;
        fp += n;
        curve.push((fp as f64 / n_neg as f64, tp as f64 / n_pos as f64));
    }
    Ok(Roc { auc, curve })
}

/// Youden-optimal threshold for the stump rule "predict 1 iff
/// `polarity · x < polarity · θ`", scanning every distinct value of `x`.
/// Returns the smallest `θ` attaining the largest `J = TPR − FPR`.
pub fn youden_threshold(values: &[f64], labels: &[u8], polarity: i8) -> Result<(f64, f64), ClassifyError> {
    check_lengths(values, labels)?;
    if polarity != 1 && polarity != -1 {
        return Err(ClassifyError::InvalidParams(format!("polarity {polarity}")));
    }
    let groups = tie_groups(values, labels);
    let n_pos = labels.iter().filter(|&&l| l == 1).count() as i64;
    let n_neg = labels.len() as i64 - n_pos;
    // compare J exactly as tp·N − fp·P
    let mut best: Option<(f64, i64, i64, i64)> = None;
    let (mut pos_below, mut neg_below) = (0i64, 0i64);
    for &(v, p, n) in &groups {
        let (tp, fp) = if polarity == 1 {
            (pos_below, neg_below)
        } else {
            (n_pos - pos_below - p as i64, n_neg - neg_below - n as i64)
        };
        let key = tp * n_neg - fp * n_pos;
        if best.is_none_or(|b| key > b.1) {
            best = Some((v, key, tp, fp));
        }
        pos_below += p as i64;
        neg_below += n as i64;
    }
    let (theta, _, tp, fp) = best.expect("nonempty values");
    Ok((theta, tp as f64 / n_pos as f64 - fp as f64 / n_neg as f64))
}
