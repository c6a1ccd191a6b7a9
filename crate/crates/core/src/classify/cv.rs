use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{adaboost_train, check_labels, roc_auc, train_stump, ClassifyError, FeatureMatrix, DEFAULT_EPS_MIN};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Stump,
    AdaBoost,
}

/// Fold index for every sample: each class is shuffled with `seed` and
/// dealt round-robin into `folds` folds.
pub fn stratified_folds(labels: &[u8], folds: usize, seed: u64) -> Result<Vec<usize>, ClassifyError> {
    check_labels(labels)?;
    if folds < 2 {
        return Err(ClassifyError::InvalidParams("need at least 2 folds".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut assign = vec![0; labels.len()];
    for class in [0u8, 1] {
        let mut idx: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        if idx.len() < folds {
            return Err(ClassifyError::TooFewSamples {
                class,
                count: idx.len(),
                folds,
            });
        }
        idx.shuffle(&mut rng);
        for (pos, i) in idx.into_iter().enumerate() {
            assign[i] = pos % folds;
        }
    }
    Ok(assign)
}

/// Validation AUC of each fold for a model trained on the remaining folds.
/// AdaBoost runs `K·R` rounds.
pub fn cross_validated_auc(
    fm: &FeatureMatrix,
    fold_of: &[usize],
    kind: ModelKind,
) -> Result<Vec<f64>, ClassifyError> {
    if fold_of.len() != fm.len() {
        return Err(ClassifyError::LengthMismatch {
            expected: fm.len(),
            found: fold_of.len(),
        });
    }
    let folds = fold_of.iter().max().map_or(0, |m| m + 1);
    (0..folds)
        .map(|k| {
            let train: Vec<usize> = (0..fm.len()).filter(|&i| fold_of[i] != k).collect();
            let valid: Vec<usize> = (0..fm.len()).filter(|&i| fold_of[i] == k).collect();
            let (tr, va) = (fm.subset(&train), fm.subset(&valid));
            let scores: Vec<f64> = match kind {
                ModelKind::Stump => {
                    let c = train_stump(&tr)?;
                    va.rows().iter().map(|r| c.score(r)).collect()
                }
                ModelKind::AdaBoost => {
                    let m = adaboost_train(&tr, fm.n_features(), DEFAULT_EPS_MIN)?;
                    va.rows().iter().map(|r| m.score(r)).collect()
                }
            };
            Ok(roc_auc(&scores, va.labels())?.auc)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::super::GridMeta;
    use super::*;

    #[test]
    fn folds_are_stratified_and_seeded() {
        let labels: Vec<u8> = (0..23).map(|i| u8::from(i % 3 == 0)).collect();
        let a = stratified_folds(&labels, 5, 1).unwrap();
        assert_eq!(a, stratified_folds(&labels, 5, 1).unwrap());
        for k in 0..5 {
            let pos = (0..23).filter(|&i| a[i] == k && labels[i] == 1).count();
            let neg = (0..23).filter(|&i| a[i] == k && labels[i] == 0).count();
            assert!((1..=2).contains(&pos), "{pos}");
            assert!((3..=4).contains(&neg), "{neg}");
        }
        assert!(matches!(
            stratified_folds(&[0, 0, 0, 1, 1], 3, 0),
            Err(ClassifyError::TooFewSamples { class: 1, .. })
        ));
    }

    #[test]
    fn cv_on_separable_data() {
        let rows: Vec<Vec<f64>> = (0..20).map(|i| vec![i as f64, (i * 7 % 5) as f64]).collect();
        let labels: Vec<u8> = (0..20).map(|i| u8::from(i >= 10)).collect();
        let fm = FeatureMatrix::new(rows, labels, GridMeta { k: 1, r: 2, radii: vec![] }).unwrap();
        let folds = stratified_folds(fm.labels(), 5, 3).unwrap();
        let aucs = cross_validated_auc(&fm, &folds, ModelKind::Stump).unwrap();
        assert_eq!(aucs, vec![1.0; 5]);
        let aucs = cross_validated_auc(&fm, &folds, ModelKind::AdaBoost).unwrap();
        assert_eq!(aucs.len(), 5);
        assert!(aucs.iter().sum::<f64>() / 5.0 > 0.8, "{aucs:?}");
    }
}
