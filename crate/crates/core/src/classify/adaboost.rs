use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{check_labels, ClassifyError, FeatureMatrix, GridMeta, Stump};

pub const DEFAULT_EPS_MIN: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoostRound {
    pub stump: Stump,
    pub alpha: f64,
}

/// Per-round training diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RoundTrace {
    /// Weighted error of the chosen stump before clamping.
    pub error: f64,
    pub alpha: f64,
    /// `Σ_l exp(−c_l F(x_l)) / L` after this round.
    pub exp_loss: f64,
    /// Sum of the renormalized sample weights.
    pub weight_sum: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdaBoostModel {
    pub grid: GridMeta,
    pub rounds: Vec<BoostRound>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub trace: Vec<RoundTrace>,
}

impl AdaBoostModel {
    pub fn score(&self, row: &[f64]) -> f64 {
        self.rounds
            .iter()
            .map(|r| if r.stump.predict_row(row) == 1 { r.alpha } else { -r.alpha })
            .sum()
    }
}

/// Label and vote `Σ α_t h_t(row)` with `h_t ∈ {−1, +1}`; a zero vote is
/// labelled 1.
pub fn adaboost_predict(model: &AdaBoostModel, row: &[f64]) -> Result<(u8, f64), ClassifyError> {
    if row.len() != model.grid.n_features() {
        return Err(ClassifyError::LengthMismatch {
            expected: model.grid.n_features(),
            found: row.len(),
        });
    }
    let score = model.score(row);
    Ok((u8::from(score >= 0.0), score))
}

/// Distinct sorted values of one feature and each sample's position among them.
struct Column {
    values: Vec<f64>,
    group: Vec<usize>,
}

impl Column {
    fn new(x: &[f64]) -> Self {
        let mut values = x.to_vec();
        values.sort_by(f64::total_cmp);
        values.dedup();
        let group = x
            .iter()
            .map(|v| values.binary_search_by(|u| u.total_cmp(v)).unwrap())
            .collect();
        Self { values, group }
    }

    /// Lowest weighted error over thresholds and polarities, as
    /// `(error, threshold, polarity)`; ties keep the smallest threshold and
    /// then polarity +1.
    fn best_split(&self, w: &[f64], c: &[f64]) -> (f64, f64, i8) {
        let n = self.values.len();
        let mut wp = vec![0.0; n];
        let mut wn = vec![0.0; n];
        for ((&g, &wl), &cl) in self.group.iter().zip(w).zip(c) {
            if cl > 0.0 {
                wp[g] += wl;
            } else {
                wn[g] += wl;
            }
        }
        let wp_tot: f64 = wp.iter().sum();
        let wn_tot: f64 = wn.iter().sum();
        let mut best = (f64::INFINITY, 0.0, 1);
        let (mut wp_below, mut wn_below) = (0.0, 0.0);
        for i in 0..n {
            // +1: x < θ predicted positive
            let e_plus = wn_below + (wp_tot - wp_below);
            // −1: x > θ predicted positive
            let e_minus = (wn_tot - wn_below - wn[i]) + wp_below + wp[i];
            if e_plus < best.0 {
                best = (e_plus, self.values[i], 1);
            }
            if e_minus < best.0 {
                best = (e_minus, self.values[i], -1);
            }
            wp_below += wp[i];
            wn_below += wn[i];
        }
        best
    }
}

fn weighted_error(stump: &Stump, fm: &FeatureMatrix, w: &[f64], c: &[f64]) -> f64 {
    fm.rows()
        .iter()
        .zip(w)
        .zip(c)
        .filter(|((row, _), &cl)| (stump.predict_row(row) == 1) != (cl > 0.0))
        .map(|((_, &wl), _)| wl)
        .sum()
}

/// Discrete AdaBoost over exhaustive decision stumps.
pub fn adaboost_train(fm: &FeatureMatrix, t: usize, eps_min: f64) -> Result<AdaBoostModel, ClassifyError> {
    check_labels(fm.labels())?;
    if t == 0 {
        return Err(ClassifyError::InvalidParams("T must be at least 1".into()));
    }
    if !(eps_min > 0.0 && eps_min < 0.5) {
        return Err(ClassifyError::InvalidParams(format!("eps_min {eps_min}")));
    }
    let n = fm.len();
    let c: Vec<f64> = fm.labels().iter().map(|&l| if l == 1 { 1.0 } else { -1.0 }).collect();
    let columns: Vec<Column> = (1..=fm.n_features())
        .into_par_iter()
        .map(|f| Column::new(&fm.column(f)))
        .collect();
    let mut w = vec![1.0 / n as f64; n];
    let mut score = vec![0.0; n];
    let mut rounds = Vec::with_capacity(t);
    let mut trace = Vec::with_capacity(t);

    for _ in 0..t {
        let splits: Vec<(f64, f64, i8)> = columns.par_iter().map(|col| col.best_split(&w, &c)).collect();
        let mut best = 0;
        for (i, s) in splits.iter().enumerate() {
            if s.0 < splits[best].0 {
                best = i;
            }
        }
        let (_, threshold, polarity) = splits[best];
        let mut stump = Stump {
            feature: best + 1,
            polarity,
            threshold,
        };
        let mut error = weighted_error(&stump, fm, &w, &c);
        if error > 0.5 {
            let flipped = Stump { polarity: -polarity, ..stump };
            let e = weighted_error(&flipped, fm, &w, &c);
            if e < error {
                stump = flipped;
                error = e;
            }
        }
        let eps = error.clamp(eps_min, 1.0 - eps_min);
        // a stump no better than chance gets no vote
        let alpha = if eps < 0.5 { 0.5 * ((1.0 - eps) / eps).ln() } else { 0.0 };

        let h: Vec<f64> = fm
            .rows()
            .iter()
            .map(|row| if stump.predict_row(row) == 1 { 1.0 } else { -1.0 })
            .collect();
        for l in 0..n {
            w[l] *= (-alpha * c[l] * h[l]).exp();
            score[l] += alpha * h[l];
        }
        let z: f64 = w.iter().sum();
        w.iter_mut().for_each(|v| *v /= z);
        trace.push(RoundTrace {
            error,
            alpha,
            exp_loss: score.iter().zip(&c).map(|(s, cl)| (-cl * s).exp()).sum::<f64>() / n as f64,
            weight_sum: w.iter().sum(),
        });
        rounds.push(BoostRound { stump, alpha });
    }
    Ok(AdaBoostModel {
        grid: fm.meta().clone(),
        rounds,
        trace,
    })
}

/// `K × R` grid of summed α per feature.
pub fn alpha_contribution_heatmap(model: &AdaBoostModel) -> Vec<Vec<f64>> {
    let mut heat = vec![vec![0.0; model.grid.r]; model.grid.k];
    for round in &model.rounds {
        let (k, j) = model.grid.cell(round.stump.feature);
        heat[k - 1][j - 1] += round.alpha;
    }
    heat
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn meta(k: usize, r: usize) -> GridMeta {
        GridMeta { k, r, radii: vec![] }
    }

    fn toy() -> FeatureMatrix {
        let rows = vec![
            vec![1.0, 3.0],
            vec![2.0, 1.0],
            vec![3.0, 4.0],
            vec![4.0, 2.0],
            vec![5.0, 5.0],
            vec![6.0, 0.0],
        ];
        FeatureMatrix::new(rows, vec![0, 0, 1, 0, 1, 1], meta(1, 2)).unwrap()
    }

    #[test]
    fn separable_single_feature() {
        let fm = FeatureMatrix::new(
            vec![vec![1.0], vec![2.0], vec![8.0], vec![9.0]],
            vec![0, 0, 1, 1],
            meta(1, 1),
        )
        .unwrap();
        let m = adaboost_train(&fm, 5, DEFAULT_EPS_MIN).unwrap();
        for round in 0..5 {
            let partial = AdaBoostModel { rounds: m.rounds[..=round].to_vec(), ..m.clone() };
            for (row, &l) in fm.rows().iter().zip(fm.labels()) {
                assert_eq!(adaboost_predict(&partial, row).unwrap().0, l);
            }
        }
        assert_eq!(m.trace[0].error, 0.0);
    }

    #[test]
    fn alpha_closed_form() {
        // errors of 1/4 under uniform weights
        let fm = FeatureMatrix::new(
            vec![vec![1.0], vec![2.0], vec![3.0], vec![4.0]],
            vec![0, 1, 1, 1],
            meta(1, 1),
        )
        .unwrap();
        let fm2 = FeatureMatrix::new(
            vec![vec![1.0], vec![3.0], vec![2.0], vec![4.0]],
            vec![0, 0, 1, 1],
            meta(1, 1),
        )
        .unwrap();
        let m = adaboost_train(&fm2, 1, DEFAULT_EPS_MIN).unwrap();
        assert_relative_eq!(m.trace[0].error, 0.25);
        assert_relative_eq!(m.rounds[0].alpha, 0.5 * 3f64.ln(), epsilon = 1e-12);
        assert_relative_eq!(m.rounds[0].alpha, 0.5493, epsilon = 1e-4);
        assert!(adaboost_train(&fm, 0, DEFAULT_EPS_MIN).is_err());
    }

    #[test]
    fn first_round_is_best_uniform_stump() {
        let fm = toy();
        let m = adaboost_train(&fm, 1, DEFAULT_EPS_MIN).unwrap();
        let w = vec![1.0 / 6.0; 6];
        let c: Vec<f64> = fm.labels().iter().map(|&l| if l == 1 { 1.0 } else { -1.0 }).collect();
        let mut best = f64::INFINITY;
        for f in 1..=2 {
            for row in fm.rows() {
                for p in [1, -1] {
                    let s = Stump { feature: f, polarity: p, threshold: row[f - 1] };
                    best = best.min(weighted_error(&s, &fm, &w, &c));
                }
            }
        }
        assert_relative_eq!(m.trace[0].error, best, epsilon = 1e-15);
    }

    #[test]
    fn loss_and_weights() {
        let m = adaboost_train(&toy(), 12, DEFAULT_EPS_MIN).unwrap();
        let mut prev = 1.0;
        for t in &m.trace {
            assert!(t.exp_loss <= prev);
            assert!((t.weight_sum - 1.0).abs() < 1e-12);
            assert!(t.alpha >= 0.0 && t.error <= 0.5);
            prev = t.exp_loss;
        }
    }

    #[test]
    fn prediction_rules() {
        let s1 = Stump { feature: 1, polarity: -1, threshold: 0.0 };
        let s2 = Stump { feature: 2, polarity: -1, threshold: 0.0 };
        let m = AdaBoostModel {
            grid: meta(1, 2),
            rounds: vec![BoostRound { stump: s1, alpha: 0.6 }, BoostRound { stump: s2, alpha: 0.4 }],
            trace: vec![],
        };
        let (l, s) = adaboost_predict(&m, &[1.0, -1.0]).unwrap();
        assert_relative_eq!(s, 0.2, epsilon = 1e-12);
        assert_eq!(l, 1);
        let tie = AdaBoostModel {
            rounds: vec![BoostRound { stump: s1, alpha: 0.5 }, BoostRound { stump: s2, alpha: 0.5 }],
            ..m.clone()
        };
        assert_eq!(adaboost_predict(&tie, &[1.0, -1.0]).unwrap(), (1, 0.0));
        assert!(adaboost_predict(&m, &[1.0]).is_err());
        let single = AdaBoostModel { rounds: vec![m.rounds[0]], ..m };
        for x in [-2.0, 0.0, 3.0] {
            assert_eq!(adaboost_predict(&single, &[x, 0.0]).unwrap().0, s1.predict_row(&[x, 0.0]));
        }
    }

    #[test]
    fn heatmap_sums_alpha() {
        let s = Stump { feature: 5, polarity: 1, threshold: 0.0 };
        let m = AdaBoostModel {
            grid: meta(2, 3),
            rounds: vec![BoostRound { stump: s, alpha: 0.7 }, BoostRound { stump: s, alpha: 0.3 }],
            trace: vec![],
        };
        let h = alpha_contribution_heatmap(&m);
        assert_relative_eq!(h[1][1], 1.0);
        assert_relative_eq!(h.iter().flatten().sum::<f64>(), 1.0);
        assert_eq!(h.iter().flatten().filter(|&&v| v != 0.0).count(), 1);
    }
}
