//! Rössler trajectories, noise perturbations and the periodic-versus-chaotic
//! distance experiment.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::child_seed;
use crate::ecs::{build_ecs, ecs_class_diff, pairwise_distance_matrix, ClassDiff, EcsError, MetricOrder, ScaleGrid};
use crate::embedding::{select_max_scale, takens_embed, EmbeddingError, EmbeddingParams, MaxScaleRule, TimeSeries};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DynamicsError {
    #[error("trajectory diverged at t = {t}")]
    Diverged { t: f64 },
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error(transparent)]
    Embedding(#[from] EmbeddingError),
    #[error(transparent)]
    Ecs(#[from] EcsError),
}

pub const PERIODIC_C: f64 = 2.3;
pub const CHAOTIC_C: f64 = 7.3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RosslerParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub x0: [f64; 3],
    pub dt_sample: f64,
    pub n_samples: usize,
    pub dt_internal: f64,
    pub transient_skip: f64,
}

impl Default for RosslerParams {
    fn default() -> Self {
        Self {
            a: 0.2,
            b: 0.2,
            c: PERIODIC_C,
            x0: [1.0, 1.0, 1.0],
            dt_sample: 0.5,
            n_samples: 300,
            dt_internal: 0.01,
            transient_skip: 0.0,
        }
    }
}

impl RosslerParams {
    pub fn with_c(c: f64) -> Self {
        Self { c, ..Self::default() }
    }

    /// Whole number of internal steps spanning `span`.
    fn steps_in(&self, span: f64, what: &str) -> Result<usize, DynamicsError> {
        let steps = (span / self.dt_internal).round();
        if (steps * self.dt_internal - span).abs() > 1e-12 * span.max(1.0) {
            return Err(DynamicsError::InvalidParams(format!(
                "{what} {span} is not a multiple of dt_internal {}",
                self.dt_internal
            )));
        }
        Ok(steps as usize)
    }

    fn validate(&self) -> Result<(usize, usize), DynamicsError> {
        let finite = [self.a, self.b, self.c, self.dt_sample, self.dt_internal, self.transient_skip]
            .iter()
            .chain(&self.x0)
            .all(|v| v.is_finite());
        if !finite {
            return Err(DynamicsError::InvalidParams("non-finite parameter".into()));
        }
        if self.dt_internal <= 0.0 || self.dt_internal > self.dt_sample {
            return Err(DynamicsError::InvalidParams(
                "need 0 < dt_internal <= dt_sample".into(),
            ));
        }
        if self.transient_skip < 0.0 {
            return Err(DynamicsError::InvalidParams("negative transient_skip".into()));
        }
        if self.n_samples < 2 {
            return Err(DynamicsError::InvalidParams("n_samples must be at least 2".into()));
        }
        Ok((
            self.steps_in(self.dt_sample, "dt_sample")?,
            self.steps_in(self.transient_skip, "transient_skip")?,
        ))
    }
}

pub fn rossler_vector_field(s: [f64; 3], p: &RosslerParams) -> [f64; 3] {
    let [x, y, z] = s;
    [-y - z, x + p.a * y, p.b + z * (x - p.c)]
}

fn rk4_step(s: [f64; 3], h: f64, p: &RosslerParams) -> [f64; 3] {
    let add = |s: [f64; 3], k: [f64; 3], f: f64| [s[0] + f * k[0], s[1] + f * k[1], s[2] + f * k[2]];
    let k1 = rossler_vector_field(s, p);
    let k2 = rossler_vector_field(add(s, k1, h / 2.0), p);
    let k3 = rossler_vector_field(add(s, k2, h / 2.0), p);
    let k4 = rossler_vector_field(add(s, k3, h), p);
    std::array::from_fn(|i| s[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
}

/// Sampled states `(t, [x, y, z])`, with `t` measured from the end of the
/// discarded transient.
pub fn integrate_trajectory(p: &RosslerParams) -> Result<Vec<(f64, [f64; 3])>, DynamicsError> {
    let (per_sample, transient) = p.validate()?;
    let h = p.dt_internal;
    let mut s = p.x0;
    let mut step = 0usize;
    let mut advance = |s: &mut [f64; 3], n: usize| -> Result<(), DynamicsError> {
        for _ in 0..n {
            *s = rk4_step(*s, h, p);
            step += 1;
            if s.iter().any(|v| !v.is_finite()) {
                return Err(DynamicsError::Diverged { t: step as f64 * h });
            }
        }
        Ok(())
    };
    advance(&mut s, transient)?;
    let mut out = Vec::with_capacity(p.n_samples);
    for i in 0..p.n_samples {
        if i > 0 {
            advance(&mut s, per_sample)?;
        }
        out.push((i as f64 * p.dt_sample, s));
    }
    Ok(out)
}

/// x-component of the sampled trajectory.
pub fn integrate_rossler(p: &RosslerParams) -> Result<TimeSeries, DynamicsError> {
    let values = integrate_trajectory(p)?.into_iter().map(|(_, s)| s[0]).collect();
    Ok(TimeSeries::new(format!("rossler_c{}", p.c), values, None)?)
}

pub fn write_trajectory_csv<W: Write>(mut w: W, traj: &[(f64, [f64; 3])]) -> std::io::Result<()> {
    writeln!(w, "t,x,y,z")?;
    for (t, [x, y, z]) in traj {
        writeln!(w, "{t},{x},{y},{z}")?;
    }
    Ok(())
}

/// `(max − min) / 2`.
pub fn amplitude(values: &[f64]) -> f64 {
    let (lo, hi) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    (hi - lo) / 2.0
}

fn check_intensity(intensity: f64) -> Result<(), DynamicsError> {
    if intensity.is_finite() && intensity >= 0.0 {
        Ok(())
    } else {
        Err(DynamicsError::InvalidParams(format!("noise intensity {intensity}")))
    }
}

/// Adds i.i.d. Gaussian noise with σ = `intensity` × amplitude.
pub fn perturb_with_noise(series: &TimeSeries, intensity: f64, seed: u64) -> Result<TimeSeries, DynamicsError> {
    check_intensity(intensity)?;
    let sigma = intensity * amplitude(&series.values);
    if sigma == 0.0 {
        return Ok(series.clone());
    }
    let normal = Normal::new(0.0, sigma).map_err(|e| DynamicsError::InvalidParams(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values = series.values.iter().map(|v| v + normal.sample(&mut rng)).collect();
    Ok(TimeSeries::new(series.id.clone(), values, series.label)?)
}

/// Adds i.i.d. uniform noise on `[−δ, δ]` with δ = `level` × amplitude, so
/// the perturbation has sup-norm at most δ.
pub fn perturb_bounded(series: &TimeSeries, level: f64, seed: u64) -> Result<TimeSeries, DynamicsError> {
    check_intensity(level)?;
    let delta = level * amplitude(&series.values);
    if delta == 0.0 {
        return Ok(series.clone());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values = series
        .values
        .iter()
        .map(|v| v + rng.random_range(-delta..=delta))
        .collect();
    Ok(TimeSeries::new(series.id.clone(), values, series.label)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeConfig {
    pub n_realizations: usize,
    pub max_intensity: f64,
    pub k: usize,
    pub r: usize,
    pub r_max: MaxScaleRule,
    pub embedding: EmbeddingParams,
    pub p: MetricOrder,
    pub seed: u64,
}

impl Default for RegimeConfig {
    fn default() -> Self {
        Self {
            n_realizations: 100,
            max_intensity: 0.10,
            k: 10,
            r: 10,
            r_max: MaxScaleRule::HalfMedianDiameter,
            embedding: EmbeddingParams { m: 3, tau: 1 },
            p: MetricOrder::L1,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegimeSummary {
    pub n_realizations: usize,
    pub r_max: f64,
    pub mean_intra_periodic: f64,
    pub mean_intra_chaotic: f64,
    pub mean_inter: f64,
    /// Over all triples `(i, j, l)` with `j` in the regime of `i` and `l` in
    /// the other one, the fraction with `d(i, j) < d(i, l)`.
    pub intra_below_inter_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegimeResult {
    /// Rows/columns `0..n` are periodic realizations, `n..2n` chaotic.
    pub distances: Vec<Vec<f64>>,
    pub intensities: Vec<f64>,
    pub summary: RegimeSummary,
    pub diff: ClassDiff,
}

pub fn evenly_spaced_intensities(n: usize, max: f64) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![0.0],
        _ => (0..n).map(|i| max * i as f64 / (n - 1) as f64).collect(),
    }
}

pub fn regime_distance_experiment(cfg: &RegimeConfig) -> Result<RegimeResult, DynamicsError> {
    if cfg.n_realizations < 2 {
        return Err(DynamicsError::InvalidParams("need at least 2 realizations".into()));
    }
    let n = cfg.n_realizations;
    let intensities = evenly_spaced_intensities(n, cfg.max_intensity);
    let clean = [
        integrate_rossler(&RosslerParams::with_c(PERIODIC_C))?,
        integrate_rossler(&RosslerParams::with_c(CHAOTIC_C))?,
    ];
    let jobs: Vec<(usize, usize)> = (0..2).flat_map(|g| (0..n).map(move |i| (g, i))).collect();
    let clouds = jobs
        .par_iter()
        .map(|&(g, i)| {
            let seed = child_seed(child_seed(cfg.seed, g as u64), i as u64);
            let noisy = perturb_with_noise(&clean[g], intensities[i], seed)?;
            Ok(takens_embed(&noisy, cfg.embedding)?)
        })
        .collect::<Result<Vec<_>, DynamicsError>>()?;
    let r_max = select_max_scale(&clouds, cfg.r_max)?;
    let grid = ScaleGrid::uniform(r_max, cfg.r)?;
    let surfaces = clouds
        .par_iter()
        .zip(&jobs)
        .map(|(c, &(g, i))| {
            let id = format!("{}_{i:03}", ["periodic", "chaotic"][g]);
            build_ecs(id, c, cfg.k, &grid, cfg.seed)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let distances = pairwise_distance_matrix(&surfaces, cfg.p)?;
    let diff = ecs_class_diff(&surfaces[..n], &surfaces[n..])?;
    let summary = summarize(&distances, n, r_max);
    Ok(RegimeResult {
        distances,
        intensities,
        summary,
        diff,
    })
}

fn summarize(d: &[Vec<f64>], n: usize, r_max: f64) -> RegimeSummary {
    let block_mean = |rows: std::ops::Range<usize>, cols: std::ops::Range<usize>| {
        let mut sum = 0.0;
        let mut count = 0usize;
        for i in rows {
            for j in cols.clone().filter(|&j| j != i) {
                sum += d[i][j];
                count += 1;
            }
        }
        sum / count as f64
    };
    let mut below = 0u64;
    let mut total = 0u64;
    for i in 0..2 * n {
        let own = if i < n { 0..n } else { n..2 * n };
        let other = if i < n { n..2 * n } else { 0..n };
        let mut inter: Vec<f64> = other.map(|l| d[i][l]).collect();
        inter.sort_by(f64::total_cmp);
        for j in own.filter(|&j| j != i) {
            // number of inter distances strictly above d(i, j)
            let above = inter.len() - inter.partition_point(|&x| x <= d[i][j]);
            below += above as u64;
            total += inter.len() as u64;
        }
    }
    RegimeSummary {
        n_realizations: n,
        r_max,
        mean_intra_periodic: block_mean(0..n, 0..n),
        mean_intra_chaotic: block_mean(n..2 * n, n..2 * n),
        mean_inter: block_mean(0..n, n..2 * n),
        intra_below_inter_fraction: below as f64 / total as f64,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn vector_field_examples() {
        let p = RosslerParams::with_c(2.3);
        let v = rossler_vector_field([1.0, 1.0, 1.0], &p);
        assert_relative_eq!(v[0], -2.0);
        assert_relative_eq!(v[1], 1.2);
        assert_relative_eq!(v[2], -1.1, epsilon = 1e-12);
        let v = rossler_vector_field([1.0, 1.0, 1.0], &RosslerParams::with_c(7.3));
        assert_relative_eq!(v[2], -6.1, epsilon = 1e-12);
        assert_eq!(rossler_vector_field([0.0; 3], &p), [0.0, 0.0, 0.2]);
    }

    fn local_maxima(x: &[f64]) -> Vec<f64> {
        x.windows(3)
            .filter(|w| w[1] > w[0] && w[1] >= w[2])
            .map(|w| w[1])
            .collect()
    }

    fn dense_maxima(c: f64) -> Vec<f64> {
        // sample finely so maxima are not aliased by the 0.5 grid; the
        // transient from (1, 1, 1) needs until t ≈ 40 to settle within 1%
        let p = RosslerParams {
            c,
            dt_sample: 0.01,
            n_samples: 15_000,
            ..RosslerParams::default()
        };
        let x: Vec<f64> = integrate_trajectory(&p).unwrap().iter().map(|(_, s)| s[0]).collect();
        local_maxima(&x[5000..])
    }

    #[test]
    fn periodic_regime_has_constant_maxima() {
        let s = integrate_rossler(&RosslerParams::with_c(2.3)).unwrap();
        assert_eq!(s.len(), 300);
        let m = dense_maxima(2.3);
        assert!(m.len() > 5);
        for w in m.windows(2) {
            assert!((w[1] - w[0]).abs() / w[0].abs() < 0.01, "{w:?}");
        }
    }

    #[test]
    fn chaotic_regime_has_varying_maxima() {
        let m = dense_maxima(7.3);
        let spread = m.windows(2).map(|w| (w[1] - w[0]).abs() / w[0].abs()).fold(0.0, f64::max);
        assert!(spread > 0.05, "{spread}");
    }

    #[test]
    fn step_halving_converges() {
        let p = RosslerParams::with_c(2.3);
        let coarse = integrate_rossler(&p).unwrap();
        let fine = integrate_rossler(&RosslerParams { dt_internal: 0.005, ..p }).unwrap();
        let amp = amplitude(&coarse.values);
        for (a, b) in coarse.values.iter().zip(&fine.values) {
            assert!((a - b).abs() < 1e-6 * amp, "{a} vs {b}");
        }
    }

    #[test]
    fn rk4_is_fourth_order() {
        // error after one sampling interval against a fine reference
        let base = RosslerParams { n_samples: 2, ..RosslerParams::with_c(2.3) };
        let reference = integrate_trajectory(&RosslerParams { dt_internal: 1e-4, ..base }).unwrap()[1].1;
        let err = |h: f64| {
            let s = integrate_trajectory(&RosslerParams { dt_internal: h, ..base }).unwrap()[1].1;
            (0..3).map(|i| (s[i] - reference[i]).powi(2)).sum::<f64>().sqrt()
        };
        let ratio = err(0.1) / err(0.05);
        assert!((12.0..20.0).contains(&ratio), "{ratio}");
    }

    #[test]
    fn params_validated() {
        let bad = RosslerParams { dt_internal: 0.03, ..RosslerParams::default() };
        assert!(integrate_rossler(&bad).is_err());
        let bad = RosslerParams { dt_internal: 1.0, ..RosslerParams::default() };
        assert!(integrate_rossler(&bad).is_err());
        let skip = RosslerParams { transient_skip: 10.0, ..RosslerParams::default() };
        let a = integrate_rossler(&skip).unwrap();
        let b = integrate_rossler(&RosslerParams::default()).unwrap();
        assert_eq!(a.values[0], b.values[20]);
    }

    #[test]
    fn divergence_reported() {
        let p = RosslerParams { x0: [1e200, 1e200, 1e200], ..RosslerParams::default() };
        assert!(matches!(integrate_rossler(&p), Err(DynamicsError::Diverged { .. })));
    }

    #[test]
    fn noise_properties() {
        let s = TimeSeries::new("s", (0..10_000).map(|i| (i as f64 * 0.01).sin()).collect(), None).unwrap();
        assert_eq!(perturb_with_noise(&s, 0.0, 1).unwrap(), s);
        let a = perturb_with_noise(&s, 0.05, 7).unwrap();
        assert_eq!(a, perturb_with_noise(&s, 0.05, 7).unwrap());
        let d: Vec<f64> = a.values.iter().zip(&s.values).map(|(x, y)| x - y).collect();
        let mean = d.iter().sum::<f64>() / d.len() as f64;
        let sd = (d.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / d.len() as f64).sqrt();
        let target = 0.05 * amplitude(&s.values);
        assert!((sd - target).abs() / target < 0.05);
        assert!(perturb_with_noise(&s, -0.1, 1).is_err());
        let u = perturb_bounded(&s, 1e-3, 3).unwrap();
        let sup = u.values.iter().zip(&s.values).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        assert!(sup <= 1e-3 * amplitude(&s.values));
    }

    #[test]
    fn trajectory_csv_header() {
        let p = RosslerParams { n_samples: 2, ..RosslerParams::default() };
        let mut buf = Vec::new();
        write_trajectory_csv(&mut buf, &integrate_trajectory(&p).unwrap()).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("t,x,y,z\n0,1,1,1\n0.5,"));
    }

    #[test]
    fn noiseless_realizations_coincide() {
        let cfg = RegimeConfig {
            n_realizations: 2,
            max_intensity: 0.0,
            k: 4,
            r: 4,
            ..RegimeConfig::default()
        };
        let res = regime_distance_experiment(&cfg).unwrap();
        assert_eq!(res.distances.len(), 4);
        assert_eq!(res.distances[0][1], 0.0);
        assert_eq!(res.distances[2][3], 0.0);
        assert_eq!(res.summary.mean_intra_periodic, 0.0);
        assert!(res.summary.mean_inter > 0.0);
    }
}
