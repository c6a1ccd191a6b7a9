//! Windowed Euler characteristic curves, surfaces and distances between them.

use std::io::Write;
use std::ops::Range;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::child_seed;
use crate::geometry::{
    alpha_filtration, cech_filtration, delaunay_triangulation, AlphaFiltration, GeometryError,
    PointCloud,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EcsError {
    #[error("more windows than points ({windows} windows, {points} points)")]
    MoreWindowsThanPoints { windows: usize, points: usize },
    #[error("incomparable surfaces")]
    IncomparableSurfaces,
    #[error("invalid scale grid: {0}")]
    InvalidGrid(String),
    #[error("empty class")]
    EmptyClass,
    #[error("metric order must be 1 or 2, got {0}")]
    InvalidOrder(u32),
    #[error("ECS csv line {line}: {msg}")]
    Csv { line: usize, msg: String },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Strictly increasing positive filtration radii.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaleGrid {
    radii: Vec<f64>,
}

impl ScaleGrid {
    pub fn new(radii: Vec<f64>) -> Result<Self, EcsError> {
        if radii.len() < 2 {
            return Err(EcsError::InvalidGrid("need at least 2 radii".into()));
        }
        if radii.iter().any(|r| !r.is_finite() || *r <= 0.0) {
            return Err(EcsError::InvalidGrid("radii must be finite and positive".into()));
        }
        if radii.windows(2).any(|w| w[0] >= w[1]) {
            return Err(EcsError::InvalidGrid("radii must be strictly increasing".into()));
        }
        Ok(Self { radii })
    }

    /// `{i · r_max / R : i = 1..R}`.
    pub fn uniform(r_max: f64, r: usize) -> Result<Self, EcsError> {
        Self::new((1..=r).map(|i| i as f64 * r_max / r as f64).collect())
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn len(&self) -> usize {
        self.radii.len()
    }

    pub fn is_empty(&self) -> bool {
        self.radii.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WindowPartition {
    windows: Vec<Range<usize>>,
}

impl WindowPartition {
    pub fn windows(&self) -> &[Range<usize>] {
        &self.windows
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.windows.iter().map(|w| w.len()).collect()
    }
}

/// `K` contiguous windows of `⌊n/K⌋` points; the last one takes the rest.
pub fn k_window_partition(n_points: usize, k: usize) -> Result<WindowPartition, EcsError> {
    if k == 0 || k > n_points {
        return Err(EcsError::MoreWindowsThanPoints {
            windows: k,
            points: n_points,
        });
    }
    let w = n_points / k;
    let windows = (0..k)
        .map(|i| {
            let end = if i + 1 == k { n_points } else { (i + 1) * w };
            i * w..end
        })
        .collect();
    Ok(WindowPartition { windows })
}

/// Alpha filtration of a window, or the exhaustive Čech filtration when the
/// window has too few distinct points to triangulate.
pub fn window_filtration(window: &PointCloud, jitter_seed: u64) -> Result<AlphaFiltration, GeometryError> {
    match delaunay_triangulation(window, jitter_seed) {
        Ok(tri) => alpha_filtration(&tri, window),
        Err(GeometryError::DegenerateCloud(_)) if distinct_count(window) <= window.dim() => {
            cech_filtration(window)
        }
        Err(e) => Err(e),
    }
}

fn distinct_count(cloud: &PointCloud) -> usize {
    let mut pts: Vec<&[f64]> = cloud.points().collect();
    pts.sort_by(|a, b| {
        a.iter()
            .zip(b.iter())
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    pts.dedup_by(|a, b| a == b);
    pts.len()
}

/// χ at every grid radius, from a single sweep over the sorted filtration.
pub fn curve_from_filtration(filt: &AlphaFiltration, grid: &ScaleGrid) -> Vec<i64> {
    let entries = filt.entries();
    let mut chi = 0i64;
    let mut next = 0;
    grid.radii()
        .iter()
        .map(|&r| {
            while next < entries.len() && entries[next].radius <= r {
                chi += if entries[next].simplex.dim().is_multiple_of(2) { 1 } else { -1 };
                next += 1;
            }
            chi
        })
        .collect()
}

pub fn euler_curve(window: &PointCloud, grid: &ScaleGrid, jitter_seed: u64) -> Result<Vec<i64>, EcsError> {
    let filt = window_filtration(window, jitter_seed)?;
    Ok(curve_from_filtration(&filt, grid))
}

/// Euler characteristic surface: `chi[k][j] = χ` of window `k` at radius `r_j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EcsMatrix {
    pub sample_id: String,
    pub grid: ScaleGrid,
    pub window_sizes: Vec<usize>,
    pub chi: Vec<Vec<i64>>,
}

impl EcsMatrix {
    pub fn k(&self) -> usize {
        self.chi.len()
    }

    pub fn r(&self) -> usize {
        self.grid.len()
    }

    /// Row-major flattening: feature `f = (k−1)·R + j` (1-based) is
    /// `features()[f − 1]`.
    pub fn features(&self) -> Vec<i64> {
        self.chi.iter().flatten().copied().collect()
    }

    pub fn same_domain(&self, other: &EcsMatrix) -> bool {
        self.k() == other.k() && self.grid == other.grid
    }

    pub fn file_name(&self) -> String {
        format!("{}.ecs.csv", self.sample_id)
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        write!(w, "window")?;
        for j in 1..=self.r() {
            write!(w, ",scale_{j}")?;
        }
        writeln!(w)?;
        for (k, row) in self.chi.iter().enumerate() {
            write!(w, "{}", k + 1)?;
            for v in row {
                write!(w, ",{v}")?;
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

/// Parses the χ grid of an ECS dump.
pub fn parse_ecs_csv(text: &str) -> Result<Vec<Vec<i64>>, EcsError> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or(EcsError::Csv {
        line: 1,
        msg: "empty file".into(),
    })?;
    let cols: Vec<&str> = header.split(',').collect();
    let r = cols.len().saturating_sub(1);
    let expected: Vec<String> = std::iter::once("window".to_string())
        .chain((1..=r).map(|j| format!("scale_{j}")))
        .collect();
    if r == 0 || cols != expected {
        return Err(EcsError::Csv {
            line: 1,
            msg: "bad header".into(),
        });
    }
    let mut chi = Vec::new();
    for (i, line) in lines.filter(|(_, l)| !l.trim().is_empty()) {
        let err = |msg: String| EcsError::Csv { line: i + 1, msg };
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != r + 1 {
            return Err(err(format!("expected {} fields, found {}", r + 1, fields.len())));
        }
        if fields[0].trim() != (chi.len() + 1).to_string() {
            return Err(err(format!("expected window {}", chi.len() + 1)));
        }
        let row = fields[1..]
            .iter()
            .map(|f| f.trim().parse::<i64>().map_err(|e| err(format!("{f:?}: {e}"))))
            .collect::<Result<Vec<_>, _>>()?;
        chi.push(row);
    }
    Ok(chi)
}

pub fn build_ecs(
    sample_id: impl Into<String>,
    cloud: &PointCloud,
    k: usize,
    grid: &ScaleGrid,
    jitter_seed: u64,
) -> Result<EcsMatrix, EcsError> {
    let part = k_window_partition(cloud.len(), k)?;
    let chi = part
        .windows()
        .iter()
        .enumerate()
        .map(|(i, w)| euler_curve(&cloud.slice(w.clone()), grid, child_seed(jitter_seed, i as u64)))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(EcsMatrix {
        sample_id: sample_id.into(),
        grid: grid.clone(),
        window_sizes: part.sizes(),
        chi,
    })
}

/// Order of the Euler metric.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MetricOrder {
    L1,
    L2,
}

impl TryFrom<u32> for MetricOrder {
    type Error = EcsError;

    fn try_from(p: u32) -> Result<Self, EcsError> {
        match p {
            1 => Ok(Self::L1),
            2 => Ok(Self::L2),
            _ => Err(EcsError::InvalidOrder(p)),
        }
    }
}

/// `(Σ_{k,j} |a − b|^p)^{1/p}` with unit cell weights.
pub fn euler_metric(a: &EcsMatrix, b: &EcsMatrix, p: MetricOrder) -> Result<f64, EcsError> {
    if !a.same_domain(b) {
        return Err(EcsError::IncomparableSurfaces);
    }
    Ok(grid_distance(&a.chi, &b.chi, p))
}

fn grid_distance(a: &[Vec<i64>], b: &[Vec<i64>], p: MetricOrder) -> f64 {
    let diffs = a
        .iter()
        .zip(b)
        .flat_map(|(ra, rb)| ra.iter().zip(rb).map(|(x, y)| (x - y).unsigned_abs() as u128));
    match p {
        MetricOrder::L1 => diffs.sum::<u128>() as f64,
        MetricOrder::L2 => (diffs.map(|d| d * d).sum::<u128>() as f64).sqrt(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassDiff {
    pub diff: Vec<Vec<f64>>,
    /// 0-based `(window, scale)` of the largest difference; ties go to the
    /// lexicographically smallest cell.
    pub argmax: (usize, usize),
}

fn mean_surface(class: &[EcsMatrix]) -> Vec<Vec<f64>> {
    let n = class.len() as f64;
    let mut sum = vec![vec![0i64; class[0].r()]; class[0].k()];
    for s in class {
        for (acc, row) in sum.iter_mut().zip(&s.chi) {
            for (a, v) in acc.iter_mut().zip(row) {
                *a += v;
            }
        }
    }
    sum.into_iter()
        .map(|row| row.into_iter().map(|v| v as f64 / n).collect())
        .collect()
}

/// `|mean(a) − mean(b)|` cellwise.
pub fn ecs_class_diff(class_a: &[EcsMatrix], class_b: &[EcsMatrix]) -> Result<ClassDiff, EcsError> {
    let first = class_a.first().ok_or(EcsError::EmptyClass)?;
    if class_b.is_empty() {
        return Err(EcsError::EmptyClass);
    }
    if class_a.iter().chain(class_b).any(|s| !s.same_domain(first)) {
        return Err(EcsError::IncomparableSurfaces);
    }
    let (ma, mb) = (mean_surface(class_a), mean_surface(class_b));
    let diff: Vec<Vec<f64>> = ma
        .iter()
        .zip(&mb)
        .map(|(ra, rb)| ra.iter().zip(rb).map(|(x, y)| (x - y).abs()).collect())
        .collect();
    let mut argmax = (0, 0);
    for (k, row) in diff.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            if v > diff[argmax.0][argmax.1] {
                argmax = (k, j);
            }
        }
    }
    Ok(ClassDiff { diff, argmax })
}

/// Symmetric matrix of Euler distances. Parallel over rows; the result does
/// not depend on the number of threads.
pub fn pairwise_distance_matrix(surfaces: &[EcsMatrix], p: MetricOrder) -> Result<Vec<Vec<f64>>, EcsError> {
    if let Some(first) = surfaces.first() {
        if surfaces.iter().any(|s| !s.same_domain(first)) {
            return Err(EcsError::IncomparableSurfaces);
        }
    }
    let n = surfaces.len();
    let upper: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            (i + 1..n)
                .map(|j| grid_distance(&surfaces[i].chi, &surfaces[j].chi, p))
                .collect()
        })
        .collect();
    let mut d = vec![vec![0.0; n]; n];
    for (i, row) in upper.into_iter().enumerate() {
        for (off, v) in row.into_iter().enumerate() {
            d[i][i + 1 + off] = v;
            d[i + 1 + off][i] = v;
        }
    }
    Ok(d)
}
