//! Bowyer–Watson Delaunay triangulation in dimensions 2–4.
//!
//! The bounding super-simplex is realised symbolically as a single vertex at
//! infinity: every hull facet carries a "ghost" cell joining it to that
//! vertex. A ghost cell is in conflict with a new point exactly when the
//! point sees the hull facet from outside. This keeps the output identical to
//! the true Delaunay triangulation of the convex hull, with no finite
//! super-vertices whose circumspheres could swallow thin hull cells.
//!
//! Any predicate that evaluates to exactly zero signals a degenerate
//! (co-spherical or co-planar) configuration; the construction is then
//! restarted on a copy of the cloud perturbed by seeded jitter of magnitude
//! `1e-9 × diameter`.

use std::cmp::Ordering;
use std::collections::{HashMap, HashSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::predicates::{in_circumsphere, orient};
use super::{GeometryError, PointCloud, Simplex, MAX_DIM};

const INF: usize = usize::MAX;
const JITTER_SCALE: f64 = 1e-9;
const MAX_ATTEMPTS: u64 = 8;

#[derive(Debug, Clone)]
pub struct DelaunayTriangulation {
    dim: usize,
    cloud_fingerprint: u64,
    /// Coordinates actually triangulated (jittered when a degeneracy forced a
    /// restart), indexed like the source cloud.
    coords: Vec<f64>,
    /// For each cloud index, the index of the first point with identical
    /// coordinates.
    representative: Vec<usize>,
    cells: Vec<Simplex>,
    simplices: Vec<Simplex>,
    jittered: bool,
}

impl DelaunayTriangulation {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Top-dimensional cells, sorted.
    pub fn cells(&self) -> &[Simplex] {
        &self.cells
    }

    /// Every face of every cell, sorted by dimension then vertices.
    pub fn simplices(&self) -> &[Simplex] {
        &self.simplices
    }

    /// Number of simplices of each dimension `0..=d`.
    pub fn face_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.dim + 1];
        for s in &self.simplices {
            counts[s.dim()] += 1;
        }
        counts
    }

    /// Coordinates of a vertex as used by the triangulation.
    pub fn vertex(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    /// Distinct vertex indices (first occurrence of each exact duplicate).
    pub fn vertex_indices(&self) -> Vec<usize> {
        self.representative
            .iter()
            .enumerate()
            .filter(|(i, r)| i == *r)
            .map(|(i, _)| i)
            .collect()
    }

    /// Number of input points merged into each representative vertex.
    pub fn multiplicity(&self, i: usize) -> usize {
        let r = self.representative[i];
        self.representative.iter().filter(|&&x| x == r).count()
    }

    pub fn was_jittered(&self) -> bool {
        self.jittered
    }

    pub(crate) fn belongs_to(&self, cloud: &PointCloud) -> bool {
        cloud.fingerprint() == self.cloud_fingerprint && cloud.dim() == self.dim
    }
}

#[derive(Clone, Copy)]
struct Cell {
    /// Finite cells: d+1 vertices. Ghost cells: d hull-facet vertices then INF.
    v: [usize; MAX_DIM + 1],
    ghost: bool,
    /// Orientation sign of a finite cell, or the side of the hull facet on
    /// which the interior lies for a ghost cell.
    sign: Ordering,
}

struct Degenerate;

/// Delaunay triangulation of `cloud`, after merging exact duplicates.
///
/// `jitter_seed` only matters when the input is degenerate; the result is a
/// pure function of `(cloud, jitter_seed)`.
pub fn delaunay_triangulation(
    cloud: &PointCloud,
    jitter_seed: u64,
) -> Result<DelaunayTriangulation, GeometryError> {
    let dim = cloud.dim();
    let n = cloud.len();
    let mut representative = Vec::with_capacity(n);
    let mut seen: HashMap<Vec<u64>, usize> = HashMap::new();
    for i in 0..n {
        // -0.0 and 0.0 are the same location
        let key: Vec<u64> = cloud.point(i).iter().map(|&c| (c + 0.0).to_bits()).collect();
        representative.push(*seen.entry(key).or_insert(i));
    }
    let distinct: Vec<usize> = (0..n).filter(|&i| representative[i] == i).collect();
    if distinct.len() < dim + 1 {
        return Err(GeometryError::DegenerateCloud(format!(
            "{} distinct points, need at least {}",
            distinct.len(),
            dim + 1
        )));
    }
    let diameter = cloud.diameter();

    for attempt in 0..MAX_ATTEMPTS {
        let coords = if attempt == 0 {
            cloud.flat().to_vec()
        } else {
            jittered(cloud.flat(), diameter, jitter_seed, attempt)
        };
        if let Ok(cells) = bowyer_watson(&coords, dim, &distinct, diameter) {
            let mut all: HashSet<Simplex> = HashSet::new();
            for c in &cells {
                all.extend(c.faces());
            }
            let mut simplices: Vec<Simplex> = all.into_iter().collect();
            simplices.sort_by(|a, b| a.dim().cmp(&b.dim()).then(a.cmp(b)));
            let mut cells = cells;
            cells.sort();
            return Ok(DelaunayTriangulation {
                dim,
                cloud_fingerprint: cloud.fingerprint(),
                coords,
                representative,
                cells,
                simplices,
                jittered: attempt > 0,
            });
        }
    }
    Err(GeometryError::DegenerateCloud(
        "fewer than d+1 affinely independent points after jitter".into(),
    ))
}

fn jittered(flat: &[f64], diameter: f64, seed: u64, attempt: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ attempt.wrapping_mul(0x9e37_79b9_7f4a_7c15));
    let mag = JITTER_SCALE * diameter.max(f64::MIN_POSITIVE) * attempt as f64;
    flat.iter()
        .map(|&c| c + mag * rng.random_range(-1.0..1.0))
        .collect()
}

fn point(coords: &[f64], dim: usize, i: usize) -> &[f64] {
    &coords[i * dim..(i + 1) * dim]
}

/// Picks `d + 1` well-spread, affinely independent points greedily: each
/// new point maximises its distance to the affine span of those chosen.
fn initial_simplex(coords: &[f64], dim: usize, ids: &[usize], diameter: f64) -> Option<Vec<usize>> {
    let mut chosen = vec![ids[0]];
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let origin = point(coords, dim, ids[0]).to_vec();
    while chosen.len() < dim + 1 {
        let mut best: Option<(usize, f64, Vec<f64>)> = None;
        for &i in ids {
            if chosen.contains(&i) {
                continue;
            }
            let mut r: Vec<f64> = point(coords, dim, i)
                .iter()
                .zip(&origin)
                .map(|(a, b)| a - b)
                .collect();
            for b in &basis {
                let proj: f64 = r.iter().zip(b).map(|(x, y)| x * y).sum();
                for (x, y) in r.iter_mut().zip(b) {
                    *x -= proj * y;
                }
            }
            let norm = r.iter().map(|x| x * x).sum::<f64>().sqrt();
            if best.as_ref().is_none_or(|(_, bn, _)| norm > *bn) {
                best = Some((i, norm, r));
            }
        }
        let (i, norm, r) = best?;
        if norm <= 1e-12 * diameter {
            return None;
        }
        basis.push(r.into_iter().map(|x| x / norm).collect());
        chosen.push(i);
    }
    Some(chosen)
}

fn bowyer_watson(
    coords: &[f64],
    dim: usize,
    ids: &[usize],
    diameter: f64,
) -> Result<Vec<Simplex>, Degenerate> {
    let first = initial_simplex(coords, dim, ids, diameter).ok_or(Degenerate)?;
    let pts: Vec<&[f64]> = first.iter().map(|&i| point(coords, dim, i)).collect();
    let sign = orient(&pts);
    if sign == Ordering::Equal {
        return Err(Degenerate);
    }
    let mut interior = vec![0.0; dim];
    for p in &pts {
        for (c, x) in interior.iter_mut().zip(p.iter()) {
            *c += x / (dim + 1) as f64;
        }
    }

    let mut cells: Vec<Cell> = Vec::new();
    let mut v = [INF; MAX_DIM + 1];
    v[..=dim].copy_from_slice(&first);
    cells.push(Cell {
        v,
        ghost: false,
        sign,
    });
    for skip in 0..=dim {
        let facet: Vec<usize> = (0..=dim).filter(|&k| k != skip).map(|k| first[k]).collect();
        cells.push(ghost_cell(coords, dim, &facet, &interior)?);
    }

    let mut facet_count: HashMap<[usize; MAX_DIM + 1], u32> = HashMap::new();
    for &p in ids {
        if first.contains(&p) {
            continue;
        }
        let q = point(coords, dim, p);
        let mut conflict = Vec::new();
        for (ci, c) in cells.iter().enumerate() {
            if in_conflict(coords, dim, c, q)? {
                conflict.push(ci);
            }
        }
        debug_assert!(!conflict.is_empty());

        facet_count.clear();
        for &ci in &conflict {
            let c = &cells[ci];
            for skip in 0..=dim {
                let mut key = [INF; MAX_DIM + 1];
                let mut k = 0;
                for (j, &x) in c.v[..=dim].iter().enumerate() {
                    if j != skip {
                        key[k] = x;
                        k += 1;
                    }
                }
                key[..dim].sort_unstable();
                *facet_count.entry(key).or_insert(0) += 1;
            }
        }
        let mut boundary: Vec<[usize; MAX_DIM + 1]> = facet_count
            .iter()
            .filter(|(_, &n)| n == 1)
            .map(|(k, _)| *k)
            .collect();
        boundary.sort_unstable();

        let mut dead = vec![false; cells.len()];
        for &ci in &conflict {
            dead[ci] = true;
        }
        let mut next: Vec<Cell> = cells
            .iter()
            .zip(&dead)
            .filter(|(_, &d)| !d)
            .map(|(c, _)| *c)
            .collect();
        for f in boundary {
            let facet = &f[..dim];
            if facet.contains(&INF) {
                let mut hull: Vec<usize> = facet.iter().copied().filter(|&x| x != INF).collect();
                hull.push(p);
                next.push(ghost_cell(coords, dim, &hull, &interior)?);
            } else {
                let mut v = [INF; MAX_DIM + 1];
                v[..dim].copy_from_slice(facet);
                v[dim] = p;
                let pts: Vec<&[f64]> = v[..=dim].iter().map(|&i| point(coords, dim, i)).collect();
                let sign = orient(&pts);
                if sign == Ordering::Equal {
                    return Err(Degenerate);
                }
                next.push(Cell {
                    v,
                    ghost: false,
                    sign,
                });
            }
        }
        cells = next;
    }

    Ok(cells
        .iter()
        .filter(|c| !c.ghost)
        .map(|c| Simplex::new(&c.v[..=dim]))
        .collect())
}

fn ghost_cell(coords: &[f64], dim: usize, hull: &[usize], interior: &[f64]) -> Result<Cell, Degenerate> {
    let mut pts: Vec<&[f64]> = hull.iter().map(|&i| point(coords, dim, i)).collect();
    pts.push(interior);
    let sign = orient(&pts);
    if sign == Ordering::Equal {
        return Err(Degenerate);
    }
    let mut v = [INF; MAX_DIM + 1];
    v[..dim].copy_from_slice(hull);
    Ok(Cell {
        v,
        ghost: true,
        sign,
    })
}

fn in_conflict(coords: &[f64], dim: usize, c: &Cell, q: &[f64]) -> Result<bool, Degenerate> {
    if c.ghost {
        let mut pts: Vec<&[f64]> = c.v[..dim].iter().map(|&i| point(coords, dim, i)).collect();
        pts.push(q);
        match orient(&pts) {
            Ordering::Equal => Err(Degenerate),
            s => Ok(s != c.sign),
        }
    } else {
        let pts: Vec<&[f64]> = c.v[..=dim].iter().map(|&i| point(coords, dim, i)).collect();
        in_circumsphere(&pts, c.sign, q).ok_or(Degenerate)
    }
}
