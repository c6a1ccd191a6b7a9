use std::collections::HashMap;

use super::ball::{circumball, min_enclosing_ball};
use super::{dist2, DelaunayTriangulation, GeometryError, PointCloud, Simplex};

/// Relative margin for "strictly inside" in the Gabriel test.
const GABRIEL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FiltrationEntry {
    pub simplex: Simplex,
    /// Radius at which the simplex enters the complex (radius, not squared).
    pub radius: f64,
}

/// Delaunay simplices tagged with their Alpha filtration radius, sorted by
/// radius, then dimension, then vertices.
#[derive(Debug, Clone, Default)]
pub struct AlphaFiltration {
    entries: Vec<FiltrationEntry>,
}

impl AlphaFiltration {
    pub fn entries(&self) -> &[FiltrationEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn max_radius(&self) -> f64 {
        self.entries.last().map_or(0.0, |e| e.radius)
    }

    /// Radius of a given simplex, if it belongs to the filtration.
    pub fn radius_of(&self, s: &Simplex) -> Option<f64> {
        self.entries.iter().find(|e| e.simplex == *s).map(|e| e.radius)
    }

    /// Euler characteristic of the complex at scale `r` (simplices with
    /// radius ≤ r).
    pub fn euler_characteristic(&self, r: f64) -> i64 {
        self.entries
            .iter()
            .take_while(|e| e.radius <= r)
            .map(|e| if e.simplex.dim() % 2 == 0 { 1 } else { -1 })
            .sum()
    }

    /// `(dimension, radius)` pairs, the only data needed for χ counting.
    pub fn dim_radius_pairs(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.entries.iter().map(|e| (e.simplex.dim(), e.radius))
    }
}

/// Alpha filtration values on a Delaunay triangulation.
///
/// Processed from the top dimension down: a simplex gets its smallest
/// circumradius if its smallest circumsphere is empty of other points
/// (Gabriel), otherwise the minimum value of its cofaces; vertices get 0.
/// Values are additionally capped by coface values so the filtration is
/// monotone even when floating-point circumradii of nearly flat cells are
/// inaccurate. If the triangulation had to be perturbed, only its
/// combinatorics are used: all values come from the original coordinates.
pub fn alpha_filtration(
    tri: &DelaunayTriangulation,
    cloud: &PointCloud,
) -> Result<AlphaFiltration, GeometryError> {
    if !tri.belongs_to(cloud) {
        return Err(GeometryError::CloudMismatch);
    }
    let d = tri.dim();
    let verts = tri.vertex_indices();
    let mut value: HashMap<Simplex, f64> = HashMap::with_capacity(tri.simplices().len());
    let mut coface_min: HashMap<Simplex, f64> = HashMap::new();

    for k in (1..=d).rev() {
        for s in tri.simplices().iter().filter(|s| s.dim() == k) {
            let pts: Vec<&[f64]> = s.vertices().iter().map(|&i| cloud.point(i)).collect();
            let ball = circumball(&pts);
            let from_cofaces = coface_min.get(s).copied().unwrap_or(f64::INFINITY);
            let v = match ball {
                Some(b) if k == d => b.radius.min(from_cofaces),
                // a cell that is flat in the unperturbed coordinates
                None if k == d => min_enclosing_ball(&pts)?.radius,
                Some(b) => {
                    let r2 = b.radius * b.radius * (1.0 - GABRIEL_TOL);
                    let gabriel = verts
                        .iter()
                        .filter(|i| !s.vertices().contains(i))
                        .all(|&i| dist2(b.center.coords(), cloud.point(i)) >= r2);
                    if gabriel {
                        b.radius.min(from_cofaces)
                    } else {
                        from_cofaces
                    }
                }
                None => from_cofaces,
            };
            let v = if v.is_finite() { v } else { f64::MAX };
            value.insert(*s, v);
            for f in s.facets() {
                let e = coface_min.entry(f).or_insert(f64::INFINITY);
                *e = e.min(v);
            }
        }
    }

    let mut entries: Vec<FiltrationEntry> = tri
        .simplices()
        .iter()
        .map(|s| FiltrationEntry {
            simplex: *s,
            radius: if s.dim() == 0 { 0.0 } else { value[s] },
        })
        .collect();
    sort_entries(&mut entries);
    Ok(AlphaFiltration { entries })
}

pub(super) fn sort_entries(entries: &mut [FiltrationEntry]) {
    entries.sort_by(|a, b| {
        a.radius
            .total_cmp(&b.radius)
            .then(a.simplex.dim().cmp(&b.simplex.dim()))
            .then(a.simplex.cmp(&b.simplex))
    });
}

impl AlphaFiltration {
    pub(super) fn from_entries(mut entries: Vec<FiltrationEntry>) -> Self {
        sort_entries(&mut entries);
        Self { entries }
    }
}
