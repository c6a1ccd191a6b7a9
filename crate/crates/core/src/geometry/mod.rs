//! Low-dimensional computational geometry for Alpha filtrations.
//!
//! Everything here works in dimension 2, 3 or 4: minimum enclosing balls
//! (Welzl), Bowyer–Watson Delaunay triangulation with filtered exact
//! predicates, Alpha filtration values in the radius convention, and a
//! brute-force Čech complex used as an oracle.

mod alpha;
mod ball;
mod cech;
mod delaunay;
pub(crate) mod predicates;

pub use alpha::{alpha_filtration, AlphaFiltration, FiltrationEntry};
pub use ball::{circumball, min_enclosing_ball, Ball};
pub use cech::{cech_filtration, cech_oracle_chi, DEFAULT_ORACLE_LIMIT};
pub use delaunay::{delaunay_triangulation, DelaunayTriangulation};

use std::fmt;

use thiserror::Error;

/// Largest supported ambient dimension.
pub const MAX_DIM: usize = 4;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("empty point set")]
    EmptyPointSet,
    #[error("mixed dimensions: expected {expected}, found {found}")]
    MixedDimensions { expected: usize, found: usize },
    #[error("unsupported dimension {0} (expected 2, 3 or 4)")]
    UnsupportedDimension(usize),
    #[error("non-finite coordinate at point {0}")]
    NonFinite(usize),
    #[error("degenerate cloud: {0}")]
    DegenerateCloud(String),
    #[error("triangulation does not belong to this cloud")]
    CloudMismatch,
    #[error("oracle size limit: {n} points exceeds {limit}")]
    OracleSizeLimit { n: usize, limit: usize },
    #[error("negative radius {0}")]
    NegativeRadius(f64),
}

/// A single point with `d` coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Point(pub Vec<f64>);

impl Point {
    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }
}

impl From<Vec<f64>> for Point {
    fn from(v: Vec<f64>) -> Self {
        Point(v)
    }
}

/// An ordered point cloud stored row-major.
///
/// Order matters: the K-window method slices clouds in temporal order.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    dim: usize,
    coords: Vec<f64>,
}

impl PointCloud {
    /// Builds a cloud from explicit points. All points must share a dimension
    /// in `2..=4` and be finite.
    pub fn new(points: &[Vec<f64>]) -> Result<Self, GeometryError> {
        let dim = points.first().ok_or(GeometryError::EmptyPointSet)?.len();
        let mut coords = Vec::with_capacity(points.len() * dim);
        for p in points {
            if p.len() != dim {
                return Err(GeometryError::MixedDimensions {
                    expected: dim,
                    found: p.len(),
                });
            }
            coords.extend_from_slice(p);
        }
        Self::from_flat(dim, coords)
    }

    pub fn from_flat(dim: usize, coords: Vec<f64>) -> Result<Self, GeometryError> {
        if !(2..=MAX_DIM).contains(&dim) {
            return Err(GeometryError::UnsupportedDimension(dim));
        }
        if coords.is_empty() {
            return Err(GeometryError::EmptyPointSet);
        }
        if !coords.len().is_multiple_of(dim) {
            return Err(GeometryError::MixedDimensions {
                expected: dim,
                found: coords.len() % dim,
            });
        }
        if let Some(pos) = coords.iter().position(|c| !c.is_finite()) {
            return Err(GeometryError::NonFinite(pos / dim));
        }
        Ok(Self { dim, coords })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> {
        self.coords.chunks_exact(self.dim)
    }

    pub fn flat(&self) -> &[f64] {
        &self.coords
    }

    /// Contiguous sub-cloud `range`, preserving order.
    pub fn slice(&self, range: std::ops::Range<usize>) -> PointCloud {
        PointCloud {
            dim: self.dim,
            coords: self.coords[range.start * self.dim..range.end * self.dim].to_vec(),
        }
    }

    /// Largest pairwise Euclidean distance.
    pub fn diameter(&self) -> f64 {
        let n = self.len();
        let mut best = 0.0f64;
        for i in 0..n {
            for j in i + 1..n {
                best = best.max(dist2(self.point(i), self.point(j)));
            }
        }
        best.sqrt()
    }

    /// Stable 64-bit fingerprint of the coordinates, used to tie derived
    /// structures to the cloud they came from.
    pub fn fingerprint(&self) -> u64 {
        let mut h = 0xcbf2_9ce4_8422_2325u64 ^ self.dim as u64;
        for c in &self.coords {
            h ^= c.to_bits();
            h = h.wrapping_mul(0x0100_0000_01b3);
        }
        h
    }
}

/// A simplex as a strictly increasing list of at most `MAX_DIM + 1` vertex
/// indices.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Simplex {
    len: u8,
    verts: [usize; MAX_DIM + 1],
}

impl Simplex {
    /// Sorts and validates `vertices`. Panics on duplicates or more than
    /// five vertices; both are programming errors.
    pub fn new(vertices: &[usize]) -> Self {
        assert!(
            !vertices.is_empty() && vertices.len() <= MAX_DIM + 1,
            "simplex must have 1..=5 vertices"
        );
        let mut verts = [usize::MAX; MAX_DIM + 1];
        verts[..vertices.len()].copy_from_slice(vertices);
        verts[..vertices.len()].sort_unstable();
        assert!(
            verts[..vertices.len()].windows(2).all(|w| w[0] < w[1]),
            "simplex vertices must be distinct"
        );
        Self {
            len: vertices.len() as u8,
            verts,
        }
    }

    pub fn vertices(&self) -> &[usize] {
        &self.verts[..self.len as usize]
    }

    pub fn dim(&self) -> usize {
        self.len as usize - 1
    }

    /// The codimension-one faces, each obtained by dropping one vertex.
    pub fn facets(&self) -> impl Iterator<Item = Simplex> + '_ {
        let n = self.len as usize;
        (0..n).filter(move |_| n > 1).map(move |skip| {
            let mut verts = [usize::MAX; MAX_DIM + 1];
            let mut k = 0;
            for (i, &v) in self.vertices().iter().enumerate() {
                if i != skip {
                    verts[k] = v;
                    k += 1;
                }
            }
            Simplex {
                len: (n - 1) as u8,
                verts,
            }
        })
    }

    /// Every nonempty face, including the simplex itself.
    pub fn faces(&self) -> Vec<Simplex> {
        let n = self.len as usize;
        let mut out = Vec::with_capacity((1 << n) - 1);
        for mask in 1u32..(1 << n) {
            let sub: Vec<usize> = (0..n)
                .filter(|i| mask & (1 << i) != 0)
                .map(|i| self.verts[i])
                .collect();
            out.push(Simplex::new(&sub));
        }
        out
    }
}

impl fmt::Debug for Simplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Simplex{:?}", self.vertices())
    }
}

#[inline]
pub(crate) fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simplex_sorted_and_faces_closed() {
        let s = Simplex::new(&[4, 1, 7]);
        assert_eq!(s.vertices(), &[1, 4, 7]);
        assert_eq!(s.dim(), 2);
        assert_eq!(s.faces().len(), 7);
        let facets: Vec<_> = s.facets().collect();
        assert_eq!(facets.len(), 3);
        assert!(facets.contains(&Simplex::new(&[1, 7])));
        assert_eq!(Simplex::new(&[3]).facets().count(), 0);
    }

    #[test]
    fn cloud_rejects_bad_input() {
        assert_eq!(
            PointCloud::new(&[]).unwrap_err(),
            GeometryError::EmptyPointSet
        );
        assert!(matches!(
            PointCloud::new(&[vec![0.0, 1.0], vec![0.0, 1.0, 2.0]]),
            Err(GeometryError::MixedDimensions { .. })
        ));
        assert!(matches!(
            PointCloud::new(&[vec![0.0, f64::NAN]]),
            Err(GeometryError::NonFinite(0))
        ));
        assert!(matches!(
            PointCloud::new(&[vec![0.0; 5]]),
            Err(GeometryError::UnsupportedDimension(5))
        ));
    }

    #[test]
    fn slice_keeps_order() {
        let c = PointCloud::new(&[vec![0.0, 0.0], vec![1.0, 0.0], vec![2.0, 0.0]]).unwrap();
        let s = c.slice(1..3);
        assert_eq!(s.len(), 2);
        assert_eq!(s.point(0), &[1.0, 0.0]);
        assert_eq!(c.diameter(), 2.0);
    }
}
