//! Euler characteristic surfaces of delay-embedded time series.
//!
//! A scalar series is delay-embedded into a point cloud, cut into `K`
//! temporal windows, and each window's Alpha filtration is sampled at `R`
//! radii to give a `K × R` grid of Euler characteristics. The grids feed a
//! single-feature stump classifier and an AdaBoost ensemble of stumps.

#![allow(clippy::needless_range_loop)]

pub mod classify;
pub mod data;
pub mod dynamics;
pub mod ecs;
pub mod embedding;
pub mod geometry;
pub mod pipeline;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Geometry(#[from] geometry::GeometryError),
    #[error(transparent)]
    Embedding(#[from] embedding::EmbeddingError),
    #[error(transparent)]
    Ecs(#[from] ecs::EcsError),
    #[error(transparent)]
    Dynamics(#[from] dynamics::DynamicsError),
    #[error(transparent)]
    Classify(#[from] classify::ClassifyError),
    #[error(transparent)]
    Data(#[from] data::DataError),
}

impl Error {
    /// True for errors caused by bad input or configuration rather than a
    /// defect in the library.
    pub fn is_user_error(&self) -> bool {
        use geometry::GeometryError as G;
        let geometry = match self {
            Error::Geometry(g)
            | Error::Embedding(embedding::EmbeddingError::Geometry(g))
            | Error::Ecs(ecs::EcsError::Geometry(g)) => g,
            _ => return true,
        };
        matches!(
            geometry,
            G::EmptyPointSet | G::MixedDimensions { .. } | G::UnsupportedDimension(_) | G::NonFinite(_)
        )
    }
}

/// Deterministic child seed for the `index`-th subtask of `seed`
/// (splitmix64 finalizer over the pair).
pub fn child_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed
        .wrapping_add(0x9e37_79b9_7f4a_7c15)
        .wrapping_add(index.wrapping_mul(0xbf58_476d_1ce4_e5b9));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
