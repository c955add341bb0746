//! Coupled horseshoe maps on the unit cube.
//!
//! The crate is organised bottom-up: [`geometry`] holds blocks and every
//! scalar constant derived from them, [`map`] the piecewise affine map and
//! its perturbations, [`cantor`] the one-dimensional Cantor machinery,
//! [`surfaces`] the graph transform for the invariant surfaces, and
//! [`metrics`] box counting, orbit sampling and the theorem reports.

pub mod cantor;
pub mod cone;
pub mod config;
pub mod error;
pub mod fixtures;
pub mod geometry;
pub mod io;
pub mod map;
pub mod metrics;
pub mod surfaces;

pub use error::{LabError, Result};
pub use geometry::{Block, BlockSystem, Interval, RateSet, ShapeConstants};

/// Note attached to every report that involves the B-side rates.
pub const MU_CONVENTION: &str =
    "mu_j = |B*_j| / |B_j| (expansion of f on B, image over domain)";
