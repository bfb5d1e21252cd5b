//! Flat weighted tori: grids, fields, discrete operators, curvature,
//! distances, and cutoff functions.

mod curvature;
mod cutoff;
mod field;
mod grid;
mod ops;

pub use curvature::{bakry_emery, tensor_lower_bound, BakryEmeryVariant, CurvatureData};
pub use cutoff::{
    build_cutoff, cutoff_profile, cutoff_profile_deriv, cutoff_profile_second, profile_constants,
    Cutoff,
};
pub use field::{ScalarField, SymTensorField, VectorField};
pub use grid::{geodesic_distance, shortest_displacement, Grid, MIN_NODES};
pub use ops::{
    bochner_residual, grad_weighted_laplacian, gradient, hessian, laplacian, weighted_laplacian,
    BochnerVariant,
};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum GeometryError {
    #[error("grid dimension must be 1 or 2, got {0}")]
    BadDimension(usize),
    #[error("expected {dim} axis entries, got {lengths} lengths / {counts} counts")]
    AxisCountMismatch { dim: usize, lengths: usize, counts: usize },
    #[error("axis {axis}: need at least {min} nodes, got {got}")]
    TooFewNodes { axis: usize, got: usize, min: usize },
    #[error("axis {axis}: period length must be positive and finite, got {got}")]
    BadLength { axis: usize, got: f64 },
    #[error("fields live on different grids")]
    GridMismatch,
    #[error("fields carry different time tags ({0} vs {1})")]
    TimeMismatch(f64, f64),
    #[error("cutoff support radius {outer} exceeds the torus injectivity radius {inj}")]
    BallTooLarge { outer: f64, inj: f64 },
    #[error("dimension parameter m = {m} invalid for n = {n} (need m > n, or m = n with constant weight)")]
    BadDimensionParameter { m: f64, n: usize },
}
