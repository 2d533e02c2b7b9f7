//! Finite-dimensional normed spaces, operator norms through extreme points,
//! and the covering entropy of the rank-one tensor set.
//!
//! By Krein–Milman the operator norm is a maximum over extreme points only:
//!
//! ```text
//! ||A|| = sup_{x ∈ S_o(X)} ||Ax|| = max_{y ∈ S_o(X*), x ∈ S_o(X)} yᵀ A x.
//! ```

mod entropy;
mod extreme;
mod matrix;
mod norm;

pub use entropy::{
    covering_entropy, default_eps_grid, entropic_dimension, greedy_cover_radii, EntropyProfile,
    MIN_FIT_POINTS, RESOLUTION_FRACTION,
};
pub use extreme::{
    bilinear_max, bilinear_norm, extreme_points, extreme_points_seeded, operator_tensor_set,
    tensor_extreme_set, ExtremeKind, ExtremePointSet, SphereSampler, TensorExtremeSet,
    DEFAULT_CLOUD_SIZE, DEFAULT_SAMPLER_SEED,
};
pub use matrix::Matrix;
pub use norm::{
    operator_norm, power_iteration, spectral_norm_2x2, spectral_norm_power, vector_norm,
    NormFamily, NormSpec, POWER_TOL,
};
