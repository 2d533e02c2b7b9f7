//! Non-asymptotic moment and tail bounds for operator norms of matrix
//! martingales, with deterministic Monte Carlo checks.
//!
//! The pipeline runs from martingale-difference moments to a moment bound
//! on `||Θ_n||` and then to an exponential (or heavy) tail bound:
//!
//! 1. [`osekowski`]: one-dimensional Khintchine constants `Os(p)`, `K_Os`.
//! 2. [`normed_space`]: operator norms, extreme points, the tensor set `Z`
//!    and its entropic dimension `κ`.
//! 3. [`moment_bounds`]: `ν(p)`, `ρ(p)`, `β(p)` and `| ||Θ|| |_p <= √n β(p)`.
//! 4. [`gls`]: Grand Lebesgue norms, Young–Fenchel conjugates and tails.
//! 5. [`mart_sim`] and [`verify`]: simulation and domination checks.

// `!(x > 0.0)` also rejects NaN, which is the intent wherever it appears
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod gls;
pub mod grid;
pub mod mart_sim;
pub mod moment_bounds;
pub mod normed_space;
pub mod osekowski;
pub mod verify;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    struct Introduction;
    #[doc = include_str!("../../../book/src/norms.md")]
    struct Norms;
    #[doc = include_str!("../../../book/src/moments.md")]
    struct Moments;
    #[doc = include_str!("../../../book/src/tails.md")]
    struct Tails;
    #[doc = include_str!("../../../book/src/simulation.md")]
    struct Simulation;
    #[doc = include_str!("../../../book/src/cli.md")]
    struct Cli;
}
