//! Covering entropy `H(Z, d, ε) = ln N(Z, d, ε)` and entropic dimension.
//!
//! Covers are built by farthest-point insertion under the Euclidean distance
//! on the `d²` entries of `z`. The insertion order is nested, so one pass
//! yields the cover size for every radius at once. A greedy cover is at
//! least as large as the optimal one, which makes the entropy an upper
//! estimate.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::extreme::{TensorExtremeSet, DEFAULT_CLOUD_SIZE};
use crate::error::{usage, Result};
use crate::grid::{linear_fit, log_spaced};

/// On sampled clouds a radius whose cover needs more than this fraction of
/// the cloud is limited by sampling resolution and is left out of the fit.
pub const RESOLUTION_FRACTION: f64 = 0.1;

pub const MIN_FIT_POINTS: usize = 4;

/// Default radii: 12 log-spaced points in `[0.01, 0.3]`.
pub fn default_eps_grid() -> Vec<f64> {
    log_spaced(0.01, 0.3, 12)
}

fn check_eps(eps: f64) -> Result<()> {
    if !(eps > 0.0 && eps < (-1f64).exp()) {
        return usage(format!("ε must lie in (0, 1/e), got {eps}"));
    }
    Ok(())
}

/// Covering radius after each farthest-point insertion.
///
/// `radii[k]` is the largest distance from any point to the first `k + 1`
/// centers. Insertion stops once the radius is at most `stop_radius` or
/// `max_centers` centers are placed.
pub fn greedy_cover_radii(points: &[Vec<f64>], stop_radius: f64, max_centers: usize) -> Vec<f64> {
    if points.is_empty() {
        return Vec::new();
    }
    let mut nearest: Vec<f64> = vec![f64::INFINITY; points.len()];
    let mut center = 0usize;
    let mut radii = Vec::new();
    while radii.len() < max_centers {
        let c = &points[center];
        let (far, far_idx) = nearest
            .par_iter_mut()
            .enumerate()
            .with_min_len(1024)
            .map(|(i, slot)| {
                let d2: f64 = points[i].iter().zip(c).map(|(a, b)| (a - b) * (a - b)).sum();
                if d2 < *slot {
                    *slot = d2;
                }
                (*slot, i)
            })
            // ties go to the lowest index so the order never depends on scheduling
            .reduce(
                || (f64::NEG_INFINITY, usize::MAX),
                |a, b| if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) { b } else { a },
            );
        let r = far.max(0.0).sqrt();
        radii.push(r);
        if r <= stop_radius {
            break;
        }
        center = far_idx;
    }
    radii
}

/// Size of the greedy cover at radius `eps`, if reached within the radii.
fn cover_size(radii: &[f64], eps: f64) -> Option<usize> {
    radii.iter().position(|&r| r <= eps).map(|k| k + 1)
}

/// `H(Z, d, ε)` from a greedy cover of `Z` (sampled to `cloud_size` points
/// when `Z` is a continuum).
pub fn covering_entropy(z: &TensorExtremeSet, eps: f64, cloud_size: usize) -> Result<f64> {
    check_eps(eps)?;
    let cloud = z.elements(cloud_size);
    let radii = greedy_cover_radii(&cloud, eps, cloud.len());
    let n = cover_size(&radii, eps).unwrap_or(cloud.len());
    Ok((n as f64).ln())
}

/// Entropy samples over an ε-grid with the fitted `H ≈ C + κ |ln ε|`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntropyProfile {
    pub eps_grid: Vec<f64>,
    pub cover_sizes: Vec<usize>,
    pub entropy: Vec<f64>,
    /// Whether each radius was resolved by the cloud and used in the fit.
    pub resolved: Vec<bool>,
    pub intercept: f64,
    pub slope: f64,
    pub cloud_size: usize,
}

impl EntropyProfile {
    pub fn estimate(z: &TensorExtremeSet, eps_grid: &[f64], cloud_size: usize) -> Result<Self> {
        for &e in eps_grid {
            check_eps(e)?;
        }
        let cloud = z.elements(cloud_size);
        let cap = if z.is_finite() {
            cloud.len()
        } else {
            ((cloud.len() as f64 * RESOLUTION_FRACTION) as usize).max(1)
        };
        let min_eps = eps_grid.iter().cloned().fold(f64::INFINITY, f64::min);
        let radii = greedy_cover_radii(&cloud, min_eps, cap);
        let mut cover_sizes = Vec::with_capacity(eps_grid.len());
        let mut resolved = Vec::with_capacity(eps_grid.len());
        for &e in eps_grid {
            match cover_size(&radii, e) {
                Some(n) => {
                    cover_sizes.push(n);
                    resolved.push(true);
                }
                None => {
                    cover_sizes.push(radii.len());
                    resolved.push(false);
                }
            }
        }
        let entropy: Vec<f64> = cover_sizes.iter().map(|&n| (n as f64).ln()).collect();
        let (fe, fh): (Vec<f64>, Vec<f64>) = eps_grid
            .iter()
            .zip(&entropy)
            .zip(&resolved)
            .filter(|(_, &ok)| ok)
            .map(|((&e, &h), _)| (e, h))
            .unzip();
        let (intercept, slope) = entropic_dimension(&fe, &fh).map_err(|_| {
            crate::Error::Usage(format!(
                "only {} of {} radii are resolved by a cloud of {} points; \
                 use larger radii or a bigger cloud",
                fe.len(),
                eps_grid.len(),
                cloud.len()
            ))
        })?;
        Ok(EntropyProfile {
            eps_grid: eps_grid.to_vec(),
            cover_sizes,
            entropy,
            resolved,
            intercept,
            slope,
            cloud_size: cloud.len(),
        })
    }

    /// Default radii and cloud size.
    pub fn estimate_default(z: &TensorExtremeSet) -> Result<Self> {
        Self::estimate(z, &default_eps_grid(), DEFAULT_CLOUD_SIZE)
    }
}

/// Least-squares fit of entropy against `|ln ε|`; returns `(C, κ̂)` with the
/// slope clamped at zero.
pub fn entropic_dimension(eps: &[f64], entropy: &[f64]) -> Result<(f64, f64)> {
    if eps.len() != entropy.len() {
        return usage("ε-grid and entropy samples differ in length");
    }
    if eps.len() < MIN_FIT_POINTS {
        return usage(format!("entropic dimension needs at least {MIN_FIT_POINTS} radii, got {}", eps.len()));
    }
    for &e in eps {
        check_eps(e)?;
    }
    let x: Vec<f64> = eps.iter().map(|e| e.ln().abs()).collect();
    let mean = entropy.iter().sum::<f64>() / entropy.len() as f64;
    match linear_fit(&x, entropy) {
        Some((_, slope)) if slope <= 0.0 => Ok((mean, 0.0)),
        Some((c, slope)) => Ok((c, slope)),
        None => Ok((mean, 0.0)),
    }
}
