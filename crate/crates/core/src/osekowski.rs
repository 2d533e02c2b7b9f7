//! One-dimensional martingale Khintchine bounds.
//!
//! For a scalar martingale with differences `ξ(1..n)` and a unit Euclidean
//! weight vector `b`, the weighted sum `Σ b(i) ξ(i)` satisfies
//!
//! ```text
//! |Σ b(i) ξ(i)|_p <= Os(p) · max_l |ξ(l)|_p,            p >= 4,
//! Os(p) = 4√2 · (p/4 + 1)^{1/p} · (1 + p / ln(p/2)),
//! ```
//!
//! and `Os(p) <= K_Os · p / ln p` with `K_Os ≈ 15.7858`.

use std::sync::OnceLock;

use crate::error::{domain, usage, Result};
use crate::grid::log_spaced;

/// Smallest moment order for which the constant is defined.
pub const MIN_ORDER: f64 = 4.0;

/// Default bracket for the linearization constant: `[4, 10^4]`, log-spaced.
pub const DEFAULT_GRID_LO: f64 = 4.0;
pub const DEFAULT_GRID_HI: f64 = 1e4;
pub const DEFAULT_GRID_LEN: usize = 2000;

/// `Os(p)` together with its linear majorant `K_Os · p / ln p`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OsekowskiBound {
    pub p: f64,
    pub os_value: f64,
    pub linearized: f64,
}

impl OsekowskiBound {
    pub fn at(p: f64) -> Result<Self> {
        let os_value = os_constant(p)?;
        Ok(OsekowskiBound {
            p,
            os_value,
            linearized: k_os_default() * p / p.ln(),
        })
    }
}

/// `Os(p)`; fails for `p < 4`.
pub fn os_constant(p: f64) -> Result<f64> {
    if !(p >= MIN_ORDER) || !p.is_finite() {
        return domain(format!("Os(p) is defined for p >= 4, got p = {p}"));
    }
    Ok(4.0 * std::f64::consts::SQRT_2 * (p / 4.0 + 1.0).powf(1.0 / p) * (1.0 + p / (p / 2.0).ln()))
}

/// Supremum of `Os(p) / (p / ln p)` over the given grid.
pub fn k_os(p_grid: &[f64]) -> Result<f64> {
    if p_grid.is_empty() {
        return usage("k_os needs a nonempty grid");
    }
    let mut best = f64::NEG_INFINITY;
    for &p in p_grid {
        let ratio = os_constant(p)? * p.ln() / p;
        best = best.max(ratio);
    }
    Ok(best)
}

/// The default log-spaced bracket for `K_Os`.
pub fn default_k_os_grid() -> Vec<f64> {
    log_spaced(DEFAULT_GRID_LO, DEFAULT_GRID_HI, DEFAULT_GRID_LEN)
}

/// `K_Os` on the default grid, computed once.
pub fn k_os_default() -> f64 {
    static K: OnceLock<f64> = OnceLock::new();
    *K.get_or_init(|| k_os(&default_k_os_grid()).expect("default grid is valid"))
}

/// Upper bounds for the Khintchine variable `U(p; n)` given `max_l μ(l, p)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KhintchineBound {
    /// `Os(p) · mu_max`
    pub sharp: f64,
    /// `K_Os · (p / ln p) · mu_max`
    pub linearized: f64,
}

pub fn khintchine_moment_bound(p: f64, mu_max: f64) -> Result<KhintchineBound> {
    if !(mu_max >= 0.0) {
        return usage(format!("mu_max must be nonnegative, got {mu_max}"));
    }
    let b = OsekowskiBound::at(p)?;
    Ok(KhintchineBound {
        sharp: b.os_value * mu_max,
        linearized: b.linearized * mu_max,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;

    // reference values from an independent high-precision evaluation
    const OS4: f64 = 45.548_198_144_040_61;
    const OS8: f64 = 43.939_373_382_753_81;

    #[test]
    fn os_constant_reference_points() {
        assert!((os_constant(4.0).unwrap() - OS4).abs() < 1e-9);
        assert!((os_constant(8.0).unwrap() - OS8).abs() < 1e-9);
        let ratio = os_constant(4.0).unwrap() * 4f64.ln() / 4.0;
        assert!((ratio - 15.7858).abs() < 1e-3);
    }

    #[test]
    fn below_four_is_a_domain_error() {
        assert!(matches!(os_constant(3.999), Err(Error::Domain(_))));
        assert!(matches!(os_constant(f64::NAN), Err(Error::Domain(_))));
        assert!(matches!(khintchine_moment_bound(2.0, 1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn k_os_grids() {
        assert!((k_os_default() - 15.7858).abs() < 1e-3);
        let single = k_os(&[4.0]).unwrap();
        assert!((single - OS4 * 4f64.ln() / 4.0).abs() < 1e-12);
        let far = k_os(&[100.0]).unwrap();
        assert!((far - os_constant(100.0).unwrap() * 100f64.ln() / 100.0).abs() < 1e-12);
        assert!(far < 15.7858);
        assert!(matches!(k_os(&[]), Err(Error::Usage(_))));
    }

    #[test]
    fn majorization_holds_on_grid() {
        for p in log_spaced(4.0, 1e5, 500) {
            let b = OsekowskiBound::at(p).unwrap();
            assert!(b.os_value > 0.0);
            assert!(b.os_value <= b.linearized * (1.0 + 1e-12), "p = {p}");
        }
    }

    #[test]
    fn khintchine_bound_cases() {
        let b = khintchine_moment_bound(4.0, 1.0).unwrap();
        assert!((b.sharp - OS4).abs() < 1e-9);
        assert_eq!(khintchine_moment_bound(6.0, 0.0).unwrap().sharp, 0.0);
        let two = khintchine_moment_bound(4.0, 2.0).unwrap();
        assert!((two.sharp - 2.0 * OS4).abs() < 1e-9);
        assert!(khintchine_moment_bound(4.0, -1.0).is_err());
    }
}
