//! From martingale-difference moments to a moment bound on `||Θ_n||`.
//!
//! With `μ̄(p)` the aggregated difference moment and `κ` the entropic
//! dimension of the tensor set:
//!
//! ```text
//! ν(p) = K_Os · (p / ln p) · μ̄(p),                      p >= 4
//! ρ(p) = ν(p) · (10p − κ) / (p − κ),                     p > max(κ, 4)
//! β(p) = ρ(p) on J0 = (p−, p+),  β(p) = inf_{J0} ρ on [1, p−]
//! | ||Θ_n|| |_p <= √n · β(p),                            1 <= p < p+
//! ```

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{domain, usage, Error, Result};
use crate::gls::{heavy_tail_psi, SlowlyVarying};
use crate::grid::log_spaced;
use crate::osekowski::{k_os_default, MIN_ORDER};

/// Closed-form or tabulated moment families `p ↦ μ̄(p)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MomentFamily {
    /// `μ̄(p) ≡ bound` (bounded differences).
    Bounded { bound: f64 },
    /// Centered Gaussian moments `σ √2 (Γ((p+1)/2) / √π)^{1/p}`.
    Gaussian { sigma: f64 },
    /// `Γ(Δp + 1)^{1/p}`, the moments of `E^Δ` with `E` standard exponential.
    Weibull { delta: f64 },
    /// `C · p^Δ · ln p`.
    PowerLog { c: f64, delta: f64 },
    /// `ψ^{(b,γ,S)}(p)` for `p < b`, infinite from `b` on.
    Heavy {
        b: f64,
        gamma: f64,
        #[serde(default)]
        s: SlowlyVarying,
    },
    /// Values on an increasing grid of orders.
    ///
    /// Off-grid orders take the value at the next grid point (an upper bound
    /// by Lyapunov); orders past the last finite entry are infinite.
    Tabulated { p: Vec<f64>, mu: Vec<f64> },
}

/// `p ↦ μ̄(p)`, a family times a nonnegative scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MomentProfile {
    pub family: MomentFamily,
    #[serde(default = "one")]
    pub scale: f64,
}

fn one() -> f64 {
    1.0
}

impl MomentProfile {
    pub fn new(family: MomentFamily) -> Result<Self> {
        let profile = MomentProfile { family, scale: 1.0 };
        profile.validate()?;
        Ok(profile)
    }

    pub fn bounded(bound: f64) -> Result<Self> {
        Self::new(MomentFamily::Bounded { bound })
    }

    pub fn power_log(c: f64, delta: f64) -> Result<Self> {
        Self::new(MomentFamily::PowerLog { c, delta })
    }

    pub fn heavy(b: f64, gamma: f64, s: SlowlyVarying) -> Result<Self> {
        Self::new(MomentFamily::Heavy { b, gamma, s })
    }

    pub fn tabulated(p: Vec<f64>, mu: Vec<f64>) -> Result<Self> {
        Self::new(MomentFamily::Tabulated { p, mu })
    }

    /// The same profile multiplied by `c >= 0`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        if !(c >= 0.0) || !c.is_finite() {
            return usage(format!("profile scale must be finite and nonnegative, got {c}"));
        }
        Ok(MomentProfile { family: self.family.clone(), scale: self.scale * c })
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.scale >= 0.0) || !self.scale.is_finite() {
            return usage("profile scale must be finite and nonnegative");
        }
        match &self.family {
            MomentFamily::Bounded { bound } if !(*bound >= 0.0 && bound.is_finite()) => {
                usage("bounded profile needs a finite nonnegative bound")
            }
            MomentFamily::Gaussian { sigma } if !(*sigma >= 0.0 && sigma.is_finite()) => {
                usage("gaussian profile needs sigma >= 0")
            }
            MomentFamily::Weibull { delta } if !(*delta > 0.0) => usage("weibull profile needs Δ > 0"),
            MomentFamily::PowerLog { c, delta } if !(*c >= 0.0 && *delta >= 0.0) => {
                usage("power_log profile needs C >= 0 and Δ >= 0")
            }
            MomentFamily::Heavy { b, .. } if !(*b > 1.0) => usage("heavy profile needs b > 1"),
            MomentFamily::Tabulated { p, mu } => {
                if p.is_empty() || p.len() != mu.len() {
                    return usage("tabulated profile needs matching nonempty p and mu arrays");
                }
                if p.windows(2).any(|w| !(w[1] > w[0])) || !(p[0] >= 1.0) {
                    return usage("tabulated orders must be increasing and >= 1");
                }
                let mut last = 0.0f64;
                for (&pi, &m) in p.iter().zip(mu) {
                    if m.is_nan() || m < 0.0 {
                        return usage(format!("tabulated moment at p = {pi} must be >= 0"));
                    }
                    // Lyapunov: moments never decrease with the order
                    if m < last * (1.0 - 1e-9) {
                        return usage(format!("tabulated moments decrease at p = {pi}"));
                    }
                    last = m;
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// `μ̄(p)`; `+∞` outside the family's finiteness range.
    pub fn mu_bar(&self, p: f64) -> f64 {
        let raw = match &self.family {
            MomentFamily::Bounded { bound } => *bound,
            MomentFamily::Gaussian { sigma } => {
                sigma * std::f64::consts::SQRT_2 * ((ln_gamma((p + 1.0) / 2.0) - 0.5 * std::f64::consts::PI.ln()) / p).exp()
            }
            MomentFamily::Weibull { delta } => (ln_gamma(delta * p + 1.0) / p).exp(),
            MomentFamily::PowerLog { c, delta } => c * p.powf(*delta) * p.ln(),
            MomentFamily::Heavy { b, gamma, s } => {
                if p >= *b {
                    f64::INFINITY
                } else {
                    heavy_tail_psi(*b, *gamma, s, p.max(1.0)).unwrap_or(f64::INFINITY)
                }
            }
            MomentFamily::Tabulated { p: grid, mu } => {
                let idx = grid.partition_point(|&g| g < p);
                if idx == grid.len() {
                    f64::INFINITY
                } else {
                    mu[idx]
                }
            }
        };
        if raw == 0.0 {
            0.0
        } else {
            self.scale * raw
        }
    }

    /// `sup{p : μ̄(p) < ∞}` as known analytically or from the table.
    pub fn finite_up_to(&self) -> f64 {
        match &self.family {
            MomentFamily::Heavy { b, .. } => *b,
            MomentFamily::Tabulated { p, mu } => p
                .iter()
                .zip(mu)
                .filter(|(_, m)| m.is_finite())
                .map(|(p, _)| *p)
                .next_back()
                .unwrap_or(f64::NEG_INFINITY),
            _ => f64::INFINITY,
        }
    }
}

/// `max(κ, 4)`: the bound needs `p` strictly above it.
pub fn key_threshold(kappa: f64) -> f64 {
    kappa.max(MIN_ORDER)
}

/// `ν(p) = K_Os · (p / ln p) · μ̄(p)`.
pub fn nu_osekowski(p: f64, profile: &MomentProfile) -> Result<f64> {
    if !(p >= MIN_ORDER) {
        return domain(format!("ν(p) needs p >= 4, got {p}"));
    }
    let mu = profile.mu_bar(p);
    if !mu.is_finite() {
        return Err(Error::Infinite(p));
    }
    Ok(k_os_default() * p / p.ln() * mu)
}

/// The entropy factor `(10p − κ) / (p − κ)`.
pub fn entropy_factor(p: f64, kappa: f64) -> f64 {
    (10.0 * p - kappa) / (p - kappa)
}

/// `ρ(p) = ν(p) · (10p − κ) / (p − κ)`.
pub fn rho(p: f64, kappa: f64, profile: &MomentProfile) -> Result<f64> {
    if !(kappa >= 0.0) {
        return usage(format!("κ must be nonnegative, got {kappa}"));
    }
    if !(p > key_threshold(kappa)) {
        return domain(format!(
            "p = {p} is below the key-estimate threshold max(κ, 4) = {}",
            key_threshold(kappa)
        ));
    }
    Ok(nu_osekowski(p, profile)? * entropy_factor(p, kappa))
}

/// The interval `J0 = (p−, p+)` where `ρ` is finite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Finiteness {
    Interval { p_minus: f64, p_plus: f64 },
    /// No `p > max(κ, 4)` has finite `ρ(p)`.
    Violated,
}

pub fn finiteness_interval(profile: &MomentProfile, kappa: f64) -> Finiteness {
    let lo = key_threshold(kappa);
    let hi = profile.finite_up_to();
    if hi > lo {
        Finiteness::Interval { p_minus: lo, p_plus: hi }
    } else {
        Finiteness::Violated
    }
}

/// Number of points on the `ρ`/`β` grid.
pub const BOUND_GRID_LEN: usize = 200;
/// Upper cap of the `ρ`/`β` grid.
pub const BOUND_GRID_CAP: f64 = 1e3;
const ENDPOINT_OFFSET: f64 = 1e-6;

/// Log-spaced orders strictly inside `J0`, capped at `10^3`.
pub fn bound_grid(p_minus: f64, p_plus: f64) -> Vec<f64> {
    let lo = p_minus * (1.0 + ENDPOINT_OFFSET);
    let hi = if p_plus <= BOUND_GRID_CAP { p_plus * (1.0 - ENDPOINT_OFFSET) } else { BOUND_GRID_CAP };
    if hi <= lo {
        return vec![0.5 * (p_minus + p_plus)];
    }
    log_spaced(lo, hi, BOUND_GRID_LEN)
}

/// `ν`, `ρ`, `β` on a grid together with the finiteness interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundProfile {
    pub p_grid: Vec<f64>,
    pub nu_values: Vec<f64>,
    pub rho_values: Vec<f64>,
    pub beta_values: Vec<f64>,
    pub p_minus: f64,
    pub p_plus: f64,
    pub kappa: f64,
    pub n: usize,
    /// Grid infimum of `ρ` over `J0`, the constant value of `β` on `[1, p−]`.
    pub rho_inf: f64,
    /// Multiplier applied to every `β` value; `1` except for negative controls.
    pub beta_scale: f64,
    pub profile: MomentProfile,
}

impl BoundProfile {
    /// Builds the chain for an aggregated profile `μ̄`.
    pub fn build(profile: &MomentProfile, kappa: f64, n: usize) -> Result<Self> {
        profile.validate()?;
        if !(kappa >= 0.0) || !kappa.is_finite() {
            return usage(format!("κ must be finite and nonnegative, got {kappa}"));
        }
        if n == 0 {
            return usage("horizon n must be at least 1");
        }
        let Finiteness::Interval { p_minus, p_plus } = finiteness_interval(profile, kappa) else {
            return Err(Error::ConditionViolated);
        };
        let p_grid = bound_grid(p_minus, p_plus);
        let mut nu_values = Vec::with_capacity(p_grid.len());
        let mut rho_values = Vec::with_capacity(p_grid.len());
        for &p in &p_grid {
            let nu = nu_osekowski(p, profile)?;
            nu_values.push(nu);
            rho_values.push(nu * entropy_factor(p, kappa));
        }
        let rho_inf = rho_values.iter().cloned().fold(f64::INFINITY, f64::min);
        if !rho_inf.is_finite() {
            return Err(Error::ConditionViolated);
        }
        let mut bound = BoundProfile {
            beta_values: Vec::new(),
            p_grid,
            nu_values,
            rho_values,
            p_minus,
            p_plus,
            kappa,
            n,
            rho_inf,
            beta_scale: 1.0,
            profile: profile.clone(),
        };
        bound.beta_values = bound.p_grid.iter().map(|&p| bound.beta(p).expect("grid lies in J0")).collect();
        Ok(bound)
    }

    /// The same bound with every `β` multiplied by `factor`.
    pub fn with_beta_scale(&self, factor: f64) -> Self {
        let mut b = self.clone();
        b.beta_scale = self.beta_scale * factor;
        b.beta_values = self.beta_values.iter().map(|v| v * factor).collect();
        b
    }

    pub fn interval(&self) -> (f64, f64) {
        (self.p_minus, self.p_plus)
    }

    /// `ρ(p)` evaluated exactly (not interpolated).
    pub fn rho_at(&self, p: f64) -> Result<f64> {
        rho(p, self.kappa, &self.profile)
    }

    /// `β(p)` for `1 <= p < p+`.
    pub fn beta(&self, p: f64) -> Result<f64> {
        if !(p >= 1.0) {
            return domain(format!("β(p) needs p >= 1, got {p}"));
        }
        if !(p < self.p_plus) {
            return domain(format!("β(p) needs p < p+ = {}, got {p}", self.p_plus));
        }
        let raw = if p > self.p_minus { self.rho_at(p)? } else { self.rho_inf };
        Ok(raw * self.beta_scale)
    }

    /// `√n · β(p)` at this profile's horizon.
    pub fn moment_bound(&self, p: f64) -> Result<f64> {
        theorem31_moment_bound(p, self.n, self)
    }
}

/// `β` for a bare `ρ` function: `ρ(p)` on `(p−, p+)`, the minimum of `ρ`
/// over `grid` on `[1, p−]`.
pub fn beta(p: f64, interval: (f64, f64), rho_fn: impl Fn(f64) -> f64, grid: &[f64]) -> Result<f64> {
    let (p_minus, p_plus) = interval;
    if !(p >= 1.0) {
        return domain(format!("β(p) needs p >= 1, got {p}"));
    }
    if !(p < p_plus) {
        return domain(format!("β(p) needs p < p+ = {p_plus}, got {p}"));
    }
    if p > p_minus {
        return Ok(rho_fn(p));
    }
    let inf = grid
        .iter()
        .filter(|&&s| s > p_minus && s < p_plus)
        .map(|&s| rho_fn(s))
        .fold(f64::INFINITY, f64::min);
    if !inf.is_finite() {
        return usage("no grid point inside J0");
    }
    Ok(inf)
}

/// `√n · β(p)`, the moment bound on `| ||Θ_n|| |_p`.
pub fn theorem31_moment_bound(p: f64, n: usize, bound: &BoundProfile) -> Result<f64> {
    if n == 0 {
        return usage("horizon n must be at least 1");
    }
    Ok((n as f64).sqrt() * bound.beta(p)?)
}
