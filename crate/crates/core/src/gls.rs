//! Grand Lebesgue Space norms and the tail bounds they imply.
//!
//! For a generating function `ψ` on `(1, b)`:
//!
//! ```text
//! ||η||_{Gψ} = sup_p |η|_p / ψ(p)
//! h[ψ](p)    = p · ln ψ(p)
//! h*(t)      = sup_p (p·t − h[ψ](p))
//! P(|η| > t) <= 2 · exp(−h*(ln(t / K))),      t >= e·K,  K = ||η||_{Gψ}
//! ```
//!
//! The conjugate is a maximum over a grid, since `ψ` is only piecewise
//! continuous in general. A grid maximum never exceeds the true supremum, so
//! grid tail bounds are slightly looser than the exact ones.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{domain, usage, Result};
use crate::grid::log_spaced;
use crate::moment_bounds::BoundProfile;

/// A slowly varying function `S(x)`, `x >= 1`.
#[derive(Clone, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SlowlyVarying {
    /// `S ≡ 1`
    #[default]
    One,
    /// `S(x) = ln(e + x)`
    LogShift,
    /// User hook; not serializable.
    #[serde(skip)]
    Custom(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl SlowlyVarying {
    pub fn custom(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        SlowlyVarying::Custom(Arc::new(f))
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            SlowlyVarying::One => 1.0,
            SlowlyVarying::LogShift => (std::f64::consts::E + x).ln(),
            SlowlyVarying::Custom(f) => f(x),
        }
    }
}

impl fmt::Debug for SlowlyVarying {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SlowlyVarying::One => write!(f, "One"),
            SlowlyVarying::LogShift => write!(f, "LogShift"),
            SlowlyVarying::Custom(_) => write!(f, "Custom(..)"),
        }
    }
}

impl PartialEq for SlowlyVarying {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (SlowlyVarying::One, SlowlyVarying::One) => true,
            (SlowlyVarying::LogShift, SlowlyVarying::LogShift) => true,
            (SlowlyVarying::Custom(a), SlowlyVarying::Custom(b)) => Arc::ptr_eq(a, b),
            _ => false,
        }
    }
}

/// `T^{(b,γ,S)}(t) = t^{−b} (ln t)^γ S(ln t)`, clamped to `[0, 1]`.
#[allow(non_snake_case)]
pub fn heavy_tail_T(b: f64, gamma: f64, s: &SlowlyVarying, t: f64) -> Result<f64> {
    if !(b > 1.0) {
        return usage(format!("heavy tail needs b > 1, got {b}"));
    }
    if !(t >= std::f64::consts::E) {
        return domain(format!("heavy tail function is stated for t >= e, got {t}"));
    }
    let l = t.ln();
    Ok(((-b * l + gamma * l.ln()).exp() * s.eval(l)).clamp(0.0, 1.0))
}

/// `ψ^{(b,γ,S)}(p) = (b − p)^{−(γ+1)/b} · S(1/(b − p))^{1/b}` for `1 <= p < b`.
pub fn heavy_tail_psi(b: f64, gamma: f64, s: &SlowlyVarying, p: f64) -> Result<f64> {
    if !(b > 1.0) {
        return usage(format!("heavy ψ needs b > 1, got {b}"));
    }
    if !(p >= 1.0) || !(p < b) {
        return domain(format!("heavy ψ is defined for 1 <= p < b = {b}, got {p}"));
    }
    let gap = b - p;
    Ok(gap.powf(-(gamma + 1.0) / b) * s.eval(1.0 / gap).powf(1.0 / b))
}

/// Families of generating functions.
#[derive(Debug, Clone, PartialEq)]
pub enum PsiFamily {
    /// `ψ(p) = p^{1/m}` on `(1, ∞)`.
    Power { m: f64 },
    /// `ψ^{(b,γ,S)}` on `(1, b)`.
    Heavy { b: f64, gamma: f64, s: SlowlyVarying },
    /// `ψ ≡ value` on `(1, b)`.
    Constant { value: f64, b: f64 },
    /// Piecewise-linear interpolation through `(p, psi)` pairs.
    Tabulated { p: Vec<f64>, psi: Vec<f64> },
    /// `ψ = β` from a moment bound, on `(1, p+)`.
    FromBeta(Box<BoundProfile>),
}

/// A strictly positive generating function on an interval `(1, b)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PsiFunction {
    family: PsiFamily,
}

/// Upper cap of conjugate grids on unbounded domains.
pub const CONJUGATE_CAP: f64 = 1e5;
const CONJUGATE_BASE_LEN: usize = 4000;
const ENDPOINT_OFFSET: f64 = 1e-6;
/// Refinement factor applied in the outer tenth of the grid on each side.
const ENDPOINT_REFINE: usize = 4;

impl PsiFunction {
    pub fn power(m: f64) -> Result<Self> {
        if !(m > 0.0) {
            return usage(format!("power ψ needs m > 0, got {m}"));
        }
        Ok(PsiFunction { family: PsiFamily::Power { m } })
    }

    pub fn heavy(b: f64, gamma: f64, s: SlowlyVarying) -> Result<Self> {
        if !(b > 1.0) {
            return usage(format!("heavy ψ needs b > 1, got {b}"));
        }
        Ok(PsiFunction { family: PsiFamily::Heavy { b, gamma, s } })
    }

    pub fn constant(value: f64, b: f64) -> Result<Self> {
        if !(value > 0.0) || !(b > 1.0) || !b.is_finite() {
            return usage("constant ψ needs a positive value on a finite (1, b)");
        }
        Ok(PsiFunction { family: PsiFamily::Constant { value, b } })
    }

    pub fn tabulated(p: Vec<f64>, psi: Vec<f64>) -> Result<Self> {
        if p.len() < 2 || p.len() != psi.len() {
            return usage("tabulated ψ needs at least two (p, ψ) pairs");
        }
        if p.windows(2).any(|w| !(w[1] > w[0])) || !(p[0] >= 1.0) {
            return usage("tabulated ψ orders must be increasing and >= 1");
        }
        if psi.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
            return usage("tabulated ψ must be finite and strictly positive");
        }
        Ok(PsiFunction { family: PsiFamily::Tabulated { p, psi } })
    }

    pub fn from_beta(bound: &BoundProfile) -> Self {
        PsiFunction { family: PsiFamily::FromBeta(Box::new(bound.clone())) }
    }

    pub fn family(&self) -> &PsiFamily {
        &self.family
    }

    /// Right end `b` of the domain `(1, b)`; may be `∞`.
    pub fn upper(&self) -> f64 {
        match &self.family {
            PsiFamily::Power { .. } => f64::INFINITY,
            PsiFamily::Heavy { b, .. } | PsiFamily::Constant { b, .. } => *b,
            PsiFamily::Tabulated { p, .. } => *p.last().expect("nonempty"),
            PsiFamily::FromBeta(bound) => bound.p_plus,
        }
    }

    fn lower(&self) -> f64 {
        match &self.family {
            PsiFamily::Tabulated { p, .. } => p[0],
            _ => 1.0,
        }
    }

    /// `ψ(p)`; fails outside the domain.
    pub fn eval(&self, p: f64) -> Result<f64> {
        if !(p >= self.lower()) || !(p < self.upper() || (p == self.upper() && matches!(self.family, PsiFamily::Tabulated { .. }))) {
            return domain(format!("p = {p} outside the domain of ψ"));
        }
        match &self.family {
            PsiFamily::Power { m } => Ok(p.powf(1.0 / m)),
            PsiFamily::Heavy { b, gamma, s } => heavy_tail_psi(*b, *gamma, s, p),
            PsiFamily::Constant { value, .. } => Ok(*value),
            PsiFamily::Tabulated { p: xs, psi } => {
                let i = xs.partition_point(|&x| x <= p).clamp(1, xs.len() - 1);
                let (x0, x1) = (xs[i - 1], xs[i]);
                let w = (p - x0) / (x1 - x0);
                Ok(psi[i - 1] + w * (psi[i] - psi[i - 1]))
            }
            PsiFamily::FromBeta(bound) => bound.beta(p),
        }
    }

    /// `h[ψ](p) = p · ln ψ(p)`.
    pub fn h(&self, p: f64) -> Result<f64> {
        Ok(p * self.eval(p)?.ln())
    }

    /// Grid of orders on which the conjugate is maximized.
    ///
    /// Log-spaced inside the domain, 4× denser in the outer tenth on each
    /// side, plus a geometric approach to a finite right endpoint.
    pub fn conjugate_grid(&self) -> Vec<f64> {
        let lo = self.lower();
        let b = self.upper();
        let mut grid = match &self.family {
            PsiFamily::Tabulated { p, .. } => refine_ends(&log_spaced(lo, b, CONJUGATE_BASE_LEN)).into_iter().chain(p.iter().cloned()).collect(),
            PsiFamily::FromBeta(bound) => {
                // β is constant on [1, p−]; the bound grid covers J0
                let mut g = log_spaced(1.0 + ENDPOINT_OFFSET, bound.p_minus, 50);
                g.extend(refine_ends(&bound.p_grid));
                let last = *bound.p_grid.last().expect("nonempty bound grid");
                let far = bound.p_plus.min(CONJUGATE_CAP) * (1.0 - ENDPOINT_OFFSET);
                if far > last {
                    g.extend(log_spaced(last, far, CONJUGATE_BASE_LEN));
                }
                g
            }
            _ => {
                let start = lo * (1.0 + ENDPOINT_OFFSET);
                let hi = if b.is_finite() { b * (1.0 - ENDPOINT_OFFSET) } else { CONJUGATE_CAP };
                refine_ends(&log_spaced(start, hi, CONJUGATE_BASE_LEN))
            }
        };
        if b.is_finite() && !matches!(self.family, PsiFamily::Tabulated { .. }) {
            let span = b - lo;
            let mut gap = span * 0.5;
            while gap > b * 1e-12 {
                grid.push(b - gap);
                gap *= 0.8;
            }
        }
        grid.retain(|&p| self.eval(p).is_ok());
        grid.sort_by(f64::total_cmp);
        grid.dedup();
        grid
    }
}

fn refine_ends(base: &[f64]) -> Vec<f64> {
    let n = base.len();
    if n < 2 {
        return base.to_vec();
    }
    let edge = (n / 10).max(1);
    let mut out = Vec::with_capacity(n + 2 * edge * ENDPOINT_REFINE);
    for i in 0..n - 1 {
        out.push(base[i]);
        if i < edge || i >= n - 1 - edge {
            let (a, b) = (base[i], base[i + 1]);
            for k in 1..ENDPOINT_REFINE {
                out.push(a + (b - a) * k as f64 / ENDPOINT_REFINE as f64);
            }
        }
    }
    out.push(base[n - 1]);
    out
}

/// `sup_p |η|_p / ψ(p)` over the grid.
///
/// Returns `+∞` when the ratio at the last grid point exceeds ten times the
/// largest ratio over the first nine tenths of the grid.
pub fn gls_norm(moment_fn: impl Fn(f64) -> f64, psi: &PsiFunction, p_grid: &[f64]) -> Result<f64> {
    if p_grid.is_empty() {
        return usage("GLS norm needs a nonempty grid");
    }
    let mut ratios = Vec::with_capacity(p_grid.len());
    for &p in p_grid {
        let m = moment_fn(p);
        if m.is_infinite() {
            return Ok(f64::INFINITY);
        }
        ratios.push(m / psi.eval(p)?);
    }
    let head = (p_grid.len() * 9 / 10).max(1);
    let head_max = ratios[..head].iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let last = *ratios.last().expect("nonempty");
    if p_grid.len() >= 10 && head_max > 0.0 && last > 10.0 * head_max {
        return Ok(f64::INFINITY);
    }
    Ok(ratios.into_iter().fold(f64::NEG_INFINITY, f64::max))
}

/// `h*(t) = sup_p (p·t − p·ln ψ(p))` over the grid.
pub fn young_fenchel(psi: &PsiFunction, t: f64, p_grid: &[f64]) -> Result<f64> {
    if p_grid.is_empty() {
        return usage("Young–Fenchel transform needs a nonempty grid");
    }
    if !(t >= 1.0) {
        return domain(format!("the conjugate is taken for t >= 1, got {t}"));
    }
    let mut best = f64::NEG_INFINITY;
    for &p in p_grid {
        best = best.max(p * t - psi.h(p)?);
    }
    Ok(best)
}

/// `ln` of the GLS tail bound `2 exp(−h*(ln(t/K)))` before clamping.
pub fn log_tail_bound_from_gls(t: f64, k: f64, psi: &PsiFunction) -> Result<f64> {
    if !(k > 0.0) || !k.is_finite() {
        return usage(format!("GLS norm K must be positive and finite, got {k}"));
    }
    if !(t >= std::f64::consts::E * k) {
        return domain(format!("t = {t} is below the validity threshold t >= eK = {}", std::f64::consts::E * k));
    }
    Ok(std::f64::consts::LN_2 - young_fenchel(psi, (t / k).ln(), &psi.conjugate_grid())?)
}

/// `P(|η| > t) <= 2 exp(−h*[ψ](ln(t/K)))`, clamped to `[0, 1]`.
pub fn tail_bound_from_gls(t: f64, k: f64, psi: &PsiFunction) -> Result<f64> {
    Ok(clamp_prob(log_tail_bound_from_gls(t, k, psi)?.exp()))
}

/// `ln` of `exp(−h*[β](ln t))` before clamping.
pub fn log_theorem41_tail(t: f64, beta: &PsiFunction) -> Result<f64> {
    if !(t >= std::f64::consts::E) {
        return domain(format!("the moment-chain tail bound is stated for t >= e, got {t}"));
    }
    Ok(-young_fenchel(beta, t.ln(), &beta.conjugate_grid())?)
}

/// `P(n^{-1/2} ||Θ|| > t) <= exp(−h*[β](ln t))`, clamped to `[0, 1]`.
pub fn theorem41_tail(t: f64, beta: &PsiFunction) -> Result<f64> {
    Ok(clamp_prob(log_theorem41_tail(t, beta)?.exp()))
}

fn clamp_prob(v: f64) -> f64 {
    if v.is_nan() {
        1.0
    } else {
        v.clamp(0.0, 1.0)
    }
}

/// Which formula produced a tail curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TailProvenance {
    /// `exp(−h*[β](ln t))`, the tail of `n^{-1/2} ||Θ||` from the moment chain.
    MomentChain,
    /// `2 exp(−h*[ψ](ln(t/K)))` from a GLS norm.
    Gls,
    /// `T^{(b,γ,S)}(t)`
    HeavyTailFunction,
}

impl TailProvenance {
    pub fn label(self) -> &'static str {
        match self {
            TailProvenance::MomentChain => "moment_chain:exp(-h*[beta](ln t))",
            TailProvenance::Gls => "gls:2exp(-h*[psi](ln(t/K)))",
            TailProvenance::HeavyTailFunction => "heavy_tail:t^-b(ln t)^gamma S(ln t)",
        }
    }
}

/// Upper bounds on a tail probability along a grid of levels `t`.
///
/// Levels below a formula's validity threshold carry the trivial bound 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailCurve {
    pub t_grid: Vec<f64>,
    pub values: Vec<f64>,
    pub provenance: TailProvenance,
    /// GLS norm used for the levels; 1 for the moment-chain curve.
    pub k: f64,
}

impl TailCurve {
    pub fn moment_chain(t_grid: &[f64], beta: &PsiFunction) -> Result<Self> {
        let grid = beta.conjugate_grid();
        let values = t_grid
            .iter()
            .map(|&t| {
                if t < std::f64::consts::E {
                    Ok(1.0)
                } else {
                    Ok(clamp_prob((-young_fenchel(beta, t.ln(), &grid)?).exp()))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(TailCurve { t_grid: t_grid.to_vec(), values, provenance: TailProvenance::MomentChain, k: 1.0 })
    }

    pub fn gls(t_grid: &[f64], k: f64, psi: &PsiFunction) -> Result<Self> {
        if !(k > 0.0) || !k.is_finite() {
            return usage(format!("GLS norm K must be positive and finite, got {k}"));
        }
        let grid = psi.conjugate_grid();
        let values = t_grid
            .iter()
            .map(|&t| {
                if t < std::f64::consts::E * k {
                    Ok(1.0)
                } else {
                    let h = young_fenchel(psi, (t / k).ln(), &grid)?;
                    Ok(clamp_prob(2.0 * (-h).exp()))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(TailCurve { t_grid: t_grid.to_vec(), values, provenance: TailProvenance::Gls, k })
    }

    pub fn heavy(t_grid: &[f64], b: f64, gamma: f64, s: &SlowlyVarying) -> Result<Self> {
        let values = t_grid
            .iter()
            .map(|&t| if t < std::f64::consts::E { Ok(1.0) } else { heavy_tail_T(b, gamma, s, t) })
            .collect::<Result<Vec<_>>>()?;
        Ok(TailCurve { t_grid: t_grid.to_vec(), values, provenance: TailProvenance::HeavyTailFunction, k: 1.0 })
    }

    /// Bound at level `t` by the nearest grid level at or below `t`.
    pub fn at(&self, t: f64) -> f64 {
        let i = self.t_grid.partition_point(|&g| g <= t);
        if i == 0 {
            1.0
        } else {
            self.values[i - 1]
        }
    }
}

/// Number of log-spaced nodes used for moment recovery.
pub const RECOVERY_NODES: usize = 10_000;
/// Upper limit of the moment-recovery integral.
pub const RECOVERY_UPPER: f64 = 1e6;
const RECOVERY_LOWER: f64 = 1e-8;

/// `|ξ|_p = (∫_0^∞ p t^{p−1} T(t) dt)^{1/p}` from a tail function `T`,
/// integrated over `[0, 10^6]` on log-spaced nodes.
pub fn moment_from_tail(tail: impl Fn(f64) -> f64, p: f64) -> Result<f64> {
    if !(p >= 1.0) {
        return domain(format!("moment recovery needs p >= 1, got {p}"));
    }
    // substitute t = e^u: ∫ p t^p T(t) du
    let us = crate::grid::linspace(RECOVERY_LOWER.ln(), RECOVERY_UPPER.ln(), RECOVERY_NODES);
    let f: Vec<f64> = us
        .iter()
        .map(|&u| {
            let t = u.exp();
            p * (p * u).exp() * tail(t)
        })
        .collect();
    let h = us[1] - us[0];
    let mut integral = 0.5 * h * (f[0] + f[f.len() - 1]) + h * f[1..f.len() - 1].iter().sum::<f64>();
    integral += RECOVERY_LOWER.powf(p) * tail(0.0);
    Ok(integral.powf(1.0 / p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use statrs::function::gamma::ln_gamma;
    use std::f64::consts::E;

    #[test]
    fn heavy_tail_function_values() {
        let one = SlowlyVarying::One;
        assert!((heavy_tail_T(5.0, 0.0, &one, E).unwrap() - (-5f64).exp()).abs() < 1e-15);
        assert!((heavy_tail_T(5.0, 2.0, &one, E).unwrap() - (-5f64).exp()).abs() < 1e-15);
        let (a, b) = (100.0f64, 1e4f64);
        let slope = (heavy_tail_T(5.0, 0.0, &one, b).unwrap().ln() - heavy_tail_T(5.0, 0.0, &one, a).unwrap().ln()) / (b.ln() - a.ln());
        assert!((slope + 5.0).abs() < 0.01);
        assert!(heavy_tail_T(5.0, 0.0, &one, 2.0).is_err());
    }

    #[test]
    fn heavy_psi_values() {
        let one = SlowlyVarying::One;
        for p in [1.0, 2.5, 4.9] {
            assert!((heavy_tail_psi(5.0, -1.0, &one, p).unwrap() - 1.0).abs() < 1e-15);
        }
        assert_eq!(heavy_tail_psi(5.0, 0.0, &one, 4.0).unwrap(), 1.0);
        assert!((heavy_tail_psi(5.0, 0.0, &one, 4.9).unwrap() - 1.585).abs() < 1e-3);
        assert!(heavy_tail_psi(5.0, 0.0, &one, 5.0).is_err());
        // diverges towards b
        let psi = PsiFunction::heavy(5.0, 0.0, one).unwrap();
        let v: Vec<f64> = [4.0, 4.9, 4.99, 4.999999].iter().map(|&p| psi.eval(p).unwrap()).collect();
        assert!(v.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn custom_slowly_varying_hook() {
        let s = SlowlyVarying::custom(|x| 1.0 + 1.0 / x);
        let v = heavy_tail_psi(5.0, 0.0, &s, 4.0).unwrap();
        assert!((v - 2f64.powf(0.2)).abs() < 1e-12);
        assert!((SlowlyVarying::LogShift.eval(0.0) - 1.0).abs() < 1e-15);
    }

    fn gauss_moment(p: f64) -> f64 {
        std::f64::consts::SQRT_2 * ((ln_gamma((p + 1.0) / 2.0) - 0.5 * std::f64::consts::PI.ln()) / p).exp()
    }

    #[test]
    fn gls_norm_cases() {
        let psi = PsiFunction::power(2.0).unwrap();
        let grid = log_spaced(1.0 + 1e-9, 64.0, 500);
        let unit = gls_norm(|p| p.sqrt(), &psi, &grid).unwrap();
        assert!((unit - 1.0).abs() < 1e-12);
        let two = gls_norm(|p| 2.0 * p.sqrt(), &psi, &grid).unwrap();
        assert!((two - 2.0).abs() < 1e-12);
        let g = gls_norm(gauss_moment, &psi, &grid).unwrap();
        // attained at p -> 1: E|N| = √(2/π)
        assert!((g - (2.0 / std::f64::consts::PI).sqrt()).abs() < 1e-6, "{g}");
        assert!((g - 0.80).abs() < 0.01);
        let blow = gls_norm(|p| if p > 60.0 { 1e9 } else { 1.0 }, &psi, &grid).unwrap();
        assert!(blow.is_infinite());
        assert!(gls_norm(|p| p, &psi, &[]).is_err());
    }

    #[test]
    fn conjugate_power_family_closed_form() {
        let psi = PsiFunction::power(2.0).unwrap();
        let grid = psi.conjugate_grid();
        let h1 = young_fenchel(&psi, 1.0, &grid).unwrap();
        assert!((h1 - E / 2.0).abs() < 1e-6, "{h1}");
        let h3 = young_fenchel(&psi, 3.0, &grid).unwrap();
        assert!((h3 - 5f64.exp() / 2.0).abs() < 1e-3 * h3);
        assert!((h3 - 74.21).abs() < 0.01);
        assert!(young_fenchel(&psi, 1.0, &[]).is_err());
        assert!(young_fenchel(&psi, 0.5, &grid).is_err());
    }

    #[test]
    fn conjugate_of_constant_is_linear() {
        let psi = PsiFunction::constant(1.0, 6.0).unwrap();
        let grid = psi.conjugate_grid();
        for t in [1.0, 2.0, 5.0] {
            let h = young_fenchel(&psi, t, &grid).unwrap();
            assert!(h <= 6.0 * t && h > 6.0 * t * (1.0 - 1e-6));
        }
    }

    #[test]
    fn conjugate_dominates_single_points() {
        let psi = PsiFunction::heavy(5.0, 0.5, SlowlyVarying::LogShift).unwrap();
        let grid = psi.conjugate_grid();
        for t in [1.0, 2.0, 7.0] {
            let h = young_fenchel(&psi, t, &grid).unwrap();
            for &p in grid.iter().step_by(37) {
                assert!(h >= p * t - psi.h(p).unwrap());
            }
        }
    }

    #[test]
    fn gls_tail_values() {
        let psi = PsiFunction::power(2.0).unwrap();
        let v = tail_bound_from_gls(E, 1.0, &psi).unwrap();
        assert!((v - 2.0 * (-E / 2.0).exp()).abs() < 1e-6);
        assert!((v - 0.514).abs() < 1e-3);
        // large t: 2 exp(−(t/K)^2 / (2e))
        let t = 20.0;
        let lv = log_tail_bound_from_gls(t, 1.0, &psi).unwrap();
        let expect = std::f64::consts::LN_2 - t * t / (2.0 * E);
        assert!((lv - expect).abs() < 1e-3 * expect.abs());
        assert!(tail_bound_from_gls(2.0, 1.0, &psi).is_err());
        let heavy = PsiFunction::heavy(5.0, 0.0, SlowlyVarying::One).unwrap();
        let at = tail_bound_from_gls(E * 2.0, 2.0, &heavy).unwrap();
        assert!(at > 0.0 && at <= 1.0);
    }

    #[test]
    fn tail_curves_are_clamped_and_nonincreasing() {
        let t_grid = log_spaced(1.0, 1e4, 60);
        let curves = [
            TailCurve::gls(&t_grid, 1.0, &PsiFunction::power(1.0).unwrap()).unwrap(),
            TailCurve::gls(&t_grid, 0.5, &PsiFunction::heavy(6.0, 1.0, SlowlyVarying::One).unwrap()).unwrap(),
            TailCurve::heavy(&t_grid, 5.0, 0.0, &SlowlyVarying::One).unwrap(),
        ];
        for c in &curves {
            assert!(c.values.iter().all(|v| (0.0..=1.0).contains(v)));
            assert!(c.values.windows(2).all(|w| w[1] <= w[0]), "{:?}", c.provenance);
        }
    }

    #[test]
    fn moment_recovery_matches_closed_forms() {
        // exponential tail e^{-t}: E X^p = Γ(p+1)
        for p in [1.0, 2.0, 4.5] {
            let m = moment_from_tail(|t| (-t).exp(), p).unwrap();
            let exact = (ln_gamma(p + 1.0) / p).exp();
            assert!((m - exact).abs() < 1e-6 * exact, "p={p}: {m} vs {exact}");
        }
        // uniform on [0, 1]: E X^p = 1/(p+1)
        let m = moment_from_tail(|t| (1.0 - t).clamp(0.0, 1.0), 3.0).unwrap();
        assert!((m - 0.25f64.powf(1.0 / 3.0)).abs() < 1e-4);
    }
}
