//! Matrix martingale-difference sequences and their partial sums.
//!
//! Each path owns an independent ChaCha stream (`stream = path index`) under
//! the master seed, so a path's values never depend on how paths are
//! scheduled across threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::{gamma_ur, ln_gamma};

use crate::error::{usage, Result};
use crate::gls::{heavy_tail_psi, SlowlyVarying};
use crate::moment_bounds::{MomentFamily, MomentProfile};
use crate::normed_space::Matrix;

/// Start of the prescribed power tail of `pareto_sym`.
pub const PARETO_T0: f64 = std::f64::consts::E;

/// Law of a single symmetric entry.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "snake_case", deny_unknown_fields)]
pub enum EntryLaw {
    Rademacher,
    Gaussian { sigma: f64 },
    /// `sign · E^Δ`, `E` standard exponential: tail `exp(−t^{1/Δ})`.
    WeibullSym { delta: f64 },
    /// Tail `t^{−b} (ln t)^γ` above `t0 = e`, uniform core below.
    ParetoSym { b: f64, gamma: f64 },
}

impl EntryLaw {
    pub fn validate(&self) -> Result<()> {
        match *self {
            EntryLaw::Gaussian { sigma } if !(sigma >= 0.0 && sigma.is_finite()) => usage("gaussian law needs sigma >= 0"),
            EntryLaw::WeibullSym { delta } if !(delta > 0.0 && delta.is_finite()) => usage("weibull_sym law needs Δ > 0"),
            EntryLaw::ParetoSym { b, gamma } => {
                if !(b > 1.0 && b.is_finite()) {
                    usage("pareto_sym law needs b > 1")
                } else if !(gamma > -1.0 && gamma < b) {
                    // γ < b keeps the tail decreasing above t0; γ > −1 keeps moments below b finite
                    usage("pareto_sym law needs −1 < γ < b")
                } else {
                    Ok(())
                }
            }
            _ => Ok(()),
        }
    }

    /// One draw.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            EntryLaw::Rademacher => {
                if rng.random::<bool>() {
                    1.0
                } else {
                    -1.0
                }
            }
            EntryLaw::Gaussian { sigma } => sigma * rng.sample::<f64, _>(StandardNormal),
            EntryLaw::WeibullSym { delta } => {
                let e: f64 = rng.sample(Exp1);
                let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
                sign * e.powf(delta)
            }
            EntryLaw::ParetoSym { b, gamma } => {
                let u: f64 = 1.0 - rng.random::<f64>(); // (0, 1]
                let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
                sign * pareto_abs_quantile(b, gamma, u)
            }
        }
    }

    /// `P(|ξ| >= t)`.
    pub fn tail(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 1.0;
        }
        match *self {
            EntryLaw::Rademacher => {
                if t <= 1.0 {
                    1.0
                } else {
                    0.0
                }
            }
            EntryLaw::Gaussian { sigma } => {
                if sigma == 0.0 {
                    0.0
                } else {
                    statrs::function::erf::erfc(t / (sigma * std::f64::consts::SQRT_2))
                }
            }
            EntryLaw::WeibullSym { delta } => (-t.powf(1.0 / delta)).exp(),
            EntryLaw::ParetoSym { b, gamma } => pareto_tail(b, gamma, t),
        }
    }

    /// `|ξ|_p` in closed form.
    pub fn abs_moment(&self, p: f64) -> f64 {
        match *self {
            EntryLaw::Rademacher => 1.0,
            EntryLaw::Gaussian { sigma } => {
                sigma * std::f64::consts::SQRT_2 * ((ln_gamma((p + 1.0) / 2.0) - 0.5 * std::f64::consts::PI.ln()) / p).exp()
            }
            EntryLaw::WeibullSym { delta } => (ln_gamma(delta * p + 1.0) / p).exp(),
            EntryLaw::ParetoSym { b, gamma } => {
                if p >= b {
                    return f64::INFINITY;
                }
                let t0 = PARETO_T0;
                let tail0 = pareto_tail(b, gamma, t0);
                // uniform core on [0, t0) with mass 1 − T(t0)
                let core = (1.0 - tail0) * t0.powf(p) / (p + 1.0);
                // t0^p T(t0) + ∫_{t0}^∞ p t^{p−1} T(t) dt, with x = ln t:
                // p (b−p)^{−(γ+1)} Γ(γ+1, b−p)
                let a = gamma + 1.0;
                let gap = b - p;
                let upper = gamma_ur(a, gap) * ln_gamma(a).exp();
                let tail_part = t0.powf(p) * tail0 + p * gap.powf(-a) * upper;
                (core + tail_part).powf(1.0 / p)
            }
        }
    }

    /// Closed-form moment profile of a single entry.
    pub fn moment_profile(&self) -> Result<MomentProfile> {
        self.validate()?;
        match *self {
            EntryLaw::Rademacher => MomentProfile::bounded(1.0),
            EntryLaw::Gaussian { sigma } => MomentProfile::new(MomentFamily::Gaussian { sigma }),
            EntryLaw::WeibullSym { delta } => MomentProfile::new(MomentFamily::Weibull { delta }),
            EntryLaw::ParetoSym { b, gamma } => {
                // smallest scale with |ξ|_p <= scale · ψ^{(b,γ,1)}(p) on a grid reaching towards b
                let s = SlowlyVarying::One;
                let mut grid = crate::grid::log_spaced(1.0, b * (1.0 - 1e-3), 400);
                let mut gap = (b - 1.0) * 1e-3;
                while gap > b * 1e-10 {
                    grid.push(b - gap);
                    gap *= 0.5;
                }
                let ratio = |p: f64| self.abs_moment(p) / heavy_tail_psi(b, gamma, &s, p).expect("p < b");
                grid.sort_by(f64::total_cmp);
                let values: Vec<f64> = grid.iter().map(|&p| ratio(p)).collect();
                let best = (0..grid.len()).max_by(|&i, &j| values[i].total_cmp(&values[j])).expect("non-empty grid");
                let lo = grid[best.saturating_sub(1)];
                let hi = grid[(best + 1).min(grid.len() - 1)];
                let scale = golden_max(ratio, lo, hi).max(values[best]);
                MomentProfile::heavy(b, gamma, s)?.scaled(scale)
            }
        }
    }
}

fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..100 {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    f(a).max(f(b)).max(fc).max(fd)
}

fn pareto_tail(b: f64, gamma: f64, t: f64) -> f64 {
    let t0 = PARETO_T0;
    let tail0 = (-b * t0.ln()).exp() * t0.ln().powf(gamma);
    if t >= t0 {
        let l = t.ln();
        (-b * l + gamma * l.ln()).exp()
    } else {
        tail0 + (1.0 - tail0) * (1.0 - t / t0)
    }
}

/// `|ξ|` with `P(|ξ| >= |ξ|(u)) = u` for `u ∈ (0, 1]`.
fn pareto_abs_quantile(b: f64, gamma: f64, u: f64) -> f64 {
    let t0 = PARETO_T0;
    let tail0 = pareto_tail(b, gamma, t0);
    if u > tail0 {
        return t0 * (1.0 - (u - tail0) / (1.0 - tail0));
    }
    // solve −b x + γ ln x = ln u for x = ln t >= 1
    let target = u.ln();
    if gamma == 0.0 {
        return (-target / b).exp();
    }
    let g = |x: f64| -b * x + gamma * x.ln() - target;
    let (mut lo, mut hi) = (1.0f64, 2.0f64);
    while g(hi) > 0.0 {
        lo = hi;
        hi *= 2.0;
    }
    let mut x = 0.5 * (lo + hi);
    for _ in 0..200 {
        let gx = g(x);
        if gx.abs() < 1e-15 {
            break;
        }
        if gx > 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let newton = x - gx / (-b + gamma / x);
        x = if newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
        if hi - lo < 1e-14 * hi {
            break;
        }
    }
    x.exp()
}

/// How differences depend on the past.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Dependence {
    #[default]
    Independent,
    /// `ξ_k(i,j) = ε_k(i,j) · (1 + tanh(V_{k−1}(1,1)))` with `ε` i.i.d. symmetric.
    ///
    /// A concrete dependent construction; the modulation lies in `(0, 2)`
    /// and is measurable with respect to the past, so differences stay
    /// conditionally centered.
    SignModulated,
}

/// `d × d` martingale with `n` steps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MartingaleModel {
    pub d: usize,
    pub n: usize,
    pub entry_law: EntryLaw,
    #[serde(default)]
    pub dependence: Dependence,
}

impl MartingaleModel {
    pub fn new(d: usize, n: usize, entry_law: EntryLaw, dependence: Dependence) -> Result<Self> {
        let m = MartingaleModel { d, n, entry_law, dependence };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if self.d == 0 || self.n == 0 {
            return usage(format!("model needs d >= 1 and n >= 1, got d = {}, n = {}", self.d, self.n));
        }
        self.entry_law.validate()
    }

    /// Entry-level `max_{l,i,j} |ξ_{i,j}(l)|_p` profile; doubled under sign
    /// modulation since the modulation is bounded by 2.
    pub fn moment_profile(&self) -> Result<MomentProfile> {
        let base = self.entry_law.moment_profile()?;
        match self.dependence {
            Dependence::Independent => Ok(base),
            Dependence::SignModulated => base.scaled(2.0),
        }
    }

    fn rng(&self, seed: u64, path: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(path);
        rng
    }

    /// Runs one path, handing each difference to `visit` in order.
    pub fn for_each_difference(&self, seed: u64, path: u64, mut visit: impl FnMut(usize, &Matrix)) -> Result<Matrix> {
        self.validate()?;
        let mut rng = self.rng(seed, path);
        let d = self.d;
        let mut v = Matrix::zeros(d);
        let mut xi = Matrix::zeros(d);
        for k in 0..self.n {
            let modulation = match self.dependence {
                Dependence::Independent => 1.0,
                Dependence::SignModulated => 1.0 + v[(0, 0)].tanh(),
            };
            for i in 0..d {
                for j in 0..d {
                    xi[(i, j)] = self.entry_law.sample(&mut rng) * modulation;
                }
            }
            visit(k, &xi);
            v.add_assign(&xi);
        }
        Ok(v)
    }

    /// `V(n)` for one path without keeping the differences.
    pub fn terminal_value(&self, seed: u64, path: u64) -> Result<Matrix> {
        self.for_each_difference(seed, path, |_, _| {})
    }
}

/// The `n` differences of path number `path` under `seed`.
pub fn generate_differences(model: &MartingaleModel, seed: u64, path: u64) -> Result<Vec<Matrix>> {
    let mut out = Vec::with_capacity(model.n);
    model.for_each_difference(seed, path, |_, xi| out.push(xi.clone()))?;
    Ok(out)
}

/// Differences and partial sums `V(0) = 0, V(k) = Σ_{l<=k} ξ(l)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MartingalePath {
    pub differences: Vec<Matrix>,
    pub partial_sums: Vec<Matrix>,
    pub seed: Option<u64>,
}

pub fn assemble_martingale(differences: Vec<Matrix>) -> Result<MartingalePath> {
    let Some(first) = differences.first() else {
        return usage("cannot assemble a martingale from zero differences");
    };
    let d = first.dim();
    if differences.iter().any(|m| m.dim() != d) {
        return usage("differences have ragged dimensions");
    }
    let mut partial_sums = Vec::with_capacity(differences.len() + 1);
    let mut v = Matrix::zeros(d);
    partial_sums.push(v.clone());
    for xi in &differences {
        v.add_assign(xi);
        partial_sums.push(v.clone());
    }
    Ok(MartingalePath { differences, partial_sums, seed: None })
}

impl MartingalePath {
    pub fn simulate(model: &MartingaleModel, seed: u64, path: u64) -> Result<Self> {
        let mut p = assemble_martingale(generate_differences(model, seed, path)?)?;
        p.seed = Some(seed);
        Ok(p)
    }

    pub fn horizon(&self) -> usize {
        self.differences.len()
    }

    pub fn terminal(&self) -> &Matrix {
        self.partial_sums.last().expect("V(0) is always present")
    }

    /// Raw dump, one row per step and entry.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("step,i,j,difference,partial_sum\n");
        for (k, (xi, v)) in self.differences.iter().zip(&self.partial_sums[1..]).enumerate() {
            let d = xi.dim();
            for i in 0..d {
                for j in 0..d {
                    out.push_str(&format!("{},{},{},{:e},{:e}\n", k + 1, i + 1, j + 1, xi[(i, j)], v[(i, j)]));
                }
            }
        }
        out
    }
}

/// `Q(n, b; ξ) = Σ b(i) ξ(i)` for a scalar path and a unit vector `b`.
pub fn khintchine_sum(path: &MartingalePath, b: &[f64]) -> Result<f64> {
    if path.differences.first().map(Matrix::dim) != Some(1) {
        return usage("the Khintchine sum needs a one-dimensional path");
    }
    if b.len() != path.horizon() {
        return usage(format!("weight vector has length {}, path has {} steps", b.len(), path.horizon()));
    }
    let norm2: f64 = b.iter().map(|v| v * v).sum();
    if (norm2 - 1.0).abs() > 1e-12 {
        return usage(format!("weights must satisfy Σ b² = 1, got {norm2}"));
    }
    Ok(b.iter().zip(&path.differences).map(|(w, xi)| w * xi[(0, 0)]).sum())
}
