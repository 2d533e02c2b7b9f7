//! Monte Carlo estimates of moments and tails of `||Θ||`, compared row by
//! row against the moment chain and its tail curve.
//!
//! Every simulation collects per-path values in path order and reduces them
//! sequentially, so reports are bitwise identical for any thread count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{usage, Result};
use crate::gls::{PsiFunction, TailCurve};
use crate::grid::log_spaced;
use crate::mart_sim::{Dependence, MartingaleModel};
use crate::moment_bounds::{BoundProfile, MomentProfile};
use crate::normed_space::{operator_norm, operator_tensor_set, NormSpec};
use crate::osekowski::os_constant;

/// Standard errors allowed before a row fails.
pub const PASS_SIGMAS: f64 = 3.0;
/// Two-sided 99% normal quantile used for Wilson bands.
pub const WILSON_Z: f64 = 2.575_829_303_548_901;
pub const DEFAULT_MOMENT_ORDERS: [f64; 3] = [4.0, 6.0, 8.0];
/// Highest order checked by default on heavy-tailed models.
pub const HEAVY_ORDER_CAP: f64 = 8.0;
pub const DEFAULT_PATHS: usize = 10_000;

/// Default levels for tail rows.
pub fn default_t_grid() -> Vec<f64> {
    log_spaced(1.0, 1e4, 41)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Verdict {
    Pass,
    Fail,
}

impl Verdict {
    pub fn judge(empirical: f64, stderr: f64, bound: f64) -> Verdict {
        if empirical - PASS_SIGMAS * stderr <= bound {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentEstimate {
    pub p: f64,
    pub estimate: f64,
    pub stderr: f64,
}

/// Running sums of `|s|^p` and `|s|^{2p}`.
#[derive(Debug, Clone, Copy, Default)]
struct PowerSums {
    count: usize,
    s1: f64,
    s2: f64,
}

impl PowerSums {
    fn push(&mut self, x: f64, p: f64) {
        let a = x.abs().powf(p);
        self.count += 1;
        self.s1 += a;
        self.s2 += a * a;
    }

    fn estimate(&self, p: f64) -> MomentEstimate {
        let n = self.count as f64;
        let mean = self.s1 / n;
        let var = if self.count > 1 { ((self.s2 / n - mean * mean) * n / (n - 1.0)).max(0.0) } else { 0.0 };
        let se_mean = (var / n).sqrt();
        let estimate = mean.powf(1.0 / p);
        // d/dm m^{1/p} = m^{1/p − 1} / p
        let stderr = if mean > 0.0 { estimate / (p * mean) * se_mean } else { 0.0 };
        MomentEstimate { p, estimate, stderr }
    }
}

/// `(mean |s|^p)^{1/p}` with a delta-method standard error.
pub fn empirical_moment(samples: &[f64], p: f64) -> Result<MomentEstimate> {
    if samples.is_empty() {
        return usage("empirical moment of an empty sample");
    }
    if !(p >= 1.0) || !p.is_finite() {
        return usage(format!("moment order must be finite and >= 1, got {p}"));
    }
    let mut acc = PowerSums::default();
    for &s in samples {
        acc.push(s, p);
    }
    Ok(acc.estimate(p))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailEstimate {
    pub t: f64,
    pub frequency: f64,
    pub stderr: f64,
    pub lower: f64,
    pub upper: f64,
}

/// Fraction of `|s| >= t` per level, with a Wilson 99% band.
pub fn empirical_tail(samples: &[f64], t_grid: &[f64]) -> Result<Vec<TailEstimate>> {
    if samples.is_empty() {
        return usage("empirical tail of an empty sample");
    }
    let mut sorted: Vec<f64> = samples.iter().map(|s| s.abs()).collect();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let z2 = WILSON_Z * WILSON_Z;
    Ok(t_grid
        .iter()
        .map(|&t| {
            let below = sorted.partition_point(|&s| s < t);
            let f = (sorted.len() - below) as f64 / n;
            let denom = 1.0 + z2 / n;
            let center = (f + z2 / (2.0 * n)) / denom;
            let half = WILSON_Z / denom * (f * (1.0 - f) / n + z2 / (4.0 * n * n)).sqrt();
            TailEstimate {
                t,
                frequency: f,
                stderr: (f * (1.0 - f) / n).sqrt(),
                lower: (center - half).max(0.0),
                upper: (center + half).min(1.0),
            }
        })
        .collect())
}

/// `||V(n)||` under `spec` for paths `0..paths`, in path order.
pub fn simulate_norms(model: &MartingaleModel, spec: &NormSpec, paths: usize, seed: u64) -> Result<Vec<f64>> {
    model.validate()?;
    if spec.dim() != model.d {
        return usage(format!("norm dimension {} does not match model dimension {}", spec.dim(), model.d));
    }
    (0..paths as u64)
        .into_par_iter()
        .map(|i| operator_norm(&model.terminal_value(seed, i)?, spec))
        .collect()
}

/// `κ` implied by the shape of the extreme points: 0 when both sides are
/// finite, `2(d − 1)` when both are spheres.
pub fn analytic_kappa(spec: &NormSpec) -> f64 {
    let z = operator_tensor_set(spec);
    let side = |finite: bool| if finite { 0.0 } else { (spec.dim() - 1) as f64 };
    side(z.x_side().is_finite()) + side(z.y_side().is_finite())
}

/// Everything needed to compare a model against its bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundSetup {
    /// `sup_{z∈Z} Σ |z(i,j)|`, the factor turning entry moments into `μ̄`.
    pub c_z: f64,
    pub kappa: f64,
    /// Entry-level profile, before aggregation.
    pub entry_profile: MomentProfile,
    pub bound: BoundProfile,
    pub tail: TailCurve,
}

impl BoundSetup {
    /// `entry_profile` defaults to the model's closed-form profile.
    pub fn build(
        model: &MartingaleModel,
        spec: &NormSpec,
        kappa: f64,
        entry_profile: Option<MomentProfile>,
        beta_scale: f64,
        t_grid: &[f64],
    ) -> Result<Self> {
        model.validate()?;
        if spec.dim() != model.d {
            return usage(format!("norm dimension {} does not match model dimension {}", spec.dim(), model.d));
        }
        if !(beta_scale > 0.0) || !beta_scale.is_finite() {
            return usage(format!("beta_scale must be positive, got {beta_scale}"));
        }
        let entry_profile = match entry_profile {
            Some(p) => p,
            None => model.moment_profile()?,
        };
        let c_z = operator_tensor_set(spec).l1_radius();
        let aggregated = entry_profile.scaled(c_z)?;
        let bound = BoundProfile::build(&aggregated, kappa, model.n)?.with_beta_scale(beta_scale);
        let tail = TailCurve::moment_chain(t_grid, &PsiFunction::from_beta(&bound))?;
        Ok(BoundSetup { c_z, kappa, entry_profile, bound, tail })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentRow {
    pub p: f64,
    pub empirical: f64,
    pub stderr: f64,
    /// `√n β(p)`
    pub bound: f64,
    pub margin: f64,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailRow {
    pub t: f64,
    /// Frequency of `n^{-1/2} ||Θ|| >= t`.
    pub empirical: f64,
    pub stderr: f64,
    pub lower: f64,
    pub upper: f64,
    pub bound: f64,
    pub margin: f64,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalReport {
    pub model: MartingaleModel,
    pub spec: NormSpec,
    pub paths: usize,
    pub seed: u64,
    pub n: usize,
    pub c_z: f64,
    pub kappa: f64,
    pub beta_scale: f64,
    /// Set when the model uses the invented dependent construction.
    pub dependence_note: Option<String>,
    pub moment_bound: String,
    pub tail_bound: String,
    pub moment_rows: Vec<MomentRow>,
    pub tail_rows: Vec<TailRow>,
}

impl EmpiricalReport {
    pub fn passed(&self) -> bool {
        self.moment_rows.iter().all(|r| r.verdict == Verdict::Pass) && self.tail_rows.iter().all(|r| r.verdict == Verdict::Pass)
    }

    pub fn failures(&self) -> usize {
        self.moment_rows.iter().filter(|r| r.verdict == Verdict::Fail).count()
            + self.tail_rows.iter().filter(|r| r.verdict == Verdict::Fail).count()
    }
}

/// Simulates `paths` martingales and compares `| ||Θ|| |_p` with `√n β(p)`
/// and the frequency of `n^{-1/2} ||Θ|| >= t` with `tail` at each of its
/// levels. Both row kinds use the same paths.
pub fn bound_check_report(
    model: &MartingaleModel,
    spec: &NormSpec,
    bound: &BoundProfile,
    tail: &TailCurve,
    moment_orders: &[f64],
    paths: usize,
    seed: u64,
) -> Result<EmpiricalReport> {
    model.validate()?;
    if paths == 0 {
        return usage("paths must be at least 1");
    }
    if bound.n != model.n {
        return usage(format!("bound horizon {} does not match model horizon {}", bound.n, model.n));
    }
    let c_z = operator_tensor_set(spec).l1_radius();
    let modulation = match model.dependence {
        Dependence::Independent => 1.0,
        Dependence::SignModulated => 2.0,
    };
    for &p in moment_orders {
        bound.beta(p)?;
        let needed = c_z * modulation * model.entry_law.abs_moment(p);
        if bound.profile.mu_bar(p) < needed * (1.0 - 1e-9) {
            return usage(format!(
                "bound profile gives μ̄({p}) = {}, below the model's aggregated moment {needed}",
                bound.profile.mu_bar(p)
            ));
        }
    }
    let norms = simulate_norms(model, spec, paths, seed)?;
    let sqrt_n = (model.n as f64).sqrt();
    let moment_rows = moment_orders
        .iter()
        .map(|&p| {
            let est = empirical_moment(&norms, p)?;
            let b = bound.moment_bound(p)?;
            Ok(MomentRow {
                p,
                empirical: est.estimate,
                stderr: est.stderr,
                bound: b,
                margin: b - est.estimate,
                verdict: Verdict::judge(est.estimate, est.stderr, b),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let scaled: Vec<f64> = norms.iter().map(|v| v / sqrt_n).collect();
    let tail_rows = empirical_tail(&scaled, &tail.t_grid)?
        .into_iter()
        .zip(&tail.values)
        .map(|(e, &b)| TailRow {
            t: e.t,
            empirical: e.frequency,
            stderr: e.stderr,
            lower: e.lower,
            upper: e.upper,
            bound: b,
            margin: b - e.frequency,
            verdict: Verdict::judge(e.frequency, e.stderr, b),
        })
        .collect();
    Ok(EmpiricalReport {
        model: *model,
        spec: *spec,
        paths,
        seed,
        n: model.n,
        c_z,
        kappa: bound.kappa,
        beta_scale: bound.beta_scale,
        dependence_note: (model.dependence == Dependence::SignModulated)
            .then(|| "sign_modulated: stand-in dependent construction, modulation 1 + tanh(V(1,1))".to_string()),
        moment_bound: "sqrt(n)*beta(p)".into(),
        tail_bound: tail.provenance.label().into(),
        moment_rows,
        tail_rows,
    })
}

/// One `(p, b)` comparison of a Khintchine variable against `Os(p) max_l μ(l,p)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DominationRow {
    pub p: f64,
    /// Direction index, or `None` for the supremum over all sampled directions.
    pub direction: Option<usize>,
    pub empirical: f64,
    pub stderr: f64,
    pub mu_max: f64,
    pub bound: f64,
    pub margin: f64,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DominationReport {
    pub model: MartingaleModel,
    pub paths: usize,
    pub seed: u64,
    pub directions: usize,
    pub rows: Vec<DominationRow>,
}

impl DominationReport {
    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.verdict == Verdict::Pass)
    }
}

/// `directions` Gaussian directions on the unit sphere of `R^n`, drawn from
/// a stream disjoint from every path stream.
pub fn random_directions(n: usize, directions: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(u64::MAX);
    (0..directions)
        .map(|_| loop {
            let v: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > 0.0 {
                break v.into_iter().map(|x| x / norm).collect();
            }
        })
        .collect()
}

/// Empirical `|Q(n, b; ξ)|_p` per sampled direction and for the supremum
/// over directions, against `Os(p)` times the largest empirical step moment.
pub fn osekowski_domination(
    model: &MartingaleModel,
    orders: &[f64],
    directions: usize,
    paths: usize,
    seed: u64,
) -> Result<DominationReport> {
    model.validate()?;
    if model.d != 1 {
        return usage("domination of Khintchine variables needs a one-dimensional model");
    }
    if paths == 0 || directions == 0 {
        return usage("paths and directions must be at least 1");
    }
    for &p in orders {
        os_constant(p)?;
    }
    let n = model.n;
    let dirs = random_directions(n, directions, seed);
    // per path: the n steps, then Q for each direction, then the sup
    let per_path: Vec<Vec<f64>> = (0..paths as u64)
        .into_par_iter()
        .map(|i| {
            let mut steps = Vec::with_capacity(n + directions + 1);
            model.for_each_difference(seed, i, |_, xi| steps.push(xi[(0, 0)]))?;
            let mut sup = 0.0f64;
            for b in &dirs {
                let q: f64 = b.iter().zip(&steps[..n]).map(|(w, x)| w * x).sum();
                sup = sup.max(q.abs());
                steps.push(q);
            }
            steps.push(sup);
            Ok(steps)
        })
        .collect::<Result<_>>()?;
    let width = n + directions + 1;
    let mut rows = Vec::new();
    for &p in orders {
        let mut sums = vec![PowerSums::default(); width];
        for row in &per_path {
            for (acc, &x) in sums.iter_mut().zip(row) {
                acc.push(x, p);
            }
        }
        let mu_max = sums[..n].iter().map(|s| s.estimate(p).estimate).fold(0.0, f64::max);
        let bound = os_constant(p)? * mu_max;
        for (k, acc) in sums[n..].iter().enumerate() {
            let est = acc.estimate(p);
            rows.push(DominationRow {
                p,
                direction: (k < directions).then_some(k),
                empirical: est.estimate,
                stderr: est.stderr,
                mu_max,
                bound,
                margin: bound - est.estimate,
                verdict: Verdict::judge(est.estimate, est.stderr, bound),
            });
        }
    }
    Ok(DominationReport { model: *model, paths, seed, directions, rows })
}
