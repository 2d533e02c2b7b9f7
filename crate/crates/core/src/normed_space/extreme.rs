//! Extreme points of unit balls and the rank-one tensor set built from them.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ContinuousCDF, Normal};

use super::matrix::Matrix;
use super::norm::{NormFamily, NormSpec};
use crate::error::{usage, Result};

/// Default number of points drawn from a continuum of extreme points.
pub const DEFAULT_CLOUD_SIZE: usize = 10_000;
pub const DEFAULT_SAMPLER_SEED: u64 = 0x00c0_ffee;

const UNIT_TOL: f64 = 1e-12;

/// Deterministic low-discrepancy sampler on the unit sphere of a normed space.
///
/// Points come from a Cranley–Patterson rotated R_d (generalized golden
/// ratio) sequence, pushed through the Gaussian quantile function and
/// normalized. The rotation is derived from the seed.
#[derive(Debug, Clone, PartialEq)]
pub struct SphereSampler {
    spec: NormSpec,
    seed: u64,
}

impl SphereSampler {
    pub fn new(spec: NormSpec, seed: u64) -> Self {
        SphereSampler { spec, seed }
    }

    pub fn spec(&self) -> &NormSpec {
        &self.spec
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn sample(&self, count: usize) -> Vec<Vec<f64>> {
        low_discrepancy(self.spec.dim(), count, self.seed)
            .iter()
            .map(|u| self.project(u))
            .collect()
    }

    /// Maps a point of the open unit cube `(0,1)^d` onto the sphere.
    pub(crate) fn project(&self, u: &[f64]) -> Vec<f64> {
        let gauss = Normal::standard();
        let mut x: Vec<f64> = u
            .iter()
            .map(|&v| gauss.inverse_cdf(v.clamp(1e-12, 1.0 - 1e-12)))
            .collect();
        let n = self.spec.eval(&x);
        if n == 0.0 {
            x.iter_mut().for_each(|v| *v = 0.0);
            x[0] = 1.0;
            return x;
        }
        x.iter_mut().for_each(|v| *v /= n);
        x
    }
}

/// Rotated R_d sequence in `(0,1)^dim`.
pub(crate) fn low_discrepancy(dim: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    // φ_d: unique positive root of x^{d+1} = x + 1
    let mut phi = 2.0f64;
    for _ in 0..64 {
        let f = phi.powi(dim as i32 + 1) - phi - 1.0;
        let df = (dim as f64 + 1.0) * phi.powi(dim as i32) - 1.0;
        phi -= f / df;
    }
    let alpha: Vec<f64> = (1..=dim).map(|k| phi.powi(-(k as i32)).fract()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shift: Vec<f64> = (0..dim).map(|_| rng.random::<f64>()).collect();
    (0..count)
        .map(|i| {
            let k = (i + 1) as f64;
            shift
                .iter()
                .zip(&alpha)
                .map(|(s, a)| (s + k * a).fract())
                .collect()
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub enum ExtremeKind {
    Finite(Vec<Vec<f64>>),
    Sampler(SphereSampler),
}

/// The extreme points `S_o(X)` of the unit ball of a normed space.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtremePointSet {
    spec: NormSpec,
    kind: ExtremeKind,
}

impl ExtremePointSet {
    /// A user-supplied finite set; every point must have unit norm.
    pub fn finite(spec: NormSpec, points: Vec<Vec<f64>>) -> Result<Self> {
        if points.is_empty() {
            return usage("a finite extreme set needs at least one point");
        }
        for x in &points {
            if x.len() != spec.dim() {
                return usage("extreme point has the wrong dimension");
            }
            let n = spec.eval(x);
            if (n - 1.0).abs() > UNIT_TOL {
                return usage(format!("extreme point {x:?} has norm {n}, expected 1"));
            }
        }
        Ok(ExtremePointSet { spec, kind: ExtremeKind::Finite(points) })
    }

    pub fn sampler(spec: NormSpec, seed: u64) -> Self {
        ExtremePointSet { spec, kind: ExtremeKind::Sampler(SphereSampler::new(spec, seed)) }
    }

    pub fn spec(&self) -> &NormSpec {
        &self.spec
    }

    pub fn kind(&self) -> &ExtremeKind {
        &self.kind
    }

    pub fn is_finite(&self) -> bool {
        matches!(self.kind, ExtremeKind::Finite(_))
    }

    /// All points for a finite set, `count` samples otherwise.
    pub fn points(&self, count: usize) -> Vec<Vec<f64>> {
        match &self.kind {
            ExtremeKind::Finite(p) => p.clone(),
            ExtremeKind::Sampler(s) => s.sample(count),
        }
    }

    /// `sup ||x||_1` over the set.
    pub fn max_l1(&self) -> f64 {
        match &self.kind {
            ExtremeKind::Finite(p) => p
                .iter()
                .map(|x| x.iter().map(|v| v.abs()).sum::<f64>())
                .fold(0.0, f64::max),
            ExtremeKind::Sampler(s) => {
                let p = s.spec.family().exponent();
                (s.spec.dim() as f64).powf(1.0 - 1.0 / p)
            }
        }
    }
}

/// Extreme points of the unit ball: `{±e_i}` for `ℓ1`, `{±1}^d` for `ℓ∞`,
/// a sphere sampler for strictly convex `ℓp`.
pub fn extreme_points(spec: &NormSpec) -> ExtremePointSet {
    extreme_points_seeded(spec, DEFAULT_SAMPLER_SEED)
}

pub fn extreme_points_seeded(spec: &NormSpec, seed: u64) -> ExtremePointSet {
    let d = spec.dim();
    let kind = match spec.family() {
        NormFamily::L1 => {
            let mut pts = Vec::with_capacity(2 * d);
            for i in 0..d {
                for s in [1.0, -1.0] {
                    let mut e = vec![0.0; d];
                    e[i] = s;
                    pts.push(e);
                }
            }
            ExtremeKind::Finite(pts)
        }
        NormFamily::Linf => {
            let pts = (0..1usize << d)
                .map(|mask| {
                    (0..d)
                        .map(|i| if mask >> i & 1 == 1 { -1.0 } else { 1.0 })
                        .collect()
                })
                .collect();
            ExtremeKind::Finite(pts)
        }
        NormFamily::L2 | NormFamily::Lp { .. } => ExtremeKind::Sampler(SphereSampler::new(*spec, seed)),
    };
    ExtremePointSet { spec: *spec, kind }
}

/// The set `Z` of rank-one arrays `z(i,j) = x_i · y_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorExtremeSet {
    x_side: ExtremePointSet,
    y_side: ExtremePointSet,
}

pub fn tensor_extreme_set(x_side: ExtremePointSet, y_side: ExtremePointSet) -> Result<TensorExtremeSet> {
    if x_side.spec.dim() != y_side.spec.dim() {
        return usage("tensor sides must share the dimension");
    }
    Ok(TensorExtremeSet { x_side, y_side })
}

/// The tensor set whose bilinear maximum is the operator norm under `spec`.
///
/// Rows carry the dual extreme points and columns the primal ones, so that
/// `Σ Θ(i,j) z(i,j) = yᵀ Θ x` with `y` dual and `x` primal.
pub fn operator_tensor_set(spec: &NormSpec) -> TensorExtremeSet {
    TensorExtremeSet {
        x_side: extreme_points_seeded(&spec.dual(), DEFAULT_SAMPLER_SEED ^ 0xd0a1),
        y_side: extreme_points(spec),
    }
}

impl TensorExtremeSet {
    pub fn dim(&self) -> usize {
        self.x_side.spec.dim()
    }

    pub fn x_side(&self) -> &ExtremePointSet {
        &self.x_side
    }

    pub fn y_side(&self) -> &ExtremePointSet {
        &self.y_side
    }

    pub fn is_finite(&self) -> bool {
        self.x_side.is_finite() && self.y_side.is_finite()
    }

    /// `c_Z = sup_z Σ |z(i,j)|`.
    pub fn l1_radius(&self) -> f64 {
        match (&self.x_side.kind, &self.y_side.kind) {
            // one power of d, so dual pairs give d exactly
            (ExtremeKind::Sampler(a), ExtremeKind::Sampler(b)) => {
                let e = |s: &SphereSampler| 1.0 - 1.0 / s.spec.family().exponent();
                (self.dim() as f64).powf(e(a) + e(b))
            }
            _ => self.x_side.max_l1() * self.y_side.max_l1(),
        }
    }

    /// Elements as row-major `d²` vectors.
    ///
    /// Finite sides are enumerated exactly. A sampled side is drawn so the
    /// total is about `cloud_size`; two sampled sides are drawn jointly from
    /// one `2d`-dimensional low-discrepancy sequence.
    pub fn elements(&self, cloud_size: usize) -> Vec<Vec<f64>> {
        use ExtremeKind::*;
        let outer = |x: &[f64], y: &[f64]| -> Vec<f64> {
            x.iter().flat_map(|a| y.iter().map(move |b| a * b)).collect()
        };
        match (&self.x_side.kind, &self.y_side.kind) {
            (Finite(xs), Finite(ys)) => xs
                .iter()
                .flat_map(|x| ys.iter().map(move |y| outer(x, y)))
                .collect(),
            (Finite(xs), Sampler(s)) => {
                let ys = s.sample(cloud_size.div_ceil(xs.len()).max(1));
                ys.iter()
                    .flat_map(|y| xs.iter().map(move |x| outer(x, y)))
                    .collect()
            }
            (Sampler(s), Finite(ys)) => {
                let xs = s.sample(cloud_size.div_ceil(ys.len()).max(1));
                xs.iter()
                    .flat_map(|x| ys.iter().map(move |y| outer(x, y)))
                    .collect()
            }
            (Sampler(sx), Sampler(sy)) => {
                let d = self.dim();
                let seed = sx.seed().rotate_left(17) ^ sy.seed();
                low_discrepancy(2 * d, cloud_size, seed)
                    .iter()
                    .map(|u| outer(&sx.project(&u[..d]), &sy.project(&u[d..])))
                    .collect()
            }
        }
    }
}

/// `max_{z ∈ Z} Σ Θ(i,j) z(i,j)` over the enumerated or sampled set.
pub fn bilinear_norm(theta: &Matrix, z: &TensorExtremeSet, cloud_size: usize) -> Result<f64> {
    if theta.dim() != z.dim() {
        return usage("matrix and tensor set dimensions differ");
    }
    bilinear_max(theta, &z.elements(cloud_size))
}

pub fn bilinear_max(theta: &Matrix, elements: &[Vec<f64>]) -> Result<f64> {
    if elements.is_empty() {
        return usage("bilinear norm over an empty set");
    }
    let t = theta.as_slice();
    Ok(elements
        .iter()
        .map(|z| z.iter().zip(t).map(|(a, b)| a * b).sum::<f64>())
        .fold(f64::NEG_INFINITY, f64::max))
}
