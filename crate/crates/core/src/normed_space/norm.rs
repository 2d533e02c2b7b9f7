use serde::{Deserialize, Serialize};

use super::extreme::{extreme_points, ExtremeKind};
use super::matrix::Matrix;
use crate::error::{usage, Result};

/// Norm family on `R^d`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum NormFamily {
    L1,
    L2,
    Lp { p: f64 },
    Linf,
}

impl NormFamily {
    /// Exponent of the family; `∞` for the max norm.
    pub fn exponent(self) -> f64 {
        match self {
            NormFamily::L1 => 1.0,
            NormFamily::L2 => 2.0,
            NormFamily::Lp { p } => p,
            NormFamily::Linf => f64::INFINITY,
        }
    }

    /// Canonical family for an exponent.
    pub fn from_exponent(p: f64) -> NormFamily {
        if p == 1.0 {
            NormFamily::L1
        } else if p == 2.0 {
            NormFamily::L2
        } else if p.is_infinite() {
            NormFamily::Linf
        } else {
            NormFamily::Lp { p }
        }
    }
}

/// A finite-dimensional normed space `(R^d, ||·||)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormSpec {
    dim: usize,
    family: NormFamily,
}

impl NormSpec {
    pub fn new(dim: usize, family: NormFamily) -> Result<Self> {
        if dim == 0 {
            return usage("norm dimension must be at least 1");
        }
        if let NormFamily::Lp { p } = family {
            if !(p >= 1.0) {
                return usage(format!("lp norm needs p >= 1, got {p}"));
            }
        }
        Ok(NormSpec { dim, family: NormFamily::from_exponent(family.exponent()) })
    }

    pub fn l1(dim: usize) -> Result<Self> {
        Self::new(dim, NormFamily::L1)
    }

    pub fn l2(dim: usize) -> Result<Self> {
        Self::new(dim, NormFamily::L2)
    }

    pub fn linf(dim: usize) -> Result<Self> {
        Self::new(dim, NormFamily::Linf)
    }

    pub fn lp(dim: usize, p: f64) -> Result<Self> {
        Self::new(dim, NormFamily::Lp { p })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn family(&self) -> NormFamily {
        self.family
    }

    /// The conjugate space: `ℓ1 ↔ ℓ∞`, `ℓ2 ↔ ℓ2`, `ℓp ↔ ℓq` with `1/p + 1/q = 1`.
    pub fn dual(&self) -> NormSpec {
        let p = self.family.exponent();
        let q = if p == 1.0 {
            f64::INFINITY
        } else if p.is_infinite() {
            1.0
        } else {
            p / (p - 1.0)
        };
        NormSpec { dim: self.dim, family: NormFamily::from_exponent(q) }
    }

    /// Norm without the length check.
    pub(crate) fn eval(&self, x: &[f64]) -> f64 {
        match self.family {
            NormFamily::L1 => x.iter().map(|v| v.abs()).sum(),
            NormFamily::L2 => x.iter().map(|v| v * v).sum::<f64>().sqrt(),
            NormFamily::Linf => x.iter().fold(0.0, |m, v| m.max(v.abs())),
            NormFamily::Lp { p } => {
                // rescale by the max entry to avoid overflow for large p
                let m = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                if m == 0.0 {
                    return 0.0;
                }
                m * x.iter().map(|v| (v.abs() / m).powf(p)).sum::<f64>().powf(1.0 / p)
            }
        }
    }
}

/// `||x||` under `spec`.
pub fn vector_norm(x: &[f64], spec: &NormSpec) -> Result<f64> {
    if x.len() != spec.dim {
        return usage(format!("vector of length {} in a {}-dimensional space", x.len(), spec.dim));
    }
    Ok(spec.eval(x))
}

/// Induced operator norm `sup_{x != 0} ||Ax|| / ||x||`.
///
/// `ℓ1` and `ℓ∞` are exact maxima over the finite extreme points of the unit
/// ball. `ℓ2` is the square root of the top eigenvalue of `AᵀA` (closed form
/// for `d <= 2`, power iteration otherwise). Other `ℓp` are estimated by a
/// nonlinear power iteration seeded from sphere samples; the result is a
/// lower estimate that is exact up to the iteration tolerance when the
/// iteration reaches the global maximizer.
pub fn operator_norm(a: &Matrix, spec: &NormSpec) -> Result<f64> {
    if a.dim() != spec.dim {
        return usage(format!(
            "{0}x{0} matrix in a {1}-dimensional space",
            a.dim(),
            spec.dim
        ));
    }
    match spec.family {
        NormFamily::L2 => Ok(spectral_norm(a)),
        NormFamily::L1 | NormFamily::Linf => {
            let ext = extreme_points(spec);
            let ExtremeKind::Finite(points) = ext.kind() else {
                unreachable!("l1 and linf balls are polytopes")
            };
            Ok(points
                .iter()
                .map(|x| spec.eval(&a.apply(x)))
                .fold(0.0, f64::max))
        }
        NormFamily::Lp { p } => Ok(lp_operator_norm(a, spec, p)),
    }
}

/// Tolerance on the relative eigen-residual for [`power_iteration`].
pub const POWER_TOL: f64 = 1e-10;
const POWER_MAX_ITERS: usize = 200_000;

/// Largest eigenvalue of a symmetric positive semidefinite matrix.
///
/// Stops once `||Wv - λv|| <= tol · λ`, which bounds the eigenvalue error by
/// the same quantity.
pub fn power_iteration(w: &Matrix, tol: f64) -> f64 {
    let d = w.dim();
    if d == 0 || w.is_zero() {
        return 0.0;
    }
    // start from the heaviest column, nudged off any coordinate subspace
    let mut best_col = 0;
    let mut best_norm = -1.0;
    for j in 0..d {
        let n: f64 = (0..d).map(|i| w[(i, j)] * w[(i, j)]).sum();
        if n > best_norm {
            best_norm = n;
            best_col = j;
        }
    }
    let scale = best_norm.sqrt();
    let mut v: Vec<f64> = (0..d)
        .map(|i| w[(i, best_col)] + 1e-3 * scale / (i + 1) as f64)
        .collect();
    normalize(&mut v);
    let mut lambda = 0.0;
    for _ in 0..POWER_MAX_ITERS {
        let wv = w.apply(&v);
        lambda = dot(&v, &wv);
        let resid: f64 = wv
            .iter()
            .zip(&v)
            .map(|(a, b)| (a - lambda * b).powi(2))
            .sum::<f64>()
            .sqrt();
        let nrm = wv.iter().map(|a| a * a).sum::<f64>().sqrt();
        if nrm == 0.0 {
            return 0.0;
        }
        if resid <= tol * lambda.abs() {
            break;
        }
        v = wv.into_iter().map(|a| a / nrm).collect();
    }
    lambda
}

/// Spectral norm via power iteration on `AᵀA`, for any dimension.
pub fn spectral_norm_power(a: &Matrix) -> f64 {
    power_iteration(&a.gram(), POWER_TOL).max(0.0).sqrt()
}

/// Closed-form spectral norm of a 2×2 matrix.
pub fn spectral_norm_2x2(a: &Matrix) -> f64 {
    assert_eq!(a.dim(), 2);
    let g = a.gram();
    let (p, q, r) = (g[(0, 0)], g[(0, 1)], g[(1, 1)]);
    let disc = ((p - r) * (p - r) + 4.0 * q * q).sqrt();
    (0.5 * (p + r + disc)).max(0.0).sqrt()
}

fn spectral_norm(a: &Matrix) -> f64 {
    match a.dim() {
        1 => a[(0, 0)].abs(),
        2 => spectral_norm_2x2(a),
        _ => spectral_norm_power(a),
    }
}

fn lp_operator_norm(a: &Matrix, spec: &NormSpec, p: f64) -> f64 {
    if a.is_zero() {
        return 0.0;
    }
    let q = p / (p - 1.0);
    let d = spec.dim;
    let mut starts: Vec<Vec<f64>> = (0..d)
        .map(|i| {
            let mut e = vec![0.0; d];
            e[i] = 1.0;
            e
        })
        .collect();
    starts.extend(super::extreme::SphereSampler::new(*spec, 0x5eed).sample(256));
    let mut scored: Vec<(f64, Vec<f64>)> = starts
        .into_iter()
        .map(|x| (spec.eval(&a.apply(&x)), x))
        .collect();
    scored.sort_by(|l, r| r.0.total_cmp(&l.0));
    let mut best = scored[0].0;
    for (_, mut x) in scored.into_iter().take(8) {
        for _ in 0..500 {
            let y = a.apply(&x);
            let gy: Vec<f64> = y.iter().map(|v| v.signum() * v.abs().powf(p - 1.0)).collect();
            let z = a.apply_transpose(&gy);
            let mut nx: Vec<f64> = z.iter().map(|v| v.signum() * v.abs().powf(q - 1.0)).collect();
            let n = spec.eval(&nx);
            if n == 0.0 {
                break;
            }
            nx.iter_mut().for_each(|v| *v /= n);
            let val = spec.eval(&a.apply(&nx));
            let prev = spec.eval(&a.apply(&x));
            x = nx;
            best = best.max(val);
            if (val - prev).abs() <= 1e-14 * val.max(1.0) {
                break;
            }
        }
    }
    best
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn normalize(v: &mut [f64]) {
    let n = v.iter().map(|a| a * a).sum::<f64>().sqrt();
    if n > 0.0 {
        v.iter_mut().for_each(|a| *a /= n);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;

    fn m22() -> Matrix {
        Matrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap()
    }

    #[test]
    fn vector_norm_cases() {
        for spec in [NormSpec::l1(3).unwrap(), NormSpec::l2(3).unwrap(), NormSpec::linf(3).unwrap(), NormSpec::lp(3, 3.5).unwrap()] {
            assert!((vector_norm(&[1.0, 0.0, 0.0], &spec).unwrap() - 1.0).abs() < 1e-15);
        }
        assert_eq!(vector_norm(&[3.0, 4.0], &NormSpec::l2(2).unwrap()).unwrap(), 5.0);
        assert_eq!(vector_norm(&[1.0, -2.0, 3.0], &NormSpec::linf(3).unwrap()).unwrap(), 3.0);
        assert!(matches!(vector_norm(&[1.0], &NormSpec::l2(2).unwrap()), Err(Error::Usage(_))));
    }

    #[test]
    fn invalid_specs() {
        assert!(NormSpec::l2(0).is_err());
        assert!(NormSpec::lp(2, 0.5).is_err());
        assert_eq!(NormSpec::lp(2, 1.0).unwrap().family(), NormFamily::L1);
    }

    #[test]
    fn dual_table() {
        assert_eq!(NormSpec::l1(3).unwrap().dual().family(), NormFamily::Linf);
        assert_eq!(NormSpec::linf(3).unwrap().dual().family(), NormFamily::L1);
        assert_eq!(NormSpec::l2(3).unwrap().dual().family(), NormFamily::L2);
        assert_eq!(NormSpec::lp(3, 3.0).unwrap().dual().family(), NormFamily::Lp { p: 1.5 });
    }

    #[test]
    fn operator_norm_reference_values() {
        let a = m22();
        // λmax(AᵀA) = (30 + √884) / 2
        let expect = ((30.0 + 884f64.sqrt()) / 2.0).sqrt();
        let got = operator_norm(&a, &NormSpec::l2(2).unwrap()).unwrap();
        assert!((got - expect).abs() < 1e-12);
        assert!((got - 5.4650).abs() < 1e-4);
        assert!((spectral_norm_power(&a) - expect).abs() < 1e-9);
        assert_eq!(operator_norm(&a, &NormSpec::l1(2).unwrap()).unwrap(), 6.0);
        assert_eq!(operator_norm(&a, &NormSpec::linf(2).unwrap()).unwrap(), 7.0);
        for spec in [NormSpec::l1(4).unwrap(), NormSpec::l2(4).unwrap(), NormSpec::linf(4).unwrap(), NormSpec::lp(4, 3.0).unwrap()] {
            let got = operator_norm(&Matrix::identity(4), &spec).unwrap();
            assert!((got - 1.0).abs() < 1e-9, "{spec:?}: {got}");
        }
    }

    #[test]
    fn lp_operator_norm_interpolates() {
        // diagonal matrices have ℓp norm max |a_ii| for every p
        let mut a = Matrix::zeros(3);
        a[(0, 0)] = 2.0;
        a[(1, 1)] = -5.0;
        a[(2, 2)] = 1.0;
        let got = operator_norm(&a, &NormSpec::lp(3, 3.0).unwrap()).unwrap();
        assert!((got - 5.0).abs() < 1e-9);
        // Riesz–Thorin: ||A||_p <= ||A||_1^{1/p} ||A||_∞^{1-1/p}
        let b = Matrix::from_rows(&[vec![1.0, 2.0, 0.5], vec![-3.0, 4.0, 1.0], vec![0.0, 1.0, -2.0]]).unwrap();
        let n1 = operator_norm(&b, &NormSpec::l1(3).unwrap()).unwrap();
        let ninf = operator_norm(&b, &NormSpec::linf(3).unwrap()).unwrap();
        let n3 = operator_norm(&b, &NormSpec::lp(3, 3.0).unwrap()).unwrap();
        assert!(n3 <= n1.powf(1.0 / 3.0) * ninf.powf(2.0 / 3.0) + 1e-9);
        assert!(n3 > 0.0);
    }

    #[test]
    fn dimension_mismatch() {
        assert!(matches!(operator_norm(&m22(), &NormSpec::l2(3).unwrap()), Err(Error::Usage(_))));
    }
}
