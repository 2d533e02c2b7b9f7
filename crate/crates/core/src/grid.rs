//! Grid construction and small numerical helpers shared across modules.

/// `count` log-spaced points from `lo` to `hi` inclusive.
pub fn log_spaced(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi >= lo, "log_spaced needs 0 < lo <= hi");
    match count {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let (a, b) = (lo.ln(), hi.ln());
            let step = (b - a) / (count - 1) as f64;
            let mut v: Vec<f64> = (0..count).map(|i| (a + step * i as f64).exp()).collect();
            // pin the endpoints exactly
            v[0] = lo;
            v[count - 1] = hi;
            v
        }
    }
}

/// `count` evenly spaced points from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let step = (hi - lo) / (count - 1) as f64;
            let mut v: Vec<f64> = (0..count).map(|i| lo + step * i as f64).collect();
            v[count - 1] = hi;
            v
        }
    }
}

/// Ordinary least squares fit of `y = intercept + slope * x`.
///
/// Returns `None` for fewer than two points or a degenerate abscissa.
pub fn linear_fit(x: &[f64], y: &[f64]) -> Option<(f64, f64)> {
    let n = x.len();
    if n < 2 || y.len() != n {
        return None;
    }
    let mx = x.iter().sum::<f64>() / n as f64;
    let my = y.iter().sum::<f64>() / n as f64;
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    if sxx <= 0.0 {
        return None;
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    Some((my - slope * mx, slope))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_grid_endpoints_and_ratio() {
        let g = log_spaced(4.0, 1e4, 2000);
        assert_eq!(g.len(), 2000);
        assert_eq!(g[0], 4.0);
        assert_eq!(g[1999], 1e4);
        let r0 = g[1] / g[0];
        let r1 = g[1999] / g[1998];
        assert!((r0 - r1).abs() < 1e-9);
    }

    #[test]
    fn fit_recovers_line() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let y: Vec<f64> = x.iter().map(|v| 0.5 + 2.0 * v).collect();
        let (c, s) = linear_fit(&x, &y).unwrap();
        assert!((c - 0.5).abs() < 1e-12);
        assert!((s - 2.0).abs() < 1e-12);
        assert!(linear_fit(&[1.0], &[1.0]).is_none());
        assert!(linear_fit(&[1.0, 1.0], &[1.0, 2.0]).is_none());
    }
}
