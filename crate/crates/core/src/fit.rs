//! Least-squares fit of `log T` against `log ε`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MIN_FIT_POINTS: usize = 4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub eps_values: Vec<f64>,
    pub t_values: Vec<f64>,
}

/// Fits `ln T = intercept + slope · ln ε` by ordinary least squares.
pub fn fit_power_law(eps: &[f64], t: &[f64]) -> Result<FitResult> {
    if eps.len() != t.len() {
        return Err(Error::Degenerate("eps and T series differ in length".into()));
    }
    if eps.len() < MIN_FIT_POINTS {
        return Err(Error::Degenerate(format!(
            "need at least {MIN_FIT_POINTS} points, got {}",
            eps.len()
        )));
    }
    if eps.iter().chain(t).any(|v| !(v.is_finite() && *v > 0.0)) {
        return Err(Error::Degenerate("fit needs finite positive values".into()));
    }
    let mut sorted = eps.to_vec();
    sorted.sort_by(f64::total_cmp);
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::Degenerate("repeated eps values".into()));
    }

    let x: Vec<f64> = eps.iter().map(|v| v.ln()).collect();
    let y: Vec<f64> = t.iter().map(|v| v.ln()).collect();
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|v| (v - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy == 0.0 { 1.0 } else { (sxy * sxy / (sxx * syy)).clamp(0.0, 1.0) };
    Ok(FitResult { slope, intercept, r_squared, eps_values: eps.to_vec(), t_values: t.to_vec() })
}

/// `n` log-spaced values from `lo` to `hi` inclusive.
pub fn log_space(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n).map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn exact_power_law() {
        let eps = log_space(1e-3, 1e-1, 6);
        let t: Vec<f64> = eps.iter().map(|e| 3.0 * e.powf(-2.0 / 3.0)).collect();
        let fit = fit_power_law(&eps, &t).unwrap();
        assert_relative_eq!(fit.slope, -2.0 / 3.0, max_relative = 1e-12);
        assert_relative_eq!(fit.intercept, 3f64.ln(), max_relative = 1e-12);
        assert_relative_eq!(fit.r_squared, 1.0, max_relative = 1e-12);
    }

    #[test]
    fn degenerate_inputs() {
        assert!(fit_power_law(&[0.1], &[1.0]).is_err());
        assert!(fit_power_law(&[0.1, 0.1, 0.2, 0.3], &[1.0, 1.0, 2.0, 3.0]).is_err());
        assert!(fit_power_law(&[0.1, 0.2, 0.3, 0.4], &[1.0, 2.0, 3.0]).is_err());
        assert!(fit_power_law(&[0.1, 0.2, 0.3, 0.4], &[1.0, -2.0, 3.0, 4.0]).is_err());
    }

    #[test]
    fn log_space_endpoints() {
        let v = log_space(0.05, 0.8, 6);
        assert_eq!(v.len(), 6);
        assert_relative_eq!(v[0], 0.05, max_relative = 1e-14);
        assert_relative_eq!(v[5], 0.8, max_relative = 1e-14);
    }
}
