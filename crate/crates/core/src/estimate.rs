//! Quadratic variations and the Hurst / volatility estimators.

use serde::Serialize;

use crate::drift::DriftSpec;
use crate::error::{ensure, Error, Result};
use crate::transform::theta_discrete;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimationResult {
    pub h_hat: f64,
    pub sigma_hat: f64,
    /// `V_{I¹,1}` with `I¹ = {0, …, n-1}`.
    pub v1: f64,
    /// `V_{I²,2}` with `I² = {0, 2, …, 2(⌊n/2⌋ - 1)}`.
    pub v2: f64,
    pub n: usize,
    pub horizon: f64,
}

/// `Σ_{i ∈ I} (W_{i+k} - W_i)²` over grid values `W_0..W_n`.
pub fn quadratic_variation(values: &[f64], index_set: &[usize], k: usize) -> Result<f64> {
    let n = values.len().saturating_sub(1);
    let mut acc = 0.0;
    for &i in index_set {
        if i + k > n {
            return Err(Error::Parameter(format!(
                "index {i} with lag {k} exceeds the grid of {n} steps"
            )));
        }
        acc += (values[i + k] - values[i]).powi(2);
    }
    Ok(acc)
}

/// `(V_{I¹,1}, V_{I²,2})` for a series of `n + 1` values.
pub fn variations(values: &[f64]) -> Result<(f64, f64)> {
    let n = values.len().saturating_sub(1);
    ensure(n >= 4, || format!("need at least 4 steps, got {n}"))?;
    let i1: Vec<usize> = (0..n).collect();
    let i2: Vec<usize> = (0..n / 2).map(|i| 2 * i).collect();
    Ok((quadratic_variation(values, &i1, 1)?, quadratic_variation(values, &i2, 2)?))
}

fn hurst_from(v1: f64, v2: f64) -> Result<f64> {
    if !(v1 > 0.0 && v2 > 0.0) || !(v1.is_finite() && v2.is_finite()) {
        return Err(Error::Degenerate(format!(
            "quadratic variations must be positive (v1 = {v1}, v2 = {v2})"
        )));
    }
    Ok(0.5 - (v1 / v2).ln() / (2.0 * std::f64::consts::LN_2))
}

/// `ĥ = 1/2 - log(V_{I¹,1} / V_{I²,2}) / (2 log 2)`.
pub fn hurst_estimator(values: &[f64], n: usize) -> Result<f64> {
    ensure(values.len() == n + 1, || format!("{} values for n = {n}", values.len()))?;
    let (v1, v2) = variations(values)?;
    hurst_from(v1, v2)
}

fn sigma_from(v1: f64, h_hat: f64, horizon: f64, n: usize) -> Result<f64> {
    ensure(h_hat > 0.0 && h_hat < 1.0, || format!("h_hat must lie in (0,1), got {h_hat}"))?;
    ensure(horizon > 0.0, || "horizon must be positive".to_string())?;
    if !(v1 > 0.0) {
        return Err(Error::Degenerate("zero quadratic variation".into()));
    }
    let n = n as f64;
    Ok((v1 * n.powf(2.0 * h_hat - 1.0) / horizon.powf(2.0 * h_hat)).sqrt())
}

/// Moment plug-in `σ̂ = sqrt(V_{I¹,1} n^{2ĥ-1} / T^{2ĥ})`, which inverts
/// `E V_{I¹,1} = n σ² (T/n)^{2H}` for pure fBm.
pub fn sigma_estimator(values: &[f64], h_hat: f64, horizon: f64, n: usize) -> Result<f64> {
    ensure(values.len() == n + 1, || format!("{} values for n = {n}", values.len()))?;
    let (v1, _) = variations(values)?;
    sigma_from(v1, h_hat, horizon, n)
}

/// Both estimators on an already transformed (Ornstein-Uhlenbeck) series.
pub fn estimate_series(values: &[f64], horizon: f64, n: usize) -> Result<EstimationResult> {
    ensure(values.len() == n + 1, || format!("{} values for n = {n}", values.len()))?;
    let (v1, v2) = variations(values)?;
    let h_hat = hurst_from(v1, v2)?;
    let sigma_hat = sigma_from(v1, h_hat, horizon, n)?;
    Ok(EstimationResult { h_hat, sigma_hat, v1, v2, n, horizon })
}

/// Applies `Θⁿ` to observations of the singular scheme and estimates
/// `(H, σ)` on the result.
pub fn estimate_from_observations(spec: &DriftSpec, knots: &[f64], horizon: f64, n: usize) -> Result<EstimationResult> {
    let y = theta_discrete(spec, knots, horizon, n)?;
    estimate_series(&y, horizon, n)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_path_variation() {
        let w = [0.0, 0.25, 0.5, 0.75, 1.0];
        assert!((quadratic_variation(&w, &[0, 1, 2, 3], 1).unwrap() - 0.25).abs() < 1e-15);
        assert_eq!(quadratic_variation(&w, &[0, 1, 2, 3], 0).unwrap(), 0.0);
        assert!(quadratic_variation(&w, &[0, 4], 1).is_err());
        assert!(quadratic_variation(&w, &[3], 2).is_err());
    }

    #[test]
    fn engineered_ratio_gives_exact_h() {
        // Alternating steps a, c: V1 = (n/2)(a² + c²), V2 = (n/2)(a + c)².
        // Pick a, c so that V1/V2 = 2^{-0.4}.
        let target = 2f64.powf(-0.4);
        // (a² + c²)/(a + c)² = target with a = 1: solve for c.
        let (aa, bb, cc) = (1.0 - target, -2.0 * target, 1.0 - target);
        let c = (-bb + (bb * bb - 4.0 * aa * cc).sqrt()) / (2.0 * aa);
        let n = 16;
        let mut w = vec![0.0];
        for i in 0..n {
            let step = if i % 2 == 0 { 1.0 } else { c };
            w.push(w[i] + step);
        }
        let h = hurst_estimator(&w, n).unwrap();
        assert!((h - 0.7).abs() < 1e-12, "{h}");
    }

    #[test]
    fn constant_series_is_degenerate() {
        let y = vec![2.0; 33];
        assert!(matches!(hurst_estimator(&y, 32), Err(Error::Degenerate(_))));
        assert!(matches!(estimate_series(&y, 1.0, 32), Err(Error::Degenerate(_))));
        assert!(hurst_estimator(&[0.0, 1.0, 0.0], 2).is_err());
    }

    #[test]
    fn sigma_is_homogeneous() {
        let y: Vec<f64> = (0..=64).map(|k| ((k * k) as f64 * 0.37).sin()).collect();
        let s1 = sigma_estimator(&y, 0.7, 2.0, 64).unwrap();
        let scaled: Vec<f64> = y.iter().map(|v| 3.5 * v).collect();
        let s2 = sigma_estimator(&scaled, 0.7, 2.0, 64).unwrap();
        assert!((s2 - 3.5 * s1).abs() < 1e-12 * s2);
        assert!(sigma_estimator(&y, 1.2, 2.0, 64).is_err());
    }
}
