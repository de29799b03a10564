//! Derivatives of the solution map with respect to the initial value and
//! the driving noise, and the density formula built on them.

pub mod density;
mod quadrature;

pub use density::{empirical_density, histogram_on_edges, nv_density_estimate, Histogram, NvDensity, NvOptions};
pub use quadrature::gauss_legendre;

use serde::Serialize;

use crate::drift::DriftSpec;
use crate::error::{ensure, Error, Result};
use crate::noise::fgn_autocovariance;
use crate::scheme::EulerPath;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Direction {
    /// Perturbation `(ξ, h)` of the initial value and the driver.
    Path { xi: f64 },
    /// Malliavin row `s ↦ D_s X_t` for a fixed `t`.
    Row { t: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct DerivativePath {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub direction: Direction,
}

fn b_dot_knots(spec: &DriftSpec, knots: &[f64]) -> Result<Vec<f64>> {
    knots.iter().map(|&x| spec.b_dot(x)).collect()
}

/// Solves `D_t = ξ + ∫_0^t ḃ(X_s) D_s ds + σ h_t` on the grid of `path`.
///
/// Each step multiplies by the integrating factor `exp(∫ḃ)` over the cell
/// (trapezoid in `ḃ`) and adds the increment of `σh` weighted by the mean of
/// the factor at the two ends.
pub fn directional_derivative(
    spec: &DriftSpec,
    sigma: f64,
    path: &EulerPath,
    xi: f64,
    h: &[f64],
) -> Result<DerivativePath> {
    ensure(h.len() == path.knots.len(), || {
        format!("direction has {} values, path has {} knots", h.len(), path.knots.len())
    })?;
    let dt = path.grid.dt();
    let bd = b_dot_knots(spec, &path.knots)?;
    let mut values = Vec::with_capacity(h.len());
    let mut d = xi + sigma * h[0];
    values.push(d);
    for k in 0..path.grid.n {
        let factor = (0.5 * dt * (bd[k] + bd[k + 1])).exp();
        d = factor * d + sigma * (h[k + 1] - h[k]) * 0.5 * (factor + 1.0);
        values.push(d);
    }
    Ok(DerivativePath { times: path.grid.times(), values, direction: Direction::Path { xi } })
}

/// `∫_s^t` of the piecewise-linear interpolant of the knot values `g`.
fn integrate_linear(g: &[f64], dt: f64, s: f64, t: f64) -> f64 {
    let n = g.len() - 1;
    let at = |u: f64| crate::scheme::interpolate(g, dt, u);
    let ks = ((s / dt).ceil() as usize).min(n);
    let kt = ((t / dt).floor() as usize).min(n);
    if ks > kt {
        return 0.5 * (t - s) * (at(s) + at(t));
    }
    let mut acc = 0.5 * (ks as f64 * dt - s) * (at(s) + g[ks]);
    for k in ks..kt {
        acc += 0.5 * dt * (g[k] + g[k + 1]);
    }
    acc + 0.5 * (t - kt as f64 * dt) * (g[kt] + at(t))
}

/// `D_s X_t = σ 1_{s ≤ t} exp(∫_s^t ḃ(X_u) du)`, with `ḃ(X_u)` replaced by
/// the linear interpolation of its knot values.
pub fn malliavin_derivative(spec: &DriftSpec, sigma: f64, path: &EulerPath, s: f64, t: f64) -> Result<f64> {
    let horizon = path.grid.horizon;
    ensure((0.0..=horizon).contains(&s) && (0.0..=horizon).contains(&t), || {
        format!("s = {s}, t = {t} must lie in [0, {horizon}]")
    })?;
    if s > t {
        return Ok(0.0);
    }
    let bd = b_dot_knots(spec, &path.knots)?;
    Ok(sigma * integrate_linear(&bd, path.grid.dt(), s, t).exp())
}

/// `σ exp(∫_0^T ḃ(X_u) du)`: the lower bound of `D_s X_t` over `s ≤ t`.
pub fn malliavin_lower_bound(spec: &DriftSpec, sigma: f64, path: &EulerPath) -> Result<f64> {
    malliavin_derivative(spec, sigma, path, 0.0, path.grid.horizon)
}

/// Derivatives `∂X_m / ∂ΔB_j`, `j = 0..m`, of the implicit scheme's knot
/// `m` with respect to the driver increments:
/// `σ Π_{i=j+1..m} 1/(1 - dt ḃ(X_i))`.
pub fn scheme_malliavin_row(spec: &DriftSpec, sigma: f64, knots: &[f64], dt: f64, m: usize) -> Result<Vec<f64>> {
    ensure(m < knots.len(), || format!("knot {m} outside the path"))?;
    let mut row = vec![0.0; m];
    let mut acc = sigma;
    for j in (0..m).rev() {
        acc /= 1.0 - dt * spec.b_dot(knots[j + 1])?;
        row[j] = acc;
    }
    Ok(row)
}

/// Inner product in the reproducing kernel space of fBm with `H > 1/2`
/// of two step functions constant on the cells `[k dt, (k+1) dt)`:
/// `H(2H-1) ∫∫ φ(s) ψ(r) |s-r|^{2H-2} ds dr`.
///
/// Each cell pair integrates in closed form to the fGn autocovariance at the
/// cell lag, so the result is exact for step functions.
pub fn rkhs_inner_product(phi: &[f64], psi: &[f64], hurst: f64, dt: f64) -> Result<f64> {
    let gamma = rkhs_weights(phi.len(), hurst, dt)?;
    ensure(psi.len() == phi.len(), || "step functions have different lengths".to_string())?;
    Ok(toeplitz_form(phi, psi, &gamma))
}

pub(crate) fn rkhs_weights(len: usize, hurst: f64, dt: f64) -> Result<Vec<f64>> {
    if !(hurst > 0.5 && hurst < 1.0) {
        return Err(Error::Unsupported(format!(
            "the step-function inner product needs H in (1/2, 1), got {hurst}"
        )));
    }
    ensure(dt > 0.0, || "dt must be positive".to_string())?;
    Ok((0..len).map(|k| fgn_autocovariance(k, hurst, dt)).collect())
}

/// `Σ_{j,k} φ_j ψ_k γ_{|j-k|}`.
pub(crate) fn toeplitz_form(phi: &[f64], psi: &[f64], gamma: &[f64]) -> f64 {
    let n = phi.len();
    let mut acc = 0.0;
    for j in 0..n {
        if phi[j] == 0.0 {
            continue;
        }
        let mut row = psi[j] * gamma[0];
        for k in 0..j {
            row += psi[k] * gamma[j - k];
        }
        for k in j + 1..n {
            row += psi[k] * gamma[k - j];
        }
        acc += phi[j] * row;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::fbm_covariance;
    use crate::scheme::TimeGrid;

    fn sample_path() -> (DriftSpec, EulerPath) {
        let spec = DriftSpec::b1_unit(2.0).unwrap();
        let grid = TimeGrid::new(1.0, 200).unwrap();
        let knots: Vec<f64> = (0..=200).map(|k| 1.0 + 0.3 * (k as f64 * 0.05).sin()).collect();
        (spec, EulerPath::new(grid, knots).unwrap())
    }

    #[test]
    fn homogeneous_directional_derivative() {
        let (spec, path) = sample_path();
        let d = directional_derivative(&spec, 0.3, &path, 1.5, &vec![0.0; 201]).unwrap();
        let dt = path.grid.dt();
        let mut integral = 0.0;
        for k in 0..200 {
            integral += 0.5 * dt * (spec.b_dot(path.knots[k]).unwrap() + spec.b_dot(path.knots[k + 1]).unwrap());
            assert!((d.values[k + 1] - 1.5 * integral.exp()).abs() < 1e-8);
        }
        let zero = directional_derivative(&spec, 0.3, &path, 0.0, &vec![0.0; 201]).unwrap();
        assert!(zero.values.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn row_bounds() {
        let (spec, path) = sample_path();
        let sigma = 0.3;
        assert_eq!(malliavin_derivative(&spec, sigma, &path, 0.6, 0.4).unwrap(), 0.0);
        assert!((malliavin_derivative(&spec, sigma, &path, 0.37, 0.37).unwrap() - sigma).abs() < 1e-15);
        let lower = malliavin_lower_bound(&spec, sigma, &path).unwrap();
        for (s, t) in [(0.0, 1.0), (0.1, 0.9), (0.333, 0.334), (0.0, 0.0013), (0.5, 1.0)] {
            let d = malliavin_derivative(&spec, sigma, &path, s, t).unwrap();
            assert!(d > 0.0 && d <= sigma && d >= lower, "{s} {t} {d}");
        }
        assert!(malliavin_derivative(&spec, sigma, &path, -0.1, 0.5).is_err());
    }

    #[test]
    fn linear_integration_is_exact_for_linear_data() {
        let g: Vec<f64> = (0..=10).map(|k| 2.0 * k as f64 * 0.1 + 1.0).collect();
        // ∫_s^t (2u + 1) du
        for (s, t) in [(0.0, 1.0), (0.03, 0.07), (0.15, 0.85), (0.2, 0.2)] {
            let exact = (t * t + t) - (s * s + s);
            assert!((integrate_linear(&g, 0.1, s, t) - exact).abs() < 1e-14);
        }
    }

    #[test]
    fn rkhs_matches_covariance() {
        let n = 512;
        let dt = 1.0 / n as f64;
        let one_t = vec![1.0; n];
        let one_s: Vec<f64> = (0..n).map(|k| if k < n / 2 { 1.0 } else { 0.0 }).collect();
        let ip = rkhs_inner_product(&one_t, &one_s, 0.7, dt).unwrap();
        let cov = fbm_covariance(0.5, 1.0, 0.7).unwrap();
        assert!((ip - cov).abs() < 1e-6 * cov);
        let back = rkhs_inner_product(&one_s, &one_t, 0.7, dt).unwrap();
        assert!((ip - back).abs() < 1e-14);
        assert!(matches!(rkhs_inner_product(&one_t, &one_s, 0.5, dt), Err(Error::Unsupported(_))));
    }

    #[test]
    fn scheme_row_matches_perturbation() {
        let spec = DriftSpec::b1_unit(2.0).unwrap();
        let dt = 0.01;
        let incs: Vec<f64> = (0..50).map(|k| 0.05 * ((k * 7) as f64).sin()).collect();
        let knots = crate::scheme::solve_increments(&spec, 0.3, 1.0, dt, &incs).unwrap();
        let row = scheme_malliavin_row(&spec, 0.3, &knots, dt, 50).unwrap();
        let eps = 1e-6;
        for j in [0, 17, 49] {
            let mut up = incs.clone();
            up[j] += eps;
            let mut dn = incs.clone();
            dn[j] -= eps;
            let xu = crate::scheme::solve_increments(&spec, 0.3, 1.0, dt, &up).unwrap()[50];
            let xd = crate::scheme::solve_increments(&spec, 0.3, 1.0, dt, &dn).unwrap()[50];
            let fd = (xu - xd) / (2.0 * eps);
            assert!((fd - row[j]).abs() < 1e-6 * row[j].abs(), "{j}: {fd} vs {}", row[j]);
        }
    }
}
