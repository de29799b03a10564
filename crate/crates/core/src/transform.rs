//! Maps linking the singular equation to the fractional Ornstein-Uhlenbeck
//! process, and power changes of variable to multiplicative-noise models.
//!
//! With `b_R(x) = b(x) + R x` and `R` the drift's growth constant:
//!
//! ```text
//! Θ(X)_t   = X_t - (x0 - y0) e^{-Rt} - ∫_0^t e^{-R(t-s)} b_R(X_s) ds
//! Θⁿ(X)_k  = X_k - dt Σ_{i=1..k} (1 + R dt)^{i-1-k} b_R(X_i),   Θⁿ(X)_0 = X_0
//! ```
//!
//! `Θⁿ` applied to the implicit Euler knots reproduces the Langevin scheme on
//! the same noise exactly.

use crate::drift::{DriftFamily, DriftParams, DriftSpec, check_admissibility};
use crate::error::{ensure, Error, Result};
use crate::scheme::EulerPath;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TransformKind {
    ThetaContinuous { r: f64, y0: f64 },
    ThetaDiscrete { r: f64 },
    Lamperti { kappa: f64 },
}

/// Output of one of the maps together with what produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct TransformReport {
    pub kind: TransformKind,
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

fn eval_b_r(spec: &DriftSpec, knots: &[f64]) -> Result<Vec<f64>> {
    knots.iter().map(|&x| spec.b_r(x)).collect()
}

/// Continuous transform, with the convolution integral computed by the
/// trapezoid rule on the knots.
pub fn theta_continuous(spec: &DriftSpec, path: &EulerPath, y0: f64) -> Result<Vec<f64>> {
    let g = eval_b_r(spec, &path.knots)?;
    theta_continuous_with(&path.knots, &g, spec.growth_r, path.grid.dt(), y0)
}

/// [`theta_continuous`] with precomputed `b_R` values at the knots.
pub fn theta_continuous_with(knots: &[f64], b_r: &[f64], r: f64, dt: f64, y0: f64) -> Result<Vec<f64>> {
    ensure(knots.len() == b_r.len() && !knots.is_empty(), || "knots and b_R lengths differ".to_string())?;
    ensure(r > 0.0 && dt > 0.0, || "R and dt must be positive".to_string())?;
    let decay = (-r * dt).exp();
    let x0 = knots[0];
    let mut integral = 0.0;
    let mut out = Vec::with_capacity(knots.len());
    out.push(y0);
    for k in 1..knots.len() {
        integral = decay * integral + 0.5 * dt * (decay * b_r[k - 1] + b_r[k]);
        let t = k as f64 * dt;
        out.push(knots[k] - (x0 - y0) * (-r * t).exp() - integral);
    }
    Ok(out)
}

/// Discrete transform `Θⁿ`, computed with the recursion
/// `D_k = (D_{k-1} + dt b_R(X_k)) / (1 + R dt)`, `Y_k = X_k - D_k`.
pub fn theta_discrete(spec: &DriftSpec, knots: &[f64], horizon: f64, n: usize) -> Result<Vec<f64>> {
    ensure(knots.len() == n + 1, || format!("{} knots for n = {n}", knots.len()))?;
    let g = eval_b_r(spec, knots)?;
    theta_discrete_with(knots, &g, spec.growth_r, horizon / n as f64)
}

pub fn theta_discrete_with(knots: &[f64], b_r: &[f64], r: f64, dt: f64) -> Result<Vec<f64>> {
    ensure(knots.len() == b_r.len() && !knots.is_empty(), || "knots and b_R lengths differ".to_string())?;
    ensure(r > 0.0 && dt > 0.0, || "R and dt must be positive".to_string())?;
    let q = 1.0 + r * dt;
    let mut d = 0.0;
    let mut out = Vec::with_capacity(knots.len());
    out.push(knots[0]);
    for k in 1..knots.len() {
        d = (d + dt * b_r[k]) / q;
        out.push(knots[k] - d);
    }
    Ok(out)
}

pub fn theta_discrete_report(spec: &DriftSpec, path: &EulerPath) -> Result<TransformReport> {
    Ok(TransformReport {
        kind: TransformKind::ThetaDiscrete { r: spec.growth_r },
        times: path.grid.times(),
        values: theta_discrete(spec, &path.knots, path.grid.horizon, path.grid.n)?,
    })
}

/// `F_κ(x) = x^κ` applied knot-wise.
pub fn lamperti_forward(kappa: f64, knots: &[f64]) -> Result<Vec<f64>> {
    ensure(kappa != 0.0 && kappa.is_finite(), || "kappa must be nonzero".to_string())?;
    knots
        .iter()
        .map(|&x| {
            if x > 0.0 {
                Ok(x.powf(kappa))
            } else {
                Err(Error::Domain(format!("power map needs positive knots, got {x}")))
            }
        })
        .collect()
}

/// `F_κ^{-1}(z) = z^{1/κ}`.
pub fn lamperti_backward(kappa: f64, values: &[f64]) -> Result<Vec<f64>> {
    ensure(kappa != 0.0 && kappa.is_finite(), || "kappa must be nonzero".to_string())?;
    lamperti_forward(1.0 / kappa, values)
}

/// Density of `Z = X^κ` from the density of `X`:
/// `f_Z(z) = f_X(z^{1/κ}) / |F'(z^{1/κ})|`.
pub fn transfer_density(kappa: f64, z: f64, density_x: impl Fn(f64) -> f64) -> Result<f64> {
    ensure(kappa != 0.0, || "kappa must be nonzero".to_string())?;
    if !(z > 0.0) {
        return Ok(0.0);
    }
    let x = z.powf(1.0 / kappa);
    let jac = (kappa * x.powf(kappa - 1.0)).abs();
    Ok(density_x(x) / jac)
}

/// Exponent of the generalized CIR model, `β = 1 - 1/(γ+1)`.
pub fn cir_beta(gamma: f64) -> f64 {
    1.0 - 1.0 / (gamma + 1.0)
}

/// Exponent of the generalized Verhulst model, `β* = 1/(γ+1)`.
pub fn verhulst_beta(gamma: f64) -> f64 {
    1.0 / (gamma + 1.0)
}

/// Additive-equation data for `Z = z0 + ∫(v - wZ)du + ζ∫Z^β dB`, with
/// `β = 1 - 1/(γ+1)`: the returned solution of
/// `dX = (1-β)(v X^{-γ} - w X)dt + ζ(1-β) dB`, `X_0 = z0^{1-β}`, maps to `Z`
/// through `Z = X^{γ+1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct CirModel {
    pub spec: DriftSpec,
    pub sigma: f64,
    pub x0: f64,
    pub beta: f64,
    /// Power `κ = γ + 1` mapping `X` to `Z`.
    pub kappa: f64,
}

pub fn build_cir_model(z0: f64, v: f64, w: f64, zeta: f64, gamma: f64, alpha: f64) -> Result<CirModel> {
    ensure(zeta != 0.0 && zeta.is_finite(), || "zeta must be nonzero".to_string())?;
    let model = cir_model_unchecked(z0, v, w, zeta, gamma)?;
    let report = check_admissibility(&model.spec, alpha);
    if !report.admissible {
        return Err(Error::Inadmissible(report.reasons.join("; ")));
    }
    Ok(model)
}

/// [`build_cir_model`] without the admissibility check, also accepting
/// `ζ = 0` (deterministic volatility).
pub(crate) fn cir_model_unchecked(z0: f64, v: f64, w: f64, zeta: f64, gamma: f64) -> Result<CirModel> {
    ensure(z0 > 0.0 && v > 0.0 && w > 0.0 && gamma > 0.0, || {
        "z0, v, w, gamma must be positive".to_string()
    })?;
    let beta = cir_beta(gamma);
    let u = 1.0 - beta;
    let spec = DriftSpec::new(DriftFamily::B1, DriftParams::new(u, v, w, gamma))?;
    Ok(CirModel { spec, sigma: zeta * u, x0: z0.powf(u), beta, kappa: gamma + 1.0 })
}
