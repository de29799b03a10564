//! Fractional Heston model: variance `Z` follows the fractional CIR equation
//! `dZ = (v - wZ)dt + ζ Z^β dB`, obtained as `Z = X^{γ+1}` from the additive
//! equation, and the price solves `dS = μ S dt + √Z S dB*` where `B*` is the
//! Brownian motion generating `B` through the Volterra kernel.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::drift::check_admissibility;
use crate::error::{ensure, Error, Result};
use crate::noise::{FbmPath, VolterraCoupling};
use crate::rng::{stream_rng, streams};
use crate::scheme::{solve_path, TimeGrid};
use crate::transform::{cir_model_unchecked, CirModel};

/// Deterministic rate or drift coefficient.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RateFn {
    Constant(f64),
    /// Piecewise-linear through `(times[i], values[i])`, constant outside.
    Table { times: Vec<f64>, values: Vec<f64> },
}

impl RateFn {
    pub fn validate(&self) -> Result<()> {
        match self {
            RateFn::Constant(c) => ensure(c.is_finite(), || "rate must be finite".to_string()),
            RateFn::Table { times, values } => {
                ensure(!times.is_empty() && times.len() == values.len(), || {
                    "rate table needs matching nonempty times and values".to_string()
                })?;
                ensure(times.windows(2).all(|w| w[0] < w[1]), || {
                    "rate table times must increase".to_string()
                })?;
                ensure(values.iter().all(|v| v.is_finite()), || "rate values must be finite".to_string())
            }
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        match self {
            RateFn::Constant(c) => *c,
            RateFn::Table { times, values } => {
                let last = times.len() - 1;
                if t <= times[0] {
                    return values[0];
                }
                if t >= times[last] {
                    return values[last];
                }
                let k = times.partition_point(|&s| s <= t) - 1;
                let w = (t - times[k]) / (times[k + 1] - times[k]);
                values[k] + w * (values[k + 1] - values[k])
            }
        }
    }

    /// `∫_0^{t_k} r`, trapezoid rule on the grid.
    pub fn cumulative_integral(&self, grid: &TimeGrid) -> Vec<f64> {
        let dt = grid.dt();
        let mut out = Vec::with_capacity(grid.n + 1);
        let mut acc = 0.0;
        out.push(acc);
        for k in 0..grid.n {
            acc += 0.5 * dt * (self.eval(grid.time(k)) + self.eval(grid.time(k + 1)));
            out.push(acc);
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HestonConfig {
    pub s0: f64,
    pub z0: f64,
    pub v: f64,
    pub w: f64,
    /// Volatility of variance; zero gives the deterministic-variance model.
    pub zeta: f64,
    pub gamma: f64,
    pub hurst: f64,
    /// Hölder exponent used for the admissibility check; defaults to the
    /// midpoint of `(1 - β, H)`.
    pub alpha: Option<f64>,
    pub mu: RateFn,
    pub r: RateFn,
    /// Initial value of the riskless asset.
    pub bond0: f64,
    pub grid: TimeGrid,
    pub seed: u64,
}

impl HestonConfig {
    /// Exponent `β = γ/(γ+1)` of the variance equation.
    pub fn beta(&self) -> f64 {
        crate::transform::cir_beta(self.gamma)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha.unwrap_or(0.5 * (1.0 - self.beta() + self.hurst))
    }

    pub fn validate(&self) -> Result<()> {
        ensure(self.s0 > 0.0 && self.bond0 > 0.0, || "s0 and bond0 must be positive".to_string())?;
        ensure(self.zeta.is_finite(), || "zeta must be finite".to_string())?;
        if !(self.hurst > 0.5 && self.hurst < 1.0) {
            return Err(Error::Unsupported(format!(
                "the Heston model needs H in (1/2, 1), got {}",
                self.hurst
            )));
        }
        let beta = self.beta();
        if !(beta > 1.0 - self.hurst && beta < 1.0) {
            return Err(Error::Inadmissible(format!(
                "beta = {beta} outside (1 - H, 1) = ({}, 1)",
                1.0 - self.hurst
            )));
        }
        let alpha = self.alpha();
        ensure(alpha > 0.0 && alpha < self.hurst, || format!("alpha = {alpha} must lie in (0, H)"))?;
        self.mu.validate()?;
        self.r.validate()
    }
}

/// One simulated path of the model.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HestonPath {
    pub times: Vec<f64>,
    pub z: Vec<f64>,
    pub s: Vec<f64>,
    pub s_discounted: Vec<f64>,
}

/// Holds the transformed model and the Volterra coupling for repeated
/// simulation.
#[derive(Debug, Clone)]
pub struct HestonSimulator {
    pub config: HestonConfig,
    pub model: CirModel,
    coupling: VolterraCoupling,
}

impl HestonSimulator {
    pub fn new(config: HestonConfig) -> Result<Self> {
        config.validate()?;
        let model = cir_model_unchecked(config.z0, config.v, config.w, config.zeta, config.gamma)?;
        let report = check_admissibility(&model.spec, config.alpha());
        if !report.admissible {
            return Err(Error::Inadmissible(report.reasons.join("; ")));
        }
        let coupling = VolterraCoupling::new(config.hurst, config.grid.horizon, config.grid.n)?;
        Ok(Self { config, model, coupling })
    }

    /// Variance knots `Z_k = X_k^{γ+1}` driven by `fbm`.
    pub fn simulate_vol(&self, fbm: &FbmPath) -> Result<Vec<f64>> {
        let path = solve_path(&self.model.spec, self.model.sigma, self.model.x0, self.config.grid, fbm)?;
        Ok(path.knots.iter().map(|x| x.powf(self.model.kappa)).collect())
    }

    /// `S_k = S0 exp(∫_0^{t_k} (μ - Z/2) + Σ_{j<k} √Z_j ΔB*_j)`.
    pub fn simulate_price(&self, z: &[f64], bm_increments: &[f64]) -> Result<Vec<f64>> {
        simulate_price(self.config.s0, &self.config.mu, &self.config.grid, z, bm_increments)
    }

    pub fn path(&self, rep: u64) -> Result<HestonPath> {
        let noise = self.coupling.sample(&mut stream_rng(self.config.seed, streams::HESTON, rep))?;
        let z = self.simulate_vol(&noise.fbm)?;
        let s = self.simulate_price(&z, &noise.bm_increments)?;
        let s_discounted = discount(&s, &self.config.r, &self.config.grid, self.config.bond0)?;
        Ok(HestonPath { times: self.config.grid.times(), z, s, s_discounted })
    }

    /// Replications `0..reps`, in order.
    pub fn paths(&self, reps: usize) -> Result<Vec<HestonPath>> {
        (0..reps as u64).into_par_iter().map(|r| self.path(r)).collect()
    }
}

/// Price path from variance knots and Brownian increments on `grid`; the
/// drift integral uses the trapezoid rule, the stochastic one left points.
pub fn simulate_price(s0: f64, mu: &RateFn, grid: &TimeGrid, z: &[f64], bm_increments: &[f64]) -> Result<Vec<f64>> {
    ensure(z.len() == grid.n + 1 && bm_increments.len() == grid.n, || {
        format!("{} variance knots and {} increments for n = {}", z.len(), bm_increments.len(), grid.n)
    })?;
    ensure(z.iter().all(|&v| v >= 0.0), || "variance must be nonnegative".to_string())?;
    let dt = grid.dt();
    let mut log_s = s0.ln();
    let mut out = Vec::with_capacity(z.len());
    out.push(s0);
    for k in 0..grid.n {
        let drift_l = mu.eval(grid.time(k)) - 0.5 * z[k];
        let drift_r = mu.eval(grid.time(k + 1)) - 0.5 * z[k + 1];
        log_s += 0.5 * dt * (drift_l + drift_r) + z[k].sqrt() * bm_increments[k];
        out.push(log_s.exp());
    }
    Ok(out)
}

/// `S_k / (S⁰_0 exp(∫_0^{t_k} r))`.
pub fn discount(s: &[f64], r: &RateFn, grid: &TimeGrid, bond0: f64) -> Result<Vec<f64>> {
    ensure(s.len() == grid.n + 1, || format!("{} prices for n = {}", s.len(), grid.n))?;
    ensure(bond0 > 0.0, || "bond0 must be positive".to_string())?;
    r.validate()?;
    Ok(s.iter()
        .zip(r.cumulative_integral(grid))
        .map(|(p, i)| p / (bond0 * i.exp()))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(zeta: f64, n: usize) -> HestonConfig {
        HestonConfig {
            s0: 100.0,
            z0: 0.04,
            v: 0.08,
            w: 2.0,
            zeta,
            gamma: 1.0,
            hurst: 0.7,
            alpha: None,
            mu: RateFn::Constant(0.05),
            r: RateFn::Constant(0.02),
            bond0: 1.0,
            grid: TimeGrid::new(1.0, n).unwrap(),
            seed: 11,
        }
    }

    #[test]
    fn rate_functions() {
        let table = RateFn::Table { times: vec![0.0, 1.0], values: vec![0.0, 2.0] };
        assert_eq!(table.eval(0.25), 0.5);
        assert_eq!(table.eval(5.0), 2.0);
        let grid = TimeGrid::new(1.0, 10).unwrap();
        let cum = table.cumulative_integral(&grid);
        assert!((cum[10] - 1.0).abs() < 1e-14);
        assert!(RateFn::Table { times: vec![1.0, 0.0], values: vec![0.0, 0.0] }.validate().is_err());
    }

    #[test]
    fn discounting() {
        let grid = TimeGrid::new(2.0, 20).unwrap();
        let s = vec![3.0; 21];
        assert_eq!(discount(&s, &RateFn::Constant(0.0), &grid, 1.0).unwrap(), s);
        let d = discount(&s, &RateFn::Constant(0.1), &grid, 1.0).unwrap();
        for (k, v) in d.iter().enumerate() {
            assert!((v - 3.0 * (-0.1 * grid.time(k)).exp()).abs() < 1e-14);
        }
    }

    #[test]
    fn zero_driver_price() {
        let grid = TimeGrid::new(1.0, 8).unwrap();
        let z: Vec<f64> = (0..=8).map(|k| 0.04 + 0.01 * k as f64).collect();
        let s = simulate_price(2.0, &RateFn::Constant(0.05), &grid, &z, &[0.0; 8]).unwrap();
        let mut integral = 0.0;
        for k in 0..8 {
            integral += 0.5 * grid.dt() * ((0.05 - z[k] / 2.0) + (0.05 - z[k + 1] / 2.0));
            assert!((s[k + 1] - 2.0 * integral.exp()).abs() < 1e-13);
        }
    }

    #[test]
    fn equilibrium_variance_is_constant() {
        let sim = HestonSimulator::new(config(0.0, 32)).unwrap();
        let p = sim.path(0).unwrap();
        assert!(p.z.iter().all(|z| (z - 0.04).abs() < 1e-12));
        assert!(p.s.iter().all(|s| *s > 0.0));
    }

    #[test]
    fn validation() {
        let mut c = config(0.3, 16);
        c.hurst = 0.5;
        assert!(matches!(HestonSimulator::new(c), Err(Error::Unsupported(_))));
        let mut c = config(0.3, 16);
        c.gamma = 0.2; // beta = 1/6 < 1 - H
        assert!(matches!(HestonSimulator::new(c), Err(Error::Inadmissible(_))));
        let sim = HestonSimulator::new(config(0.3, 32)).unwrap();
        let p = sim.path(3).unwrap();
        assert!(p.z.iter().all(|z| *z > 0.0));
        assert_eq!(p, sim.path(3).unwrap());
    }
}
