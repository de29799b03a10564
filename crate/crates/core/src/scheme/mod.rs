//! Implicit Euler scheme for `dX = b(X)dt + σ dB` and the matching scheme
//! for the fractional Langevin equation `dY = -R Y dt + σ dB`.

mod convergence;
mod step;

pub use convergence::{convergence_study, ConvergenceRow, ConvergenceSetup, ConvergenceTable};
pub use step::{implicit_step, implicit_step_from};

use serde::{Deserialize, Serialize};

use crate::drift::DriftSpec;
use crate::error::{ensure, Error, Result};
use crate::noise::FbmPath;

/// Uniform grid `t_k = kT/n` on `[0, T]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub horizon: f64,
    pub n: usize,
}

impl TimeGrid {
    pub fn new(horizon: f64, n: usize) -> Result<Self> {
        ensure(horizon > 0.0 && horizon.is_finite(), || format!("horizon must be positive, got {horizon}"))?;
        ensure(n >= 1, || "grid needs at least one step".to_string())?;
        Ok(Self { horizon, n })
    }

    pub fn dt(&self) -> f64 {
        self.horizon / self.n as f64
    }

    pub fn time(&self, k: usize) -> f64 {
        k as f64 * self.dt()
    }

    pub fn times(&self) -> Vec<f64> {
        (0..=self.n).map(|k| self.time(k)).collect()
    }
}

/// Knots `x_k` of the implicit Euler scheme with their piecewise-linear
/// interpolation.
#[derive(Debug, Clone, PartialEq)]
pub struct EulerPath {
    pub grid: TimeGrid,
    pub knots: Vec<f64>,
}

impl EulerPath {
    pub fn new(grid: TimeGrid, knots: Vec<f64>) -> Result<Self> {
        ensure(knots.len() == grid.n + 1, || {
            format!("{} knots for a grid of {} steps", knots.len(), grid.n)
        })?;
        Ok(Self { grid, knots })
    }

    pub fn x0(&self) -> f64 {
        self.knots[0]
    }

    pub fn last(&self) -> f64 {
        self.knots[self.grid.n]
    }

    /// Piecewise-linear value at `t`, clamped to `[0, T]`.
    pub fn eval(&self, t: f64) -> f64 {
        interpolate(&self.knots, self.grid.dt(), t)
    }

    pub fn max(&self) -> f64 {
        self.knots.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.knots.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

pub(crate) fn interpolate(knots: &[f64], dt: f64, t: f64) -> f64 {
    let n = knots.len() - 1;
    let pos = (t / dt).clamp(0.0, n as f64);
    let k = (pos.floor() as usize).min(n.saturating_sub(1));
    let frac = pos - k as f64;
    if n == 0 {
        return knots[0];
    }
    knots[k] + (knots[k + 1] - knots[k]) * frac
}

/// Upper bound `x0 + |b(x0)| T + 2|σ| ‖w‖_∞` satisfied by every knot.
pub fn apriori_bound(spec: &DriftSpec, sigma: f64, x0: f64, horizon: f64, driver_sup: f64) -> Result<f64> {
    Ok(x0 + spec.b(x0)?.abs() * horizon + 2.0 * sigma.abs() * driver_sup)
}

fn check_driver(grid: &TimeGrid, driver: &FbmPath) -> Result<()> {
    if driver.origin != 0 {
        return Err(Error::Parameter("driver must be a one-sided path starting at t = 0".into()));
    }
    if driver.steps() != grid.n {
        return Err(Error::Parameter(format!(
            "driver has {} steps, grid has {}",
            driver.steps(),
            grid.n
        )));
    }
    if (driver.dt() - grid.dt()).abs() > 1e-9 * grid.dt() {
        return Err(Error::Parameter("driver and grid spacing differ".into()));
    }
    Ok(())
}

/// Runs the implicit Euler scheme on raw driver increments.
///
/// `x_{k+1} = x_k + b(x_{k+1}) dt + σ Δw_k`. A negative `σ` is the same as
/// `|σ|` with the driver negated; the product `σ Δw_k` is used as is.
pub fn solve_increments(spec: &DriftSpec, sigma: f64, x0: f64, dt: f64, increments: &[f64]) -> Result<Vec<f64>> {
    ensure(x0 > 0.0 && x0.is_finite(), || format!("x0 must be positive, got {x0}"))?;
    ensure(sigma.is_finite(), || "sigma must be finite".to_string())?;
    let mut knots = Vec::with_capacity(increments.len() + 1);
    let mut x = x0;
    knots.push(x);
    for dw in increments {
        let mu = x + sigma * dw;
        x = implicit_step_from(spec, mu, dt, x)?;
        knots.push(x);
    }
    Ok(knots)
}

/// Solves the scheme on `grid` driven by `driver`.
pub fn solve_path(spec: &DriftSpec, sigma: f64, x0: f64, grid: TimeGrid, driver: &FbmPath) -> Result<EulerPath> {
    check_driver(&grid, driver)?;
    let knots = solve_increments(spec, sigma, x0, grid.dt(), &driver.increments)?;
    EulerPath::new(grid, knots)
}

/// Implicit Euler for the Langevin equation, in closed form:
/// `Y_{k+1} = (Y_k + σ ΔB_k) / (1 + R dt)`.
pub fn langevin_increments(r: f64, sigma: f64, y0: f64, dt: f64, increments: &[f64]) -> Result<Vec<f64>> {
    ensure(r > 0.0 && r.is_finite(), || format!("R must be positive, got {r}"))?;
    ensure(dt > 0.0, || "time step must be positive".to_string())?;
    ensure(y0.is_finite() && sigma.is_finite(), || "non-finite Langevin input".to_string())?;
    let q = 1.0 + r * dt;
    let mut out = Vec::with_capacity(increments.len() + 1);
    let mut y = y0;
    out.push(y);
    for db in increments {
        y = (y + sigma * db) / q;
        out.push(y);
    }
    Ok(out)
}

pub fn solve_langevin_path(r: f64, sigma: f64, y0: f64, grid: TimeGrid, driver: &FbmPath) -> Result<Vec<f64>> {
    check_driver(&grid, driver)?;
    langevin_increments(r, sigma, y0, grid.dt(), &driver.increments)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flat_driver(n: usize, horizon: f64) -> FbmPath {
        FbmPath::from_increments(0.0, horizon / n as f64, vec![0.0; n], 0)
    }

    #[test]
    fn equilibrium_is_fixed_point() {
        let spec = DriftSpec::b1_unit(2.0).unwrap();
        let grid = TimeGrid::new(1.0, 50).unwrap();
        let xb = spec.x_b().unwrap();
        let path = solve_path(&spec, 0.3, xb, grid, &flat_driver(50, 1.0)).unwrap();
        assert!(path.knots.iter().all(|x| (x - xb).abs() < 1e-12));
    }

    #[test]
    fn driver_mismatch_is_rejected() {
        let spec = DriftSpec::b1_unit(2.0).unwrap();
        let grid = TimeGrid::new(1.0, 50).unwrap();
        assert!(solve_path(&spec, 0.3, 1.0, grid, &flat_driver(40, 1.0)).is_err());
        assert!(solve_path(&spec, 0.3, 1.0, grid, &flat_driver(50, 2.0)).is_err());
        assert!(solve_path(&spec, 0.3, -1.0, grid, &flat_driver(50, 1.0)).is_err());
    }

    #[test]
    fn langevin_examples() {
        let y = langevin_increments(1.0, 0.3, 1.0, 0.1, &[0.0]).unwrap();
        assert!((y[1] - 1.0 / 1.1).abs() < 1e-15);
        let y = langevin_increments(2.0, 0.0, -3.0, 0.05, &[0.7; 10]).unwrap();
        for (k, v) in y.iter().enumerate() {
            assert!((v + 3.0 * 1.1f64.powi(-(k as i32))).abs() < 1e-14);
        }
        assert!(langevin_increments(0.0, 0.3, 1.0, 0.1, &[0.0]).is_err());
    }

    #[test]
    fn interpolation() {
        let grid = TimeGrid::new(1.0, 2).unwrap();
        let p = EulerPath::new(grid, vec![1.0, 3.0, 2.0]).unwrap();
        assert_eq!(p.eval(0.25), 2.0);
        assert_eq!(p.eval(0.75), 2.5);
        assert_eq!(p.eval(1.0), 2.0);
        assert_eq!(p.eval(7.0), 2.0);
        assert!(EulerPath::new(grid, vec![1.0]).is_err());
    }
}
