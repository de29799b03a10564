//! Long-time behaviour: time averages, pullback limits over the Wiener
//! shift, contraction of paths on a common driver, and level hitting.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::drift::DriftSpec;
use crate::error::{ensure, Error, Result};
use crate::noise::{sample_two_sided_fbm_rep, FbmPath, NoiseConfig, NoiseMethod};
use crate::rng::streams;
use crate::scheme::{interpolate, solve_increments, solve_path, EulerPath, TimeGrid};
use crate::stats::ols_slope;

/// Test functions available to [`ergodic_average`]. All are uniformly
/// continuous with polynomial growth.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PhiTag {
    One,
    Identity,
    /// `x ∧ c`.
    Clip(f64),
    /// `x^p`, `p > 0`.
    Power(f64),
    /// `x / (1 + x)`.
    Bounded,
}

impl PhiTag {
    pub fn eval(self, x: f64) -> f64 {
        match self {
            PhiTag::One => 1.0,
            PhiTag::Identity => x,
            PhiTag::Clip(c) => x.min(c),
            PhiTag::Power(p) => x.powf(p),
            PhiTag::Bounded => x / (1.0 + x),
        }
    }
}

impl FromStr for PhiTag {
    type Err = Error;

    /// Accepts `one`, `identity`, `bounded`, `clip:C` and `power:P`.
    fn from_str(s: &str) -> Result<Self> {
        let (name, arg) = match s.split_once(':') {
            Some((n, a)) => (n, Some(a)),
            None => (s, None),
        };
        let number = |a: Option<&str>| -> Result<f64> {
            a.and_then(|v| v.trim().parse::<f64>().ok())
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::Parameter(format!("function tag `{s}` needs a numeric argument")))
        };
        match name.trim() {
            "one" => Ok(PhiTag::One),
            "identity" => Ok(PhiTag::Identity),
            "bounded" => Ok(PhiTag::Bounded),
            "clip" => Ok(PhiTag::Clip(number(arg)?)),
            "power" => {
                let p = number(arg)?;
                ensure(p > 0.0, || format!("power must be positive, got {p}"))?;
                Ok(PhiTag::Power(p))
            }
            other => Err(Error::Parameter(format!("unknown function tag `{other}`"))),
        }
    }
}

impl fmt::Display for PhiTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PhiTag::One => write!(f, "one"),
            PhiTag::Identity => write!(f, "identity"),
            PhiTag::Clip(c) => write!(f, "clip:{c}"),
            PhiTag::Power(p) => write!(f, "power:{p}"),
            PhiTag::Bounded => write!(f, "bounded"),
        }
    }
}

/// `(1/T) ∫_0^T φ(X_t) dt`, trapezoid rule on the knots.
pub fn ergodic_average(phi: PhiTag, path: &EulerPath) -> f64 {
    running_average(phi, &path.knots, path.grid.dt(), path.grid.n)
}

/// Time average over the first `upto` steps of `knots`.
fn running_average(phi: PhiTag, knots: &[f64], dt: f64, upto: usize) -> f64 {
    let vals: Vec<f64> = knots[..=upto].iter().map(|&x| phi.eval(x)).collect();
    let inner: f64 = vals[1..upto].iter().sum();
    let integral = dt * (0.5 * (vals[0] + vals[upto]) + inner);
    integral / (upto as f64 * dt)
}

/// Time averages at the checkpoints `T·i/checkpoints`, `i = 1..=checkpoints`.
pub fn ergodic_sweep(phi: PhiTag, path: &EulerPath, checkpoints: usize) -> Result<Vec<(f64, f64)>> {
    ensure(checkpoints >= 1 && checkpoints <= path.grid.n, || {
        format!("checkpoints must lie in 1..={}", path.grid.n)
    })?;
    Ok((1..=checkpoints)
        .map(|i| {
            let upto = (path.grid.n * i) / checkpoints;
            (path.grid.time(upto), running_average(phi, &path.knots, path.grid.dt(), upto))
        })
        .collect())
}

/// Settings shared by the pullback constructions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PullbackOptions {
    pub hurst: f64,
    /// Solver steps per unit time.
    pub steps_per_unit: usize,
    pub method: NoiseMethod,
}

impl PullbackOptions {
    pub fn new(hurst: f64) -> Self {
        Self { hurst, steps_per_unit: 256, method: NoiseMethod::Auto }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PullbackRun {
    /// `values[n]` is the time-0 state of the scheme started at `x0` at time `-n`.
    pub values: Vec<f64>,
    /// `gaps[n] = |values[n] - values[n+1]|`.
    pub gaps: Vec<f64>,
    /// Fitted rate `ρ` in `gap_n ≈ C e^{-ρ n}`; NaN when fewer than three gaps
    /// sit above [`GAP_FLOOR`].
    pub decay_rate: f64,
    /// Number of gaps at or below the floor (floating-point saturation).
    pub saturated: usize,
    pub x0: f64,
    pub sigma: f64,
    pub seed: u64,
    pub rep: u64,
}

/// Gaps at or below this size are treated as rounding noise.
pub const GAP_FLOOR: f64 = 1e-13;

/// Two-sided driver on `[-n_max, n_max]` (at least `[-1, 1]`), replication
/// `rep` of the pullback stream for `seed`.
pub fn pullback_driver(n_max: usize, seed: u64, rep: u64, options: &PullbackOptions) -> Result<FbmPath> {
    ensure(options.steps_per_unit >= 1, || "steps_per_unit must be positive".to_string())?;
    let span = n_max.max(1);
    let cfg = NoiseConfig::new(options.hurst, span as f64, span * options.steps_per_unit, seed)
        .with_method(options.method)
        .two_sided(true);
    sample_two_sided_fbm_rep(&cfg, streams::PULLBACK, rep)
}

/// Pullback values `X_n(x0, θ_{-n}ω)` for `n = 0..=n_max` on a given
/// two-sided driver with `steps_per_unit` steps per unit time.
pub fn pullback_on_driver(
    spec: &DriftSpec,
    sigma: f64,
    x0: f64,
    n_max: usize,
    steps_per_unit: usize,
    driver: &FbmPath,
) -> Result<Vec<f64>> {
    ensure(n_max * steps_per_unit <= driver.origin, || {
        format!("driver reaches back {} steps, need {}", driver.origin, n_max * steps_per_unit)
    })?;
    let dt = driver.dt();
    (0..=n_max)
        .map(|n| {
            let start = driver.origin - n * steps_per_unit;
            let knots = solve_increments(spec, sigma, x0, dt, &driver.increments[start..driver.origin])?;
            Ok(*knots.last().expect("nonempty knots"))
        })
        .collect()
}

/// Pullback sequence for one seed, with the fitted gap-decay rate.
pub fn pullback_sequence(
    spec: &DriftSpec,
    sigma: f64,
    x0: f64,
    n_max: usize,
    seed: u64,
    options: &PullbackOptions,
) -> Result<PullbackRun> {
    pullback_sequence_rep(spec, sigma, x0, n_max, seed, 0, options)
}

/// [`pullback_sequence`] on replication `rep` of the noise stream.
pub fn pullback_sequence_rep(
    spec: &DriftSpec,
    sigma: f64,
    x0: f64,
    n_max: usize,
    seed: u64,
    rep: u64,
    options: &PullbackOptions,
) -> Result<PullbackRun> {
    let driver = pullback_driver(n_max, seed, rep, options)?;
    let values = pullback_on_driver(spec, sigma, x0, n_max, options.steps_per_unit, &driver)?;
    let gaps: Vec<f64> = values.windows(2).map(|w| (w[0] - w[1]).abs()).collect();
    let (decay_rate, saturated) = fit_gap_decay(&gaps);
    Ok(PullbackRun { values, gaps, decay_rate, saturated, x0, sigma, seed, rep })
}

/// Log-linear fit of `gap_n` against `n` over `n >= 1` and gaps above the
/// floor. Returns `(rate, number of saturated gaps)`.
pub fn fit_gap_decay(gaps: &[f64]) -> (f64, usize) {
    let mut ns = Vec::new();
    let mut logs = Vec::new();
    let mut saturated = 0;
    for (n, &g) in gaps.iter().enumerate().skip(1) {
        if g > GAP_FLOOR {
            ns.push(n as f64);
            logs.push(g.ln());
        } else {
            saturated += 1;
        }
    }
    let rate = if ns.len() >= 3 { -ols_slope(&ns, &logs) } else { f64::NAN };
    (rate, saturated)
}

/// Pullback runs on replications `0..count`, computed in parallel.
pub fn pullback_batch(
    spec: &DriftSpec,
    sigma: f64,
    x0: f64,
    n_max: usize,
    seed: u64,
    count: usize,
    options: &PullbackOptions,
) -> Result<Vec<PullbackRun>> {
    (0..count as u64)
        .into_par_iter()
        .map(|rep| pullback_sequence_rep(spec, sigma, x0, n_max, seed, rep, options))
        .collect()
}

/// First time `t > t_star` at which the piecewise-linear path attains
/// `level`, or `None` if it does not on the grid horizon.
///
/// Crossings between knots are located by linear interpolation. A path
/// that sits exactly on the level on the first segment after `t_star`
/// returns `t_star`.
pub fn hitting_time(path: &EulerPath, level: f64, t_star: f64) -> Result<Option<f64>> {
    ensure(level > 0.0, || format!("level must be positive, got {level}"))?;
    ensure(t_star >= 0.0 && t_star <= path.grid.horizon, || {
        format!("t_star = {t_star} outside [0, {}]", path.grid.horizon)
    })?;
    let dt = path.grid.dt();
    let n = path.grid.n;
    let first = ((t_star / dt).floor() as usize).min(n.saturating_sub(1));
    let mut a = t_star;
    let mut fa = interpolate(&path.knots, dt, t_star) - level;
    for k in first..n {
        let b = path.grid.time(k + 1);
        if b <= a {
            continue;
        }
        let fb = path.knots[k + 1] - level;
        if fa == 0.0 && fb == 0.0 {
            return Ok(Some(a));
        }
        if fb == 0.0 {
            return Ok(Some(b));
        }
        if fa * fb < 0.0 {
            return Ok(Some(a + (b - a) * fa / (fa - fb)));
        }
        a = b;
        fa = fb;
    }
    Ok(None)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContractionReport {
    /// `max_k |ΔX_k| e^{K t_k} / |Δx0|`; zero for identical starts.
    pub ratio: f64,
    /// `max_k (|ΔX_k| - |Δx0| e^{-K t_k})`.
    pub max_excess: f64,
    /// Whether the ordering of the starts is kept at every knot.
    pub ordered: bool,
}

/// Compares two scheme paths started at `x0_pair` on the same driver.
pub fn contraction_diagnostic(
    spec: &DriftSpec,
    sigma: f64,
    x0_pair: (f64, f64),
    grid: TimeGrid,
    driver: &FbmPath,
) -> Result<ContractionReport> {
    let p1 = solve_path(spec, sigma, x0_pair.0, grid, driver)?;
    let p2 = solve_path(spec, sigma, x0_pair.1, grid, driver)?;
    let k = spec.contraction_k;
    let dx0 = (x0_pair.0 - x0_pair.1).abs();
    let sign = (x0_pair.0 - x0_pair.1).signum();
    let mut ratio: f64 = 0.0;
    let mut max_excess = f64::NEG_INFINITY;
    let mut ordered = true;
    for (i, (a, b)) in p1.knots.iter().zip(&p2.knots).enumerate() {
        let t = grid.time(i);
        let d = (a - b).abs();
        if dx0 > 0.0 {
            ratio = ratio.max(d * (k * t).exp() / dx0);
        }
        max_excess = max_excess.max(d - dx0 * (-k * t).exp());
        if sign != 0.0 && (a - b) * sign <= 0.0 {
            ordered = false;
        }
    }
    Ok(ContractionReport { ratio, max_excess, ordered })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path(knots: Vec<f64>, horizon: f64) -> EulerPath {
        let grid = TimeGrid::new(horizon, knots.len() - 1).unwrap();
        EulerPath::new(grid, knots).unwrap()
    }

    #[test]
    fn phi_registry() {
        assert_eq!("clip:10".parse::<PhiTag>().unwrap(), PhiTag::Clip(10.0));
        assert_eq!("power:2".parse::<PhiTag>().unwrap(), PhiTag::Power(2.0));
        assert!("clip".parse::<PhiTag>().is_err());
        assert!("cosh".parse::<PhiTag>().is_err());
        assert!("power:-1".parse::<PhiTag>().is_err());
        for tag in [PhiTag::One, PhiTag::Identity, PhiTag::Clip(2.5), PhiTag::Power(3.0), PhiTag::Bounded] {
            assert_eq!(tag.to_string().parse::<PhiTag>().unwrap(), tag);
        }
    }

    #[test]
    fn averages_of_simple_paths() {
        let p = path(vec![0.3, 1.7, 2.2, 0.9], 3.0);
        assert!((ergodic_average(PhiTag::One, &p) - 1.0).abs() < 1e-15);
        let c = path(vec![2.5; 11], 4.0);
        assert!((ergodic_average(PhiTag::Power(2.0), &c) - 6.25).abs() < 1e-14);
        // Linear path from 0 to 2 on [0,1]: mean 1.
        let l = path((0..=10).map(|k| 0.2 * k as f64).collect(), 1.0);
        assert!((ergodic_average(PhiTag::Identity, &l) - 1.0).abs() < 1e-14);
        let sweep = ergodic_sweep(PhiTag::Identity, &l, 2).unwrap();
        assert_eq!(sweep.len(), 2);
        assert!((sweep[0].1 - 0.5).abs() < 1e-14);
    }

    #[test]
    fn hitting_examples() {
        let p = path(vec![0.5, 1.5], 1.0);
        assert_eq!(hitting_time(&p, 1.0, 0.0).unwrap(), Some(0.5));
        let flat = path(vec![1.0; 5], 1.0);
        assert_eq!(hitting_time(&flat, 1.0, 0.3).unwrap(), Some(0.3));
        let above = path(vec![2.0, 3.0, 2.5], 1.0);
        assert_eq!(hitting_time(&above, 1.0, 0.0).unwrap(), None);
        // Touch at a knot counts.
        let touch = path(vec![2.0, 1.0, 2.0], 2.0);
        assert_eq!(hitting_time(&touch, 1.0, 0.0).unwrap(), Some(1.0));
        // Leaving the level right after t_star is not a hit.
        let leave = path(vec![1.0, 2.0, 0.5], 2.0);
        let tau = hitting_time(&leave, 1.0, 0.0).unwrap().unwrap();
        assert!((tau - (1.0 + 2.0 / 3.0)).abs() < 1e-14);
        assert!(hitting_time(&p, 0.0, 0.0).is_err());
        assert!(hitting_time(&p, 1.0, 2.0).is_err());
    }

    #[test]
    fn gap_fit_recovers_rate() {
        let gaps: Vec<f64> = (0..10).map(|n| 0.7 * (-1.3 * n as f64).exp()).collect();
        let (rate, sat) = fit_gap_decay(&gaps);
        assert!((rate - 1.3).abs() < 1e-12);
        assert_eq!(sat, 0);
        let (rate, sat) = fit_gap_decay(&[1.0, 1e-20, 0.0]);
        assert!(rate.is_nan());
        assert_eq!(sat, 2);
    }

    #[test]
    fn pullback_with_zero_depth() {
        let spec = DriftSpec::b1_unit(2.0).unwrap();
        let opts = PullbackOptions { steps_per_unit: 32, ..PullbackOptions::new(0.7) };
        let run = pullback_sequence(&spec, 0.3, 0.5, 0, 3, &opts).unwrap();
        assert_eq!(run.values, vec![0.5]);
        assert!(run.gaps.is_empty());
    }

    #[test]
    fn contraction_identical_starts() {
        let spec = DriftSpec::b1_unit(2.0).unwrap();
        let grid = TimeGrid::new(1.0, 64).unwrap();
        let driver = FbmPath::from_increments(0.0, grid.dt(), vec![0.01; 64], 0);
        let rep = contraction_diagnostic(&spec, 0.3, (1.2, 1.2), grid, &driver).unwrap();
        assert_eq!(rep.ratio, 0.0);
        let rep = contraction_diagnostic(&spec, 0.3, (3.0, 0.5), grid, &driver).unwrap();
        assert!(rep.ordered);
        assert!(rep.ratio <= 1.0 + 1e-2);
    }
}
