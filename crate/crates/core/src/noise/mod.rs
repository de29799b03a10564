//! Fractional Gaussian noise and fractional Brownian motion.

mod fgn;
mod hypergeometric;
mod volterra;

pub use fgn::{fbm_covariance, fgn_autocovariance, FgnSampler};
pub use hypergeometric::gauss_2f1;
pub use volterra::{coupled_bm_fbm, coupled_bm_fbm_rep, volterra_kernel, CoupledNoise, VolterraCoupling};

use serde::{Deserialize, Serialize};

use crate::error::{ensure, Error, Result};
use crate::rng::{stream_rng, streams};

/// How fGn samples are synthesized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum NoiseMethod {
    /// FFT circulant embedding; fails if the embedding is not nonnegative.
    CirculantEmbedding,
    /// Exact Cholesky factorisation of the Toeplitz covariance.
    Cholesky,
    /// Circulant embedding with a Cholesky fallback.
    #[default]
    Auto,
}

impl std::str::FromStr for NoiseMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "circulant_embedding" | "circulant" => Ok(NoiseMethod::CirculantEmbedding),
            "cholesky" => Ok(NoiseMethod::Cholesky),
            "auto" => Ok(NoiseMethod::Auto),
            other => Err(Error::Parameter(format!("unknown noise method `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseConfig {
    pub hurst: f64,
    /// Working Hölder exponent, strictly between 0 and `hurst`.
    pub holder_alpha: f64,
    pub horizon: f64,
    pub n: usize,
    pub seed: u64,
    pub method: NoiseMethod,
    pub two_sided: bool,
}

impl NoiseConfig {
    /// One-sided configuration with the default Hölder exponent
    /// `hurst - min(0.05, hurst / 2)`.
    pub fn new(hurst: f64, horizon: f64, n: usize, seed: u64) -> Self {
        Self {
            hurst,
            holder_alpha: hurst - (0.05f64).min(hurst / 2.0),
            horizon,
            n,
            seed,
            method: NoiseMethod::Auto,
            two_sided: false,
        }
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.holder_alpha = alpha;
        self
    }

    pub fn with_method(mut self, method: NoiseMethod) -> Self {
        self.method = method;
        self
    }

    pub fn two_sided(mut self, two_sided: bool) -> Self {
        self.two_sided = two_sided;
        self
    }

    pub fn dt(&self) -> f64 {
        self.horizon / self.n as f64
    }

    pub fn validate(&self) -> Result<()> {
        ensure(self.hurst > 0.0 && self.hurst < 1.0, || {
            format!("hurst must lie in (0,1), got {}", self.hurst)
        })?;
        ensure(
            self.holder_alpha > 0.0 && self.holder_alpha < self.hurst,
            || format!("holder_alpha must lie in (0, hurst), got {}", self.holder_alpha),
        )?;
        ensure(self.horizon > 0.0 && self.horizon.is_finite(), || {
            format!("horizon must be positive, got {}", self.horizon)
        })?;
        ensure(self.n >= 2, || format!("n must be at least 2, got {}", self.n))
    }
}

/// A sampled fBm path on a uniform grid.
///
/// One-sided paths live on `t_k = kT/n`, `k = 0..=n`; two-sided paths on
/// `t_k = -T + kT/n`, `k = 0..=2n`. In both cases `values[origin] == 0` and
/// `values` are the cumulative sums of `increments` anchored at the origin.
#[derive(Debug, Clone, PartialEq)]
pub struct FbmPath {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub increments: Vec<f64>,
    /// Index of `t = 0`.
    pub origin: usize,
}

impl FbmPath {
    /// Builds a path from increments; `origin` is the knot index where the
    /// path is pinned to zero and `t0` the time of knot 0.
    pub fn from_increments(t0: f64, dt: f64, increments: Vec<f64>, origin: usize) -> Self {
        let len = increments.len() + 1;
        assert!(origin < len, "origin outside the grid");
        let mut values = vec![0.0; len];
        for k in origin..increments.len() {
            values[k + 1] = values[k] + increments[k];
        }
        for k in (0..origin).rev() {
            values[k] = values[k + 1] - increments[k];
        }
        let times = (0..len).map(|k| t0 + k as f64 * dt).collect();
        Self { times, values, increments, origin }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn steps(&self) -> usize {
        self.increments.len()
    }

    pub fn dt(&self) -> f64 {
        self.times[1] - self.times[0]
    }

    /// `max |B_t|` over the grid.
    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Wiener shift `θ_s ω = ω_{s+·} - ω_s` with `s = steps · dt`.
    ///
    /// The returned path is defined on the same knots re-indexed so that the
    /// new origin is the old knot `origin + steps`.
    pub fn wiener_shift(&self, steps: isize) -> Result<FbmPath> {
        let new_origin = self.origin as isize + steps;
        if new_origin < 0 || new_origin as usize >= self.len() {
            return Err(Error::Parameter(format!(
                "shift by {steps} steps leaves the grid of {} knots",
                self.len()
            )));
        }
        let new_origin = new_origin as usize;
        let dt = self.dt();
        let t0 = -(new_origin as f64) * dt;
        Ok(FbmPath::from_increments(t0, dt, self.increments.clone(), new_origin))
    }

    /// Coarsens a one-sided path by summing blocks of `factor` increments.
    pub fn block_sum(&self, factor: usize) -> Result<FbmPath> {
        ensure(factor >= 1 && self.steps().is_multiple_of(factor), || {
            format!("cannot coarsen {} steps by {factor}", self.steps())
        })?;
        ensure(self.origin.is_multiple_of(factor), || "origin not on the coarse grid".to_string())?;
        let incs: Vec<f64> = self
            .increments
            .chunks(factor)
            .map(|c| c.iter().sum())
            .collect();
        Ok(FbmPath::from_increments(
            self.times[0],
            self.dt() * factor as f64,
            incs,
            self.origin / factor,
        ))
    }

    /// Pointwise negation `B -> -B`.
    pub fn negated(&self) -> FbmPath {
        FbmPath {
            times: self.times.clone(),
            values: self.values.iter().map(|v| -v).collect(),
            increments: self.increments.iter().map(|v| -v).collect(),
            origin: self.origin,
        }
    }
}

/// Samples a one-sided fBm path on `[0, T]`, replication 0 of the noise
/// stream keyed by `config.seed`.
pub fn sample_fbm(config: &NoiseConfig) -> Result<FbmPath> {
    sample_fbm_rep(config, streams::NOISE, 0)
}

/// Replication `rep` of stream `stream`.
pub fn sample_fbm_rep(config: &NoiseConfig, stream: u64, rep: u64) -> Result<FbmPath> {
    config.validate()?;
    if config.two_sided {
        return Err(Error::Parameter(
            "sample_fbm expects a one-sided configuration".into(),
        ));
    }
    let sampler = FgnSampler::new(config.hurst, config.dt(), config.n, config.method)?;
    let mut rng = stream_rng(config.seed, stream, rep);
    Ok(FbmPath::from_increments(0.0, config.dt(), sampler.sample(&mut rng), 0))
}

/// Samples a two-sided fBm path on `[-T, T]` pinned at `t = 0`.
pub fn sample_two_sided_fbm(config: &NoiseConfig) -> Result<FbmPath> {
    sample_two_sided_fbm_rep(config, streams::NOISE, 0)
}

pub fn sample_two_sided_fbm_rep(config: &NoiseConfig, stream: u64, rep: u64) -> Result<FbmPath> {
    config.validate()?;
    if !config.two_sided {
        return Err(Error::Parameter(
            "sample_two_sided_fbm expects two_sided = true".into(),
        ));
    }
    let sampler = FgnSampler::new(config.hurst, config.dt(), 2 * config.n, config.method)?;
    let mut rng = stream_rng(config.seed, stream, rep);
    Ok(FbmPath::from_increments(
        -config.horizon,
        config.dt(),
        sampler.sample(&mut rng),
        config.n,
    ))
}
