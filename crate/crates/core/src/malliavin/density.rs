//! Density of `X_t` from the Nourdin–Viens representation
//! `f(x) = E|X_t - m| / (2 g(x)) · exp(-∫_m^x (y - m) / g(y) dy)`,
//! `g(x) = E[⟨D X_t, -D L⁻¹ X_t⟩ | X_t = x]`, `m = E X_t`.
//!
//! `X_t` is the implicit scheme's last knot, a smooth function of the
//! Gaussian vector of driver increments. Its derivative row is exact for the
//! scheme, `-D L⁻¹` comes from Mehler's formula
//! `-D L⁻¹F = ∫_0^∞ e^{-u} T_u(DF) du`, and the inner product uses the
//! exact covariance of the increments.

use rayon::prelude::*;
use serde::Serialize;

use super::{gauss_legendre, rkhs_weights, scheme_malliavin_row, toeplitz_form};
use crate::drift::DriftSpec;
use crate::error::{ensure, Error, Result};
use crate::noise::{FgnSampler, NoiseMethod};
use crate::rng::{stream_rng, streams};
use crate::scheme::solve_increments;
use crate::stats::mean;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NvOptions {
    pub hurst: f64,
    /// Solver steps on `[0, t]`.
    pub steps: usize,
    /// Outer Monte Carlo sample count.
    pub paths: usize,
    /// Fresh drivers per Mehler average.
    pub mehler_nodes: usize,
    /// Truncation of the `u` integral.
    pub u_max: f64,
    /// Gauss–Legendre nodes on `[0, u_max]`.
    pub quad_nodes: usize,
    /// Equal-mass bins for the conditional mean `g`.
    pub bins: usize,
    pub method: NoiseMethod,
}

impl NvOptions {
    pub fn new(hurst: f64) -> Self {
        Self {
            hurst,
            steps: 128,
            paths: 4000,
            mehler_nodes: 4,
            u_max: 8.0,
            quad_nodes: 16,
            bins: 32,
            method: NoiseMethod::Auto,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NvDensity {
    pub x: Vec<f64>,
    pub density: Vec<f64>,
    /// Bin means of `X_t` and the corresponding estimates of `g`.
    pub bin_centers: Vec<f64>,
    pub g_values: Vec<f64>,
    pub mean: f64,
    pub mean_abs_deviation: f64,
    /// Grid points outside the sampled range, where `g` is extrapolated.
    pub warnings: Vec<String>,
}

/// Nourdin–Viens density estimate of the scheme's value at time `t`,
/// evaluated on the increasing grid `x_grid`.
pub fn nv_density_estimate(
    spec: &DriftSpec,
    sigma: f64,
    x0: f64,
    t: f64,
    x_grid: &[f64],
    options: &NvOptions,
    seed: u64,
) -> Result<NvDensity> {
    ensure(t > 0.0, || format!("t must be positive, got {t}"))?;
    ensure(sigma != 0.0, || "sigma must be nonzero".to_string())?;
    ensure(x_grid.len() >= 2 && x_grid.windows(2).all(|w| w[0] < w[1]), || {
        "x_grid must be strictly increasing with at least two points".to_string()
    })?;
    ensure(options.paths >= 2 * options.bins && options.bins >= 2, || {
        format!("{} paths cannot fill {} bins", options.paths, options.bins)
    })?;
    ensure(options.mehler_nodes >= 1 && options.quad_nodes >= 1 && options.u_max > 0.0, || {
        "Mehler and quadrature settings must be positive".to_string()
    })?;
    let n = options.steps;
    let dt = t / n as f64;
    let gamma = rkhs_weights(n, options.hurst, dt)?;
    let sampler = FgnSampler::new(options.hurst, dt, n, options.method)?;
    let (nodes, weights) = gauss_legendre(options.quad_nodes)?;
    let half = 0.5 * options.u_max;
    let u_rule: Vec<(f64, f64)> = nodes
        .iter()
        .zip(&weights)
        .map(|(z, w)| {
            let u = half * (z + 1.0);
            (u, half * w * (-u).exp())
        })
        .collect();

    let samples: Vec<(f64, f64)> = (0..options.paths as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream_rng(seed, streams::DENSITY, i);
            let incs = sampler.sample(&mut rng);
            let knots = solve_increments(spec, sigma, x0, dt, &incs)?;
            let row = scheme_malliavin_row(spec, sigma, &knots, dt, n)?;
            let mut mixed_row = vec![0.0; n];
            let mut mehler_rng = stream_rng(seed, streams::DENSITY_MEHLER, i);
            let mut mixed = vec![0.0; n];
            for &(u, weight) in &u_rule {
                let (a, b) = ((-u).exp(), (-(-2.0 * u).exp_m1()).sqrt());
                let w = weight / options.mehler_nodes as f64;
                for _ in 0..options.mehler_nodes {
                    let fresh = sampler.sample(&mut mehler_rng);
                    for k in 0..n {
                        mixed[k] = a * incs[k] + b * fresh[k];
                    }
                    let mk = solve_increments(spec, sigma, x0, dt, &mixed)?;
                    let r = scheme_malliavin_row(spec, sigma, &mk, dt, n)?;
                    for k in 0..n {
                        mixed_row[k] += w * r[k];
                    }
                }
            }
            Ok((knots[n], toeplitz_form(&row, &mixed_row, &gamma)))
        })
        .collect::<Result<_>>()?;

    let xs: Vec<f64> = samples.iter().map(|s| s.0).collect();
    let m = mean(&xs);
    let mad = mean(&xs.iter().map(|x| (x - m).abs()).collect::<Vec<_>>());
    let (centers, g_values) = binned_means(samples, options.bins)?;

    let mut warnings = Vec::new();
    let (lo, hi) = (centers[0], centers[centers.len() - 1]);
    let outside = x_grid.iter().filter(|&&x| x < lo || x > hi).count();
    if outside > 0 {
        warnings.push(format!(
            "{outside} grid points outside the bin range [{lo:.6}, {hi:.6}]; g held constant there"
        ));
    }
    let g_at = |x: f64| interpolate_clamped(&centers, &g_values, x);
    let density = assemble_density(x_grid, m, mad, g_at);
    Ok(NvDensity {
        x: x_grid.to_vec(),
        density,
        bin_centers: centers,
        g_values,
        mean: m,
        mean_abs_deviation: mad,
        warnings,
    })
}

/// Sorts `(x, value)` pairs by `x`, splits them into `bins` equal-mass groups
/// and returns the group means. Fails if a mean of `value` is not positive.
fn binned_means(mut samples: Vec<(f64, f64)>, bins: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    samples.sort_by(|a, b| a.0.total_cmp(&b.0));
    let total = samples.len();
    let mut centers = Vec::with_capacity(bins);
    let mut values = Vec::with_capacity(bins);
    for b in 0..bins {
        let chunk = &samples[b * total / bins..(b + 1) * total / bins];
        let cx = chunk.iter().map(|s| s.0).sum::<f64>() / chunk.len() as f64;
        let cg = chunk.iter().map(|s| s.1).sum::<f64>() / chunk.len() as f64;
        if !(cg > 0.0) {
            return Err(Error::Numerical(format!(
                "conditional mean g = {cg} is not positive in bin {b} around x = {cx}"
            )));
        }
        centers.push(cx);
        values.push(cg);
    }
    Ok((centers, values))
}

pub(crate) fn interpolate_clamped(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    if x <= xs[0] {
        return ys[0];
    }
    if x >= xs[xs.len() - 1] {
        return ys[ys.len() - 1];
    }
    let k = xs.partition_point(|&c| c <= x) - 1;
    let w = (x - xs[k]) / (xs[k + 1] - xs[k]);
    ys[k] + w * (ys[k + 1] - ys[k])
}

/// Evaluates the density formula on `x_grid`, with the exponent integrated
/// by the trapezoid rule on the grid augmented by `m`.
fn assemble_density(x_grid: &[f64], m: f64, mad: f64, g: impl Fn(f64) -> f64) -> Vec<f64> {
    let mut nodes: Vec<f64> = x_grid.to_vec();
    let pos = nodes.partition_point(|&x| x < m);
    nodes.insert(pos, m);
    let q: Vec<f64> = nodes.iter().map(|&y| (y - m) / g(y)).collect();
    let mut cum = vec![0.0; nodes.len()];
    for k in 1..nodes.len() {
        cum[k] = cum[k - 1] + 0.5 * (nodes[k] - nodes[k - 1]) * (q[k] + q[k - 1]);
    }
    let at_m = cum[pos];
    nodes
        .iter()
        .zip(&cum)
        .enumerate()
        .filter(|(k, _)| *k != pos)
        .map(|(_, (&x, &c))| mad / (2.0 * g(x)) * (-(c - at_m)).exp())
        .collect()
}

/// Values `X_t` of `count` independent scheme paths (stream `stream`).
#[allow(clippy::too_many_arguments)]
pub fn terminal_samples(
    spec: &DriftSpec,
    sigma: f64,
    x0: f64,
    t: f64,
    options: &NvOptions,
    count: usize,
    seed: u64,
    stream: u64,
) -> Result<Vec<f64>> {
    let dt = t / options.steps as f64;
    let sampler = FgnSampler::new(options.hurst, dt, options.steps, options.method)?;
    (0..count as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream_rng(seed, stream, i);
            let incs = sampler.sample(&mut rng);
            Ok(*solve_increments(spec, sigma, x0, dt, &incs)?.last().expect("knots"))
        })
        .collect()
}

/// Normalised histogram.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub density: Vec<f64>,
}

impl Histogram {
    pub fn centers(&self) -> Vec<f64> {
        self.edges.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
    }

    pub fn integral(&self) -> f64 {
        self.edges.windows(2).zip(&self.density).map(|(w, d)| (w[1] - w[0]) * d).sum()
    }

    /// Density value of the bin containing `x`, zero outside.
    pub fn eval(&self, x: f64) -> f64 {
        let last = self.edges.len() - 1;
        if x < self.edges[0] || x > self.edges[last] {
            return 0.0;
        }
        let k = (self.edges.partition_point(|&e| e <= x)).clamp(1, last) - 1;
        self.density[k]
    }
}

/// Histogram of `samples` with `bins` equal-width bins over their range.
/// Constant samples give one bin of width `max(|c|, 1)·1e-9` centred on `c`.
pub fn empirical_density(samples: &[f64], bins: usize) -> Result<Histogram> {
    ensure(samples.len() >= 100, || format!("need at least 100 samples, got {}", samples.len()))?;
    ensure(bins >= 1, || "need at least one bin".to_string())?;
    if samples.iter().any(|x| !x.is_finite()) {
        return Err(Error::Degenerate("non-finite sample".into()));
    }
    let lo = samples.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = samples.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if lo == hi {
        let half = 0.5e-9 * lo.abs().max(1.0);
        let edges = vec![lo - half, lo + half];
        let density = vec![1.0 / (edges[1] - edges[0])];
        return Ok(Histogram { edges, density });
    }
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0usize; bins];
    for &x in samples {
        let k = (((x - lo) / width) as usize).min(bins - 1);
        counts[k] += 1;
    }
    let edges: Vec<f64> = (0..=bins).map(|k| if k == bins { hi } else { lo + k as f64 * width }).collect();
    let total = samples.len() as f64;
    let density = counts
        .iter()
        .zip(edges.windows(2))
        .map(|(&c, w)| c as f64 / (total * (w[1] - w[0])))
        .collect();
    Ok(Histogram { edges, density })
}

/// Histogram on the given increasing `edges`, normalised by the total
/// number of samples (samples outside the edges count in the total only).
pub fn histogram_on_edges(samples: &[f64], edges: &[f64]) -> Result<Histogram> {
    ensure(samples.len() >= 100, || format!("need at least 100 samples, got {}", samples.len()))?;
    ensure(edges.len() >= 2 && edges.windows(2).all(|w| w[0] < w[1]), || {
        "edges must be strictly increasing".to_string()
    })?;
    let last = edges.len() - 1;
    let mut counts = vec![0usize; last];
    for &x in samples {
        if x >= edges[0] && x <= edges[last] {
            let k = (edges.partition_point(|&e| e <= x)).clamp(1, last) - 1;
            counts[k] += 1;
        }
    }
    let total = samples.len() as f64;
    let density = counts
        .iter()
        .zip(edges.windows(2))
        .map(|(&c, w)| c as f64 / (total * (w[1] - w[0])))
        .collect();
    Ok(Histogram { edges: edges.to_vec(), density })
}

/// Averages of the piecewise-linear function `(x, f)` over each interval
/// `[edges[k], edges[k+1]]`, which must lie inside `[x[0], x[last]]`.
pub fn average_over_bins(x: &[f64], f: &[f64], edges: &[f64]) -> Result<Vec<f64>> {
    ensure(x.len() == f.len() && x.len() >= 2, || "x and f lengths differ".to_string())?;
    ensure(edges[0] >= x[0] && edges[edges.len() - 1] <= x[x.len() - 1], || {
        "bins extend beyond the evaluation grid".to_string()
    })?;
    let at = |u: f64| interpolate_clamped(x, f, u);
    Ok(edges
        .windows(2)
        .map(|w| {
            let (a, b) = (w[0], w[1]);
            let mut pts = vec![a];
            pts.extend(x.iter().copied().filter(|&v| v > a && v < b));
            pts.push(b);
            let area: f64 = pts.windows(2).map(|p| 0.5 * (p[1] - p[0]) * (at(p[0]) + at(p[1]))).sum();
            area / (b - a)
        })
        .collect())
}
