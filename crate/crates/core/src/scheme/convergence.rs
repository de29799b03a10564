use rayon::prelude::*;

use super::solve_increments;
use crate::drift::DriftSpec;
use crate::error::{ensure, Result};
use crate::noise::{FgnSampler, NoiseMethod};
use crate::rng::{stream_rng, streams};
use crate::stats::{ols_slope, quantile};

/// Inputs of a self-convergence experiment.
#[derive(Debug, Clone)]
pub struct ConvergenceSetup {
    pub spec: DriftSpec,
    pub sigma: f64,
    pub x0: f64,
    pub hurst: f64,
    /// Hölder exponent; the theoretical rate is `n^{-alpha}`.
    pub alpha: f64,
    pub horizon: f64,
    pub n_list: Vec<usize>,
    pub reference_n: usize,
    pub reps: usize,
    pub seed: u64,
    pub method: NoiseMethod,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub n: usize,
    pub median_sup_error: f64,
    pub q25: f64,
    pub q75: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceTable {
    pub rows: Vec<ConvergenceRow>,
    /// Least-squares slope of `log(median error)` against `log(n)`, over the
    /// rows with nonzero error.
    pub slope: f64,
}

/// Sup-norm distance, on the fine grid, between the coarse scheme's
/// piecewise-linear interpolant and the fine knots.
fn sup_error(fine: &[f64], coarse: &[f64], factor: usize) -> f64 {
    fine.iter()
        .enumerate()
        .map(|(j, f)| {
            let k = j / factor;
            let r = j % factor;
            let c = if r == 0 {
                coarse[k]
            } else {
                coarse[k] + (coarse[k + 1] - coarse[k]) * r as f64 / factor as f64
            };
            (c - f).abs()
        })
        .fold(0.0, f64::max)
}

/// Compares coarse schemes with a fine reference solved on the same noise
/// realisation; coarse increments are block sums of the fine ones.
pub fn convergence_study(setup: &ConvergenceSetup) -> Result<ConvergenceTable> {
    ensure(setup.reps >= 1, || "reps must be positive".to_string())?;
    ensure(setup.alpha > 0.0 && setup.alpha < setup.hurst, || "alpha must lie in (0, H)".to_string())?;
    for &n in &setup.n_list {
        ensure(n >= 1 && setup.reference_n.is_multiple_of(n) && (setup.reference_n / n).is_power_of_two(), || {
            format!("reference_n = {} is not a power-of-two multiple of {n}", setup.reference_n)
        })?;
    }
    let fine_dt = setup.horizon / setup.reference_n as f64;
    let sampler = FgnSampler::new(setup.hurst, fine_dt, setup.reference_n, setup.method)?;

    let per_rep: Vec<Vec<f64>> = (0..setup.reps)
        .into_par_iter()
        .map(|rep| {
            let mut rng = stream_rng(setup.seed, streams::CONVERGENCE, rep as u64);
            let fine_inc = sampler.sample(&mut rng);
            let fine = solve_increments(&setup.spec, setup.sigma, setup.x0, fine_dt, &fine_inc)?;
            setup
                .n_list
                .iter()
                .map(|&n| {
                    let factor = setup.reference_n / n;
                    let coarse_inc: Vec<f64> = fine_inc.chunks(factor).map(|c| c.iter().sum()).collect();
                    let coarse = solve_increments(
                        &setup.spec,
                        setup.sigma,
                        setup.x0,
                        setup.horizon / n as f64,
                        &coarse_inc,
                    )?;
                    Ok(sup_error(&fine, &coarse, factor))
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<Vec<_>>>()?;

    let rows: Vec<ConvergenceRow> = setup
        .n_list
        .iter()
        .enumerate()
        .map(|(i, &n)| {
            let errs: Vec<f64> = per_rep.iter().map(|r| r[i]).collect();
            ConvergenceRow {
                n,
                median_sup_error: quantile(&errs, 0.5),
                q25: quantile(&errs, 0.25),
                q75: quantile(&errs, 0.75),
            }
        })
        .collect();
    let (lx, ly): (Vec<f64>, Vec<f64>) = rows
        .iter()
        .filter(|r| r.median_sup_error > 0.0)
        .map(|r| ((r.n as f64).ln(), r.median_sup_error.ln()))
        .unzip();
    let slope = if lx.len() >= 2 { ols_slope(&lx, &ly) } else { f64::NAN };
    Ok(ConvergenceTable { rows, slope })
}
