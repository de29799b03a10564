use std::path::Path;

use rayon::prelude::*;

use super::config::ExperimentConfig;
use super::csvio::{fmt_float, read_paths, CsvOut};
use super::{RunOutput, Subcommand};
use crate::drift::check_admissibility;
use crate::error::{ensure, Error, Result};
use crate::estimate::{estimate_from_observations, EstimationResult};
use crate::heston::{HestonConfig, HestonSimulator};
use crate::longrun::{ergodic_sweep, hitting_time, pullback_batch, PhiTag, PullbackOptions};
use crate::malliavin::density::terminal_samples;
use crate::malliavin::{empirical_density, nv_density_estimate, NvOptions};
use crate::noise::{sample_fbm_rep, NoiseConfig};
use crate::rng::streams;
use crate::scheme::{convergence_study, solve_path, ConvergenceSetup, EulerPath, TimeGrid};
use crate::stats::{mean, median};
use crate::transform::transfer_density;

pub(super) fn dispatch(cmd: Subcommand, cfg: &ExperimentConfig, out: &Path) -> Result<RunOutput> {
    match cmd {
        Subcommand::CheckDrift => check_drift(cfg, out),
        Subcommand::Simulate => simulate(cfg, out),
        Subcommand::Convergence => convergence(cfg, out),
        Subcommand::Ergodic => ergodic(cfg, out),
        Subcommand::Pullback => pullback(cfg, out),
        Subcommand::Hitting => hitting(cfg, out),
        Subcommand::Estimate => estimate(cfg, out),
        Subcommand::Density => density(cfg, out),
        Subcommand::Heston => heston(cfg, out),
    }
}

fn noise_config(cfg: &ExperimentConfig, horizon: f64, n: usize) -> NoiseConfig {
    NoiseConfig::new(cfg.noise.hurst, horizon, n, cfg.mc.seed)
        .with_alpha(cfg.alpha())
        .with_method(cfg.noise.method)
}

/// Scheme paths for replications `0..reps` of `stream` on `grid`.
fn simulate_paths(cfg: &ExperimentConfig, grid: TimeGrid, x0: f64, stream: u64) -> Result<Vec<EulerPath>> {
    let spec = cfg.admissible_spec()?;
    let noise = noise_config(cfg, grid.horizon, grid.n);
    (0..cfg.mc.reps as u64)
        .into_par_iter()
        .map(|rep| {
            let driver = sample_fbm_rep(&noise, stream, rep)?;
            solve_path(&spec, cfg.model.sigma, x0, grid, &driver)
        })
        .collect()
}

fn grid(cfg: &ExperimentConfig) -> Result<TimeGrid> {
    TimeGrid::new(cfg.grid.horizon, cfg.grid.n)
}

fn check_drift(cfg: &ExperimentConfig, out: &Path) -> Result<RunOutput> {
    let spec = cfg.drift_spec()?;
    let alpha = cfg.alpha();
    let report = check_admissibility(&spec, alpha);
    let mut w = CsvOut::create(out, &cfg.to_json(), &["family", "alpha", "admissible", "K", "R", "x_b"])?;
    let xb = spec.root_x_b.filter(|_| report.admissible);
    w.row([
        spec.family.name().to_string(),
        fmt_float(alpha),
        report.admissible.to_string(),
        fmt_float(spec.contraction_k),
        fmt_float(spec.growth_r),
        xb.map(fmt_float).unwrap_or_default(),
    ])?;
    let file = w.finish()?;
    if !report.admissible {
        return Err(Error::Inadmissible(report.reasons.join("; ")));
    }
    let constants = if spec.contraction_k == spec.growth_r {
        format!("K=R={}", spec.contraction_k)
    } else {
        format!("K={}, R={}", spec.contraction_k, spec.growth_r)
    };
    Ok(RunOutput {
        files: vec![file],
        summary: format!(
            "admissible, {constants}, x_b={}",
            xb.map(|v| v.to_string()).unwrap_or_else(|| "n/a".into())
        ),
    })
}

fn simulate(cfg: &ExperimentConfig, out: &Path) -> Result<RunOutput> {
    let g = grid(cfg)?;
    let paths = simulate_paths(cfg, g, cfg.model.x0, streams::NOISE)?;
    let times = g.times();
    let multi = paths.len() > 1;
    let header: &[&str] = if multi { &["rep", "t", "value"] } else { &["t", "value"] };
    let mut w = CsvOut::create(out, &cfg.to_json(), header)?;
    for (rep, p) in paths.iter().enumerate() {
        for (t, x) in times.iter().zip(&p.knots) {
            if multi {
                w.row([rep.to_string(), fmt_float(*t), fmt_float(*x)])?;
            } else {
                w.row([fmt_float(*t), fmt_float(*x)])?;
            }
        }
    }
    let min = paths.iter().map(EulerPath::min).fold(f64::INFINITY, f64::min);
    Ok(RunOutput {
        files: vec![w.finish()?],
        summary: format!("simulated {} path(s) of {} steps, min knot {min}", paths.len(), g.n),
    })
}

fn convergence(cfg: &ExperimentConfig, out: &Path) -> Result<RunOutput> {
    let setup = ConvergenceSetup {
        spec: cfg.admissible_spec()?,
        sigma: cfg.model.sigma,
        x0: cfg.model.x0,
        hurst: cfg.noise.hurst,
        alpha: cfg.alpha(),
        horizon: cfg.grid.horizon,
        n_list: cfg.convergence.n_list.clone(),
        reference_n: cfg.convergence.reference_n,
        reps: cfg.mc.reps,
        seed: cfg.mc.seed,
        method: cfg.noise.method,
    };
    let table = convergence_study(&setup)?;
    let mut w = CsvOut::create(out, &cfg.to_json(), &["n", "median_sup_error", "q25", "q75"])?;
    for r in &table.rows {
        w.row([r.n.to_string(), fmt_float(r.median_sup_error), fmt_float(r.q25), fmt_float(r.q75)])?;
    }
    Ok(RunOutput { files: vec![w.finish()?], summary: format!("fitted slope {}", table.slope) })
}

fn ergodic(cfg: &ExperimentConfig, out: &Path) -> Result<RunOutput> {
    let e = &cfg.ergodic;
    let phi: PhiTag = e.phi.parse()?;
    let n = (e.horizon * e.steps_per_unit as f64).round() as usize;
    let g = TimeGrid::new(e.horizon, n)?;
    let a = simulate_paths(cfg, g, cfg.model.x0, streams::ERGODIC)?;
    let b = simulate_paths(cfg, g, e.x0_alt, streams::ERGODIC)?;
    let mut w = CsvOut::create(out, &cfg.to_json(), &["rep", "T", "average", "average_alt"])?;
    let mut worst: f64 = 0.0;
    for (rep, (pa, pb)) in a.iter().zip(&b).enumerate() {
        let sa = ergodic_sweep(phi, pa, e.checkpoints)?;
        let sb = ergodic_sweep(phi, pb, e.checkpoints)?;
        for ((t, va), (_, vb)) in sa.iter().zip(&sb) {
            w.row([rep.to_string(), fmt_float(*t), fmt_float(*va), fmt_float(*vb)])?;
        }
        let (_, va) = sa[sa.len() - 1];
        let (_, vb) = sb[sb.len() - 1];
        worst = worst.max((va - vb).abs());
    }
    Ok(RunOutput {
        files: vec![w.finish()?],
        summary: format!("max |average - average_alt| at T={}: {worst}", e.horizon),
    })
}

fn pullback(cfg: &ExperimentConfig, out: &Path) -> Result<RunOutput> {
    let spec = cfg.admissible_spec()?;
    let opts = PullbackOptions {
        hurst: cfg.noise.hurst,
        steps_per_unit: cfg.pullback.steps_per_unit,
        method: cfg.noise.method,
    };
    let runs = pullback_batch(
        &spec,
        cfg.model.sigma,
        cfg.model.x0,
        cfg.pullback.n_max,
        cfg.mc.seed,
        cfg.mc.reps,
        &opts,
    )?;
    let mut w = CsvOut::create(out, &cfg.to_json(), &["rep", "n", "value", "gap"])?;
    for run in &runs {
        for (n, v) in run.values.iter().enumerate() {
            let gap = run.gaps.get(n).map(|g| fmt_float(*g)).unwrap_or_default();
            w.row([run.rep.to_string(), n.to_string(), fmt_float(*v), gap])?;
        }
    }
    let rates: Vec<f64> = runs.iter().map(|r| r.decay_rate).filter(|r| r.is_finite()).collect();
    let summary = if rates.is_empty() {
        "no decay rate could be fitted".to_string()
    } else {
        format!("median gap decay rate {} (K = {})", median(&rates), spec.contraction_k)
    };
    Ok(RunOutput { files: vec![w.finish()?], summary })
}

fn hitting(cfg: &ExperimentConfig, out: &Path) -> Result<RunOutput> {
    let spec = cfg.admissible_spec()?;
    let level = match cfg.hitting.level {
        Some(l) => l,
        None => spec.x_b()?,
    };
    let paths = simulate_paths(cfg, grid(cfg)?, cfg.model.x0, streams::HITTING)?;
    let mut w = CsvOut::create(out, &cfg.to_json(), &["rep", "tau"])?;
    let mut hits = 0;
    for (rep, p) in paths.iter().enumerate() {
        let tau = hitting_time(p, level, cfg.hitting.t_star)?;
        hits += usize::from(tau.is_some());
        w.row([rep.to_string(), tau.map(fmt_float).unwrap_or_default()])?;
    }
    Ok(RunOutput {
        files: vec![w.finish()?],
        summary: format!("{hits} of {} paths hit {level} after t = {}", paths.len(), cfg.hitting.t_star),
    })
}

fn estimate(cfg: &ExperimentConfig, out: &Path) -> Result<RunOutput> {
    let spec = cfg.admissible_spec()?;
    let results: Vec<(u64, EstimationResult)> = match &cfg.estimate.input {
        Some(file) => read_paths(Path::new(file))?
            .into_iter()
            .map(|p| {
                let n = p.values.len() - 1;
                ensure(n >= 1, || "path has a single point".to_string())?;
                let horizon = p.times[n] - p.times[0];
                Ok((p.rep, estimate_from_observations(&spec, &p.values, horizon, n)?))
            })
            .collect::<Result<_>>()?,
        None => {
            let g = grid(cfg)?;
            simulate_paths(cfg, g, cfg.model.x0, streams::NOISE)?
                .into_iter()
                .enumerate()
                .map(|(rep, p)| Ok((rep as u64, estimate_from_observations(&spec, &p.knots, g.horizon, g.n)?)))
                .collect::<Result<_>>()?
        }
    };
    let mut w = CsvOut::create(out, &cfg.to_json(), &["rep", "h_hat", "sigma_hat", "v1", "v2"])?;
    for (rep, r) in &results {
        w.row([rep.to_string(), fmt_float(r.h_hat), fmt_float(r.sigma_hat), fmt_float(r.v1), fmt_float(r.v2)])?;
    }
    let hs: Vec<f64> = results.iter().map(|r| r.1.h_hat).collect();
    let ss: Vec<f64> = results.iter().map(|r| r.1.sigma_hat).collect();
    Ok(RunOutput {
        files: vec![w.finish()?],
        summary: format!("mean h_hat {}, mean sigma_hat {} over {} path(s)", mean(&hs), mean(&ss), hs.len()),
    })
}

fn density(cfg: &ExperimentConfig, out: &Path) -> Result<RunOutput> {
    let spec = cfg.admissible_spec()?;
    let d = &cfg.density;
    let options = NvOptions {
        hurst: cfg.noise.hurst,
        steps: d.steps,
        paths: d.paths,
        mehler_nodes: d.mehler_nodes,
        u_max: d.u_max,
        quad_nodes: d.quad_nodes,
        bins: d.bins,
        method: cfg.noise.method,
    };
    ensure(d.x_points >= 2, || "density.x_points must be at least 2".to_string())?;
    let sigma = cfg.model.sigma;
    let samples = terminal_samples(
        &spec,
        sigma,
        cfg.model.x0,
        d.t,
        &options,
        d.hist_samples,
        cfg.mc.seed,
        streams::DENSITY_HISTOGRAM,
    )?;
    let hist = empirical_density(&samples, d.hist_bins)?;
    let (lo, hi) = (hist.edges[0], hist.edges[hist.edges.len() - 1]);
    let x_grid: Vec<f64> = (0..d.x_points)
        .map(|i| lo + (hi - lo) * i as f64 / (d.x_points - 1) as f64)
        .collect();
    let nv = nv_density_estimate(&spec, sigma, cfg.model.x0, d.t, &x_grid, &options, cfg.mc.seed)?;
    let mut header = vec!["x", "f_nv", "f_hist"];
    if d.kappa.is_some() {
        header.extend(["z", "f_z"]);
    }
    let mut w = CsvOut::create(out, &cfg.to_json(), &header)?;
    let at = |x: f64| crate::malliavin::density::interpolate_clamped(&nv.x, &nv.density, x);
    for (x, f) in nv.x.iter().zip(&nv.density) {
        let mut row = vec![fmt_float(*x), fmt_float(*f), fmt_float(hist.eval(*x))];
        if let Some(kappa) = d.kappa {
            let z = x.powf(kappa);
            row.push(fmt_float(z));
            row.push(fmt_float(transfer_density(kappa, z, at)?));
        }
        w.row(row)?;
    }
    let integral: f64 = nv.x.windows(2).zip(nv.density.windows(2)).map(|(x, f)| 0.5 * (x[1] - x[0]) * (f[0] + f[1])).sum();
    let mut summary = format!("density integrates to {integral} over [{lo}, {hi}]");
    for warning in &nv.warnings {
        summary.push_str(&format!("\nwarning: {warning}"));
    }
    Ok(RunOutput { files: vec![w.finish()?], summary })
}

fn heston(cfg: &ExperimentConfig, out: &Path) -> Result<RunOutput> {
    let h = &cfg.heston;
    let config = HestonConfig {
        s0: h.s0,
        z0: h.z0,
        v: h.v,
        w: h.w,
        zeta: h.zeta,
        gamma: h.gamma,
        hurst: cfg.noise.hurst,
        alpha: cfg.noise.alpha,
        mu: h.mu.clone(),
        r: h.r.clone(),
        bond0: h.bond0,
        grid: grid(cfg)?,
        seed: cfg.mc.seed,
    };
    let sim = HestonSimulator::new(config)?;
    let paths = sim.paths(cfg.mc.reps)?;
    let mut w = CsvOut::create(out, &cfg.to_json(), &["rep", "t", "Z", "S", "S_discounted"])?;
    for (rep, p) in paths.iter().enumerate() {
        for k in 0..p.times.len() {
            w.row([
                rep.to_string(),
                fmt_float(p.times[k]),
                fmt_float(p.z[k]),
                fmt_float(p.s[k]),
                fmt_float(p.s_discounted[k]),
            ])?;
        }
    }
    let terminal: Vec<f64> = paths.iter().map(|p| p.s_discounted[p.s_discounted.len() - 1]).collect();
    Ok(RunOutput {
        files: vec![w.finish()?],
        summary: format!("mean discounted terminal price {} over {} path(s)", mean(&terminal), terminal.len()),
    })
}
