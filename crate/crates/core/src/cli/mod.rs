//! Experiment driver behind the `fsde` binary.
//!
//! Exit codes: 0 on success, 2 for invalid configuration or an inadmissible
//! drift, 3 for numerical failures.

mod commands;
pub mod config;
pub mod csvio;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, ValueEnum};

pub use config::ExperimentConfig;

use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Subcommand {
    CheckDrift,
    Simulate,
    Convergence,
    Ergodic,
    Pullback,
    Hitting,
    Estimate,
    Density,
    Heston,
}

impl Subcommand {
    pub fn name(self) -> &'static str {
        match self {
            Subcommand::CheckDrift => "check-drift",
            Subcommand::Simulate => "simulate",
            Subcommand::Convergence => "convergence",
            Subcommand::Ergodic => "ergodic",
            Subcommand::Pullback => "pullback",
            Subcommand::Hitting => "hitting",
            Subcommand::Estimate => "estimate",
            Subcommand::Density => "density",
            Subcommand::Heston => "heston",
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "fsde", version, about = "Singular SDEs driven by fractional Brownian motion")]
pub struct Cli {
    #[arg(value_enum)]
    pub command: Subcommand,
    /// TOML configuration file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Master seed (mc.seed).
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// Replications (mc.reps).
    #[arg(long)]
    pub reps: Option<usize>,
    /// Output file tag: files are named `<subcommand>-<tag>.csv`.
    #[arg(long, default_value = "run")]
    pub tag: String,
    /// Any configuration key, `section.key=value`; repeatable.
    #[arg(long = "set", value_parser = config::parse_assignment)]
    pub set: Vec<(String, String)>,
    /// noise.hurst
    #[arg(long)]
    pub hurst: Option<f64>,
    /// noise.alpha
    #[arg(long)]
    pub alpha: Option<f64>,
    /// grid.n
    #[arg(long)]
    pub n: Option<usize>,
    /// grid.T
    #[arg(long = "horizon")]
    pub horizon: Option<f64>,
    /// model.sigma
    #[arg(long)]
    pub sigma: Option<f64>,
    /// model.x0
    #[arg(long)]
    pub x0: Option<f64>,
    /// model.drift
    #[arg(long)]
    pub drift: Option<String>,
    /// model.gamma
    #[arg(long)]
    pub gamma: Option<f64>,
}

/// What a run produced.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub files: Vec<PathBuf>,
    pub summary: String,
}

impl Cli {
    /// Overrides in precedence order: `--set` entries, then named flags.
    pub fn overrides(&self) -> Vec<(String, String)> {
        let mut out = self.set.clone();
        let mut push = |k: &str, v: Option<String>| {
            if let Some(v) = v {
                out.push((k.to_string(), v));
            }
        };
        push("mc.seed", self.seed.map(|v| v.to_string()));
        push("mc.reps", self.reps.map(|v| v.to_string()));
        push("noise.hurst", self.hurst.map(float_literal));
        push("noise.alpha", self.alpha.map(float_literal));
        push("grid.n", self.n.map(|v| v.to_string()));
        push("grid.T", self.horizon.map(float_literal));
        push("model.sigma", self.sigma.map(float_literal));
        push("model.x0", self.x0.map(float_literal));
        push("model.gamma", self.gamma.map(float_literal));
        push("model.drift", self.drift.clone().map(|d| format!("\"{d}\"")));
        out
    }
}

fn float_literal(v: f64) -> String {
    format!("{v:?}")
}

/// Resolves the configuration and runs the subcommand.
pub fn run(cli: &Cli) -> Result<RunOutput> {
    let config = ExperimentConfig::resolve(cli.config.as_deref(), &cli.overrides())?;
    std::fs::create_dir_all(&cli.out)?;
    let path = cli.out.join(format!("{}-{}.csv", cli.command.name(), cli.tag));
    commands::dispatch(cli.command, &config, &path)
}

/// Parses `args`, runs, prints the summary and returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(&cli) {
        Ok(out) => {
            println!("{}", out.summary);
            for f in &out.files {
                println!("wrote {}", f.display());
            }
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
