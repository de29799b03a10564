//! Experiment configuration: a TOML file with one table per section, flag
//! overrides of the form `section.key=value`, and defaults for the rest.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::drift::{check_admissibility, DriftFamily, DriftParams, DriftSpec};
use crate::error::{Error, Result};
use crate::heston::RateFn;
use crate::noise::NoiseMethod;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelSection {
    pub drift: String,
    pub u: f64,
    pub v: f64,
    pub w: f64,
    pub gamma: f64,
    pub lambda: f64,
    pub mu: f64,
    pub sigma: f64,
    pub x0: f64,
}

impl Default for ModelSection {
    fn default() -> Self {
        Self { drift: "b1".into(), u: 1.0, v: 1.0, w: 1.0, gamma: 2.0, lambda: 0.0, mu: 0.0, sigma: 0.3, x0: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseSection {
    pub hurst: f64,
    pub alpha: Option<f64>,
    pub method: NoiseMethod,
}

impl Default for NoiseSection {
    fn default() -> Self {
        Self { hurst: 0.7, alpha: None, method: NoiseMethod::Auto }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSection {
    #[serde(rename = "T")]
    pub horizon: f64,
    pub n: usize,
}

impl Default for GridSection {
    fn default() -> Self {
        Self { horizon: 1.0, n: 1024 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct McSection {
    pub reps: usize,
    pub seed: u64,
}

impl Default for McSection {
    fn default() -> Self {
        Self { reps: 1, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConvergenceSection {
    pub n_list: Vec<usize>,
    pub reference_n: usize,
}

impl Default for ConvergenceSection {
    fn default() -> Self {
        Self { n_list: vec![64, 128, 256, 512, 1024, 2048], reference_n: 16384 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ErgodicSection {
    #[serde(rename = "T")]
    pub horizon: f64,
    pub steps_per_unit: usize,
    pub phi: String,
    pub x0_alt: f64,
    pub checkpoints: usize,
}

impl Default for ErgodicSection {
    fn default() -> Self {
        Self { horizon: 200.0, steps_per_unit: 64, phi: "clip:10".into(), x0_alt: 5.0, checkpoints: 20 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PullbackSection {
    pub n_max: usize,
    pub steps_per_unit: usize,
}

impl Default for PullbackSection {
    fn default() -> Self {
        Self { n_max: 10, steps_per_unit: 256 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HittingSection {
    /// Defaults to the drift's equilibrium `x_b`.
    pub level: Option<f64>,
    pub t_star: f64,
}

impl Default for HittingSection {
    fn default() -> Self {
        Self { level: None, t_star: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EstimateSection {
    /// Path CSV written by `simulate`; when absent, paths are simulated.
    pub input: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DensitySection {
    pub t: f64,
    pub steps: usize,
    pub paths: usize,
    pub mehler_nodes: usize,
    pub u_max: f64,
    pub quad_nodes: usize,
    pub bins: usize,
    pub x_points: usize,
    pub hist_samples: usize,
    pub hist_bins: usize,
    /// Power `κ`; when set, the density of `X^κ` is written too.
    pub kappa: Option<f64>,
}

impl Default for DensitySection {
    fn default() -> Self {
        Self {
            t: 1.0,
            steps: 128,
            paths: 4000,
            mehler_nodes: 4,
            u_max: 8.0,
            quad_nodes: 16,
            bins: 32,
            x_points: 201,
            hist_samples: 10000,
            hist_bins: 40,
            kappa: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HestonSection {
    pub s0: f64,
    pub z0: f64,
    pub v: f64,
    pub w: f64,
    pub zeta: f64,
    pub gamma: f64,
    pub mu: RateFn,
    pub r: RateFn,
    pub bond0: f64,
}

impl Default for HestonSection {
    fn default() -> Self {
        Self {
            s0: 100.0,
            z0: 0.04,
            v: 0.08,
            w: 2.0,
            zeta: 0.3,
            gamma: 1.0,
            mu: RateFn::Constant(0.05),
            r: RateFn::Constant(0.02),
            bond0: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelSection,
    pub noise: NoiseSection,
    pub grid: GridSection,
    pub mc: McSection,
    pub convergence: ConvergenceSection,
    pub ergodic: ErgodicSection,
    pub pullback: PullbackSection,
    pub hitting: HittingSection,
    pub estimate: EstimateSection,
    pub density: DensitySection,
    pub heston: HestonSection,
}

impl ExperimentConfig {
    /// Reads `path` (if any), applies `overrides` in order and fills the
    /// remaining keys with defaults.
    pub fn resolve(path: Option<&Path>, overrides: &[(String, String)]) -> Result<Self> {
        let mut table = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| Error::Config(format!("cannot read {}: {e}", p.display())))?;
                text.parse::<toml::Table>()
                    .map_err(|e| Error::Config(format!("{}: {e}", p.display())))?
            }
            None => toml::Table::new(),
        };
        for (key, value) in overrides {
            apply_override(&mut table, key, value)?;
        }
        toml::Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| Error::Config(e.message().to_string()))
    }

    pub fn alpha(&self) -> f64 {
        let h = self.noise.hurst;
        self.noise.alpha.unwrap_or(h - (0.05f64).min(h / 2.0))
    }

    pub fn drift_spec(&self) -> Result<DriftSpec> {
        let m = &self.model;
        let family: DriftFamily = m.drift.parse()?;
        DriftSpec::new(family, DriftParams::new(m.u, m.v, m.w, m.gamma).with_perturbation(m.lambda, m.mu))
    }

    /// Drift spec that passed the admissibility check for [`Self::alpha`].
    pub fn admissible_spec(&self) -> Result<DriftSpec> {
        let spec = self.drift_spec()?;
        let report = check_admissibility(&spec, self.alpha());
        if !report.admissible {
            return Err(Error::Inadmissible(report.reasons.join("; ")));
        }
        Ok(spec)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }
}

/// Sets `section.key` to `value`, read as a TOML literal when possible and
/// as a string otherwise.
fn apply_override(table: &mut toml::Table, key: &str, value: &str) -> Result<()> {
    let (section, field) = key
        .split_once('.')
        .ok_or_else(|| Error::Config(format!("override `{key}` is not of the form section.key")))?;
    let parsed = format!("value = {value}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("value"))
        .unwrap_or_else(|| toml::Value::String(value.to_string()));
    let entry = table
        .entry(section.to_string())
        .or_insert_with(|| toml::Value::Table(toml::Table::new()));
    match entry {
        toml::Value::Table(t) => {
            t.insert(field.to_string(), parsed);
            Ok(())
        }
        _ => Err(Error::Config(format!("`{section}` is not a section"))),
    }
}

/// Parses `section.key=value`.
pub fn parse_assignment(s: &str) -> std::result::Result<(String, String), String> {
    s.split_once('=')
        .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
        .filter(|(k, _)| !k.is_empty())
        .ok_or_else(|| format!("expected section.key=value, got `{s}`"))
}
