use rayon::prelude::*;
use statrs::function::gamma::gamma;

use super::{gauss_2f1, FbmPath, NoiseConfig};
use crate::error::{Error, Result};
use crate::rng::{standard_normals, stream_rng, streams};

/// Largest grid for which the dense coupling matrix is built.
const COUPLING_MAX_N: usize = 8192;

fn check_hurst(hurst: f64) -> Result<()> {
    if hurst > 0.5 && hurst < 1.0 {
        Ok(())
    } else {
        Err(Error::Unsupported(format!(
            "Volterra coupling needs H in (1/2, 1), got {hurst}"
        )))
    }
}

/// Normalising constant making `∫_0^t K_H(t,s)² ds = t^{2H}`.
fn kernel_constant(hurst: f64) -> f64 {
    (2.0 * hurst * gamma(1.5 - hurst) * gamma(hurst + 0.5) / gamma(2.0 - 2.0 * hurst)).sqrt()
}

/// Volterra kernel representing fBm as `B_t = ∫_0^t K_H(t,s) dB*_s`:
///
/// ```text
/// K_H(t,s) = c_H (t-s)^{H-1/2} / Γ(H+1/2) · ₂F₁(1/2-H, H-1/2; H+1/2; 1 - t/s) · 1{s < t}
/// ```
///
/// with `c_H = sqrt(2H Γ(3/2-H) Γ(H+1/2) / Γ(2-2H))`, so that the represented
/// process has variance `t^{2H}`. `c_H → 1` as `H → 1/2`.
pub fn volterra_kernel(t: f64, s: f64, hurst: f64) -> Result<f64> {
    check_hurst(hurst)?;
    if !(t > 0.0) || s < 0.0 {
        return Err(Error::Domain(format!("volterra_kernel needs t > 0, s >= 0; got ({t}, {s})")));
    }
    if s >= t {
        return Ok(0.0);
    }
    if s == 0.0 {
        return Err(Error::Domain("volterra_kernel is undefined at s = 0".into()));
    }
    let a = hurst - 0.5;
    let f = gauss_2f1(-a, a, hurst + 0.5, 1.0 - t / s)?;
    Ok(kernel_constant(hurst) * (t - s).powf(a) / gamma(hurst + 0.5) * f)
}

/// Precomputed midpoint discretisation of the Volterra coupling on a
/// uniform grid `t_k = kT/n`:
/// `B_{t_k} = Σ_{j<k} K_H(t_k, (t_j + t_{j+1})/2) ΔB*_j`.
#[derive(Debug, Clone)]
pub struct VolterraCoupling {
    hurst: f64,
    horizon: f64,
    n: usize,
    /// Row `k-1` holds the `k` weights of knot `k`.
    rows: Vec<Vec<f64>>,
}

impl VolterraCoupling {
    pub fn new(hurst: f64, horizon: f64, n: usize) -> Result<Self> {
        check_hurst(hurst)?;
        if n > COUPLING_MAX_N {
            return Err(Error::Resource(format!(
                "coupling matrix for n = {n} exceeds the limit {COUPLING_MAX_N}"
            )));
        }
        if !(horizon > 0.0) || n == 0 {
            return Err(Error::Parameter("coupling needs T > 0 and n > 0".into()));
        }
        let dt = horizon / n as f64;
        let rows = (1..=n)
            .into_par_iter()
            .map(|k| {
                let t = k as f64 * dt;
                (0..k)
                    .map(|j| volterra_kernel(t, (j as f64 + 0.5) * dt, hurst))
                    .collect::<Result<Vec<f64>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { hurst, horizon, n, rows })
    }

    pub fn hurst(&self) -> f64 {
        self.hurst
    }

    /// Maps Brownian increments to the fBm path on the same grid.
    pub fn apply(&self, bm_increments: &[f64]) -> Result<FbmPath> {
        if bm_increments.len() != self.n {
            return Err(Error::Parameter(format!(
                "expected {} Brownian increments, got {}",
                self.n,
                bm_increments.len()
            )));
        }
        let dt = self.horizon / self.n as f64;
        let mut values = Vec::with_capacity(self.n + 1);
        values.push(0.0);
        for row in &self.rows {
            values.push(row.iter().zip(bm_increments).map(|(k, db)| k * db).sum());
        }
        let increments = values.windows(2).map(|w| w[1] - w[0]).collect();
        let times = (0..=self.n).map(|k| k as f64 * dt).collect();
        Ok(FbmPath { times, values, increments, origin: 0 })
    }

    /// Draws a coupled `(ΔB*, B)` pair.
    pub fn sample<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> Result<CoupledNoise> {
        let sd = (self.horizon / self.n as f64).sqrt();
        let bm_increments: Vec<f64> = standard_normals(rng, self.n).into_iter().map(|z| z * sd).collect();
        let fbm = self.apply(&bm_increments)?;
        Ok(CoupledNoise { bm_increments, fbm })
    }
}

/// A Brownian motion `B*` (as increments) and the fBm it generates.
#[derive(Debug, Clone, PartialEq)]
pub struct CoupledNoise {
    pub bm_increments: Vec<f64>,
    pub fbm: FbmPath,
}

pub fn coupled_bm_fbm(config: &NoiseConfig) -> Result<CoupledNoise> {
    coupled_bm_fbm_rep(config, streams::COUPLED, 0)
}

pub fn coupled_bm_fbm_rep(config: &NoiseConfig, stream: u64, rep: u64) -> Result<CoupledNoise> {
    config.validate()?;
    let coupling = VolterraCoupling::new(config.hurst, config.horizon, config.n)?;
    coupling.sample(&mut stream_rng(config.seed, stream, rep))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn indicator_and_domain() {
        assert_eq!(volterra_kernel(1.0, 1.0, 0.7).unwrap(), 0.0);
        assert_eq!(volterra_kernel(1.0, 2.0, 0.7).unwrap(), 0.0);
        assert!(volterra_kernel(1.0, 0.5, 0.7).unwrap() > 0.0);
        assert!(matches!(volterra_kernel(1.0, 0.0, 0.7), Err(Error::Domain(_))));
        assert!(matches!(volterra_kernel(1.0, 0.5, 0.5), Err(Error::Unsupported(_))));
        assert!(matches!(volterra_kernel(1.0, 0.5, 0.3), Err(Error::Unsupported(_))));
    }

    #[test]
    fn brownian_limit() {
        for (t, s) in [(1.0, 0.5), (2.0, 0.1), (1.0, 0.999)] {
            let k = volterra_kernel(t, s, 0.5001).unwrap();
            assert!((k - 1.0).abs() < 1e-3, "K({t},{s}) = {k}");
        }
        assert!((kernel_constant(0.5 + 1e-9) - 1.0).abs() < 1e-6);
    }

    #[test]
    fn coupled_determinism_and_shape() {
        let cfg = NoiseConfig::new(0.7, 1.0, 32, 5);
        let a = coupled_bm_fbm(&cfg).unwrap();
        let b = coupled_bm_fbm(&cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.bm_increments.len(), 32);
        assert_eq!(a.fbm.len(), 33);
        assert_eq!(a.fbm.values[0], 0.0);
        assert!(coupled_bm_fbm(&NoiseConfig::new(0.4, 1.0, 32, 5)).is_err());
    }
}
