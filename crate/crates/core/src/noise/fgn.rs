use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::NoiseMethod;
use crate::error::{Error, Result};
use crate::rng::standard_normals;

/// Largest dimension for which the dense Cholesky factor is built.
const CHOLESKY_MAX_DIM: usize = 4096;

/// Covariance `E[B_s B_t] = (s^{2H} + t^{2H} - |t-s|^{2H}) / 2`.
pub fn fbm_covariance(s: f64, t: f64, hurst: f64) -> Result<f64> {
    if !(hurst > 0.0 && hurst < 1.0) {
        return Err(Error::Parameter(format!("hurst must lie in (0,1), got {hurst}")));
    }
    if s < 0.0 || t < 0.0 {
        return Err(Error::Domain(format!("fbm_covariance needs s, t >= 0, got ({s}, {t})")));
    }
    let h2 = 2.0 * hurst;
    Ok(0.5 * (s.powf(h2) + t.powf(h2) - (t - s).abs().powf(h2)))
}

/// Autocovariance at lag `k` of fGn increments over steps of length `dt`.
pub fn fgn_autocovariance(k: usize, hurst: f64, dt: f64) -> f64 {
    let h2 = 2.0 * hurst;
    let k = k as f64;
    let lag = |x: f64| x.abs().powf(h2);
    0.5 * dt.powf(h2) * (lag(k + 1.0) - 2.0 * lag(k) + lag(k - 1.0))
}

enum Factor {
    Circulant {
        scale: Vec<f64>,
        fft: Arc<dyn Fft<f64>>,
    },
    /// Row-major packed lower triangle.
    Cholesky { lower: Vec<f64> },
}

/// Reusable generator of fGn vectors of a fixed length.
///
/// Building the sampler does all the set-up work (spectrum of the embedding,
/// or the Cholesky factor); `sample` is then cheap and pure given the RNG.
pub struct FgnSampler {
    len: usize,
    factor: Factor,
}

impl std::fmt::Debug for FgnSampler {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let kind = match self.factor {
            Factor::Circulant { .. } => "circulant",
            Factor::Cholesky { .. } => "cholesky",
        };
        f.debug_struct("FgnSampler").field("len", &self.len).field("kind", &kind).finish()
    }
}

impl FgnSampler {
    pub fn new(hurst: f64, dt: f64, len: usize, method: NoiseMethod) -> Result<Self> {
        if !(hurst > 0.0 && hurst < 1.0) {
            return Err(Error::Parameter(format!("hurst must lie in (0,1), got {hurst}")));
        }
        if len == 0 || !(dt > 0.0) {
            return Err(Error::Parameter("empty fGn request".into()));
        }
        // Lags 0..=len; the circulant embedding needs γ_len as well.
        let gamma: Vec<f64> = (0..=len).map(|k| fgn_autocovariance(k, hurst, dt)).collect();
        match method {
            NoiseMethod::Cholesky => Self::cholesky(&gamma[..len]),
            NoiseMethod::CirculantEmbedding => Self::circulant(&gamma),
            NoiseMethod::Auto => match Self::circulant(&gamma) {
                Err(Error::Numerical(_)) => Self::cholesky(&gamma[..len]),
                other => other,
            },
        }
    }

    pub fn is_circulant(&self) -> bool {
        matches!(self.factor, Factor::Circulant { .. })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// `gamma` holds lags `0..=len`.
    fn circulant(gamma: &[f64]) -> Result<Self> {
        let len = gamma.len() - 1;
        // First row of the 2·len circulant: γ_0..γ_len, γ_{len-1}..γ_1.
        let m = 2 * len;
        let mut row: Vec<Complex64> = Vec::with_capacity(m);
        row.extend(gamma.iter().map(|&g| Complex64::new(g, 0.0)));
        row.extend(gamma[1..len].iter().rev().map(|&g| Complex64::new(g, 0.0)));
        let mut planner = FftPlanner::new();
        let fft = planner.plan_fft_forward(m);
        fft.process(&mut row);
        let max = row.iter().fold(0.0f64, |a, c| a.max(c.re));
        let min = row.iter().fold(f64::INFINITY, |a, c| a.min(c.re));
        if min < -1e-10 * max {
            return Err(Error::Numerical(format!(
                "circulant embedding has a negative eigenvalue ({min:e})"
            )));
        }
        let scale = row.iter().map(|c| (c.re.max(0.0) / m as f64).sqrt()).collect();
        Ok(Self { len, factor: Factor::Circulant { scale, fft } })
    }

    fn cholesky(gamma: &[f64]) -> Result<Self> {
        let len = gamma.len();
        if len > CHOLESKY_MAX_DIM {
            return Err(Error::Resource(format!(
                "Cholesky factor of dimension {len} exceeds the limit {CHOLESKY_MAX_DIM}"
            )));
        }
        let idx = |i: usize, j: usize| i * (i + 1) / 2 + j;
        let mut lower = vec![0.0; len * (len + 1) / 2];
        for i in 0..len {
            for j in 0..=i {
                let mut s = gamma[i - j];
                for k in 0..j {
                    s -= lower[idx(i, k)] * lower[idx(j, k)];
                }
                if i == j {
                    if s <= 0.0 {
                        return Err(Error::Numerical(format!(
                            "fGn covariance not positive definite at row {i}"
                        )));
                    }
                    lower[idx(i, i)] = s.sqrt();
                } else {
                    lower[idx(i, j)] = s / lower[idx(j, j)];
                }
            }
        }
        Ok(Self { len, factor: Factor::Cholesky { lower } })
    }

    /// Draws one fGn vector.
    pub fn sample<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        match &self.factor {
            Factor::Circulant { scale, fft } => {
                let m = scale.len();
                let z = standard_normals(rng, 2 * m);
                let mut buf: Vec<Complex64> = scale
                    .iter()
                    .enumerate()
                    .map(|(k, s)| Complex64::new(s * z[2 * k], s * z[2 * k + 1]))
                    .collect();
                fft.process(&mut buf);
                buf[..self.len].iter().map(|c| c.re).collect()
            }
            Factor::Cholesky { lower } => {
                let z = standard_normals(rng, self.len);
                let mut out = vec![0.0; self.len];
                let mut offset = 0;
                for (i, o) in out.iter_mut().enumerate() {
                    let row = &lower[offset..offset + i + 1];
                    *o = row.iter().zip(&z).map(|(l, zi)| l * zi).sum();
                    offset += i + 1;
                }
                out
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream_rng;

    #[test]
    fn covariance_examples() {
        for h in [0.1, 0.5, 0.9] {
            assert!((fbm_covariance(1.0, 1.0, h).unwrap() - 1.0).abs() < 1e-15);
        }
        assert!((fbm_covariance(1.0, 2.0, 0.5).unwrap() - 1.0).abs() < 1e-15);
        assert!((fbm_covariance(1.0, 2.0, 0.75).unwrap() - 0.5 * 2f64.powf(1.5)).abs() < 1e-12);
        assert!(fbm_covariance(1.0, 2.0, 1.0).is_err());
        assert!(fbm_covariance(1.0, 2.0, 0.0).is_err());
        assert!(fbm_covariance(-1.0, 2.0, 0.5).is_err());
        let st = fbm_covariance(0.3, 0.8, 0.3).unwrap();
        let ts = fbm_covariance(0.8, 0.3, 0.3).unwrap();
        assert_eq!(st, ts);
    }

    #[test]
    fn autocovariance_matches_increment_covariance() {
        let (h, dt) = (0.7, 0.25);
        for k in 0..5usize {
            let s = k as f64 * dt;
            // Cov(B_{dt} - B_0, B_{s+dt} - B_s) from the fBm covariance.
            let c = |a: f64, b: f64| fbm_covariance(a, b, h).unwrap();
            let direct = c(dt, s + dt) - c(dt, s) - c(0.0, s + dt) + c(0.0, s);
            assert!((fgn_autocovariance(k, h, dt) - direct).abs() < 1e-14);
        }
    }

    #[test]
    fn methods_are_deterministic_and_finite() {
        for method in [NoiseMethod::CirculantEmbedding, NoiseMethod::Cholesky, NoiseMethod::Auto] {
            let s = FgnSampler::new(0.3, 0.01, 100, method).unwrap();
            let a = s.sample(&mut stream_rng(1, 1, 0));
            let b = s.sample(&mut stream_rng(1, 1, 0));
            assert_eq!(a, b);
            assert_eq!(a.len(), 100);
            assert!(a.iter().all(|v| v.is_finite()));
        }
        assert!(FgnSampler::new(0.7, 0.1, 8, NoiseMethod::Auto).unwrap().is_circulant());
        assert!(FgnSampler::new(0.7, 0.1, 1, NoiseMethod::Auto).is_ok());
    }

    #[test]
    fn forced_cholesky_rejects_huge_dimension() {
        let err = FgnSampler::new(0.7, 1e-4, CHOLESKY_MAX_DIM + 1, NoiseMethod::Cholesky).unwrap_err();
        assert!(matches!(err, Error::Resource(_)));
    }
}
