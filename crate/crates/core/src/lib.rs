//! Simulation and estimation toolkit for singular stochastic differential
//! equations with additive fractional noise,
//!
//! ```text
//! dX_t = b(X_t) dt + σ dB_t,   X_0 = x_0 > 0,
//! ```
//!
//! where `b` explodes at `0⁺` (repelling the solution from the origin) and `B`
//! is a fractional Brownian motion of Hurst parameter `H`.
//!
//! Module map:
//!
//! - [`noise`]: fBm / fGn synthesis (circulant embedding with a Cholesky
//!   fallback), two-sided paths and the Wiener shift, the Gauss hypergeometric
//!   function and the Volterra kernel coupling a Brownian motion to an fBm.
//! - [`drift`]: certified drift families with their constants `K`, `R` and
//!   equilibrium `x_b`.
//! - [`scheme`]: the implicit Euler scheme, the Langevin scheme and
//!   self-convergence studies.
//! - [`transform`]: drift-removing maps onto the fractional Ornstein-Uhlenbeck
//!   process and power changes of variable to CIR / Verhulst type models.
//! - [`estimate`]: quadratic variations, the Hurst estimator and a volatility
//!   plug-in.
//! - [`longrun`]: ergodic averages, pullback sequences, hitting times and
//!   contraction diagnostics.
//! - [`malliavin`]: directional and Malliavin derivatives, the fBm RKHS inner
//!   product and a Nourdin-Viens density estimator.
//! - [`heston`]: the fractional Heston model.
//! - [`cli`]: experiment driver behind the `fsde` binary.

// `!(x > 0.0)` is used on purpose so NaN inputs fail validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod drift;
pub mod error;
pub mod estimate;
pub mod heston;
pub mod longrun;
pub mod malliavin;
pub mod noise;
pub mod rng;
pub mod scheme;
pub mod transform;

pub(crate) mod stats;

pub use drift::{DriftFamily, DriftParams, DriftSpec};
pub use error::{Error, Result};
pub use noise::{FbmPath, NoiseConfig, NoiseMethod};
pub use scheme::{EulerPath, TimeGrid};
