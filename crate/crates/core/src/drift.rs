//! Certified singular drift families.
//!
//! Base families, for `u, v, w, γ > 0`:
//!
//! ```text
//! b1(x) = u (v x^{-γ} - w x)                 K = R = u w,  needs 1 - α < α γ
//! b2(x) = u / (e^{v x^γ} - 1) - w x          K = R = w,    needs 1 <= α γ
//! ```
//!
//! Perturbations, for `λ, μ > 0`:
//!
//! ```text
//! sin: b + λ sin(μ x)     K -> K - λμ (requires λμ < K),  R -> R + λμ
//! log: b - λ log(μ x)     K unchanged,                     R -> R + λμ/e
//! ```
//!
//! Every admissible drift is strictly decreasing with `ḃ < -K`, satisfies
//! `b(x) > -R x`, and diverges to `+∞` at `0⁺`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Arguments below this are rejected: `ḃ` of the exponential family overflows.
pub const MIN_ARGUMENT: f64 = 1e-300;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DriftFamily {
    B1,
    B2,
    B1PlusSin,
    B2PlusSin,
    B1PlusLog,
    B2PlusLog,
}

impl DriftFamily {
    pub fn name(self) -> &'static str {
        match self {
            DriftFamily::B1 => "b1",
            DriftFamily::B2 => "b2",
            DriftFamily::B1PlusSin => "b1_plus_sin",
            DriftFamily::B2PlusSin => "b2_plus_sin",
            DriftFamily::B1PlusLog => "b1_plus_log",
            DriftFamily::B2PlusLog => "b2_plus_log",
        }
    }

    fn is_b1_based(self) -> bool {
        matches!(self, DriftFamily::B1 | DriftFamily::B1PlusSin | DriftFamily::B1PlusLog)
    }

    fn perturbation(self) -> Perturbation {
        match self {
            DriftFamily::B1 | DriftFamily::B2 => Perturbation::None,
            DriftFamily::B1PlusSin | DriftFamily::B2PlusSin => Perturbation::Sin,
            DriftFamily::B1PlusLog | DriftFamily::B2PlusLog => Perturbation::Log,
        }
    }
}

impl std::str::FromStr for DriftFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "b1" => DriftFamily::B1,
            "b2" => DriftFamily::B2,
            "b1_plus_sin" => DriftFamily::B1PlusSin,
            "b2_plus_sin" => DriftFamily::B2PlusSin,
            "b1_plus_log" => DriftFamily::B1PlusLog,
            "b2_plus_log" => DriftFamily::B2PlusLog,
            other => return Err(Error::Parameter(format!("unknown drift family `{other}`"))),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Perturbation {
    None,
    Sin,
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriftParams {
    pub u: f64,
    pub v: f64,
    pub w: f64,
    pub gamma: f64,
    #[serde(default)]
    pub lambda: f64,
    #[serde(default)]
    pub mu: f64,
}

impl DriftParams {
    pub fn new(u: f64, v: f64, w: f64, gamma: f64) -> Self {
        Self { u, v, w, gamma, lambda: 0.0, mu: 0.0 }
    }

    pub fn with_perturbation(mut self, lambda: f64, mu: f64) -> Self {
        self.lambda = lambda;
        self.mu = mu;
        self
    }
}

/// An immutable drift with its structural constants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriftSpec {
    pub family: DriftFamily,
    pub params: DriftParams,
    /// `K` with `ḃ < -K`. Nonpositive when a sin perturbation is too strong.
    pub contraction_k: f64,
    /// `R` with `b(x) > -R x`.
    pub growth_r: f64,
    /// Unique zero of `b`; `None` when the drift is not admissible.
    pub root_x_b: Option<f64>,
}

/// Result of [`check_admissibility`].
#[derive(Debug, Clone, PartialEq)]
pub struct AdmissibilityReport {
    pub admissible: bool,
    pub contraction_k: f64,
    pub growth_r: f64,
    pub reasons: Vec<String>,
}

impl DriftSpec {
    pub fn new(family: DriftFamily, params: DriftParams) -> Result<Self> {
        let p = params;
        for (name, val) in [("u", p.u), ("v", p.v), ("w", p.w), ("gamma", p.gamma)] {
            if !(val > 0.0 && val.is_finite()) {
                return Err(Error::Parameter(format!("{name} must be positive, got {val}")));
            }
        }
        let perturbation = family.perturbation();
        if perturbation != Perturbation::None {
            for (name, val) in [("lambda", p.lambda), ("mu", p.mu)] {
                if !(val > 0.0 && val.is_finite()) {
                    return Err(Error::Parameter(format!(
                        "{name} must be positive for {}, got {val}",
                        family.name()
                    )));
                }
            }
        }
        let base = if family.is_b1_based() { p.u * p.w } else { p.w };
        let (k, r) = match perturbation {
            Perturbation::None => (base, base),
            Perturbation::Sin => (base - p.lambda * p.mu, base + p.lambda * p.mu),
            Perturbation::Log => (base, base + p.lambda * p.mu / std::f64::consts::E),
        };
        let mut spec = Self { family, params, contraction_k: k, growth_r: r, root_x_b: None };
        if k > 0.0 {
            spec.root_x_b = Some(drift_root(&spec)?);
        }
        Ok(spec)
    }

    /// `b1` with `u = v = w = 1`.
    pub fn b1_unit(gamma: f64) -> Result<Self> {
        Self::new(DriftFamily::B1, DriftParams::new(1.0, 1.0, 1.0, gamma))
    }

    pub fn k(&self) -> f64 {
        self.contraction_k
    }

    pub fn r(&self) -> f64 {
        self.growth_r
    }

    /// The equilibrium `x_b`; errors for inadmissible drifts.
    pub fn x_b(&self) -> Result<f64> {
        self.root_x_b
            .ok_or_else(|| Error::Inadmissible("drift has no certified root".into()))
    }

    pub fn b(&self, x: f64) -> Result<f64> {
        check_arg(x)?;
        Ok(self.b_unchecked(x))
    }

    pub fn b_dot(&self, x: f64) -> Result<f64> {
        check_arg(x)?;
        Ok(self.b_dot_unchecked(x))
    }

    /// `b(x) + R x`, the part removed by the Ornstein-Uhlenbeck transform.
    pub fn b_r(&self, x: f64) -> Result<f64> {
        Ok(self.b(x)? + self.growth_r * x)
    }

    pub(crate) fn b_unchecked(&self, x: f64) -> f64 {
        let p = &self.params;
        let base = if self.family.is_b1_based() {
            p.u * (p.v * x.powf(-p.gamma) - p.w * x)
        } else {
            p.u / (p.v * x.powf(p.gamma)).exp_m1() - p.w * x
        };
        base + match self.family.perturbation() {
            Perturbation::None => 0.0,
            Perturbation::Sin => p.lambda * (p.mu * x).sin(),
            Perturbation::Log => -p.lambda * (p.mu * x).ln(),
        }
    }

    pub(crate) fn b_dot_unchecked(&self, x: f64) -> f64 {
        let p = &self.params;
        let base = if self.family.is_b1_based() {
            -p.u * (p.v * p.gamma * x.powf(-(p.gamma + 1.0)) + p.w)
        } else {
            // e^y / (e^y - 1)^2 written as e^{-y} / (1 - e^{-y})^2 to avoid overflow.
            let y = p.v * x.powf(p.gamma);
            let em = (-y).exp();
            let denom = -(-y).exp_m1();
            -p.u * p.v * p.gamma * x.powf(p.gamma - 1.0) * em / (denom * denom) - p.w
        };
        base + match self.family.perturbation() {
            Perturbation::None => 0.0,
            Perturbation::Sin => p.lambda * p.mu * (p.mu * x).cos(),
            Perturbation::Log => -p.lambda / x,
        }
    }
}

fn check_arg(x: f64) -> Result<()> {
    if x >= MIN_ARGUMENT && x.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("drift evaluated at x = {x:e}; needs x >= {MIN_ARGUMENT:e}")))
    }
}

pub fn eval_b(spec: &DriftSpec, x: f64) -> Result<f64> {
    spec.b(x)
}

pub fn eval_b_dot(spec: &DriftSpec, x: f64) -> Result<f64> {
    spec.b_dot(x)
}

/// Checks the family's analytic admissibility condition for Hölder exponent
/// `alpha`.
pub fn check_admissibility(spec: &DriftSpec, alpha: f64) -> AdmissibilityReport {
    let mut reasons = Vec::new();
    let p = &spec.params;
    if !(alpha > 0.0 && alpha < 1.0) {
        reasons.push(format!("alpha = {alpha} is not in (0,1)"));
    }
    if spec.family.is_b1_based() {
        if 1.0 - alpha >= alpha * p.gamma {
            reasons.push(format!(
                "b1 needs 1 - alpha < alpha*gamma, got {} >= {}",
                1.0 - alpha,
                alpha * p.gamma
            ));
        }
    } else if alpha * p.gamma < 1.0 {
        reasons.push(format!("b2 needs 1 <= alpha*gamma, got {}", alpha * p.gamma));
    }
    if spec.family.perturbation() == Perturbation::Sin {
        let base = if spec.family.is_b1_based() { p.u * p.w } else { p.w };
        if p.lambda * p.mu >= base {
            reasons.push(format!(
                "sin perturbation needs lambda*mu < {} ({}), got {}",
                if spec.family.is_b1_based() { "u*w" } else { "w" },
                base,
                p.lambda * p.mu
            ));
        }
    }
    AdmissibilityReport {
        admissible: reasons.is_empty(),
        contraction_k: spec.contraction_k,
        growth_r: spec.growth_r,
        reasons,
    }
}

/// Unique positive zero of `b`: geometric bracketing from 1 followed by
/// bisection and a Newton polish.
pub fn drift_root(spec: &DriftSpec) -> Result<f64> {
    if !(spec.contraction_k > 0.0) {
        return Err(Error::Inadmissible(format!(
            "{} is not strictly decreasing (K = {})",
            spec.family.name(),
            spec.contraction_k
        )));
    }
    let b = |x: f64| spec.b_unchecked(x);
    let (mut lo, mut hi) = (1.0f64, 1.0f64);
    let mut iters = 0;
    while b(lo) <= 0.0 {
        lo *= 0.5;
        iters += 1;
        if iters > 200 || lo < MIN_ARGUMENT {
            return Err(Error::Numerical("drift root: no lower bracket".into()));
        }
    }
    iters = 0;
    while b(hi) >= 0.0 {
        hi *= 2.0;
        iters += 1;
        if iters > 200 {
            return Err(Error::Numerical("drift root: no upper bracket".into()));
        }
    }
    while hi - lo > 1e-15 * hi {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if b(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut x = 0.5 * (lo + hi);
    let polished = x - b(x) / spec.b_dot_unchecked(x);
    if polished > 0.0 && b(polished).abs() <= b(x).abs() {
        x = polished;
    }
    let tol = 1e-10 * b(1.0).abs().max(1.0);
    if b(x).abs() > tol {
        return Err(Error::Numerical(format!("drift root residual {} above {tol}", b(x))));
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b2_unit(gamma: f64) -> DriftSpec {
        DriftSpec::new(DriftFamily::B2, DriftParams::new(1.0, 1.0, 1.0, gamma)).unwrap()
    }

    #[test]
    fn eval_examples() {
        let b1 = DriftSpec::b1_unit(1.0).unwrap();
        assert_eq!(b1.b(1.0).unwrap(), 0.0);
        assert!((b1.b(0.5).unwrap() - 1.5).abs() < 1e-15);
        assert!((b1.b_dot(1.0).unwrap() + 2.0).abs() < 1e-15);
        let b2 = b2_unit(2.0);
        assert!((b2.b(1.0).unwrap() + 0.418023).abs() < 1e-6);
        assert!(matches!(b1.b(0.0), Err(Error::Domain(_))));
        assert!(matches!(b1.b(-1.0), Err(Error::Domain(_))));
        assert!(matches!(b2.b_dot(1e-301), Err(Error::Domain(_))));
    }

    #[test]
    fn constants_per_family() {
        let p = DriftParams::new(2.0, 1.0, 3.0, 2.0);
        let s = DriftSpec::new(DriftFamily::B1, p).unwrap();
        assert_eq!((s.k(), s.r()), (6.0, 6.0));
        let s = DriftSpec::new(DriftFamily::B2, p).unwrap();
        assert_eq!((s.k(), s.r()), (3.0, 3.0));
        let pp = p.with_perturbation(0.5, 2.0);
        let s = DriftSpec::new(DriftFamily::B1PlusSin, pp).unwrap();
        assert_eq!((s.k(), s.r()), (5.0, 7.0));
        let s = DriftSpec::new(DriftFamily::B2PlusLog, pp).unwrap();
        assert_eq!(s.k(), 3.0);
        assert!((s.r() - (3.0 + 1.0 / std::f64::consts::E)).abs() < 1e-15);
        assert!(DriftSpec::new(DriftFamily::B1PlusSin, p).is_err());
        assert!(DriftSpec::new(DriftFamily::B1, DriftParams::new(0.0, 1.0, 1.0, 1.0)).is_err());
    }

    #[test]
    fn admissibility_examples() {
        let p = DriftParams::new(1.5, 1.0, 2.0, 2.0);
        let r = check_admissibility(&DriftSpec::new(DriftFamily::B1, p).unwrap(), 0.6);
        assert!(r.admissible);
        assert_eq!((r.contraction_k, r.growth_r), (3.0, 3.0));
        let r = check_admissibility(&b2_unit(2.0), 0.4);
        assert!(!r.admissible);
        assert!(r.reasons[0].contains("b2"));
        let on_boundary = DriftParams::new(1.0, 1.0, 2.0, 2.0).with_perturbation(1.0, 2.0);
        let s = DriftSpec::new(DriftFamily::B1PlusSin, on_boundary).unwrap();
        let r = check_admissibility(&s, 0.6);
        assert!(!r.admissible);
        assert!(s.root_x_b.is_none());
        let log = DriftSpec::new(DriftFamily::B1PlusLog, p.with_perturbation(3.0, 5.0)).unwrap();
        assert!(check_admissibility(&log, 0.6).admissible);
        assert!(!check_admissibility(&log, 0.3).admissible);
    }

    #[test]
    fn roots() {
        for g in [0.5, 1.0, 2.0, 5.0] {
            assert!((DriftSpec::b1_unit(g).unwrap().x_b().unwrap() - 1.0).abs() < 1e-12);
        }
        let s = DriftSpec::new(DriftFamily::B1, DriftParams::new(1.0, 2.0, 1.0, 1.0)).unwrap();
        assert!((s.x_b().unwrap() - 2f64.sqrt()).abs() < 1e-12);
        let b2 = b2_unit(2.0);
        let x = b2.x_b().unwrap();
        assert!(b2.b(x).unwrap().abs() <= 1e-10);
    }
}
