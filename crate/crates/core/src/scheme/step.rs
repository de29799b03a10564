use crate::drift::{DriftSpec, MIN_ARGUMENT};
use crate::error::{Error, Result};

const MAX_EXPANSIONS: usize = 200;
const MAX_REFINEMENTS: usize = 200;
const WIDTH_TOL: f64 = 1e-12;

/// Solves `x = mu + dt·b(x)` for its unique positive root.
///
/// `φ(x) = mu + dt·b(x) - x` is strictly decreasing on `(0, ∞)` with
/// `φ(0⁺) = +∞` and `φ(∞) = -∞`, so a sign-change bracket always exists.
pub fn implicit_step(spec: &DriftSpec, mu: f64, dt: f64) -> Result<f64> {
    let guess = if mu > 0.0 { mu } else { 1.0 };
    implicit_step_from(spec, mu, dt, guess)
}

/// [`implicit_step`] with an explicit starting point for the bracket search
/// (typically the previous knot).
///
/// The bracket is grown geometrically from `guess` (halving toward 0,
/// doubling outward), then narrowed to a relative width of `1e-12` with
/// Newton steps that fall back to bisection whenever they leave the bracket,
/// and finally polished by one Newton step.
pub fn implicit_step_from(spec: &DriftSpec, mu: f64, dt: f64, guess: f64) -> Result<f64> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::Parameter(format!("time step must be positive, got {dt}")));
    }
    if !mu.is_finite() {
        return Err(Error::Parameter(format!("non-finite step input {mu}")));
    }
    if !(spec.contraction_k > 0.0) {
        return Err(Error::Inadmissible(format!(
            "implicit step needs a strictly decreasing drift (K = {})",
            spec.contraction_k
        )));
    }
    let phi = |x: f64| mu + dt * spec.b_unchecked(x) - x;
    let dphi = |x: f64| dt * spec.b_dot_unchecked(x) - 1.0;

    let start = if guess.is_finite() && guess >= MIN_ARGUMENT { guess } else { 1.0 };
    let f_start = phi(start);
    if f_start == 0.0 {
        return Ok(start);
    }
    let (mut lo, mut hi) = (start, start);
    let mut f_lo = f_start;
    let mut f_hi = f_start;
    if f_start > 0.0 {
        let mut n = 0;
        while f_hi >= 0.0 {
            hi *= 2.0;
            f_hi = phi(hi);
            n += 1;
            if n > MAX_EXPANSIONS || !hi.is_finite() {
                return Err(Error::Numerical(format!("no upper bracket for mu = {mu}, dt = {dt}")));
            }
        }
        lo = hi * 0.5;
        f_lo = phi(lo);
    } else {
        let mut n = 0;
        while f_lo <= 0.0 {
            lo *= 0.5;
            f_lo = phi(lo);
            n += 1;
            if n > MAX_EXPANSIONS || lo < MIN_ARGUMENT {
                return Err(Error::Numerical(format!("no lower bracket for mu = {mu}, dt = {dt}")));
            }
        }
        hi = lo * 2.0;
        f_hi = phi(hi);
    }
    debug_assert!(f_lo > 0.0 && f_hi < 0.0);

    // Newton from the end with the smaller residual.
    let mut x = if f_lo.abs() < f_hi.abs() { lo } else { hi };
    let mut fx = phi(x);
    for _ in 0..MAX_REFINEMENTS {
        if fx == 0.0 || hi - lo <= WIDTH_TOL * hi {
            break;
        }
        let step = fx / dphi(x);
        let candidate = x - step;
        if step.abs() <= f64::EPSILON * x {
            if candidate >= lo && candidate <= hi && candidate != x {
                let fc = phi(candidate);
                if fc.abs() < fx.abs() {
                    x = candidate;
                    fx = fc;
                }
            }
            break;
        }
        x = if candidate > lo && candidate < hi { candidate } else { 0.5 * (lo + hi) };
        fx = phi(x);
        if fx > 0.0 {
            lo = x;
        } else if fx < 0.0 {
            hi = x;
        }
    }
    let polished = x - fx / dphi(x);
    if polished > 0.0 && polished.is_finite() {
        let fp = phi(polished);
        if fp.abs() < fx.abs() {
            x = polished;
            fx = fp;
        }
    }
    let tol = 1e-12 * mu.abs().max(1.0);
    if !(fx.abs() <= tol) {
        return Err(Error::Numerical(format!(
            "implicit step residual {fx:e} exceeds {tol:e} (mu = {mu}, dt = {dt})"
        )));
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::drift::{DriftFamily, DriftParams};

    #[test]
    fn quadratic_cases() {
        // b(x) = 1/x - x: x = mu + dt(1/x - x) <=> (1+dt)x² - mu x - dt = 0.
        let spec = DriftSpec::b1_unit(1.0).unwrap();
        let quad = |mu: f64, dt: f64| (mu + (mu * mu + 4.0 * (1.0 + dt) * dt).sqrt()) / (2.0 * (1.0 + dt));
        let x = implicit_step(&spec, 1.0, 0.1).unwrap();
        assert!((x - 1.0).abs() < 1e-12);
        assert!((x - quad(1.0, 0.1)).abs() < 1e-12);
        let x = implicit_step(&spec, 0.0, 0.1).unwrap();
        assert!((x - 0.44f64.sqrt() / 2.2).abs() < 1e-12);
        assert!((x - 0.301511).abs() < 1e-6);
        for &(mu, dt) in &[(-5.0, 0.01), (1e3, 0.5), (-1e3, 1e-4), (1e-8, 1e-8)] {
            let x = implicit_step(&spec, mu, dt).unwrap();
            assert!((x - quad(mu, dt)).abs() <= 1e-12 * quad(mu, dt).max(1.0), "{mu} {dt}");
        }
    }

    #[test]
    fn newton_step_below_resolution_keeps_iterate() {
        let spec = DriftSpec::new(DriftFamily::B1, DriftParams::new(1.5, 0.8, 1.2, 2.0)).unwrap();
        let (mu, dt) = (-4.598413571900161, 0.5314304875121383);
        let x = implicit_step(&spec, mu, dt).unwrap();
        assert!((mu + dt * spec.b(x).unwrap() - x).abs() < 1e-12);
    }

    #[test]
    fn guess_does_not_change_root() {
        let spec = DriftSpec::new(DriftFamily::B2PlusSin, DriftParams::new(1.0, 1.0, 2.0, 2.0).with_perturbation(0.5, 1.0)).unwrap();
        let a = implicit_step_from(&spec, 0.3, 0.01, 1e-3).unwrap();
        let b = implicit_step_from(&spec, 0.3, 0.01, 1e3).unwrap();
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_inputs() {
        let spec = DriftSpec::b1_unit(1.0).unwrap();
        assert!(implicit_step(&spec, 1.0, 0.0).is_err());
        assert!(implicit_step(&spec, f64::NAN, 0.1).is_err());
    }
}
