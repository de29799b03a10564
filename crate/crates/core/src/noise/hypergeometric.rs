use crate::error::{Error, Result};

const MAX_TERMS: usize = 1_000_000;
const REL_CUTOFF: f64 = 1e-15;

/// Gauss hypergeometric function `₂F₁(a, b; c; z)` for `z <= 0`.
///
/// The argument is mapped into `[0, 1)` with the Pfaff transformation
///
/// ```text
/// ₂F₁(a, b; c; z) = (1 - z)^{-a} ₂F₁(a, c - b; c; z / (z - 1)),
/// ```
///
/// applied with `a` the smaller of the two numerator parameters so the
/// transformed series has the fastest-decaying tail. The series is summed
/// until a term drops below `1e-15 (1 - ζ)` relative to the partial sum,
/// which bounds the geometric tail as well as the last term.
pub fn gauss_2f1(a: f64, b: f64, c: f64, z: f64) -> Result<f64> {
    if !(a.is_finite() && b.is_finite() && c.is_finite() && z.is_finite()) {
        return Err(Error::Parameter("non-finite 2F1 argument".into()));
    }
    if c <= 0.0 && c.fract() == 0.0 {
        return Err(Error::Parameter(format!("c = {c} is a nonpositive integer")));
    }
    if z > 0.0 {
        return Err(Error::Domain(format!("gauss_2f1 is implemented for z <= 0, got {z}")));
    }
    if z == 0.0 {
        return Ok(1.0);
    }
    let (p, q) = if a <= b { (a, c - b) } else { (b, c - a) };
    let zeta = z / (z - 1.0);
    let series = pfaff_series(p, q, c, zeta)?;
    Ok((1.0 - z).powf(-p) * series)
}

fn pfaff_series(p: f64, q: f64, c: f64, zeta: f64) -> Result<f64> {
    let tail = 1.0 - zeta;
    let mut sum = 1.0;
    let mut term = 1.0;
    for k in 0..MAX_TERMS {
        let kf = k as f64;
        term *= (p + kf) * (q + kf) / ((c + kf) * (kf + 1.0)) * zeta;
        sum += term;
        if term == 0.0 {
            return Ok(sum);
        }
        let ratio = ((p + kf + 1.0) * (q + kf + 1.0) / ((c + kf + 1.0) * (kf + 2.0)) * zeta).abs();
        if ratio < 1.0 && term.abs() <= REL_CUTOFF * tail * sum.abs() {
            return Ok(sum);
        }
    }
    Err(Error::Numerical(format!(
        "2F1 series did not converge within {MAX_TERMS} terms (zeta = {zeta})"
    )))
}
