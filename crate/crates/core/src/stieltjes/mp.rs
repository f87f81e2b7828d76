use crate::error::{param, Error, Result};
use num_complex::Complex64;
use std::f64::consts::PI;

/// Support and atom of the Marčenko–Pastur law with ratio `c = N/n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MpSupport {
    pub lower: f64,
    pub upper: f64,
    /// Mass of the atom at zero, `max(0, 1 - 1/c)`.
    pub mass_at_zero: f64,
}

fn check_ratio(c: f64) -> Result<()> {
    if !(c.is_finite() && c > 0.0) {
        return param(format!("ratio c must be positive and finite, got {c}"));
    }
    Ok(())
}

pub fn mp_support(c: f64) -> Result<MpSupport> {
    check_ratio(c)?;
    let s = c.sqrt();
    Ok(MpSupport {
        lower: (1.0 - s).powi(2),
        upper: (1.0 + s).powi(2),
        mass_at_zero: (1.0 - 1.0 / c).max(0.0),
    })
}

/// Absolutely continuous part of the Marčenko–Pastur density at `x`.
///
/// Zero outside `[a, b]` and at `x = 0`; the atom at zero for `c > 1` is reported by
/// [`mp_support`].
pub fn mp_density(c: f64, x: f64) -> Result<f64> {
    let sup = mp_support(c)?;
    if !x.is_finite() {
        return param("density evaluated at a non-finite point");
    }
    if x <= sup.lower || x >= sup.upper || x <= 0.0 {
        return Ok(0.0);
    }
    Ok(((x - sup.lower) * (sup.upper - x)).sqrt() / (2.0 * PI * c * x))
}

/// Stieltjes transform `m(z) = ∫ dF(t) / (t - z)` of the Marčenko–Pastur law, `Im z > 0`.
///
/// Root of `c z m² + (z + c - 1) m + 1 = 0` in the upper half plane.
pub fn mp_stieltjes(c: f64, z: Complex64) -> Result<Complex64> {
    check_ratio(c)?;
    if !(z.im > 0.0) || !z.re.is_finite() || !z.im.is_finite() {
        return param(format!("Stieltjes transform needs Im z > 0, got {z}"));
    }
    let (m1, m2) = quadratic_roots(c, z);
    // The two roots satisfy m1 m2 = 1/(c z); exactly one has positive imaginary part.
    Ok(if m1.im > m2.im { m1 } else { m2 })
}

/// Real-axis limit of the Stieltjes transform outside the support, `x > b` or `0 < x < a`.
pub fn mp_stieltjes_real(c: f64, x: f64) -> Result<f64> {
    let sup = mp_support(c)?;
    let outside = x > sup.upper || (c < 1.0 && x > 0.0 && x < sup.lower);
    if !outside {
        return Err(Error::Regime(format!("x = {x} is not outside the support [{}, {}]", sup.lower, sup.upper)));
    }
    let (m1, m2) = quadratic_roots(c, Complex64::new(x, 0.0));
    // Both roots are real here; the transform is the one of smaller modulus.
    Ok(if m1.norm() < m2.norm() { m1.re } else { m2.re })
}

fn quadratic_roots(c: f64, z: Complex64) -> (Complex64, Complex64) {
    let a = c * z;
    let b = z + c - 1.0;
    let disc = (b * b - 4.0 * a).sqrt();
    // Pick the sign that avoids cancellation, then recover the other root from the product.
    let q = if (b.conj() * disc).re >= 0.0 { -0.5 * (b + disc) } else { -0.5 * (b - disc) };
    (q / a, 1.0 / q)
}
