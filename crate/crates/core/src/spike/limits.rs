use crate::error::{param, Error, Result};
use crate::stieltjes::{mp_stieltjes_real, mp_support};
use serde::{Deserialize, Serialize};

/// Almost-sure limits of an isolated sample eigenvalue and its eigenvector alignment
/// for the population covariance `I + ω u uᴴ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpikeLimit {
    pub omega: f64,
    pub c: f64,
    pub detectable: bool,
    /// Limit of the sample eigenvalue attached to the spike.
    pub rho: f64,
    /// Limit of the squared projection `|uᴴ û|²`.
    pub xi: f64,
}

fn check_ratio(c: f64) -> Result<()> {
    if !(c.is_finite() && c > 0.0) {
        return param(format!("ratio c must be positive, got {c}"));
    }
    Ok(())
}

fn rho(omega: f64, c: f64) -> f64 {
    1.0 + omega + c * (1.0 + omega) / omega
}

fn xi(omega: f64, c: f64) -> f64 {
    (1.0 - c / (omega * omega)) / (1.0 + c / omega)
}

/// Limits for an upward spike `ω > 0`; detectable iff `ω > √c`.
pub fn spike_limits(omega: f64, c: f64) -> Result<SpikeLimit> {
    check_ratio(c)?;
    if !(omega.is_finite() && omega > 0.0) {
        return param(format!("spike strength must be positive, got {omega}"));
    }
    let detectable = omega > c.sqrt();
    Ok(if detectable {
        SpikeLimit { omega, c, detectable, rho: rho(omega, c), xi: xi(omega, c) }
    } else {
        SpikeLimit { omega, c, detectable, rho: (1.0 + c.sqrt()).powi(2), xi: 0.0 }
    })
}

/// Limits for a downward spike `-1 < ω < 0`, observed through the smallest eigenvalue.
///
/// Detectable iff `ω < -√c`, which needs `c < 1`; the eigenvalue then separates below the
/// left edge `(1 - √c)²`.
pub fn spike_limits_downward(omega: f64, c: f64) -> Result<SpikeLimit> {
    check_ratio(c)?;
    if !(omega > -1.0 && omega < 0.0) {
        return param(format!("downward spike strength must lie in (-1, 0), got {omega}"));
    }
    let detectable = omega < -c.sqrt();
    Ok(if detectable {
        SpikeLimit { omega, c, detectable, rho: rho(omega, c), xi: xi(omega, c) }
    } else {
        SpikeLimit { omega, c, detectable, rho: (1.0 - c.sqrt()).powi(2), xi: 0.0 }
    })
}

/// Locates the isolated eigenvalue as the zero of `f(z) = 1 + z ω/(1+ω) m(z)` outside the
/// Marčenko–Pastur support, `m` being its Stieltjes transform on the real axis.
///
/// Upward spikes search `z > (1+√c)²`, downward spikes `0 < z < (1-√c)²`.
pub fn spike_outlier_root(omega: f64, c: f64) -> Result<f64> {
    check_ratio(c)?;
    if !(omega.is_finite() && omega > -1.0 && omega != 0.0) {
        return param(format!("spike strength must be nonzero and above -1, got {omega}"));
    }
    let sup = mp_support(c)?;
    let k = omega / (1.0 + omega);
    let f = |z: f64| mp_stieltjes_real(c, z).map(|m| 1.0 + z * k * m);
    let no_root = || Error::Regime(format!("no isolated eigenvalue for omega = {omega} at c = {c}"));
    let (mut lo, mut hi) = if omega > 0.0 {
        if omega <= c.sqrt() {
            return Err(no_root());
        }
        let lo = sup.upper * (1.0 + 1e-15) + 1e-300;
        let mut hi = sup.upper + 1.0;
        while f(hi)? <= 0.0 {
            hi = sup.upper + 2.0 * (hi - sup.upper);
            if !hi.is_finite() {
                return Err(no_root());
            }
        }
        if f(lo)? >= 0.0 {
            return Err(no_root());
        }
        (lo, hi)
    } else {
        if c >= 1.0 || omega >= -c.sqrt() {
            return Err(no_root());
        }
        // f(0+) = 1 and f decreases towards the left edge.
        let hi = sup.lower * (1.0 - 1e-15);
        if f(hi)? >= 0.0 {
            return Err(no_root());
        }
        // Swap roles so that f(lo) < 0 < f(hi) below.
        (hi, f64::MIN_POSITIVE.max(1e-300))
    };
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid)? < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if (hi - lo).abs() <= 4.0 * f64::EPSILON * hi.abs().max(lo.abs()) {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn figure_spike_example() {
        let s = spike_limits(2.0, 1.25).unwrap();
        assert!(s.detectable && (s.rho - 4.875).abs() < 1e-12);
        let r = spike_outlier_root(2.0, 1.25).unwrap();
        assert!((r - 4.875).abs() < 1e-8);
    }

    #[test]
    fn below_threshold_example() {
        let s = spike_limits(1.0, 1.25).unwrap();
        assert!(!s.detectable && s.xi == 0.0);
        assert!((s.rho - (1.0 + 1.25f64.sqrt()).powi(2)).abs() < 1e-14);
        assert!((s.rho - 4.486).abs() < 1e-3);
    }

    #[test]
    fn continuity_at_threshold() {
        let c: f64 = 0.3;
        let at = spike_limits(c.sqrt(), c).unwrap();
        assert!(!at.detectable && at.xi == 0.0);
        let near = spike_limits(c.sqrt() * (1.0 + 1e-9), c).unwrap();
        assert!(near.detectable && (near.rho - at.rho).abs() < 1e-8 && near.xi < 1e-8);
        assert!(spike_outlier_root(c.sqrt(), c).is_err());
    }

    #[test]
    fn outlier_root_known_value() {
        let r = spike_outlier_root(10.0, 0.1).unwrap();
        assert!((r - 11.11).abs() < 1e-8, "{r}");
    }

    #[test]
    fn downward_root_matches_formula() {
        for &(omega, c) in &[(-0.5, 0.1), (-0.9, 0.5), (-0.35, 0.1)] {
            let s = spike_limits_downward(omega, c).unwrap();
            assert!(s.detectable && s.rho < (1.0 - c.sqrt()).powi(2));
            let r = spike_outlier_root(omega, c).unwrap();
            assert!((r - s.rho).abs() < 1e-8, "omega={omega} c={c}: {r} vs {}", s.rho);
        }
        assert!(!spike_limits_downward(-0.2, 0.1).unwrap().detectable);
        assert!(spike_outlier_root(-0.5, 1.5).is_err());
        assert!(spike_limits_downward(-1.0, 0.1).is_err());
    }

    #[test]
    fn parameter_guards() {
        assert!(spike_limits(0.0, 1.0).is_err());
        assert!(spike_limits(1.0, 0.0).is_err());
    }
}
