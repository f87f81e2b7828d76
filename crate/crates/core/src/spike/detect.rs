use super::tracy_widom::TracyWidomTable;
use crate::error::{param, Error, Result};
use serde::{Deserialize, Serialize};

/// `N^{2/3} (λ - (1+√c)²) / ((1+√c)^{4/3} √c)`.
pub fn tw_standardize(lambda: f64, n_dim: usize, c: f64) -> f64 {
    let s = c.sqrt();
    (n_dim as f64).powf(2.0 / 3.0) * (lambda - (1.0 + s).powi(2)) / ((1.0 + s).powf(4.0 / 3.0) * s)
}

/// Mirror image of [`tw_standardize`] for the smallest eigenvalue at the left edge,
/// `N^{2/3} ((1-√c)² - λ) / ((1-√c)^{4/3} √c)`. Valid for `c < 1`.
pub fn tw_standardize_lower(lambda: f64, n_dim: usize, c: f64) -> Result<f64> {
    if !(c > 0.0 && c < 1.0) {
        return Err(Error::Regime(format!("the left edge is soft only for c < 1, got c = {c}")));
    }
    let s = c.sqrt();
    Ok((n_dim as f64).powf(2.0 / 3.0) * ((1.0 - s).powi(2) - lambda) / ((1.0 - s).powf(4.0 / 3.0) * s))
}

fn check_eigs(eigs: &[f64]) -> Result<()> {
    crate::linalg::check_vector("eigenvalues", eigs)?;
    if eigs.windows(2).any(|w| w[0] > w[1]) {
        return param("eigenvalues must be ascending");
    }
    Ok(())
}

/// `λ_max / ((1/N) Σ λ)`, the largest eigenvalue over the noise-level estimate
/// `(1/(Nn)) tr Y Yᴴ`.
pub fn glrt_statistic(eigs: &[f64]) -> Result<f64> {
    check_eigs(eigs)?;
    let mean = eigs.iter().sum::<f64>() / eigs.len() as f64;
    if !(mean > 0.0) {
        return Err(Error::Degenerate("zero trace".into()));
    }
    Ok(eigs[eigs.len() - 1] / mean)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GlrtDecision {
    pub statistic: f64,
    pub standardized: f64,
    pub threshold: f64,
    /// `standardized > threshold`, strictly.
    pub signal: bool,
}

/// Tests for a signal at false-alarm rate `far`, with `N = eigs.len()` and `c = N/n`.
pub fn glrt_test(eigs: &[f64], n_samples: usize, far: f64, table: &TracyWidomTable) -> Result<GlrtDecision> {
    if !(far > 0.0 && far < 1.0) {
        return param(format!("false-alarm rate must lie in (0, 1), got {far}"));
    }
    if n_samples == 0 {
        return param("sample count must be positive");
    }
    let statistic = glrt_statistic(eigs)?;
    let n = eigs.len();
    let standardized = tw_standardize(statistic, n, n as f64 / n_samples as f64);
    let threshold = table.quantile(1.0 - far)?;
    Ok(GlrtDecision { statistic, standardized, threshold, signal: standardized > threshold })
}

/// `λ_max / λ_min`.
pub fn condition_number_statistic(eigs: &[f64]) -> Result<f64> {
    check_eigs(eigs)?;
    let (lo, hi) = (eigs[0], eigs[eigs.len() - 1]);
    if !(hi > 0.0) || lo <= 1e-14 * hi {
        return Err(Error::Singular(format!("smallest eigenvalue {lo:e} is negligible against {hi:e}")));
    }
    Ok(hi / lo)
}

/// Threshold `t` such that the fraction of `null` statistics strictly above `t` is at most
/// `far`: the order statistic of rank `⌈(1 - far) m⌉`.
pub fn empirical_threshold(null: &[f64], far: f64) -> Result<f64> {
    if null.is_empty() {
        return param("no null statistics");
    }
    if !(far > 0.0 && far < 1.0) {
        return param(format!("false-alarm rate must lie in (0, 1), got {far}"));
    }
    let mut v = null.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len();
    let rank = (((1.0 - far) * m as f64).ceil() as usize).clamp(1, m);
    Ok(v[rank - 1])
}

/// Fraction of `values` strictly above `threshold`.
pub fn exceedance_rate(values: &[f64], threshold: f64) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    values.iter().filter(|&&v| v > threshold).count() as f64 / values.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standardization_examples() {
        let c: f64 = 1.0 / 3.0;
        assert!(tw_standardize((1.0 + c.sqrt()).powi(2), 500, c).abs() < 1e-14);
        let center = (1.0 + c.sqrt()).powi(2);
        let scale = (1.0 + c.sqrt()).powf(4.0 / 3.0) * c.sqrt();
        assert!((center - 2.4880).abs() < 1e-4 && (scale - 1.0601).abs() < 1e-4, "{center} {scale}");
        assert!(tw_standardize_lower(0.1, 10, 1.5).is_err());
        assert!(tw_standardize_lower((1.0 - c.sqrt()).powi(2), 10, c).unwrap().abs() < 1e-14);
    }

    #[test]
    fn flat_spectrum_is_noise() {
        let eigs = vec![2.0; 200];
        let d = glrt_test(&eigs, 600, 0.05, &TracyWidomTable::bundled()).unwrap();
        assert_eq!(d.statistic, 1.0);
        assert!(d.standardized < -10.0 && !d.signal);
        assert!(glrt_statistic(&[0.0, 0.0]).is_err());
    }

    #[test]
    fn glrt_is_scale_invariant() {
        let eigs = [0.2, 0.7, 1.1, 3.4];
        let a = glrt_statistic(&eigs).unwrap();
        let b = glrt_statistic(&eigs.map(|l| l * 9.0)).unwrap();
        assert!((a - b).abs() <= 1e-12 * a);
    }

    #[test]
    fn condition_number_examples() {
        assert_eq!(condition_number_statistic(&[1.0, 1.0, 1.0]).unwrap(), 1.0);
        assert_eq!(condition_number_statistic(&[1.0, 4.0]).unwrap(), 4.0);
        assert!(condition_number_statistic(&[0.0, 4.0]).is_err());
    }

    #[test]
    fn threshold_at_median_is_strict() {
        let table = TracyWidomTable::bundled();
        // Build a spectrum whose standardized statistic lands on a chosen value.
        let (n, ns) = (4usize, 8usize);
        let c = n as f64 / ns as f64;
        let target = table.quantile(0.5).unwrap() + 1e-3;
        let s = c.sqrt();
        let lambda = target * (1.0 + s).powf(4.0 / 3.0) * s / (n as f64).powf(2.0 / 3.0) + (1.0 + s).powi(2);
        // With mean one, the statistic equals the top eigenvalue.
        let rest = (n as f64 - lambda) / 3.0;
        let eigs = [rest, rest, rest, lambda];
        let d = glrt_test(&eigs, ns, 0.5, &table).unwrap();
        assert!(d.signal);
        assert!((d.standardized - target).abs() < 1e-9);
    }

    #[test]
    fn empirical_threshold_controls_rate() {
        let null: Vec<f64> = (0..1000).map(|k| k as f64).collect();
        let t = empirical_threshold(&null, 0.01).unwrap();
        assert_eq!(t, 989.0);
        assert!((exceedance_rate(&null, t) - 0.01).abs() < 1e-12);
    }
}
