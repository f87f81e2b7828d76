use rmt_inference::{Error, Result};
use serde::{Deserialize, Serialize};

/// Density histogram: `edges.len() == densities.len() + 1`, unit area over the edges.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub densities: Vec<f64>,
    /// Values that fell outside the range and were not counted.
    pub dropped: usize,
}

impl Histogram {
    pub fn centers(&self) -> Vec<f64> {
        self.edges.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
    }

    pub fn area(&self) -> f64 {
        self.edges.windows(2).zip(&self.densities).map(|(w, d)| (w[1] - w[0]) * d).sum()
    }
}

/// `bins` equal-width bins over `range`, or over `[min, max]` of the data when `None`
/// (widened to unit width around a single repeated value). Normalized over the values
/// that land inside the range.
pub fn histogram(values: &[f64], bins: usize, range: Option<(f64, f64)>) -> Result<Histogram> {
    if values.is_empty() {
        return Err(Error::Parameter("histogram of no values".into()));
    }
    if bins == 0 {
        return Err(Error::Parameter("histogram needs at least one bin".into()));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Parameter("histogram values must be finite".into()));
    }
    let (lo, hi) = match range {
        Some((lo, hi)) if lo < hi => (lo, hi),
        Some((lo, hi)) => return Err(Error::Parameter(format!("empty histogram range [{lo}, {hi}]"))),
        None => {
            let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            if hi > lo {
                (lo, hi)
            } else {
                (lo - 0.5, lo + 0.5)
            }
        }
    };
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0usize; bins];
    let mut dropped = 0;
    for &v in values {
        if v < lo || v > hi {
            dropped += 1;
            continue;
        }
        let k = (((v - lo) / width) as usize).min(bins - 1);
        counts[k] += 1;
    }
    let kept = values.len() - dropped;
    if kept == 0 {
        return Err(Error::Parameter("no value falls inside the histogram range".into()));
    }
    let edges = (0..=bins).map(|k| lo + k as f64 * width).collect();
    let densities = counts.iter().map(|&c| c as f64 / (kept as f64 * width)).collect();
    Ok(Histogram { edges, densities, dropped })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_value_single_bin() {
        let h = histogram(&[2.5], 1, Some((2.0, 4.0))).unwrap();
        assert_eq!(h.densities, vec![0.5]);
        let auto = histogram(&[2.5], 1, None).unwrap();
        assert_eq!(auto.densities, vec![1.0]);
    }

    #[test]
    fn uniform_values_give_flat_density() {
        let v: Vec<f64> = (0..10_000).map(|k| (k as f64 + 0.5) / 10_000.0).collect();
        let h = histogram(&v, 20, Some((0.0, 1.0))).unwrap();
        assert!(h.densities.iter().all(|d| (d - 1.0).abs() < 1e-12));
        assert!((h.area() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn errors_and_dropped_values() {
        assert!(histogram(&[], 3, None).is_err());
        assert!(histogram(&[1.0], 0, None).is_err());
        let h = histogram(&[0.5, 1.5, 7.0], 2, Some((0.0, 2.0))).unwrap();
        assert_eq!(h.dropped, 1);
        assert!((h.area() - 1.0).abs() < 1e-12);
    }
}
