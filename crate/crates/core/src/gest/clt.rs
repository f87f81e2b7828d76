use crate::error::{param, Result};
use crate::special::normal_cdf;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Streaming first four central moments, mergeable across workers.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Moments {
    n: f64,
    mean: f64,
    m2: f64,
    m3: f64,
    m4: f64,
}

impl Moments {
    pub fn push(&mut self, x: f64) {
        self.merge(&Moments { n: 1.0, mean: x, ..Default::default() });
    }

    /// Pairwise update of the central sums.
    pub fn merge(&mut self, o: &Moments) {
        if o.n == 0.0 {
            return;
        }
        if self.n == 0.0 {
            *self = *o;
            return;
        }
        let n = self.n + o.n;
        let d = o.mean - self.mean;
        let d2 = d * d;
        let (na, nb) = (self.n, o.n);
        let m2 = self.m2 + o.m2 + d2 * na * nb / n;
        let m3 = self.m3 + o.m3 + d * d2 * na * nb * (na - nb) / (n * n)
            + 3.0 * d * (na * o.m2 - nb * self.m2) / n;
        let m4 = self.m4 + o.m4
            + d2 * d2 * na * nb * (na * na - na * nb + nb * nb) / (n * n * n)
            + 6.0 * d2 * (na * na * o.m2 + nb * nb * self.m2) / (n * n)
            + 4.0 * d * (na * o.m3 - nb * self.m3) / n;
        *self = Moments { n, mean: self.mean + d * nb / n, m2, m3, m4 };
    }

    pub fn count(&self) -> usize {
        self.n as usize
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> f64 {
        self.m2 / (self.n - 1.0)
    }

    pub fn skewness(&self) -> f64 {
        self.n.sqrt() * self.m3 / self.m2.powf(1.5)
    }

    pub fn excess_kurtosis(&self) -> f64 {
        self.n * self.m4 / (self.m2 * self.m2) - 3.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalityReport {
    pub trials: usize,
    pub mean: f64,
    pub variance: f64,
    pub skewness: f64,
    pub excess_kurtosis: f64,
    /// Kolmogorov distance to the normal law with the sample mean and variance.
    pub ks_distance: f64,
}

/// Empirical normality check of a scalar statistic, e.g. `N (P̂_k - P_k)`.
///
/// `sample(t)` produces the statistic for trial `t` and is expected to draw its
/// randomness from `RngStream::new(seed, t)`. Trials run in parallel; the reduction is
/// in trial order so the report does not depend on the worker count.
pub fn clt_check<F>(trials: usize, sample: F) -> Result<NormalityReport>
where
    F: Fn(u64) -> Result<f64> + Sync,
{
    if trials < 100 {
        return param(format!("{trials} trials are too few for a normality check (need at least 100)"));
    }
    let values: Vec<f64> = (0..trials as u64).into_par_iter().map(&sample).collect::<Result<_>>()?;
    Ok(normality_report(&values))
}

pub fn normality_report(values: &[f64]) -> NormalityReport {
    let mut m = Moments::default();
    values.iter().for_each(|&x| m.push(x));
    let sd = m.variance().sqrt();
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let ks = sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = normal_cdf((x - m.mean()) / sd);
            (f - i as f64 / n).abs().max((f - (i + 1) as f64 / n).abs())
        })
        .fold(0.0, f64::max);
    NormalityReport {
        trials: values.len(),
        mean: m.mean(),
        variance: m.variance(),
        skewness: m.skewness(),
        excess_kurtosis: m.excess_kurtosis(),
        ks_distance: ks,
    }
}
