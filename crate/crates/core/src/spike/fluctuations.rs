use super::limits::{spike_limits, spike_limits_downward, SpikeLimit};
use crate::error::{param, Error, Result};
use crate::linalg::{complex_gaussian, hermitian_eig, sample_covariance, RngStream};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Monte-Carlo calibration of the joint Gaussian fluctuations of an isolated eigenpair.
///
/// Coordinates are `√N (|uᴴû|² - ξ, λ - ρ)` where `(λ, û)` is the extreme eigenpair on the
/// side of the spike.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FluctuationStats {
    pub omega: f64,
    pub c: f64,
    pub n_dim: usize,
    pub n_samples: usize,
    pub limit: SpikeLimit,
    /// Mean of the scaled coordinates over the calibration trials (finite-N drift).
    pub drift: [f64; 2],
    pub sigma: [[f64; 2]; 2],
    pub trials: usize,
}

impl FluctuationStats {
    /// Finite-N centre `(ξ, ρ) + drift / √N` of the raw pair `(|uᴴû|², λ)`.
    pub fn center(&self) -> [f64; 2] {
        let r = (self.n_dim as f64).sqrt();
        [self.limit.xi + self.drift[0] / r, self.limit.rho + self.drift[1] / r]
    }

    pub fn log_det_sigma(&self) -> f64 {
        let s = &self.sigma;
        (s[0][0] * s[1][1] - s[0][1] * s[1][0]).ln()
    }

    /// `(v - m)ᵀ Σ⁻¹ (v - m)` for the raw pair `v`; `N` times this is the squared Mahalanobis
    /// distance of the scaled coordinates.
    pub fn quadratic_form(&self, v: [f64; 2]) -> f64 {
        let m = self.center();
        let d = [v[0] - m[0], v[1] - m[1]];
        let s = &self.sigma;
        let det = s[0][0] * s[1][1] - s[0][1] * s[1][0];
        (d[0] * d[0] * s[1][1] - 2.0 * d[0] * d[1] * s[0][1] + d[1] * d[1] * s[0][0]) / det
    }

    pub fn correlation(&self) -> f64 {
        self.sigma[0][1] / (self.sigma[0][0] * self.sigma[1][1]).sqrt()
    }
}

/// Limits for either sign of spike.
pub fn signed_spike_limits(omega: f64, c: f64) -> Result<SpikeLimit> {
    if omega > 0.0 {
        spike_limits(omega, c)
    } else {
        spike_limits_downward(omega, c)
    }
}

/// Calibrates [`FluctuationStats`] for the population covariance `I + ω e₁e₁ᴴ` of size
/// `n_dim` with `n_samples` observations. Trial `t` draws from `RngStream::new(seed, t)`.
///
/// The model is unitarily invariant so the stats apply to any unit direction `u`.
pub fn calibrate_fluctuations(
    omega: f64,
    n_dim: usize,
    n_samples: usize,
    trials: usize,
    seed: u64,
) -> Result<FluctuationStats> {
    if trials < 1000 {
        return param(format!("{trials} calibration trials are too few (need at least 1000)"));
    }
    if n_dim < 2 || n_samples == 0 {
        return param("need at least two dimensions and one sample");
    }
    let c = n_dim as f64 / n_samples as f64;
    let limit = signed_spike_limits(omega, c)?;
    if !limit.detectable {
        return Err(Error::Regime(format!(
            "omega = {omega} is below the detectability threshold sqrt(c) = {}",
            c.sqrt()
        )));
    }
    let scale = (1.0 + omega).sqrt();
    let root_n = (n_dim as f64).sqrt();
    let pairs: Vec<[f64; 2]> = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let mut rng = RngStream::new(seed, t);
            let mut x = complex_gaussian(n_dim, n_samples, &mut rng);
            x.row_mut(0).iter_mut().for_each(|z| *z *= scale);
            let eig = hermitian_eig(&sample_covariance(&x)?)?;
            let (lambda, u) = if omega > 0.0 { eig.largest() } else { eig.smallest() };
            let proj = u[0].norm_sqr();
            Ok([root_n * (proj - limit.xi), root_n * (lambda - limit.rho)])
        })
        .collect::<Result<_>>()?;
    let m = trials as f64;
    let mean = [pairs.iter().map(|p| p[0]).sum::<f64>() / m, pairs.iter().map(|p| p[1]).sum::<f64>() / m];
    let mut sigma = [[0.0; 2]; 2];
    for p in &pairs {
        for i in 0..2 {
            for j in 0..2 {
                sigma[i][j] += (p[i] - mean[i]) * (p[j] - mean[j]) / (m - 1.0);
            }
        }
    }
    let det = sigma[0][0] * sigma[1][1] - sigma[0][1] * sigma[1][0];
    if !(det > 0.0 && sigma[0][0] > 0.0) {
        sigma[0][0] += 1e-9;
        sigma[1][1] += 1e-9;
    }
    Ok(FluctuationStats { omega, c, n_dim, n_samples, limit, drift: mean, sigma, trials })
}
