use super::clusters::ClusterAssignment;
use crate::error::{param, Error, Result};
use crate::stieltjes::{density_from_stieltjes, linear_grid, support_clusters_default, SolverConfig, SpectralModel};
use faer::{Mat, Side};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Classical,
    GEstimator,
    IidChannel,
    ClassicalIidChannel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerEstimate {
    pub values: Vec<f64>,
    pub method: Method,
    pub n_dim: usize,
    pub n_samples: Option<usize>,
    pub warnings: Vec<String>,
}

impl PowerEstimate {
    fn new(values: Vec<f64>, method: Method, n_dim: usize, n_samples: Option<usize>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Degenerate(format!("{method:?} produced a non-finite estimate")));
        }
        Ok(Self { values, method, n_dim, n_samples, warnings: Vec::new() })
    }

    pub fn ratio(&self) -> Option<f64> {
        self.n_samples.map(|n| self.n_dim as f64 / n as f64)
    }

    /// Advisory check that the estimated population would produce separate clusters.
    ///
    /// Rebuilds the limiting density for atoms at the estimates with weights from
    /// `assignment` and records a warning when fewer than `K` support intervals appear.
    /// Only meaningful for the covariance-mixture model of [`g_estimate`].
    pub fn check_separability(&mut self, assignment: &ClusterAssignment) -> Result<bool> {
        let Some(n) = self.n_samples else {
            return param("separability check needs the sample count");
        };
        let k = self.values.len();
        let ordered = self.values.windows(2).all(|w| w[0] < w[1]) && self.values[0] > 0.0;
        if !ordered {
            self.warnings.push("estimates are not positive and strictly increasing; clusters overlap".into());
            return Ok(false);
        }
        let model = SpectralModel::from_multiplicities(&self.values, &assignment.multiplicities(), n)?;
        let c = model.ratio();
        let top = self.values[k - 1] * (1.0 + c.sqrt()).powi(2) * 1.2;
        let step = top / 4000.0;
        let grid = linear_grid(step, top, step)?;
        let density = density_from_stieltjes(&model, &grid, step * 0.1, &SolverConfig::default())?;
        let found = support_clusters_default(&density)?.count();
        if found < k {
            self.warnings.push(format!(
                "estimated population yields {found} spectral clusters for {k} values; the separability assumption is doubtful"
            ));
            return Ok(false);
        }
        Ok(true)
    }
}

fn check_eigs(eigs: &[f64]) -> Result<Vec<f64>> {
    crate::linalg::check_vector("eigenvalues", eigs)?;
    if eigs.windows(2).any(|w| w[0] > w[1]) {
        return param("eigenvalues must be ascending");
    }
    eigs.iter()
        .map(|&l| {
            if l < -1e-12 {
                param(format!("negative eigenvalue {l:e}"))
            } else {
                Ok(l.max(0.0))
            }
        })
        .collect()
}

/// Cluster means of the sample eigenvalues.
pub fn classical_estimate(eigs: &[f64], clusters: &ClusterAssignment) -> Result<PowerEstimate> {
    let eigs = check_eigs(eigs)?;
    clusters.check_against(&eigs)?;
    let values = clusters
        .ranges()
        .iter()
        .map(|r| eigs[r.clone()].iter().sum::<f64>() / r.len() as f64)
        .collect();
    PowerEstimate::new(values, Method::Classical, eigs.len(), None)
}

/// Ascending eigenvalues of `diag(λ) - (1/denom) √λ √λᵀ`.
pub fn mu_eigenvalues(eigs: &[f64], denom: usize) -> Result<Vec<f64>> {
    let eigs = check_eigs(eigs)?;
    if denom == 0 {
        return param("denominator must be positive");
    }
    let n = eigs.len();
    let sq: Vec<f64> = eigs.iter().map(|l| l.sqrt()).collect();
    let d = denom as f64;
    let m = Mat::<f64>::from_fn(n, n, |i, j| {
        let r = -sq[i] * sq[j] / d;
        if i == j { eigs[i] + r } else { r }
    });
    let mut mu = m
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| Error::Decomposition(format!("{e:?}")))?;
    mu.sort_by(f64::total_cmp);
    Ok(mu)
}

/// `P̂_k = (n/N_k) Σ_{m ∈ 𝒩_k} (λ_m - μ_m)` with `μ` from [`mu_eigenvalues`] at `denom = n`.
pub fn g_estimate(eigs: &[f64], n: usize, clusters: &ClusterAssignment) -> Result<PowerEstimate> {
    let lam = check_eigs(eigs)?;
    clusters.check_against(&lam)?;
    let mu = mu_eigenvalues(&lam, n)?;
    let values = clusters
        .ranges()
        .iter()
        .map(|r| {
            let s: f64 = r.clone().map(|m| lam[m] - mu[m]).sum();
            n as f64 / r.len() as f64 * s
        })
        .collect();
    PowerEstimate::new(values, Method::GEstimator, lam.len(), Some(n))
}

/// Source powers behind i.i.d. channels of variance `1/N` in white noise of unknown level.
///
/// `P̂_k = N n / (M_k (n - N)) Σ_{i ∈ 𝒩_k} (μ_i - η_i)`, with `η` the eigenvalues of
/// `diag(λ) - (1/N) √λ √λᵀ` and `μ` those with `1/n`. Requires `n > N`. The clusters
/// hold the `M_k` eigenvalues attributed to source `k`.
pub fn power_estimate_iid_channel(eigs: &[f64], n: usize, clusters: &ClusterAssignment) -> Result<PowerEstimate> {
    let lam = check_eigs(eigs)?;
    clusters.check_against(&lam)?;
    let big_n = lam.len();
    if n <= big_n {
        return Err(Error::Regime(format!(
            "the estimator needs more samples than sensors (n = {n}, N = {big_n})"
        )));
    }
    let eta = mu_eigenvalues(&lam, big_n)?;
    let mu = mu_eigenvalues(&lam, n)?;
    let pre = (big_n * n) as f64 / (n - big_n) as f64;
    let values = clusters
        .ranges()
        .iter()
        .map(|r| {
            let s: f64 = r.clone().map(|i| mu[i] - eta[i]).sum();
            pre / r.len() as f64 * s
        })
        .collect();
    PowerEstimate::new(values, Method::IidChannel, big_n, Some(n))
}

/// Cluster means minus a known noise variance: the classical counterpart of
/// [`power_estimate_iid_channel`].
pub fn classical_iid_channel(eigs: &[f64], clusters: &ClusterAssignment, noise_var: f64) -> Result<PowerEstimate> {
    if !(noise_var >= 0.0 && noise_var.is_finite()) {
        return param(format!("noise variance must be nonnegative, got {noise_var}"));
    }
    let mut est = classical_estimate(eigs, clusters)?;
    est.values.iter_mut().for_each(|v| *v -= noise_var);
    est.method = Method::ClassicalIidChannel;
    Ok(est)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classical_examples() {
        let a = ClusterAssignment::new(vec![0..2, 2..4], 4).unwrap();
        let e = classical_estimate(&[1.0, 1.0, 3.0, 3.0], &a).unwrap();
        assert_eq!(e.values, vec![1.0, 3.0]);
        let all = ClusterAssignment::new(vec![0..4], 4).unwrap();
        assert_eq!(classical_estimate(&[1.0, 2.0, 3.0, 6.0], &all).unwrap().values, vec![3.0]);
        let empty = ClusterAssignment::new(vec![0..0, 0..4], 4).unwrap();
        assert!(classical_estimate(&[1.0; 4], &empty).is_err());
    }

    #[test]
    fn mu_two_by_two_closed_form() {
        // diag(1,2) - (1/2) √λ √λᵀ = [[1/2, -√2/2], [-√2/2, 1]].
        let (a, b, d) = (0.5, -(2f64).sqrt() / 2.0, 1.0);
        let mean = 0.5 * (a + d);
        let rad = (0.25 * (a - d) * (a - d) + b * b).sqrt();
        let mu = mu_eigenvalues(&[1.0, 2.0], 2).unwrap();
        assert!((mu[0] - (mean - rad)).abs() < 1e-14 && (mu[1] - (mean + rad)).abs() < 1e-14, "{mu:?}");
    }

    #[test]
    fn mu_of_zero_spectrum() {
        assert_eq!(mu_eigenvalues(&[0.0; 5], 7).unwrap(), vec![0.0; 5]);
        assert!(mu_eigenvalues(&[-1.0, 2.0], 3).is_err());
        assert!(mu_eigenvalues(&[-1e-13, 2.0], 3).is_ok());
    }

    #[test]
    fn single_cluster_reduces_to_mean() {
        let eigs = [0.3, 0.9, 1.4, 2.2, 5.0];
        let all = ClusterAssignment::new(vec![0..5], 5).unwrap();
        let g = g_estimate(&eigs, 17, &all).unwrap();
        let mean = eigs.iter().sum::<f64>() / 5.0;
        assert!((g.values[0] - mean).abs() < 1e-10);
        let flat = g_estimate(&[2.5; 5], 9, &all).unwrap();
        assert!((flat.values[0] - 2.5).abs() < 1e-12);
    }

    #[test]
    fn iid_channel_refuses_few_samples() {
        let a = ClusterAssignment::from_multiplicities(&[1], 3).unwrap();
        assert!(power_estimate_iid_channel(&[1.0, 2.0, 3.0], 3, &a).is_err());
        assert!(power_estimate_iid_channel(&[1.0, 2.0, 3.0], 2, &a).is_err());
        assert!(power_estimate_iid_channel(&[1.0, 2.0, 3.0], 4, &a).is_ok());
    }

    #[test]
    fn iid_channel_sum_identity() {
        let eigs = [0.2, 0.4, 0.5, 1.1, 1.3, 2.9];
        let (big_n, n) = (6, 20);
        let eta = mu_eigenvalues(&eigs, big_n).unwrap();
        let mu = mu_eigenvalues(&eigs, n).unwrap();
        let lhs: f64 = eta.iter().zip(&mu).map(|(e, m)| e - m).sum();
        let rhs = (1.0 / n as f64 - 1.0 / big_n as f64) * eigs.iter().sum::<f64>();
        assert!((lhs - rhs).abs() < 1e-10);
    }

    #[test]
    fn separability_warning_for_merged_model() {
        let a = ClusterAssignment::from_multiplicities(&[30, 30, 30], 90).unwrap();
        let mut good = PowerEstimate::new(vec![1.0, 3.0, 7.0], Method::GEstimator, 90, Some(900)).unwrap();
        assert!(good.check_separability(&a).unwrap());
        assert!(good.warnings.is_empty());
        let mut bad = PowerEstimate::new(vec![1.0, 3.0, 3.3], Method::GEstimator, 90, Some(900)).unwrap();
        assert!(!bad.check_separability(&a).unwrap());
        assert_eq!(bad.warnings.len(), 1);
    }
}
