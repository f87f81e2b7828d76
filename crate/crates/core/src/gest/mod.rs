//! Consistent estimation of population eigenvalues from sample eigenvalue clusters.
//!
//! With the sample eigenvalues `λ_1 ≤ … ≤ λ_N` gathered into successive clusters
//! `𝒩_k`, the cluster mean is consistent only as `n → ∞` with `N` fixed. The
//! G-estimator corrects it using the eigenvalues `μ` of `diag(λ) - (1/n) √λ √λᵀ`:
//!
//! ```text
//! P̂_k = (n / N_k) Σ_{m ∈ 𝒩_k} (λ_m - μ_m)
//! ```
//!
//! which stays consistent when `N` and `n` grow together, provided cluster `k` is
//! separated from its neighbours in the limiting spectrum.

mod clt;
mod clusters;
mod estimators;

pub use clt::{clt_check, normality_report, Moments, NormalityReport};
pub use clusters::{clusters_from_gaps, largest_gap_splits, ClusterAssignment, GapClustering};
pub use estimators::{
    classical_estimate, classical_iid_channel, g_estimate, mu_eigenvalues, power_estimate_iid_channel, Method,
    PowerEstimate,
};
