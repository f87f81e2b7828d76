//! Stieltjes transforms and limiting spectral densities.
//!
//! For a sample covariance `(1/n) Y Y^H` with `Y = T^{1/2} X`, the limiting eigenvalue
//! distribution is characterised through the companion transform `m̲`, the unique
//! solution in the upper half plane of
//!
//! ```text
//! m̲ = -1 / (z - c Σ_k w_k t_k / (1 + t_k m̲))
//! ```
//!
//! from which `m_F = c m̲ + (c - 1)/z` and the density `(1/π) Im m_F(x + iε)` follow.

mod capacity;
mod density;
mod mp;
mod solver;

pub use capacity::{capacity_identity, CapacityCheck};
pub use density::{
    default_threshold, density_from_stieltjes, linear_grid, support_clusters, support_clusters_default, Density, SupportClusters,
    SupportInterval,
};
pub use mp::{mp_density, mp_stieltjes, mp_stieltjes_real, mp_support, MpSupport};
pub use solver::{
    solve_companion_stieltjes, solve_companion_stieltjes_from, SolverConfig, SpectralModel, StieltjesSolution,
};

use crate::error::{Error, Result};
use num_complex::Complex64;

/// `(1/N) Σ_i 1/(λ_i - z)` for the given eigenvalues.
pub fn empirical_stieltjes(eigs: &[f64], z: Complex64) -> Result<Complex64> {
    crate::linalg::check_vector("eigenvalues", eigs)?;
    let mut sum = Complex64::new(0.0, 0.0);
    for &l in eigs {
        let d = l - z;
        if d.norm() <= f64::EPSILON * z.norm().max(1.0) {
            return Err(Error::Singular(format!("z = {z} coincides with eigenvalue {l}")));
        }
        sum += 1.0 / d;
    }
    Ok(sum / eigs.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empirical_examples() {
        let m = empirical_stieltjes(&[1.0], Complex64::new(0.0, 1.0)).unwrap();
        assert!((m - Complex64::new(0.5, 0.5)).norm() < 1e-15);
        let m = empirical_stieltjes(&[0.0, 2.0], Complex64::new(1.0, 0.0)).unwrap();
        assert!(m.norm() < 1e-15);
    }

    #[test]
    fn empirical_matches_resolvent_trace() {
        let eigs = [0.5, 1.0, 2.0, 2.5, 4.0, 9.0];
        let z = Complex64::new(1.7, 0.3);
        // Resolvent of the diagonal matrix: invert each pivot of diag(λ) - zI.
        let a = crate::linalg::ComplexMatrix::from_fn(6, 6, |i, j| {
            if i == j { Complex64::new(eigs[i], 0.0) - z } else { Complex64::new(0.0, 0.0) }
        });
        let trace: Complex64 = (0..6).map(|i| 1.0 / a.get(i, i)).sum();
        let m = empirical_stieltjes(&eigs, z).unwrap();
        assert!((m - trace / 6.0).norm() < 1e-15);
        assert!(m.im > 0.0);
    }

    #[test]
    fn empirical_singular_point() {
        assert!(matches!(
            empirical_stieltjes(&[1.0, 3.0], Complex64::new(3.0, 0.0)),
            Err(Error::Singular(_))
        ));
    }
}
