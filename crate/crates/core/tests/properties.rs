use num_complex::Complex64;
use proptest::prelude::*;
use rmt_inference::gest::{classical_estimate, g_estimate, mu_eigenvalues, ClusterAssignment};
use rmt_inference::linalg::{
    complex_gaussian, gram, hermitian_eig, hermitian_eigenvalues, sample_covariance, sample_eigenvalues, ComplexMatrix,
    RngStream,
};
use rmt_inference::spike::{spike_limits, spike_outlier_root, TracyWidomTable};
use rmt_inference::stieltjes::{
    capacity_identity, empirical_stieltjes, mp_density, mp_stieltjes, solve_companion_stieltjes, SolverConfig,
    SpectralModel,
};

fn hermitian(n: usize, seed: u64) -> ComplexMatrix {
    let g = complex_gaussian(n, n, &mut RngStream::new(seed, 0));
    let mut h = g.add(&g.adjoint()).unwrap().scale(0.5);
    h.symmetrize();
    h
}

fn upper_half_plane() -> impl Strategy<Value = Complex64> {
    (-4.0..8.0f64, 1e-3..4.0f64).prop_map(|(re, im)| Complex64::new(re, im))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn eigenvalues_interlace_with_principal_submatrix(n in 2usize..12, seed: u64) {
        let h = hermitian(n, seed);
        let full = hermitian_eigenvalues(&h).unwrap();
        let sub = hermitian_eigenvalues(&ComplexMatrix::from_fn(n - 1, n - 1, |i, j| h.get(i, j))).unwrap();
        let tol = 1e-10 * (1.0 + h.max_abs());
        for i in 0..n - 1 {
            prop_assert!(full[i] - tol <= sub[i] && sub[i] <= full[i + 1] + tol);
        }
    }

    #[test]
    fn eigenvalues_sum_to_trace(n in 1usize..16, seed: u64) {
        let h = hermitian(n, seed);
        let sum: f64 = hermitian_eigenvalues(&h).unwrap().iter().sum();
        prop_assert!((sum - h.trace().re).abs() < 1e-10 * (1.0 + h.frobenius_norm()) * n as f64);
    }

    #[test]
    fn decomposition_reconstructs_the_matrix(n in 1usize..14, seed: u64) {
        let h = hermitian(n, seed);
        let e = hermitian_eig(&h).unwrap();
        let back = e.apply(|x| x);
        prop_assert!(back.add(&h.scale(-1.0)).unwrap().max_abs() < 1e-10 * (1.0 + h.max_abs()));
    }

    #[test]
    fn eigenvalues_scale_with_the_matrix(n in 1usize..12, seed: u64, a in 1e-3..1e3f64) {
        let h = hermitian(n, seed);
        let base = hermitian_eigenvalues(&h).unwrap();
        let scaled = hermitian_eigenvalues(&h.scale(a)).unwrap();
        let tol = 1e-10 * a * (1.0 + h.max_abs()) * n as f64;
        for (x, y) in base.iter().zip(&scaled) {
            prop_assert!((a * x - y).abs() < tol);
        }
    }

    #[test]
    fn covariance_ignores_sample_order(n_dim in 1usize..8, n in 1usize..20, seed: u64, shift in 0usize..20) {
        let y = complex_gaussian(n_dim, n, &mut RngStream::new(seed, 1));
        let shifted = ComplexMatrix::from_fn(n_dim, n, |i, j| y.get(i, (j + shift) % n));
        let d = sample_covariance(&y).unwrap().add(&sample_covariance(&shifted).unwrap().scale(-1.0)).unwrap();
        prop_assert!(d.max_abs() < 1e-12 * (1.0 + y.max_abs().powi(2)));
    }

    #[test]
    fn both_gram_matrices_share_nonzero_eigenvalues(n_dim in 1usize..10, n in 1usize..10, seed: u64) {
        let y = complex_gaussian(n_dim, n, &mut RngStream::new(seed, 2));
        let wide = sample_eigenvalues(&y).unwrap();
        let mut tall = hermitian_eigenvalues(&gram(&y).unwrap()).unwrap();
        tall.iter_mut().for_each(|v| *v *= n_dim as f64 / n as f64);
        let k = n_dim.min(n);
        let scale = 1.0 + wide[n_dim - 1];
        for j in 0..k {
            prop_assert!((wide[n_dim - 1 - j] - tall[n - 1 - j]).abs() < 1e-10 * scale);
        }
    }

    #[test]
    fn stieltjes_transforms_map_into_the_upper_half_plane(z in upper_half_plane(), c in 0.05..4.0f64, seed: u64) {
        prop_assert!(mp_stieltjes(c, z).unwrap().im > 0.0);
        let model = SpectralModel::new(vec![1.0, 4.0], vec![0.5, 0.5], c).unwrap();
        let sol = solve_companion_stieltjes(&model, z, &SolverConfig::default()).unwrap();
        prop_assert!(sol.m.im > 0.0 && sol.m_under.im > 0.0);
        let eigs = sample_eigenvalues(&complex_gaussian(6, 9, &mut RngStream::new(seed, 3))).unwrap();
        prop_assert!(empirical_stieltjes(&eigs, z).unwrap().im > 0.0);
    }

    #[test]
    fn white_solver_agrees_with_closed_form(z in upper_half_plane(), c in 0.05..4.0f64) {
        let sol = solve_companion_stieltjes(&SpectralModel::white(c).unwrap(), z, &SolverConfig::default()).unwrap();
        let exact = mp_stieltjes(c, z).unwrap();
        prop_assert!((sol.m - exact).norm() < 1e-7 * (1.0 + exact.norm()));
    }

    #[test]
    fn tracy_widom_quantile_inverts_the_cdf(p in 1e-4..(1.0 - 1e-4)) {
        let table = TracyWidomTable::bundled();
        let q = table.quantile(p).unwrap();
        prop_assert!((table.cdf(q) - p).abs() < 1e-12);
    }

    #[test]
    fn capacity_two_ways(n in 1usize..8, m in 1usize..8, seed: u64, sigma2 in 0.01..10.0f64) {
        let h = complex_gaussian(n, m, &mut RngStream::new(seed, 4)).scale(1.0 / (n as f64).sqrt());
        prop_assert!(capacity_identity(&h, sigma2).unwrap().discrepancy() < 1e-8);
    }

    #[test]
    fn outlier_root_is_the_closed_form_limit(c in 0.01..5.0f64, over in 1.001..20.0f64) {
        let omega = c.sqrt() * over;
        let rho = spike_limits(omega, c).unwrap().rho;
        prop_assert!((spike_outlier_root(omega, c).unwrap() - rho).abs() < 1e-8 * rho);
    }

    #[test]
    fn single_cluster_estimate_is_the_normalized_trace(n_dim in 1usize..10, extra in 1usize..30, seed: u64) {
        let n = n_dim + extra;
        let eigs = sample_eigenvalues(&complex_gaussian(n_dim, n, &mut RngStream::new(seed, 5))).unwrap();
        let one = ClusterAssignment::from_multiplicities(&[n_dim], n_dim).unwrap();
        let g = g_estimate(&eigs, n, &one).unwrap().values[0];
        let mean = classical_estimate(&eigs, &one).unwrap().values[0];
        prop_assert!((g - mean).abs() < 1e-10 * (1.0 + mean));
    }

    #[test]
    fn mu_eigenvalues_interlace_the_sample_ones(n_dim in 1usize..10, extra in 1usize..30, seed: u64) {
        let n = n_dim + extra;
        let lam = sample_eigenvalues(&complex_gaussian(n_dim, n, &mut RngStream::new(seed, 6))).unwrap();
        let mu = mu_eigenvalues(&lam, n).unwrap();
        let tol = 1e-10 * (1.0 + lam[n_dim - 1]);
        for i in 0..n_dim {
            prop_assert!(mu[i] <= lam[i] + tol);
            if i > 0 {
                prop_assert!(mu[i] >= lam[i - 1] - tol);
            }
        }
    }
}

#[test]
fn mp_density_has_unit_mass_off_the_atom() {
    for c in [0.1, 0.5, 1.0, 2.0] {
        let upper = (1.0 + f64::sqrt(c)).powi(2);
        let steps = 200_000;
        let h = upper / steps as f64;
        let mass: f64 = (0..steps).map(|k| mp_density(c, (k as f64 + 0.5) * h).unwrap() * h).sum();
        let expect = if c > 1.0 { 1.0 / c } else { 1.0 };
        assert!((mass - expect).abs() < 2e-3, "c = {c}: mass {mass}");
    }
}
