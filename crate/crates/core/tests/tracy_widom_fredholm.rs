//! The bundled table comes from the Painlevé II route; the Airy-kernel Fredholm
//! determinant is an independent way to the same distribution function.

use faer::Mat;
use rmt_inference::special::{airy, gauss_legendre};
use rmt_inference::spike::TracyWidomTable;

fn airy_kernel(x: f64, y: f64) -> f64 {
    let (ax, apx) = airy(x);
    if (x - y).abs() < 1e-12 {
        return apx * apx - x * ax * ax;
    }
    let (ay, apy) = airy(y);
    (ax * apy - apx * ay) / (x - y)
}

/// `det(I - K_Airy)` on `(s, s + 16)` with an `m`-point Gauss–Legendre Nyström rule.
fn fredholm_f2(s: f64, m: usize) -> f64 {
    let (nodes, weights) = gauss_legendre(m);
    let half = 8.0;
    let x: Vec<f64> = nodes.iter().map(|t| s + half * (t + 1.0)).collect();
    let w: Vec<f64> = weights.iter().map(|v| v * half).collect();
    let a = Mat::<f64>::from_fn(m, m, |i, j| {
        let delta = if i == j { 1.0 } else { 0.0 };
        delta - w[i].sqrt() * airy_kernel(x[i], x[j]) * w[j].sqrt()
    });
    a.determinant()
}

#[test]
fn table_matches_fredholm_determinant() {
    let table = TracyWidomTable::bundled();
    for s in [-4.0, -3.0, -2.5, -1.77, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0] {
        let det = fredholm_f2(s, 60);
        let f = table.cdf(s);
        assert!((f - det).abs() < 1e-7, "s = {s}: table {f}, determinant {det}");
    }
}

#[test]
fn determinant_has_converged_in_the_node_count() {
    for s in [-3.0, 0.0] {
        assert!((fredholm_f2(s, 50) - fredholm_f2(s, 70)).abs() < 1e-12);
    }
}

#[test]
fn published_moments() {
    // Mean and variance of TW2 to ten digits.
    let table = TracyWidomTable::bundled();
    assert!((table.mean() - (-1.771_086_807_4)).abs() < 1e-7);
    assert!((table.variance() - 0.813_194_792_8).abs() < 1e-6);
}
