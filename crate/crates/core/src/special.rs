//! Special functions and quadrature rules used by the spectral routines.

/// `Ai(0)`.
pub const AI0: f64 = 0.355_028_053_887_817_24;
/// `-Ai'(0)`.
pub const AIP0_NEG: f64 = 0.258_819_403_792_806_8;

/// Airy function `Ai(x)` and its derivative.
///
/// Maclaurin series on `[-5, 6)`, the exponential asymptotic expansion above, and Taylor
/// stepping of `y'' = x y` below `-5`.
pub fn airy(x: f64) -> (f64, f64) {
    if x >= 6.0 {
        airy_asymptotic(x)
    } else if x >= -5.0 {
        airy_series(x)
    } else {
        let (mut ai, mut aip) = airy_series(-5.0);
        let mut t = -5.0;
        let steps = ((t - x) / 0.2).ceil() as usize;
        let h = (x - t) / steps as f64;
        for _ in 0..steps {
            (ai, aip) = taylor_step(t, ai, aip, h);
            t += h;
        }
        (ai, aip)
    }
}

fn airy_series(x: f64) -> (f64, f64) {
    let x3 = x * x * x;
    // f, g and their derivatives from the standard Maclaurin recursions.
    let (mut f, mut fp, mut g, mut gp) = (1.0, 0.0, x, 1.0);
    let (mut tf, mut tfp, mut tg, mut tgp) = (1.0, x * x / 2.0, x, 1.0);
    fp += tfp;
    for k in 1..200 {
        let kf = k as f64;
        tf *= x3 / ((3.0 * kf - 1.0) * (3.0 * kf));
        tg *= x3 / ((3.0 * kf) * (3.0 * kf + 1.0));
        tgp *= x3 / ((3.0 * kf) * (3.0 * kf - 2.0));
        if k >= 2 {
            tfp *= x3 / ((3.0 * kf - 3.0) * (3.0 * kf - 1.0));
            fp += tfp;
        }
        f += tf;
        g += tg;
        gp += tgp;
        let scale = f.abs() + g.abs() + fp.abs() + gp.abs();
        if tf.abs() + tg.abs() + tfp.abs() + tgp.abs() < 1e-18 * scale {
            break;
        }
    }
    (AI0 * f - AIP0_NEG * g, AI0 * fp - AIP0_NEG * gp)
}

fn airy_asymptotic(x: f64) -> (f64, f64) {
    let zeta = 2.0 / 3.0 * x.powf(1.5);
    let (mut su, mut sv) = (1.0, 1.0);
    let mut u = 1.0f64;
    let mut last = f64::INFINITY;
    for k in 1..40 {
        let kf = k as f64;
        u *= (6.0 * kf - 5.0) * (6.0 * kf - 3.0) * (6.0 * kf - 1.0) / ((2.0 * kf - 1.0) * 216.0 * kf);
        let v = -(6.0 * kf + 1.0) / (6.0 * kf - 1.0) * u;
        let term = u / zeta.powi(k);
        if term.abs() > last || term.abs() < 1e-17 {
            break;
        }
        last = term.abs();
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        su += sign * term;
        sv += sign * v / zeta.powi(k);
    }
    let pre = (-zeta).exp() / (2.0 * std::f64::consts::PI.sqrt());
    (pre * su / x.powf(0.25), -pre * x.powf(0.25) * sv)
}

fn taylor_step(x0: f64, y: f64, yp: f64, h: f64) -> (f64, f64) {
    let mut a = [0.0f64; 48];
    a[0] = y;
    a[1] = yp;
    a[2] = x0 * y / 2.0;
    for k in 1..a.len() - 2 {
        a[k + 2] = (x0 * a[k] + a[k - 1]) / (((k + 2) * (k + 1)) as f64);
    }
    let (mut v, mut d) = (0.0, 0.0);
    for k in (0..a.len()).rev() {
        v = v * h + a[k];
        if k > 0 {
            d = d * h + k as f64 * a[k];
        }
    }
    (v, d)
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, x);
        if d != 0.0 {
            dp = d;
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Standard normal cumulative distribution function.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * statrs::function::erf::erfc(-x / std::f64::consts::SQRT_2)
}
