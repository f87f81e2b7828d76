use crate::error::{param, Result};
use crate::linalg::{log_det_hpd, trace_inverse_hpd, ComplexMatrix};
use crate::special::gauss_legendre;

/// Per-antenna capacity computed two ways.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CapacityCheck {
    /// `(1/N) log det(I + H H^H / σ²)`.
    pub direct: f64,
    /// `∫_{σ²}^∞ (1/t - (1/N) tr (H H^H + t I)^{-1}) dt`.
    pub integral: f64,
}

impl CapacityCheck {
    pub fn discrepancy(&self) -> f64 {
        (self.direct - self.integral).abs()
    }
}

/// Evaluates the Shannon transform of `H H^H` directly and through the integral of its
/// resolvent trace.
///
/// The integral is taken in `u = log(t/σ²)` by composite Gauss–Legendre up to a cutoff
/// `T`, plus a two-term expansion of the remaining tail.
pub fn capacity_identity(h: &ComplexMatrix, sigma2: f64) -> Result<CapacityCheck> {
    if !(sigma2 > 0.0 && sigma2.is_finite()) {
        return param(format!("noise variance must be positive, got {sigma2}"));
    }
    if h.rows() == 0 || h.cols() == 0 {
        return param("empty channel matrix");
    }
    let n = h.rows() as f64;
    let g = h.matmul(&h.adjoint())?;
    let mut g = g;
    g.symmetrize();
    let shifted = |t: f64| {
        let mut a = g.clone();
        for i in 0..g.rows() {
            let d = a.get(i, i);
            a.set(i, i, d + t);
        }
        a
    };
    let direct = (log_det_hpd(&shifted(sigma2))? - n * sigma2.ln()) / n;

    let tr1 = g.trace().re;
    let tr2 = g.matmul(&g)?.trace().re;
    let cutoff = 1e4 * sigma2.max(tr1);
    let u_max = (cutoff / sigma2).ln();
    let panels = (u_max / 0.5).ceil().max(1.0) as usize;
    let width = u_max / panels as f64;
    let (nodes, weights) = gauss_legendre(12);
    let mut integral = 0.0;
    for p in 0..panels {
        let mid = (p as f64 + 0.5) * width;
        for (x, w) in nodes.iter().zip(&weights) {
            let t = sigma2 * (mid + 0.5 * width * x).exp();
            // dt = t du, so the integrand becomes 1 - (t/N) tr (G + tI)^{-1}.
            let f = 1.0 - t * trace_inverse_hpd(&shifted(t))? / n;
            integral += 0.5 * width * w * f;
        }
    }
    integral += tr1 / (n * cutoff) - tr2 / (2.0 * n * cutoff * cutoff);
    Ok(CapacityCheck { direct, integral })
}
