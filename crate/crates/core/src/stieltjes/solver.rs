use crate::error::{param, Error, Result};
use num_complex::Complex64;

/// Population spectrum `Σ_k w_k δ_{t_k}` together with the ratio `c = N/n`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralModel {
    atoms: Vec<f64>,
    weights: Vec<f64>,
    c: f64,
}

impl SpectralModel {
    /// `atoms` strictly increasing and positive, `weights` positive and summing to one.
    pub fn new(atoms: Vec<f64>, weights: Vec<f64>, c: f64) -> Result<Self> {
        if atoms.is_empty() || atoms.len() != weights.len() {
            return param(format!("{} atoms with {} weights", atoms.len(), weights.len()));
        }
        if !(c.is_finite() && c > 0.0) {
            return param(format!("ratio c must be positive, got {c}"));
        }
        if atoms.iter().any(|&t| !(t.is_finite() && t > 0.0)) {
            return param("population atoms must be positive and finite");
        }
        if atoms.windows(2).any(|w| w[0] >= w[1]) {
            return param("population atoms must be strictly increasing");
        }
        if weights.iter().any(|&w| !(w.is_finite() && w > 0.0)) {
            return param("weights must be positive");
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return param(format!("weights sum to {total}, not 1"));
        }
        Ok(Self { atoms, weights, c })
    }

    /// Same as [`SpectralModel::new`] but rescales the weights to sum to one.
    pub fn normalized(atoms: Vec<f64>, weights: Vec<f64>, c: f64) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) {
            return param("weights must have a positive sum");
        }
        Self::new(atoms, weights.iter().map(|w| w / total).collect(), c)
    }

    /// White population covariance; the limit spectrum is Marčenko–Pastur.
    pub fn white(c: f64) -> Result<Self> {
        Self::new(vec![1.0], vec![1.0], c)
    }

    /// Builds the model from multiplicities, e.g. powers `(1,3,7)` with counts `(N1,N2,N3)`.
    pub fn from_multiplicities(atoms: &[f64], counts: &[usize], n_samples: usize) -> Result<Self> {
        let n: usize = counts.iter().sum();
        if n == 0 || n_samples == 0 {
            return param("empty model");
        }
        let weights = counts.iter().map(|&k| k as f64 / n as f64).collect();
        Self::normalized(atoms.to_vec(), weights, n as f64 / n_samples as f64)
    }

    pub fn atoms(&self) -> &[f64] {
        &self.atoms
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn ratio(&self) -> f64 {
        self.c
    }

    /// Mass of the sample spectrum at zero, `max(0, 1 - 1/c)`.
    pub fn mass_at_zero(&self) -> f64 {
        (1.0 - 1.0 / self.c).max(0.0)
    }

    fn map(&self, z: Complex64, m: Complex64) -> (Complex64, Complex64) {
        let mut s = Complex64::new(0.0, 0.0);
        let mut ds = Complex64::new(0.0, 0.0);
        for (&t, &w) in self.atoms.iter().zip(&self.weights) {
            let d = 1.0 / (1.0 + t * m);
            s += w * t * d;
            ds += w * t * t * d * d;
        }
        let den = z - self.c * s;
        let f = -1.0 / den;
        // d/dm of -1/den, with d(den)/dm = c Σ w t² / (1 + t m)².
        let fp = self.c * ds / (den * den);
        (f, fp)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    /// Weight of the new iterate in a damped fixed-point step.
    pub damping: f64,
    pub tol: f64,
    pub max_iter: usize,
    /// Try a safeguarded Newton step before each damped step.
    pub newton: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self { damping: 0.5, tol: 1e-10, max_iter: 10_000, newton: true }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StieltjesSolution {
    pub z: Complex64,
    /// Companion transform, attached to the `n x n` matrix `(1/n) Y^H Y`.
    pub m_under: Complex64,
    /// `m_F(z)`, recovered from `m_under = c m_F + (c - 1)/z`.
    pub m: Complex64,
    pub residual: f64,
    pub iterations: usize,
}

/// Solves `m = -1 / (z - c Σ w_k t_k / (1 + t_k m))` for the companion transform.
pub fn solve_companion_stieltjes(
    model: &SpectralModel,
    z: Complex64,
    cfg: &SolverConfig,
) -> Result<StieltjesSolution> {
    solve_companion_stieltjes_from(model, z, cfg, -1.0 / z)
}

/// Same as [`solve_companion_stieltjes`] starting from `init`, typically the solution at a
/// neighbouring point.
pub fn solve_companion_stieltjes_from(
    model: &SpectralModel,
    z: Complex64,
    cfg: &SolverConfig,
    init: Complex64,
) -> Result<StieltjesSolution> {
    if !(z.im > 0.0) || !z.re.is_finite() || !z.im.is_finite() {
        return param(format!("solver needs Im z > 0, got {z}"));
    }
    if !(cfg.damping > 0.0 && cfg.damping <= 1.0) || !(cfg.tol > 0.0) {
        return param("damping must lie in (0, 1] and tol must be positive");
    }
    let mut m = if init.im > 0.0 && init.re.is_finite() { init } else { -1.0 / z };
    let mut residual = f64::INFINITY;
    for it in 0..=cfg.max_iter {
        let (f, fp) = model.map(z, m);
        residual = (f - m).norm();
        if residual <= cfg.tol * m.norm().max(1.0) {
            let c = model.c;
            return Ok(StieltjesSolution {
                z,
                m_under: m,
                m: (m + (1.0 - c) / z) / c,
                residual,
                iterations: it,
            });
        }
        if it == cfg.max_iter {
            break;
        }
        if cfg.newton {
            let step = (m - f) / (1.0 - fp);
            let cand = m - step;
            if cand.im > 0.0 && cand.re.is_finite() && cand.im.is_finite() {
                let (fc, _) = model.map(z, cand);
                if (fc - cand).norm() < residual {
                    m = cand;
                    continue;
                }
            }
        }
        let next = (1.0 - cfg.damping) * m + cfg.damping * f;
        m = if next.im > 0.0 { next } else { Complex64::new(next.re, m.im * 0.5) };
    }
    Err(Error::NoConvergence { iterations: cfg.max_iter, residual })
}
