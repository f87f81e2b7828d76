use super::mp::{mp_density, mp_support};
use super::solver::{solve_companion_stieltjes_from, SolverConfig, SpectralModel};
use crate::error::{param, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// A limiting sample-eigenvalue density sampled on a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Density {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    pub mass_at_zero: f64,
    /// Grid points where the solver failed; they are absent from `grid`.
    #[serde(default)]
    pub skipped: Vec<f64>,
}

impl Density {
    /// The Marčenko–Pastur density evaluated in closed form.
    pub fn marcenko_pastur(c: f64, grid: &[f64]) -> Result<Self> {
        let support = mp_support(c)?;
        let values = grid.iter().map(|&x| mp_density(c, x)).collect::<Result<Vec<_>>>()?;
        Ok(Self { grid: grid.to_vec(), values, mass_at_zero: support.mass_at_zero, skipped: Vec::new() })
    }

    /// Trapezoidal integral of the continuous part.
    pub fn integral(&self) -> f64 {
        trapezoid(&self.grid, &self.values)
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }
}

fn trapezoid(x: &[f64], y: &[f64]) -> f64 {
    x.windows(2).zip(y.windows(2)).map(|(x, y)| 0.5 * (x[1] - x[0]) * (y[0] + y[1])).sum()
}

/// Evenly spaced grid `lo, lo + step, ..., <= hi`.
pub fn linear_grid(lo: f64, hi: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || !(hi >= lo) || !lo.is_finite() || !hi.is_finite() {
        return param(format!("bad grid {lo}:{hi}:{step}"));
    }
    let n = ((hi - lo) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|k| lo + k as f64 * step).collect())
}

/// Density `(1/π) Im m_F(x + iε)` along a grid, warm-starting each point from its
/// neighbour.
///
/// For `c > 1` the smeared contribution of the atom at zero is removed so that the
/// returned values describe the continuous part only.
pub fn density_from_stieltjes(
    model: &SpectralModel,
    grid: &[f64],
    eps: f64,
    cfg: &SolverConfig,
) -> Result<Density> {
    if !(eps > 0.0) {
        return param(format!("eps must be positive, got {eps}"));
    }
    let mass0 = model.mass_at_zero();
    let mut out = Density { grid: Vec::with_capacity(grid.len()), values: Vec::new(), mass_at_zero: mass0, skipped: Vec::new() };
    let mut prev: Option<Complex64> = None;
    for &x in grid {
        let z = Complex64::new(x, eps);
        let init = prev.unwrap_or(-1.0 / z);
        match solve_companion_stieltjes_from(model, z, cfg, init) {
            Ok(sol) => {
                prev = Some(sol.m_under);
                let atom = mass0 * eps / (PI * (x * x + eps * eps));
                let f = (sol.m.im / PI - atom).max(0.0);
                out.grid.push(x);
                out.values.push(f);
            }
            Err(_) => {
                prev = None;
                out.skipped.push(x);
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SupportInterval {
    pub lo: f64,
    pub hi: f64,
    pub mass: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupportClusters {
    pub intervals: Vec<SupportInterval>,
    pub threshold: f64,
}

impl SupportClusters {
    pub fn count(&self) -> usize {
        self.intervals.len()
    }

    pub fn total_mass(&self) -> f64 {
        self.intervals.iter().map(|i| i.mass).sum()
    }
}

/// The default cluster threshold, `1e-3` times the peak density.
pub fn default_threshold(density: &Density) -> f64 {
    1e-3 * density.max_value()
}

/// [`support_clusters`] at [`default_threshold`]; an identically zero density has no clusters.
pub fn support_clusters_default(density: &Density) -> Result<SupportClusters> {
    let threshold = default_threshold(density);
    if threshold <= 0.0 {
        return Ok(SupportClusters { intervals: Vec::new(), threshold: 0.0 });
    }
    support_clusters(density, threshold)
}

/// Connected components of `{x : f(x) > threshold}`.
///
/// A single grid point below threshold between two points above it is treated as
/// numerical noise and bridged. Runs shorter than three points are dropped. Masses are
/// trapezoidal integrals over each run extended by one grid step on either side.
pub fn support_clusters(density: &Density, threshold: f64) -> Result<SupportClusters> {
    if !(threshold > 0.0) {
        return param(format!("threshold must be positive, got {threshold}"));
    }
    let n = density.values.len();
    let mut mask: Vec<bool> = density.values.iter().map(|&f| f > threshold).collect();
    for i in 1..n.saturating_sub(1) {
        if !mask[i] && mask[i - 1] && mask[i + 1] {
            mask[i] = true;
        }
    }
    let mut intervals = Vec::new();
    let mut i = 0;
    while i < n {
        if !mask[i] {
            i += 1;
            continue;
        }
        let start = i;
        while i < n && mask[i] {
            i += 1;
        }
        let end = i - 1;
        if end - start + 1 >= 3 {
            let a = start.saturating_sub(1);
            let b = (end + 1).min(n - 1);
            intervals.push(SupportInterval {
                lo: density.grid[start],
                hi: density.grid[end],
                mass: trapezoid(&density.grid[a..=b], &density.values[a..=b]),
            });
        }
    }
    Ok(SupportClusters { intervals, threshold })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn three_mass_density(t3: f64) -> Density {
        let model = SpectralModel::normalized(vec![1.0, 3.0, t3], vec![1.0; 3], 0.1).unwrap();
        let grid = linear_grid(0.01, 12.0, 0.01).unwrap();
        density_from_stieltjes(&model, &grid, 1e-3, &SolverConfig::default()).unwrap()
    }

    #[test]
    fn separated_masses_give_three_clusters() {
        let d = three_mass_density(7.0);
        assert!(d.skipped.is_empty());
        let cl = support_clusters(&d, default_threshold(&d)).unwrap();
        assert_eq!(cl.count(), 3, "{cl:?}");
        assert!((cl.total_mass() - 1.0).abs() < 2e-2);
        for iv in &cl.intervals {
            assert!((iv.mass - 1.0 / 3.0).abs() < 2e-2, "{iv:?}");
        }
        let top = cl.intervals[2];
        assert!(top.lo <= 7.0 * 0.8 && top.hi >= 7.0 * 1.2, "{top:?}");
    }

    #[test]
    fn close_masses_merge() {
        let d = three_mass_density(4.0);
        let cl = support_clusters(&d, default_threshold(&d)).unwrap();
        assert_eq!(cl.count(), 2, "{cl:?}");
    }

    #[test]
    fn mp_has_one_cluster_with_unit_mass() {
        let grid = linear_grid(0.0, 3.0, 0.001).unwrap();
        let d = Density::marcenko_pastur(0.5, &grid).unwrap();
        let cl = support_clusters(&d, 1e-3).unwrap();
        assert_eq!(cl.count(), 1);
        assert!((cl.total_mass() - 1.0).abs() < 2e-2);
        let iv = cl.intervals[0];
        assert!((iv.lo - 0.086).abs() < 2e-3 && (iv.hi - 2.914).abs() < 2e-3, "{iv:?}");
    }

    #[test]
    fn atom_is_removed_above_unit_ratio() {
        let model = SpectralModel::white(2.0).unwrap();
        let grid = linear_grid(0.0, 7.0, 0.01).unwrap();
        let d = density_from_stieltjes(&model, &grid, 1e-4, &SolverConfig::default()).unwrap();
        assert!((d.mass_at_zero - 0.5).abs() < 1e-15);
        assert!((d.integral() + d.mass_at_zero - 1.0).abs() < 2e-2, "{}", d.integral());
        assert!(d.values[0] < 1e-3);
    }

    #[test]
    fn single_dip_is_bridged() {
        let d = Density {
            grid: (0..7).map(|k| k as f64).collect(),
            values: vec![0.0, 1.0, 1.0, 0.0, 1.0, 1.0, 0.0],
            mass_at_zero: 0.0,
            skipped: vec![],
        };
        assert_eq!(support_clusters(&d, 0.5).unwrap().count(), 1);
        assert!(support_clusters(&d, 0.0).is_err());
        let flat = Density { values: vec![0.0; 7], ..d };
        assert_eq!(support_clusters_default(&flat).unwrap().count(), 0);
    }
}
