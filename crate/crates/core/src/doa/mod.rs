//! Direction of arrival on a uniform linear array: classical MUSIC and its large-dimensional
//! correction G-MUSIC.
//!
//! Both methods scan `θ ↦ s(θ)ᴴ (Σ_i φ(i) û_i û_iᴴ) s(θ)` and keep the deepest minima. MUSIC
//! uses the indicator of the `N - K` smallest sample eigenvalues; G-MUSIC uses weights built
//! from the sample eigenvalues `λ` and the eigenvalues `μ` of `diag(λ) - (1/n) √λ √λᵀ`.

use crate::error::{param, Error, Result};
use crate::gest::mu_eigenvalues;
use crate::linalg::{hermitian_eig, sample_covariance, ComplexMatrix, HermitianEigen};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::str::FromStr;

/// Uniform linear array; `spacing` is the element spacing in half-wavelengths.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SteeringModel {
    n_sensors: usize,
    spacing: f64,
}

impl SteeringModel {
    pub fn new(n_sensors: usize, spacing: f64) -> Result<Self> {
        if n_sensors < 2 {
            return param(format!("an array needs at least two sensors, got {n_sensors}"));
        }
        if !(spacing > 0.0 && spacing.is_finite()) {
            return param(format!("element spacing must be positive, got {spacing}"));
        }
        Ok(Self { n_sensors, spacing })
    }

    /// Half-wavelength spacing.
    pub fn ula(n_sensors: usize) -> Result<Self> {
        Self::new(n_sensors, 1.0)
    }

    pub fn n_sensors(&self) -> usize {
        self.n_sensors
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }
}

/// `s(θ)_m = exp(iπ d m sin θ) / √N`, `m = 0, …, N-1`, with `θ` in degrees.
pub fn steering_vector(model: &SteeringModel, theta_deg: f64) -> Vec<Complex64> {
    let n = model.n_sensors;
    let phase = std::f64::consts::PI * model.spacing * theta_deg.to_radians().sin();
    let norm = 1.0 / (n as f64).sqrt();
    (0..n).map(|m| Complex64::from_polar(norm, phase * m as f64)).collect()
}

/// `S(Θ) = [s(θ_1), …, s(θ_K)]`.
pub fn steering_matrix(model: &SteeringModel, thetas_deg: &[f64]) -> ComplexMatrix {
    let cols: Vec<_> = thetas_deg.iter().map(|&t| steering_vector(model, t)).collect();
    ComplexMatrix::from_fn(model.n_sensors, thetas_deg.len(), |i, j| cols[j][i])
}

/// `‖U_Wᴴ s‖²`.
pub fn music_cost(noise_space: &ComplexMatrix, s: &[Complex64]) -> Result<f64> {
    if noise_space.rows() != s.len() {
        return Err(Error::Dimension(format!(
            "noise space has {} rows, steering vector has {} entries",
            noise_space.rows(),
            s.len()
        )));
    }
    let mut cost = 0.0;
    for j in 0..noise_space.cols() {
        let p: Complex64 = (0..s.len()).map(|i| noise_space.get(i, j).conj() * s[i]).sum();
        cost += p.norm_sqr();
    }
    Ok(cost)
}

/// The G-MUSIC weights `φ(1..N)` for ascending sample eigenvalues, noise indices first.
pub fn gmusic_weights(eigs: &[f64], n: usize, k: usize) -> Result<Vec<f64>> {
    let big_n = eigs.len();
    if !(k > 0 && k < big_n) {
        return param(format!("need 0 < K < N, got K = {k} with N = {big_n}"));
    }
    let mu = mu_eigenvalues(eigs, n)?;
    let scale = eigs.iter().fold(0.0f64, |a, &l| a.max(l.abs())).max(f64::MIN_POSITIVE);
    let split = big_n - k;
    let term = |i: usize, j: usize| -> Result<f64> {
        let d = eigs[i] - eigs[j];
        if d.abs() <= 1e-13 * scale {
            return Err(Error::Degenerate(format!(
                "sample eigenvalues {i} and {j} coincide ({:e}); G-MUSIC weights are undefined",
                eigs[i]
            )));
        }
        let dm = eigs[i] - mu[j];
        if dm.abs() <= 1e-13 * scale {
            return Err(Error::Degenerate(format!("sample eigenvalue {i} coincides with mu_{j}")));
        }
        Ok(eigs[j] / d - mu[j] / dm)
    };
    (0..big_n)
        .map(|i| {
            if i < split {
                (split..big_n).map(|j| term(i, j)).sum::<Result<f64>>().map(|s| 1.0 + s)
            } else {
                (0..split).map(|j| term(i, j)).sum::<Result<f64>>().map(|s| -s)
            }
        })
        .collect()
}

/// `Σ_i φ(i) |û_iᴴ s|²`.
pub fn weighted_cost(eig: &HermitianEigen, weights: &[f64], s: &[Complex64]) -> Result<f64> {
    let n = eig.dim();
    if weights.len() != n || s.len() != n {
        return Err(Error::Dimension(format!(
            "{} weights and a steering vector of length {} for dimension {n}",
            weights.len(),
            s.len()
        )));
    }
    let mut cost = 0.0;
    for (i, w) in weights.iter().enumerate() {
        if *w == 0.0 {
            continue;
        }
        let p: Complex64 = (0..n).map(|r| eig.vectors.get(r, i).conj() * s[r]).sum();
        cost += w * p.norm_sqr();
    }
    Ok(cost)
}

/// `Σ_i φ(i) û_i û_iᴴ`.
pub fn weighted_projector(eig: &HermitianEigen, weights: &[f64]) -> Result<ComplexMatrix> {
    if weights.len() != eig.dim() {
        return Err(Error::Dimension(format!("{} weights for dimension {}", weights.len(), eig.dim())));
    }
    let n = eig.dim();
    Ok(ComplexMatrix::from_fn(n, n, |a, b| {
        (0..n).map(|i| weights[i] * eig.vectors.get(a, i) * eig.vectors.get(b, i).conj()).sum()
    }))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Music,
    GMusic,
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "music" => Ok(Method::Music),
            "gmusic" | "g-music" => Ok(Method::GMusic),
            _ => Err(Error::Parameter(format!("unknown DoA method `{s}` (expected music or gmusic)"))),
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Method::Music => "music",
            Method::GMusic => "gmusic",
        })
    }
}

/// Regular grid of angles in degrees, parsed from `lo:hi:step`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AngleGrid {
    lo: f64,
    hi: f64,
    step: f64,
}

impl AngleGrid {
    pub const MAX_STEP: f64 = 0.1;

    pub fn new(lo: f64, hi: f64, step: f64) -> Result<Self> {
        if !(lo >= -90.0 && hi <= 90.0 && lo < hi) {
            return param(format!("angle grid [{lo}, {hi}] must be an increasing range inside [-90, 90]"));
        }
        if !(step > 0.0 && step <= Self::MAX_STEP + 1e-12) {
            return param(format!("grid step must lie in (0, {}] degrees, got {step}", Self::MAX_STEP));
        }
        Ok(Self { lo, hi, step })
    }

    pub fn full(step: f64) -> Result<Self> {
        Self::new(-90.0, 90.0, step)
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn points(&self) -> Vec<f64> {
        let n = ((self.hi - self.lo) / self.step + 1e-9).floor() as usize;
        (0..=n).map(|k| self.lo + k as f64 * self.step).collect()
    }
}

impl FromStr for AngleGrid {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<f64> = s
            .split(':')
            .map(|p| p.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Parameter(format!("bad angle grid `{s}`: {e}")))?;
        match parts[..] {
            [lo, hi, step] => Self::new(lo, hi, step),
            _ => param(format!("angle grid must be lo:hi:step, got `{s}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DoaResult {
    /// Ascending.
    pub angles: Vec<f64>,
    /// `(θ, cost)` on the grid, linear scale.
    pub cost_curve: Vec<(f64, f64)>,
    pub method: Method,
    /// False when the curve had fewer than `K` local minima.
    pub complete: bool,
}

impl DoaResult {
    /// Cost curve in dB. The weighted G-MUSIC cost can dip below zero at finite sizes, so
    /// values are floored 150 dB under the curve maximum.
    pub fn cost_curve_db(&self) -> Vec<(f64, f64)> {
        let floor = self.cost_curve.iter().map(|p| p.1).fold(0.0, f64::max) * 1e-15;
        self.cost_curve.iter().map(|&(t, c)| (t, to_db(c.max(floor)))).collect()
    }
}

/// `10 log₁₀ c`, clipped at `1e-300` so zero and slightly negative costs stay finite.
pub fn to_db(c: f64) -> f64 {
    10.0 * c.max(1e-300).log10()
}

/// Weights for either method from a sample eigendecomposition.
pub fn method_weights(eig: &HermitianEigen, n_samples: usize, k: usize, method: Method) -> Result<Vec<f64>> {
    let n = eig.dim();
    match method {
        Method::Music => Ok((0..n).map(|i| if i < n - k { 1.0 } else { 0.0 }).collect()),
        Method::GMusic => gmusic_weights(&eig.values, n_samples, k),
    }
}

/// Cost curve of either method over `grid` for a given eigendecomposition.
pub fn cost_curve(
    eig: &HermitianEigen,
    weights: &[f64],
    model: &SteeringModel,
    grid: &AngleGrid,
) -> Result<Vec<(f64, f64)>> {
    if model.n_sensors != eig.dim() {
        return Err(Error::Dimension(format!(
            "steering model has {} sensors, data has {} rows",
            model.n_sensors,
            eig.dim()
        )));
    }
    grid.points()
        .into_par_iter()
        .map(|t| weighted_cost(eig, weights, &steering_vector(model, t)).map(|c| (t, c)))
        .collect()
}

/// The `k` deepest local minima of a sampled curve, refined by a parabola through each
/// minimum and its neighbours, ascending in angle. Also reports whether `k` were found.
pub fn deepest_minima(curve: &[(f64, f64)], k: usize) -> (Vec<f64>, bool) {
    let mut minima: Vec<(f64, f64)> = Vec::new();
    for j in 1..curve.len().saturating_sub(1) {
        let (a, b, c) = (curve[j - 1].1, curve[j].1, curve[j + 1].1);
        if b < a && b <= c {
            let denom = a - 2.0 * b + c;
            let offset = if denom > 0.0 { (0.5 * (a - c) / denom).clamp(-0.5, 0.5) } else { 0.0 };
            let h = curve[j + 1].0 - curve[j].0;
            let depth = b - 0.25 * (a - c) * offset;
            minima.push((curve[j].0 + offset * h, depth));
        }
    }
    minima.sort_by(|x, y| x.1.total_cmp(&y.1));
    let complete = minima.len() >= k;
    let mut angles: Vec<f64> = minima.into_iter().take(k).map(|m| m.0).collect();
    angles.sort_by(f64::total_cmp);
    (angles, complete)
}

/// Estimates `k` directions of arrival from the `N × n` observation matrix `y`.
pub fn estimate_doa(
    y: &ComplexMatrix,
    k: usize,
    model: &SteeringModel,
    grid: &AngleGrid,
    method: Method,
) -> Result<DoaResult> {
    if y.rows() != model.n_sensors {
        return Err(Error::Dimension(format!(
            "data has {} rows for a {}-sensor array",
            y.rows(),
            model.n_sensors
        )));
    }
    if k >= y.rows() {
        return param(format!("K = {k} sources need more than {} sensors", y.rows()));
    }
    if k == 0 {
        return Ok(DoaResult { angles: Vec::new(), cost_curve: Vec::new(), method, complete: true });
    }
    let eig = hermitian_eig(&sample_covariance(y)?)?;
    estimate_doa_from_eigen(&eig, y.cols(), k, model, grid, method)
}

/// [`estimate_doa`] on a precomputed eigendecomposition of the sample covariance.
pub fn estimate_doa_from_eigen(
    eig: &HermitianEigen,
    n_samples: usize,
    k: usize,
    model: &SteeringModel,
    grid: &AngleGrid,
    method: Method,
) -> Result<DoaResult> {
    if k >= eig.dim() {
        return param(format!("K = {k} sources need more than {} sensors", eig.dim()));
    }
    if k == 0 {
        return Ok(DoaResult { angles: Vec::new(), cost_curve: Vec::new(), method, complete: true });
    }
    let weights = method_weights(eig, n_samples, k, method)?;
    let cost_curve = cost_curve(eig, &weights, model, grid)?;
    let (angles, complete) = deepest_minima(&cost_curve, k);
    Ok(DoaResult { angles, cost_curve, method, complete })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{complex_gaussian, RngStream};

    fn observations(model: &SteeringModel, thetas: &[f64], n: usize, sigma: f64, seed: u64) -> ComplexMatrix {
        let mut rng = RngStream::new(seed, 0);
        let s = steering_matrix(model, thetas);
        let x = complex_gaussian(thetas.len(), n, &mut rng);
        let w = complex_gaussian(model.n_sensors(), n, &mut rng);
        s.matmul(&x).unwrap().add(&w.scale(sigma)).unwrap()
    }

    #[test]
    fn steering_examples() {
        let m = SteeringModel::ula(20).unwrap();
        let s0 = steering_vector(&m, 0.0);
        assert!(s0.iter().all(|z| (z - Complex64::new(1.0 / 20f64.sqrt(), 0.0)).norm() < 1e-15));
        for t in [-90.0, -13.0, 35.0, 90.0] {
            let n: f64 = steering_vector(&m, t).iter().map(|z| z.norm_sqr()).sum();
            assert!((n - 1.0).abs() < 1e-14);
        }
        let a = steering_vector(&m, 35.0);
        let b = steering_vector(&m, 37.0);
        let ip: Complex64 = a.iter().zip(&b).map(|(x, y)| x.conj() * y).sum();
        assert!(ip.norm() < 1.0 - 1e-3);
        assert!(SteeringModel::new(1, 1.0).is_err() && SteeringModel::new(4, 0.0).is_err());
    }

    #[test]
    fn music_cost_projection_examples() {
        let e = ComplexMatrix::from_columns(&[vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)]]).unwrap();
        assert_eq!(music_cost(&e, &[Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)]).unwrap(), 1.0);
        assert_eq!(music_cost(&e, &[Complex64::new(0.0, 0.0), Complex64::new(0.0, 1.0)]).unwrap(), 0.0);
        assert!(music_cost(&e, &[Complex64::new(1.0, 0.0)]).is_err());
    }

    #[test]
    fn population_covariance_nulls_true_angles() {
        let m = SteeringModel::ula(8).unwrap();
        let thetas = [-20.0, 15.0];
        let s = steering_matrix(&m, &thetas);
        let t = s.matmul(&s.adjoint()).unwrap().add(&ComplexMatrix::identity(8).scale(0.1)).unwrap();
        let eig = hermitian_eig(&t).unwrap();
        let noise = ComplexMatrix::from_columns(&(0..6).map(|i| eig.vector(i)).collect::<Vec<_>>()).unwrap();
        for th in thetas {
            assert!(music_cost(&noise, &steering_vector(&m, th)).unwrap() < 1e-10);
        }
        let grid = AngleGrid::full(0.1).unwrap();
        let w = method_weights(&eig, 1, 2, Method::Music).unwrap();
        let (angles, complete) = deepest_minima(&cost_curve(&eig, &w, &m, &grid).unwrap(), 2);
        assert!(complete);
        for (a, t) in angles.iter().zip(thetas) {
            assert!((a - t).abs() <= 0.1, "{a} vs {t}");
        }
    }

    #[test]
    fn two_by_two_weights_match_hand_expansion() {
        let (l1, l2, n) = (0.5, 3.0, 10usize);
        let mu = mu_eigenvalues(&[l1, l2], n).unwrap();
        let phi = gmusic_weights(&[l1, l2], n, 1).unwrap();
        let f1 = 1.0 + l2 / (l1 - l2) - mu[1] / (l1 - mu[1]);
        let f2 = -(l1 / (l2 - l1) - mu[0] / (l2 - mu[0]));
        assert!((phi[0] - f1).abs() < 1e-12 && (phi[1] - f2).abs() < 1e-12);
        assert!(gmusic_weights(&[1.0, 1.0], n, 1).is_err());
        assert!(gmusic_weights(&[1.0, 2.0], n, 0).is_err());
        assert!(gmusic_weights(&[1.0, 2.0], n, 2).is_err());
    }

    #[test]
    fn weights_tend_to_indicator_with_many_samples() {
        let eigs = [0.9, 1.0, 1.1, 1.2, 6.0, 9.0];
        let phi = gmusic_weights(&eigs, 10_000 * eigs.len(), 2).unwrap();
        for (i, p) in phi.iter().enumerate() {
            let target = if i < 4 { 1.0 } else { 0.0 };
            assert!((p - target).abs() < 1e-2, "phi({i}) = {p}");
        }
    }

    #[test]
    fn indicator_weights_reproduce_music() {
        let m = SteeringModel::ula(6).unwrap();
        let y = observations(&m, &[10.0, 40.0], 30, 0.5, 2);
        let eig = hermitian_eig(&sample_covariance(&y).unwrap()).unwrap();
        let w = method_weights(&eig, 30, 2, Method::Music).unwrap();
        let noise = ComplexMatrix::from_columns(&(0..4).map(|i| eig.vector(i)).collect::<Vec<_>>()).unwrap();
        for t in [-60.0, 0.0, 10.0, 33.3] {
            let s = steering_vector(&m, t);
            let a = music_cost(&noise, &s).unwrap();
            let b = weighted_cost(&eig, &w, &s).unwrap();
            assert!((a - b).abs() < 1e-12);
        }
        let phi = gmusic_weights(&eig.values, 30, 2).unwrap();
        let p = weighted_projector(&eig, &phi).unwrap();
        let s = steering_vector(&m, 21.0);
        let q: Complex64 = (0..6).map(|i| s[i].conj() * p.row(i).iter().zip(&s).map(|(a, b)| a * b).sum::<Complex64>()).sum();
        assert!(q.im.abs() < 1e-10);
        assert!((q.re - weighted_cost(&eig, &phi, &s).unwrap()).abs() < 1e-10);
    }

    #[test]
    fn noiseless_source_is_found_by_both_methods() {
        let m = SteeringModel::ula(8).unwrap();
        let y = observations(&m, &[10.0], 400, 0.0, 5);
        let grid = AngleGrid::full(0.05).unwrap();
        for method in [Method::Music, Method::GMusic] {
            let r = estimate_doa(&y, 1, &m, &grid, method).unwrap();
            assert!(r.complete);
            assert!((r.angles[0] - 10.0).abs() <= 0.05, "{method}: {:?}", r.angles);
        }
    }

    #[test]
    fn guards_and_phase_invariance() {
        let m = SteeringModel::ula(4).unwrap();
        let y = observations(&m, &[0.0], 50, 0.3, 1);
        let grid: AngleGrid = "-90:90:0.1".parse().unwrap();
        let r = estimate_doa(&y, 0, &m, &grid, Method::GMusic).unwrap();
        assert!(r.angles.is_empty());
        assert!(estimate_doa(&y, 4, &m, &grid, Method::Music).is_err());
        assert!("0:10:0.5".parse::<AngleGrid>().is_err());
        let rot = ComplexMatrix::from_fn(4, 50, |i, j| y.get(i, j) * Complex64::from_polar(1.0, 0.7));
        let a = estimate_doa(&y, 1, &m, &grid, Method::GMusic).unwrap();
        let b = estimate_doa(&rot, 1, &m, &grid, Method::GMusic).unwrap();
        for (p, q) in a.cost_curve.iter().zip(&b.cost_curve) {
            assert!((p.1 - q.1).abs() < 1e-10);
        }
    }
}
