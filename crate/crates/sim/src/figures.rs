//! Figure reproduction: each id maps to the scenarios of one experiment and produces named
//! curves plus scalar metrics.

use crate::histogram::histogram;
use crate::runner::{nmse_db, run_monte_carlo, Binding, FailureModel};
use crate::scenario::{generate_trial, ScenarioSpec};
use rmt_inference::doa::{estimate_doa, AngleGrid, Method as DoaMethod, SteeringModel};
use rmt_inference::linalg::sample_eigenvalues;
use rmt_inference::spike::{empirical_threshold, exceedance_rate, spike_limits, TracyWidomTable};
use rmt_inference::stieltjes::{
    density_from_stieltjes, linear_grid, mp_density, mp_support, support_clusters_default, SolverConfig,
    SpectralModel,
};
use rmt_inference::{Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;
use std::time::Instant;

/// Noise variance of the failure-localization network.
pub const FAILURE_NOISE_VAR: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scale {
    /// Reduced trial counts that finish in minutes.
    Desk,
    /// Full trial counts and grids.
    Paper,
}

impl FromStr for Scale {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "desk" => Ok(Scale::Desk),
            "paper" => Ok(Scale::Paper),
            _ => Err(Error::Parameter(format!("unknown scale `{s}` (expected desk or paper)"))),
        }
    }
}

impl fmt::Display for Scale {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scale::Desk => "desk",
            Scale::Paper => "paper",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FigureId {
    #[serde(rename = "fig1")]
    Fig1,
    #[serde(rename = "fig2")]
    Fig2,
    #[serde(rename = "fig3-top")]
    Fig3Top,
    #[serde(rename = "fig3-bottom")]
    Fig3Bottom,
    #[serde(rename = "spike")]
    Spike,
    #[serde(rename = "fig4")]
    Fig4,
    #[serde(rename = "fig5")]
    Fig5,
    #[serde(rename = "fig6")]
    Fig6,
    #[serde(rename = "fig7")]
    Fig7,
    #[serde(rename = "fig8")]
    Fig8,
}

impl FigureId {
    pub const ALL: [FigureId; 10] = [
        FigureId::Fig1,
        FigureId::Fig2,
        FigureId::Fig3Top,
        FigureId::Fig3Bottom,
        FigureId::Spike,
        FigureId::Fig4,
        FigureId::Fig5,
        FigureId::Fig6,
        FigureId::Fig7,
        FigureId::Fig8,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            FigureId::Fig1 => "fig1",
            FigureId::Fig2 => "fig2",
            FigureId::Fig3Top => "fig3-top",
            FigureId::Fig3Bottom => "fig3-bottom",
            FigureId::Spike => "spike",
            FigureId::Fig4 => "fig4",
            FigureId::Fig5 => "fig5",
            FigureId::Fig6 => "fig6",
            FigureId::Fig7 => "fig7",
            FigureId::Fig8 => "fig8",
        }
    }

    pub fn description(&self) -> &'static str {
        match self {
            FigureId::Fig1 => "eigenvalue histogram of a white sample covariance against the Marcenko-Pastur law",
            FigureId::Fig2 => "Marcenko-Pastur densities for c = 0.1, 0.2, 0.5",
            FigureId::Fig3Top => "sample spectrum of three masses 1, 3, 7 with its limit density",
            FigureId::Fig3Bottom => "sample spectrum of three masses 1, 3, 4 with its limit density",
            FigureId::Spike => "isolated eigenvalues of a spiked covariance against their limits",
            FigureId::Fig4 => "NMSE of the largest source power, G-estimator against the classical estimator",
            FigureId::Fig5 => "MUSIC against G-MUSIC cost and two-source resolution rate",
            FigureId::Fig6 => "ROC of the GLRT and condition-number detectors",
            FigureId::Fig7 => "standardized largest eigenvalue against the Tracy-Widom law",
            FigureId::Fig8 => "failure detection and localization rates against the sample size",
        }
    }
}

impl FromStr for FigureId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        FigureId::ALL.into_iter().find(|f| f.as_str() == s).ok_or_else(|| {
            let ids: Vec<_> = FigureId::ALL.iter().map(|f| f.as_str()).collect();
            Error::Parameter(format!("unknown figure `{s}` (known: {})", ids.join(", ")))
        })
    }
}

impl fmt::Display for FigureId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A named table written as one CSV file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Curve {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Curve {
    pub fn new(name: &str, header: &[&str], rows: Vec<Vec<f64>>) -> Self {
        Self { name: name.into(), header: header.iter().map(|h| h.to_string()).collect(), rows }
    }

    fn xy(name: &str, x: &str, y: &str, points: impl IntoIterator<Item = (f64, f64)>) -> Self {
        Self::new(name, &[x, y], points.into_iter().map(|(a, b)| vec![a, b]).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FigureOutput {
    pub figure: FigureId,
    pub scale: Scale,
    pub seed: u64,
    pub specs: Vec<ScenarioSpec>,
    pub curves: Vec<Curve>,
    pub metrics: BTreeMap<String, f64>,
    pub notes: Vec<String>,
    pub runtime_secs: f64,
}

/// The `manifest.json` written next to the CSV files of a bundle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub figure: FigureId,
    pub description: String,
    pub scale: Scale,
    pub seed: u64,
    pub build: String,
    pub runtime_secs: f64,
    pub specs: Vec<ScenarioSpec>,
    pub files: Vec<String>,
    pub metrics: BTreeMap<String, f64>,
    pub notes: Vec<String>,
}

/// Writes one CSV per curve and a manifest into `dir`; returns the paths written.
pub fn write_bundle(output: &FigureOutput, dir: &Path, build: &str) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut paths = Vec::new();
    for curve in &output.curves {
        let path = dir.join(format!("{}_{}.csv", output.figure, curve.name));
        let mut w = csv::Writer::from_path(&path)?;
        w.write_record(&curve.header)?;
        for row in &curve.rows {
            w.write_record(row.iter().map(|v| format!("{v}")))?;
        }
        w.flush()?;
        paths.push(path);
    }
    let manifest = Manifest {
        figure: output.figure,
        description: output.figure.description().into(),
        scale: output.scale,
        seed: output.seed,
        build: build.into(),
        runtime_secs: output.runtime_secs,
        specs: output.specs.clone(),
        files: paths.iter().filter_map(|p| p.file_name()).map(|f| f.to_string_lossy().into_owned()).collect(),
        metrics: output.metrics.clone(),
        notes: output.notes.clone(),
    };
    let path = dir.join(format!("{}_manifest.json", output.figure));
    let text = serde_json::to_string_pretty(&manifest).map_err(|e| Error::Format(e.to_string()))?;
    std::fs::write(&path, text)?;
    paths.push(path);
    Ok(paths)
}

/// Runs one figure.
pub fn reproduce(figure: FigureId, seed: u64, scale: Scale) -> Result<FigureOutput> {
    let start = Instant::now();
    let mut out = FigureOutput {
        figure,
        scale,
        seed,
        specs: Vec::new(),
        curves: Vec::new(),
        metrics: BTreeMap::new(),
        notes: Vec::new(),
        runtime_secs: 0.0,
    };
    match figure {
        FigureId::Fig1 => fig1(&mut out)?,
        FigureId::Fig2 => fig2(&mut out)?,
        FigureId::Fig3Top => fig3(&mut out, &[1.0, 3.0, 7.0], 12.0)?,
        FigureId::Fig3Bottom => fig3(&mut out, &[1.0, 3.0, 4.0], 7.0)?,
        FigureId::Spike => spike(&mut out)?,
        FigureId::Fig4 => fig4(&mut out)?,
        FigureId::Fig5 => fig5(&mut out)?,
        FigureId::Fig6 => fig6(&mut out)?,
        FigureId::Fig7 => fig7(&mut out)?,
        FigureId::Fig8 => fig8(&mut out)?,
    }
    out.runtime_secs = start.elapsed().as_secs_f64();
    Ok(out)
}

fn density_grid(lo: f64, hi: f64, step: f64) -> Result<Vec<f64>> {
    linear_grid(lo, hi, step)
}

/// Largest `|histogram - density|` over the bin centres.
pub fn sup_deviation(centers: &[f64], hist: &[f64], density: impl Fn(f64) -> Result<f64>) -> Result<f64> {
    let mut worst = 0.0f64;
    for (x, h) in centers.iter().zip(hist) {
        worst = worst.max((h - density(*x)?).abs());
    }
    Ok(worst)
}

fn fig1(out: &mut FigureOutput) -> Result<()> {
    let spec = ScenarioSpec::MpNull { n_dim: 500, n_samples: 2000, trials: 1, seed: out.seed };
    let eigs = sample_eigenvalues(&generate_trial(&spec, 0)?.y)?;
    let c = 0.25;
    let h = histogram(&eigs, 50, Some((0.0, 3.0)))?;
    let centers = h.centers();
    out.metrics.insert("sup_deviation".into(), sup_deviation(&centers, &h.densities, |x| mp_density(c, x))?);
    let support = mp_support(c)?;
    out.metrics.insert("support_lower".into(), support.lower);
    out.metrics.insert("support_upper".into(), support.upper);
    out.metrics.insert("lambda_min".into(), eigs[0]);
    out.metrics.insert("lambda_max".into(), eigs[eigs.len() - 1]);
    out.curves.push(Curve::xy("histogram", "x", "density", centers.into_iter().zip(h.densities)));
    let grid = density_grid(0.0, 3.0, 0.01)?;
    let values = grid.iter().map(|&x| mp_density(c, x)).collect::<Result<Vec<_>>>()?;
    out.curves.push(Curve::xy("mp_density", "x", "density", grid.into_iter().zip(values)));
    out.specs.push(spec);
    Ok(())
}

fn fig2(out: &mut FigureOutput) -> Result<()> {
    let grid = density_grid(0.0, 3.0, 0.01)?;
    for c in [0.1, 0.2, 0.5] {
        let values = grid.iter().map(|&x| mp_density(c, x)).collect::<Result<Vec<_>>>()?;
        out.metrics.insert(format!("density_at_1_c{c}"), mp_density(c, 1.0)?);
        out.curves.push(Curve::xy(&format!("mp_density_c{c}"), "x", "density", grid.iter().copied().zip(values)));
    }
    Ok(())
}

fn fig3(out: &mut FigureOutput, powers: &[f64], x_max: f64) -> Result<()> {
    let spec = ScenarioSpec::Masses {
        powers: powers.to_vec(),
        multiplicities: vec![100; 3],
        n_samples: 3000,
        haar: true,
        trials: 1,
        seed: out.seed,
    };
    let eigs = sample_eigenvalues(&generate_trial(&spec, 0)?.y)?;
    let h = histogram(&eigs, (x_max * 10.0) as usize, Some((0.0, x_max)))?;
    out.curves.push(Curve::xy("histogram", "x", "density", h.centers().into_iter().zip(h.densities.clone())));
    let model = SpectralModel::from_multiplicities(powers, &[100; 3], 3000)?;
    let grid = density_grid(0.005, x_max, 0.005)?;
    let density = density_from_stieltjes(&model, &grid, 1e-4, &SolverConfig::default())?;
    let clusters = support_clusters_default(&density)?;
    out.metrics.insert("clusters".into(), clusters.count() as f64);
    for (k, iv) in clusters.intervals.iter().enumerate() {
        let inside = eigs.iter().filter(|&&l| l >= iv.lo && l <= iv.hi).count();
        out.metrics.insert(format!("cluster_{}_lo", k + 1), iv.lo);
        out.metrics.insert(format!("cluster_{}_hi", k + 1), iv.hi);
        out.metrics.insert(format!("cluster_{}_eigenvalues", k + 1), inside as f64);
    }
    out.curves.push(Curve::xy("limit_density", "x", "density", density.grid.into_iter().zip(density.values)));
    out.specs.push(spec);
    Ok(())
}

fn spike(out: &mut FigureOutput) -> Result<()> {
    let (n_dim, n_samples) = (500, 400);
    let omegas = vec![2.0, 2.0, 1.0, 1.0];
    let c = n_dim as f64 / n_samples as f64;
    let spec = ScenarioSpec::Spike { n_dim, n_samples, omegas: omegas.clone(), trials: 1, seed: out.seed };
    let eigs = sample_eigenvalues(&generate_trial(&spec, 0)?.y)?;
    let edge = (1.0 + c.sqrt()).powi(2);
    out.metrics.insert("edge".into(), edge);
    out.metrics.insert("above_edge_plus_0.1".into(), eigs.iter().filter(|&&l| l > edge + 0.1).count() as f64);
    let mut limits = Vec::new();
    for w in [2.0, 1.0] {
        let lim = spike_limits(w, c)?;
        out.metrics.insert(format!("rho_omega{w}"), lim.rho);
        limits.push(vec![w, lim.rho, f64::from(u8::from(lim.detectable))]);
    }
    out.curves.push(Curve::new("limits", &["omega", "rho", "detectable"], limits));
    let h = histogram(&eigs, 60, Some((0.0, 6.0)))?;
    out.curves.push(Curve::xy("histogram", "x", "density", h.centers().into_iter().zip(h.densities)));
    let model = SpectralModel::white(c)?;
    let grid = density_grid(0.005, 6.0, 0.005)?;
    let density = density_from_stieltjes(&model, &grid, 1e-4, &SolverConfig::default())?;
    out.curves.push(Curve::xy("limit_density", "x", "density", density.grid.into_iter().zip(density.values)));
    let top = eigs.iter().rev().take(8).enumerate().map(|(k, &l)| vec![(k + 1) as f64, l]).collect();
    out.curves.push(Curve::new("largest_eigenvalues", &["rank", "eigenvalue"], top));
    out.specs.push(spec);
    Ok(())
}

/// The power-estimation scenario at one SNR.
pub fn fig4_spec(snr_db: f64, trials: usize, seed: u64) -> ScenarioSpec {
    ScenarioSpec::IidChannel {
        n_dim: 24,
        n_samples: 128,
        powers: vec![1.0 / 16.0, 0.25, 1.0],
        multiplicities: vec![4, 4, 4],
        snr_db,
        trials,
        seed,
    }
}

/// `(NMSE of P̂₃, NMSE of P̂₃^∞)` in dB at one SNR.
pub fn fig4_point(snr_db: f64, trials: usize, seed: u64) -> Result<(f64, f64)> {
    let spec = fig4_spec(snr_db, trials, seed);
    let s = run_monte_carlo(&spec, &Binding::IidPower)?;
    Ok((nmse_db(&s.column("g_3")?, 1.0), nmse_db(&s.column("classical_3")?, 1.0)))
}

fn fig4(out: &mut FigureOutput) -> Result<()> {
    let (snrs, trials): (Vec<f64>, usize) = match out.scale {
        Scale::Desk => ((-1..=6).map(|k| 5.0 * k as f64).collect(), 2000),
        Scale::Paper => ((-5..=30).map(f64::from).collect(), 10_000),
    };
    let mut g = Vec::new();
    let mut classical = Vec::new();
    for (k, &snr) in snrs.iter().enumerate() {
        let seed = out.seed.wrapping_add(k as u64);
        let (a, b) = fig4_point(snr, trials, seed)?;
        g.push((snr, a));
        classical.push((snr, b));
        out.specs.push(fig4_spec(snr, trials, seed));
        if snr == 15.0 {
            out.metrics.insert("nmse_g_15db".into(), a);
            out.metrics.insert("nmse_classical_15db".into(), b);
        }
    }
    out.curves.push(Curve::xy("nmse_g", "snr_db", "nmse_db", g));
    out.curves.push(Curve::xy("nmse_classical", "snr_db", "nmse_db", classical));
    out.notes.push("NMSE = E[(P - P_hat)^2] / P^2 for P_3 = 1; SNR = 1 / sigma^2".into());
    Ok(())
}

/// The two-source direction-of-arrival scenario.
pub fn fig5_spec(trials: usize, seed: u64) -> ScenarioSpec {
    ScenarioSpec::Doa {
        n_sensors: 20,
        spacing: 1.0,
        n_samples: 150,
        angles_deg: vec![35.0, 37.0],
        snr_db: 10.0,
        trials,
        seed,
    }
}

/// `(MUSIC rate, G-MUSIC rate)` of resolving both sources within `tolerance_deg`.
pub fn fig5_rates(trials: usize, seed: u64, tolerance_deg: f64) -> Result<(f64, f64)> {
    let grid = AngleGrid::full(0.05)?;
    let s = run_monte_carlo(&fig5_spec(trials, seed), &Binding::Doa { grid, tolerance_deg })?;
    Ok((s.mean("music_resolved")?, s.mean("gmusic_resolved")?))
}

fn fig5(out: &mut FigureOutput) -> Result<()> {
    let trials = match out.scale {
        Scale::Desk => 500,
        Scale::Paper => 5000,
    };
    let single = fig5_spec(1, out.seed);
    let y = generate_trial(&single, 0)?.y;
    let model = SteeringModel::ula(20)?;
    let zoom = AngleGrid::new(30.0, 42.0, 0.01)?;
    for method in [DoaMethod::Music, DoaMethod::GMusic] {
        let r = estimate_doa(&y, 2, &model, &zoom, method)?;
        let db = r.cost_curve_db();
        let at = |t: f64| {
            db.iter().min_by(|a, b| (a.0 - t).abs().total_cmp(&(b.0 - t).abs())).map_or(f64::NAN, |p| p.1)
        };
        out.metrics.insert(format!("{method}_cost_db_35"), at(35.0));
        out.metrics.insert(format!("{method}_cost_db_37"), at(37.0));
        out.curves.push(Curve::xy(&format!("cost_{method}"), "theta_deg", "cost_db", db.clone()));
    }
    let (music, gmusic) = fig5_rates(trials, out.seed.wrapping_add(1), 1.0)?;
    out.metrics.insert("music_resolution_rate".into(), music);
    out.metrics.insert("gmusic_resolution_rate".into(), gmusic);
    out.curves.push(Curve::new("resolution", &["music_rate", "gmusic_rate"], vec![vec![music, gmusic]]));
    out.specs.push(single);
    out.specs.push(fig5_spec(trials, out.seed.wrapping_add(1)));
    out.notes.push("uniform linear array at half-wavelength spacing with unit-norm steering vectors".into());
    Ok(())
}

/// Detection statistics under both hypotheses of the ROC scenario.
pub struct RocData {
    pub null_glrt: Vec<f64>,
    pub null_condition: Vec<f64>,
    pub signal_glrt: Vec<f64>,
    pub signal_condition: Vec<f64>,
}

impl RocData {
    /// `(P_D of GLRT, P_D of condition number)` at empirically matched false-alarm rate.
    pub fn detection_at(&self, far: f64) -> Result<(f64, f64)> {
        let tg = empirical_threshold(&self.null_glrt, far)?;
        let tc = empirical_threshold(&self.null_condition, far)?;
        Ok((exceedance_rate(&self.signal_glrt, tg), exceedance_rate(&self.signal_condition, tc)))
    }
}

pub fn roc_data(trials: usize, seed: u64) -> Result<RocData> {
    let spec = |signal, seed| ScenarioSpec::Detection { n_dim: 4, n_samples: 8, snr_db: 0.0, signal, trials, seed };
    let null = run_monte_carlo(&spec(false, seed.wrapping_add(1)), &Binding::Detection)?;
    let sig = run_monte_carlo(&spec(true, seed), &Binding::Detection)?;
    Ok(RocData {
        null_glrt: null.column("glrt")?,
        null_condition: null.column("condition")?,
        signal_glrt: sig.column("glrt")?,
        signal_condition: sig.column("condition")?,
    })
}

fn fig6(out: &mut FigureOutput) -> Result<()> {
    let trials = match out.scale {
        Scale::Desk => 20_000,
        Scale::Paper => 100_000,
    };
    let data = roc_data(trials, out.seed)?;
    let fars: Vec<f64> = (0..=30).map(|k| 10f64.powf(-3.0 + 0.1 * k as f64)).filter(|f| *f < 1.0).collect();
    let mut glrt = Vec::new();
    let mut cond = Vec::new();
    for &far in &fars {
        let (a, b) = data.detection_at(far)?;
        glrt.push((far, a));
        cond.push((far, b));
    }
    let (a, b) = data.detection_at(0.01)?;
    out.metrics.insert("pd_glrt_far0.01".into(), a);
    out.metrics.insert("pd_condition_far0.01".into(), b);
    out.curves.push(Curve::xy("roc_glrt", "far", "pd", glrt));
    out.curves.push(Curve::xy("roc_condition", "far", "pd", cond));
    for (signal, s) in [(false, out.seed.wrapping_add(1)), (true, out.seed)] {
        out.specs.push(ScenarioSpec::Detection { n_dim: 4, n_samples: 8, snr_db: 0.0, signal, trials, seed: s });
    }
    out.notes.push("channel h redrawn per trial; thresholds calibrated on simulated null statistics".into());
    Ok(())
}

/// Kolmogorov–Smirnov distance between a sample and a continuous cdf.
pub fn ks_distance(values: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() as f64;
    v.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / m).abs().max(((i + 1) as f64 / m - f).abs())
        })
        .fold(0.0, f64::max)
}

/// `(KS distance of λ₁, GLRT false-alarm rate at nominal far)` under the null.
pub fn fig7_stats(n_dim: usize, n_samples: usize, trials: usize, seed: u64, far: f64) -> Result<(f64, f64, Vec<f64>)> {
    let table = TracyWidomTable::from_env_or_bundled()?;
    let spec = ScenarioSpec::MpNull { n_dim, n_samples, trials, seed };
    let s = run_monte_carlo(&spec, &Binding::TwStatistic)?;
    let tw = s.column("tw")?;
    let ks = ks_distance(&tw, |x| table.cdf(x));
    let threshold = table.quantile(1.0 - far)?;
    let rate = exceedance_rate(&s.column("glrt_tw")?, threshold);
    Ok((ks, rate, tw))
}

fn fig7(out: &mut FigureOutput) -> Result<()> {
    let (n_dim, n_samples, trials) = match out.scale {
        Scale::Desk => (256, 768, 2000),
        Scale::Paper => (500, 1500, 10_000),
    };
    let (ks, far, tw) = fig7_stats(n_dim, n_samples, trials, out.seed, 0.05)?;
    out.metrics.insert("ks_distance".into(), ks);
    out.metrics.insert("glrt_far_at_0.05".into(), far);
    let h = histogram(&tw, 35, Some((-5.0, 2.0)))?;
    out.curves.push(Curve::xy("histogram", "x", "density", h.centers().into_iter().zip(h.densities)));
    let table = TracyWidomTable::from_env_or_bundled()?;
    let grid = density_grid(-5.0, 2.0, 0.01)?;
    out.curves.push(Curve::xy("tw_density", "x", "density", grid.iter().map(|&x| (x, table.pdf(x)))));
    out.specs.push(ScenarioSpec::MpNull { n_dim, n_samples, trials, seed: out.seed });
    Ok(())
}

/// Detection and localization rates of the failure scenario at one sample size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FailureRates {
    pub n_samples: usize,
    /// `(far, CDR, CLR)`.
    pub rates: Vec<(f64, f64, f64)>,
    pub calibrated: usize,
}

pub fn failure_spec(n_samples: usize, failed: Option<usize>, trials: usize, seed: u64) -> ScenarioSpec {
    ScenarioSpec::Failure {
        n_dim: 10,
        n_params: 10,
        n_samples,
        noise_var: FAILURE_NOISE_VAR,
        alphas: vec![-1.0; 10],
        failed,
        trials,
        seed,
    }
}

/// CDR and CLR for a drop to zero of the first parameter. Detection thresholds come from
/// `null_trials` simulated null statistics; the whitened null covariance is the identity
/// whatever the channel, so the null run only needs independent noise (seed + 1).
pub fn failure_rates(n_samples: usize, trials: usize, null_trials: usize, fars: &[f64], seed: u64) -> Result<FailureRates> {
    let fail = failure_spec(n_samples, Some(0), trials, seed);
    let model = Arc::new(FailureModel::calibrate(&fail, 2000)?);
    let binding = Binding::Failure(model.clone());
    let null = run_monte_carlo(&failure_spec(n_samples, None, null_trials, seed.wrapping_add(1)), &binding)?
        .column("statistic")?;
    let s = run_monte_carlo(&fail, &binding)?;
    let stat = s.column("statistic")?;
    let correct = s.column("correct")?;
    let m = stat.len() as f64;
    let mut rates = Vec::new();
    for &far in fars {
        let t = empirical_threshold(&null, far)?;
        let cdr = stat.iter().filter(|&&v| v > t).count() as f64 / m;
        let clr = stat.iter().zip(&correct).filter(|(v, c)| **v > t && **c == 1.0).count() as f64 / m;
        rates.push((far, cdr, clr));
    }
    Ok(FailureRates { n_samples, rates, calibrated: model.stats.iter().filter(|s| s.is_some()).count() })
}

fn fig8(out: &mut FigureOutput) -> Result<()> {
    let (grid, trials, null_trials): (Vec<usize>, usize, usize) = match out.scale {
        Scale::Desk => (vec![16, 24, 32, 40, 47, 55, 63, 71, 79, 86, 94, 102], 5000, 20_000),
        Scale::Paper => (
            vec![8, 16, 24, 32, 40, 47, 55, 63, 71, 79, 86, 94, 102, 110, 118, 125, 133, 141, 149, 157, 164],
            20_000,
            100_000,
        ),
    };
    let fars = [1e-4, 1e-3, 1e-2];
    let mut cdr: Vec<Vec<(f64, f64)>> = vec![Vec::new(); fars.len()];
    let mut clr: Vec<Vec<(f64, f64)>> = vec![Vec::new(); fars.len()];
    for &n in &grid {
        if n <= 10 {
            out.notes.push(format!(
                "n = {n} skipped: the smallest sample eigenvalue is zero for n <= N, so a variance drop is not observable"
            ));
            continue;
        }
        let r = failure_rates(n, trials, null_trials, &fars, out.seed)?;
        for (j, &(_, d, l)) in r.rates.iter().enumerate() {
            cdr[j].push((n as f64, d));
            clr[j].push((n as f64, l));
        }
        if n == 102 {
            for &(far, d, l) in &r.rates {
                out.metrics.insert(format!("cdr_n102_far{far:e}"), d);
                out.metrics.insert(format!("clr_n102_far{far:e}"), l);
            }
        }
        out.specs.push(failure_spec(n, Some(0), trials, out.seed));
    }
    for (j, far) in fars.iter().enumerate() {
        out.curves.push(Curve::xy(&format!("cdr_far{far:e}"), "n", "rate", cdr[j].clone()));
        out.curves.push(Curve::xy(&format!("clr_far{far:e}"), "n", "rate", clr[j].clone()));
    }
    out.notes.push(format!(
        "network channel with CN(0, 1/N) entries drawn once per seed, noise variance {FAILURE_NOISE_VAR}; \
         detection on the smallest eigenvalue"
    ));
    Ok(())
}
