use crate::scenario::{generate_trial, GroundTruth, ScenarioSpec};
use rayon::prelude::*;
use rmt_inference::doa::{estimate_doa_from_eigen, AngleGrid, Method as DoaMethod, SteeringModel};
use rmt_inference::gest::{classical_estimate, classical_iid_channel, g_estimate, power_estimate_iid_channel, ClusterAssignment};
use rmt_inference::linalg::{hermitian_eig, sample_covariance, sample_eigenvalues, ComplexMatrix};
use rmt_inference::spike::{
    calibrate_fluctuations, condition_number_statistic, failure_hypotheses, glrt_statistic, localize_from_eigen,
    tw_standardize, tw_standardize_lower, FailureHypothesis, FluctuationStats,
};
use rmt_inference::{Error, Result};
use serde::{Deserialize, Serialize};
use std::sync::Arc;
use std::time::Instant;

/// Hypotheses and their fluctuation calibrations for a failure experiment.
///
/// A hypothesis whose spike is not detectable at the working `(N, n)` has no calibration and
/// is never selected.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FailureModel {
    pub hypotheses: Vec<FailureHypothesis>,
    pub stats: Vec<Option<FluctuationStats>>,
}

impl FailureModel {
    /// Builds one hypothesis per parameter from the scenario channel and calibrates each
    /// with `calibration_trials` draws.
    pub fn calibrate(spec: &ScenarioSpec, calibration_trials: usize) -> Result<Self> {
        let ScenarioSpec::Failure { n_samples, noise_var, alphas, seed, .. } = spec else {
            return Err(Error::Parameter("failure model needs a failure scenario".into()));
        };
        Self::from_channel(&spec.failure_channel()?, *noise_var, alphas, *n_samples, calibration_trials, *seed)
    }

    /// Same as [`FailureModel::calibrate`] for an explicit `N x M` channel. Hypotheses whose
    /// spike is below the detectability threshold are kept but left uncalibrated.
    pub fn from_channel(
        h: &ComplexMatrix,
        noise_var: f64,
        alphas: &[f64],
        n_samples: usize,
        calibration_trials: usize,
        seed: u64,
    ) -> Result<Self> {
        if !(noise_var > 0.0 && noise_var.is_finite()) {
            return Err(Error::Parameter(format!("noise variance must be positive, got {noise_var}")));
        }
        let n_dim = h.rows();
        let mut t = h.matmul(&h.adjoint())?.add(&ComplexMatrix::identity(n_dim).scale(noise_var))?;
        t.symmetrize();
        let hypotheses = failure_hypotheses(h, &t, alphas)?;
        let stats = hypotheses
            .iter()
            .map(|hyp| {
                let stream_seed = seed ^ (0xca1 + hyp.index as u64);
                match calibrate_fluctuations(hyp.omega, n_dim, n_samples, calibration_trials, stream_seed) {
                    Ok(s) => Ok(Some(s)),
                    Err(Error::Regime(_)) => Ok(None),
                    Err(e) => Err(e),
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { hypotheses, stats })
    }

    /// Index of the most likely hypothesis, or `None` if none is calibrated.
    pub fn localize(&self, eig: &rmt_inference::linalg::HermitianEigen) -> Result<Option<usize>> {
        let (hyps, stats): (Vec<_>, Vec<_>) = self
            .hypotheses
            .iter()
            .zip(&self.stats)
            .filter_map(|(h, s)| s.as_ref().map(|s| (h.clone(), s.clone())))
            .unzip();
        if hyps.is_empty() {
            return Ok(None);
        }
        let loc = localize_from_eigen(eig, &hyps, &stats)?;
        Ok(Some(hyps[loc.index].index))
    }
}

/// The statistic computed from each trial.
#[derive(Debug, Clone)]
pub enum Binding {
    /// All sample eigenvalues, ascending.
    Eigenvalues,
    /// Classical and G-estimates of the population masses.
    PowerEstimates,
    /// Number of sample eigenvalues strictly above `threshold`, and the two largest.
    SpikeCount { threshold: f64 },
    /// G-estimates and classical estimates of the source powers behind i.i.d. channels.
    IidPower,
    /// MUSIC and G-MUSIC resolution with a per-source tolerance in degrees.
    Doa { grid: AngleGrid, tolerance_deg: f64 },
    /// GLRT and condition-number statistics.
    Detection,
    /// Largest eigenvalue, and the GLRT statistic, centred and scaled at the Tracy–Widom edge.
    TwStatistic,
    /// Smallest-eigenvalue detection statistic and localized index.
    Failure(Arc<FailureModel>),
}

impl Binding {
    pub fn name(&self) -> &'static str {
        match self {
            Binding::Eigenvalues => "eigenvalues",
            Binding::PowerEstimates => "power-estimates",
            Binding::SpikeCount { .. } => "spike-count",
            Binding::IidPower => "iid-power",
            Binding::Doa { .. } => "doa",
            Binding::Detection => "detection",
            Binding::TwStatistic => "tw-statistic",
            Binding::Failure(_) => "failure",
        }
    }

    fn check(&self, spec: &ScenarioSpec) -> Result<()> {
        let ok = match self {
            Binding::Eigenvalues | Binding::SpikeCount { .. } => true,
            Binding::PowerEstimates => matches!(spec, ScenarioSpec::Masses { .. }),
            Binding::IidPower => matches!(spec, ScenarioSpec::IidChannel { .. }),
            Binding::Doa { .. } => matches!(spec, ScenarioSpec::Doa { .. }),
            Binding::Detection => matches!(spec, ScenarioSpec::Detection { .. } | ScenarioSpec::MpNull { .. }),
            Binding::TwStatistic => matches!(spec, ScenarioSpec::MpNull { .. }),
            Binding::Failure(_) => matches!(spec, ScenarioSpec::Failure { .. }),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Parameter(format!(
                "binding `{}` does not apply to a `{}` scenario",
                self.name(),
                spec.kind()
            )))
        }
    }

    fn columns(&self, spec: &ScenarioSpec) -> Vec<String> {
        fn k_named(prefix: &'static str, k: usize) -> impl Iterator<Item = String> {
            (1..=k).map(move |i| format!("{prefix}_{i}"))
        }
        match (self, spec) {
            (Binding::Eigenvalues, _) => k_named("lambda", spec.n_dim()).collect(),
            (Binding::PowerEstimates, ScenarioSpec::Masses { powers, .. })
            | (Binding::IidPower, ScenarioSpec::IidChannel { powers, .. }) => {
                let k = powers.len();
                k_named("classical", k).chain(k_named("g", k)).collect()
            }
            (Binding::SpikeCount { .. }, _) => vec!["above".into(), "lambda_max".into(), "lambda_second".into()],
            (Binding::Doa { .. }, ScenarioSpec::Doa { angles_deg, .. }) => {
                let k = angles_deg.len();
                ["music_resolved".to_string(), "gmusic_resolved".to_string()]
                    .into_iter()
                    .chain(k_named("music_err", k))
                    .chain(k_named("gmusic_err", k))
                    .collect()
            }
            (Binding::Detection, _) => vec!["glrt".into(), "condition".into()],
            (Binding::TwStatistic, _) => vec!["tw".into(), "glrt_tw".into()],
            (Binding::Failure(_), _) => vec!["statistic".into(), "localized".into(), "correct".into()],
            _ => unreachable!("checked by Binding::check"),
        }
    }

    fn evaluate(&self, spec: &ScenarioSpec, index: u64) -> Result<Vec<f64>> {
        let trial = generate_trial(spec, index)?;
        let big_n = spec.n_dim();
        let n = spec.n_samples();
        let c = big_n as f64 / n as f64;
        match self {
            Binding::Eigenvalues => sample_eigenvalues(&trial.y),
            Binding::PowerEstimates => {
                let ScenarioSpec::Masses { multiplicities, .. } = spec else { unreachable!() };
                let eigs = sample_eigenvalues(&trial.y)?;
                let clusters = ClusterAssignment::from_multiplicities(multiplicities, big_n)?;
                let mut out = classical_estimate(&eigs, &clusters)?.values;
                out.extend(g_estimate(&eigs, n, &clusters)?.values);
                Ok(out)
            }
            Binding::SpikeCount { threshold } => {
                let eigs = sample_eigenvalues(&trial.y)?;
                let above = eigs.iter().filter(|&&l| l > *threshold).count() as f64;
                let top = eigs[big_n - 1];
                let second = if big_n > 1 { eigs[big_n - 2] } else { f64::NAN };
                Ok(vec![above, top, second])
            }
            Binding::IidPower => {
                let GroundTruth::IidChannel { multiplicities, noise_var, .. } = &trial.truth else { unreachable!() };
                let eigs = sample_eigenvalues(&trial.y)?;
                let clusters = ClusterAssignment::from_multiplicities(multiplicities, big_n)?;
                let mut out = classical_iid_channel(&eigs, &clusters, *noise_var)?.values;
                out.extend(power_estimate_iid_channel(&eigs, n, &clusters)?.values);
                Ok(out)
            }
            Binding::Doa { grid, tolerance_deg } => {
                let ScenarioSpec::Doa { n_sensors, spacing, angles_deg, .. } = spec else { unreachable!() };
                let model = SteeringModel::new(*n_sensors, *spacing)?;
                let eig = hermitian_eig(&sample_covariance(&trial.y)?)?;
                let mut truth = angles_deg.clone();
                truth.sort_by(f64::total_cmp);
                let k = truth.len();
                let mut flags = Vec::with_capacity(2);
                let mut errors = Vec::with_capacity(2 * k);
                for method in [DoaMethod::Music, DoaMethod::GMusic] {
                    let r = estimate_doa_from_eigen(&eig, n, k, &model, grid, method)?;
                    let errs: Vec<f64> = (0..k)
                        .map(|j| if r.complete { (r.angles[j] - truth[j]).abs() } else { 180.0 })
                        .collect();
                    flags.push(if errs.iter().all(|e| *e < *tolerance_deg) { 1.0 } else { 0.0 });
                    errors.extend(errs);
                }
                flags.extend(errors);
                Ok(flags)
            }
            Binding::Detection => {
                let eigs = sample_eigenvalues(&trial.y)?;
                Ok(vec![glrt_statistic(&eigs)?, condition_number_statistic(&eigs)?])
            }
            Binding::TwStatistic => {
                let eigs = sample_eigenvalues(&trial.y)?;
                let glrt = glrt_statistic(&eigs)?;
                Ok(vec![tw_standardize(eigs[big_n - 1], big_n, c), tw_standardize(glrt, big_n, c)])
            }
            Binding::Failure(model) => {
                let GroundTruth::Failure { failed, .. } = &trial.truth else { unreachable!() };
                let eig = hermitian_eig(&sample_covariance(&trial.y)?)?;
                let statistic = tw_standardize_lower(eig.values[0], big_n, c)?;
                let localized = model.localize(&eig)?;
                let correct = matches!((localized, failed), (Some(a), Some(b)) if a == *b);
                Ok(vec![
                    statistic,
                    localized.map_or(-1.0, |k| k as f64),
                    if correct { 1.0 } else { 0.0 },
                ])
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: u64,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnAggregate {
    pub name: String,
    pub count: usize,
    pub mean: f64,
    /// Unbiased; zero for a single trial.
    pub variance: f64,
    pub min: f64,
    pub max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedManifest {
    pub seed: u64,
    pub trials: usize,
    pub rule: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McSummary {
    pub spec: ScenarioSpec,
    pub binding: String,
    pub columns: Vec<String>,
    pub records: Vec<TrialRecord>,
    pub aggregates: Vec<ColumnAggregate>,
    pub runtime_secs: f64,
    pub seeds: SeedManifest,
}

/// Column statistics in trial order, so the result does not depend on scheduling.
pub fn aggregate(columns: &[String], records: &[TrialRecord]) -> Vec<ColumnAggregate> {
    columns
        .iter()
        .enumerate()
        .map(|(j, name)| {
            let count = records.len();
            let mean = records.iter().map(|r| r.values[j]).sum::<f64>() / count as f64;
            let variance = if count > 1 {
                records.iter().map(|r| (r.values[j] - mean).powi(2)).sum::<f64>() / (count - 1) as f64
            } else {
                0.0
            };
            let min = records.iter().map(|r| r.values[j]).fold(f64::INFINITY, f64::min);
            let max = records.iter().map(|r| r.values[j]).fold(f64::NEG_INFINITY, f64::max);
            ColumnAggregate { name: name.clone(), count, mean, variance, min, max }
        })
        .collect()
}

impl McSummary {
    pub fn recompute(&self) -> Vec<ColumnAggregate> {
        aggregate(&self.columns, &self.records)
    }

    fn index(&self, name: &str) -> Result<usize> {
        self.columns
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| Error::Parameter(format!("no column `{name}` in a `{}` summary", self.binding)))
    }

    pub fn column(&self, name: &str) -> Result<Vec<f64>> {
        let j = self.index(name)?;
        Ok(self.records.iter().map(|r| r.values[j]).collect())
    }

    pub fn mean(&self, name: &str) -> Result<f64> {
        Ok(self.aggregates[self.index(name)?].mean)
    }
}

/// Runs every trial of `spec` through `binding` on the current rayon pool.
pub fn run_monte_carlo(spec: &ScenarioSpec, binding: &Binding) -> Result<McSummary> {
    spec.validate()?;
    binding.check(spec)?;
    let start = Instant::now();
    let columns = binding.columns(spec);
    let records: Vec<TrialRecord> = (0..spec.trials() as u64)
        .into_par_iter()
        .map(|t| binding.evaluate(spec, t).map(|values| TrialRecord { trial: t, values }))
        .collect::<Result<_>>()?;
    let aggregates = aggregate(&columns, &records);
    Ok(McSummary {
        spec: spec.clone(),
        binding: binding.name().into(),
        columns,
        records,
        aggregates,
        runtime_secs: start.elapsed().as_secs_f64(),
        seeds: SeedManifest {
            seed: spec.seed(),
            trials: spec.trials(),
            rule: "trial t draws from ChaCha8 stream t of the seed".into(),
        },
    })
}

/// `E[(P̂ - P)²] / P²` in dB.
pub fn nmse_db(estimates: &[f64], truth: f64) -> f64 {
    let mse = estimates.iter().map(|e| (e - truth).powi(2)).sum::<f64>() / estimates.len() as f64;
    10.0 * (mse / (truth * truth)).log10()
}
