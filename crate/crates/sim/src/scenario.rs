use num_complex::Complex64;
use rmt_inference::doa::{steering_matrix, SteeringModel};
use rmt_inference::linalg::{complex_gaussian, haar_unitary, inverse_sqrt, ComplexMatrix, RngStream};
use rmt_inference::{Error, Result};
use serde::{Deserialize, Serialize};

fn default_spacing() -> f64 {
    1.0
}

fn default_true() -> bool {
    true
}

/// A Monte-Carlo experiment: signal model, dimensions, number of trials and seed.
///
/// Trial `t` draws everything it needs from `RngStream::new(seed, t)`. Quantities fixed for
/// the whole experiment (the failure-model channel) come from the stream `u64::MAX`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ScenarioSpec {
    /// White noise, `T = I`.
    MpNull { n_dim: usize, n_samples: usize, trials: usize, seed: u64 },
    /// `y = U P^{1/2} x` with `P = diag(P_k I_{N_k})` and `U` Haar per trial.
    Masses {
        powers: Vec<f64>,
        multiplicities: Vec<usize>,
        n_samples: usize,
        #[serde(default = "default_true")]
        haar: bool,
        trials: usize,
        seed: u64,
    },
    /// `T = I + Σ ω_i e_i e_iᴴ`; repeat an `ω` for a multiple spike.
    Spike { n_dim: usize, n_samples: usize, omegas: Vec<f64>, trials: usize, seed: u64 },
    /// `y = Σ √P_k H_k x_k + σ w` with `H_k` of size `N × M_k`, entries of variance `1/N`,
    /// redrawn per trial, and `σ² = 10^{-snr/10}`.
    IidChannel {
        n_dim: usize,
        n_samples: usize,
        powers: Vec<f64>,
        multiplicities: Vec<usize>,
        snr_db: f64,
        trials: usize,
        seed: u64,
    },
    /// `y = Σ s(θ_k) x_k + σ w` on a uniform linear array with unit-power sources.
    Doa {
        n_sensors: usize,
        #[serde(default = "default_spacing")]
        spacing: f64,
        n_samples: usize,
        angles_deg: Vec<f64>,
        snr_db: f64,
        trials: usize,
        seed: u64,
    },
    /// `y = h s + σ w` (or `σ w` when `signal` is false), `h` with unit-variance entries
    /// redrawn per trial.
    Detection { n_dim: usize, n_samples: usize, snr_db: f64, signal: bool, trials: usize, seed: u64 },
    /// Whitened sensor network `y = T^{-1/2} (H (I + α_k e_k e_kᴴ) θ + σ w)` with
    /// `T = H Hᴴ + σ² I`. `H` is `N × M` with entries of variance `1/N`, drawn once per
    /// experiment. `failed = None` gives the nominal model.
    Failure {
        n_dim: usize,
        n_params: usize,
        n_samples: usize,
        noise_var: f64,
        alphas: Vec<f64>,
        failed: Option<usize>,
        trials: usize,
        seed: u64,
    },
}

fn bad(msg: impl Into<String>) -> Error {
    Error::Parameter(msg.into())
}

fn snr_to_noise_var(snr_db: f64) -> f64 {
    10f64.powf(-snr_db / 10.0)
}

impl ScenarioSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            ScenarioSpec::MpNull { .. } => "mp-null",
            ScenarioSpec::Masses { .. } => "masses",
            ScenarioSpec::Spike { .. } => "spike",
            ScenarioSpec::IidChannel { .. } => "iid-channel",
            ScenarioSpec::Doa { .. } => "doa",
            ScenarioSpec::Detection { .. } => "detection",
            ScenarioSpec::Failure { .. } => "failure",
        }
    }

    pub fn trials(&self) -> usize {
        match *self {
            ScenarioSpec::MpNull { trials, .. }
            | ScenarioSpec::Masses { trials, .. }
            | ScenarioSpec::Spike { trials, .. }
            | ScenarioSpec::IidChannel { trials, .. }
            | ScenarioSpec::Doa { trials, .. }
            | ScenarioSpec::Detection { trials, .. }
            | ScenarioSpec::Failure { trials, .. } => trials,
        }
    }

    pub fn seed(&self) -> u64 {
        match *self {
            ScenarioSpec::MpNull { seed, .. }
            | ScenarioSpec::Masses { seed, .. }
            | ScenarioSpec::Spike { seed, .. }
            | ScenarioSpec::IidChannel { seed, .. }
            | ScenarioSpec::Doa { seed, .. }
            | ScenarioSpec::Detection { seed, .. }
            | ScenarioSpec::Failure { seed, .. } => seed,
        }
    }

    /// Same scenario with a different trial count.
    pub fn with_trials(&self, n: usize) -> Self {
        let mut s = self.clone();
        match &mut s {
            ScenarioSpec::MpNull { trials, .. }
            | ScenarioSpec::Masses { trials, .. }
            | ScenarioSpec::Spike { trials, .. }
            | ScenarioSpec::IidChannel { trials, .. }
            | ScenarioSpec::Doa { trials, .. }
            | ScenarioSpec::Detection { trials, .. }
            | ScenarioSpec::Failure { trials, .. } => *trials = n,
        }
        s
    }

    /// Same scenario with a different seed.
    pub fn with_seed(&self, new: u64) -> Self {
        let mut s = self.clone();
        match &mut s {
            ScenarioSpec::MpNull { seed, .. }
            | ScenarioSpec::Masses { seed, .. }
            | ScenarioSpec::Spike { seed, .. }
            | ScenarioSpec::IidChannel { seed, .. }
            | ScenarioSpec::Doa { seed, .. }
            | ScenarioSpec::Detection { seed, .. }
            | ScenarioSpec::Failure { seed, .. } => *seed = new,
        }
        s
    }

    /// Sensor count `N`.
    pub fn n_dim(&self) -> usize {
        match self {
            ScenarioSpec::MpNull { n_dim, .. }
            | ScenarioSpec::Spike { n_dim, .. }
            | ScenarioSpec::IidChannel { n_dim, .. }
            | ScenarioSpec::Detection { n_dim, .. }
            | ScenarioSpec::Failure { n_dim, .. } => *n_dim,
            ScenarioSpec::Masses { multiplicities, .. } => multiplicities.iter().sum(),
            ScenarioSpec::Doa { n_sensors, .. } => *n_sensors,
        }
    }

    pub fn n_samples(&self) -> usize {
        match *self {
            ScenarioSpec::MpNull { n_samples, .. }
            | ScenarioSpec::Masses { n_samples, .. }
            | ScenarioSpec::Spike { n_samples, .. }
            | ScenarioSpec::IidChannel { n_samples, .. }
            | ScenarioSpec::Doa { n_samples, .. }
            | ScenarioSpec::Detection { n_samples, .. }
            | ScenarioSpec::Failure { n_samples, .. } => n_samples,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_dim() == 0 || self.n_samples() == 0 {
            return Err(bad("dimensions must be at least one"));
        }
        if self.trials() == 0 {
            return Err(bad("at least one trial is required"));
        }
        let positive = |v: &[f64], what: &str| {
            if v.is_empty() || v.iter().any(|&p| !(p > 0.0 && p.is_finite())) {
                Err(bad(format!("{what} must be a nonempty list of positive numbers")))
            } else {
                Ok(())
            }
        };
        match self {
            ScenarioSpec::MpNull { .. } => Ok(()),
            ScenarioSpec::Masses { powers, multiplicities, .. } => {
                positive(powers, "powers")?;
                if powers.len() != multiplicities.len() || multiplicities.contains(&0) {
                    return Err(bad("each power needs a positive multiplicity"));
                }
                Ok(())
            }
            ScenarioSpec::Spike { n_dim, omegas, .. } => {
                if omegas.len() > *n_dim || omegas.iter().any(|&w| !(w > -1.0 && w.is_finite())) {
                    return Err(bad("spikes must number at most N and satisfy omega > -1"));
                }
                Ok(())
            }
            ScenarioSpec::IidChannel { n_dim, powers, multiplicities, snr_db, .. } => {
                positive(powers, "powers")?;
                if powers.len() != multiplicities.len() || multiplicities.contains(&0) {
                    return Err(bad("each power needs a positive multiplicity"));
                }
                if multiplicities.iter().sum::<usize>() > *n_dim {
                    return Err(bad("total transmit antennas M may not exceed N"));
                }
                if !snr_db.is_finite() {
                    return Err(bad("SNR must be finite"));
                }
                Ok(())
            }
            ScenarioSpec::Doa { n_sensors, spacing, angles_deg, snr_db, .. } => {
                SteeringModel::new(*n_sensors, *spacing)?;
                if angles_deg.len() >= *n_sensors || angles_deg.iter().any(|a| !(a.abs() <= 90.0)) {
                    return Err(bad("need fewer sources than sensors, with angles in [-90, 90]"));
                }
                if !snr_db.is_finite() {
                    return Err(bad("SNR must be finite"));
                }
                Ok(())
            }
            ScenarioSpec::Detection { snr_db, .. } => {
                if !snr_db.is_finite() {
                    return Err(bad("SNR must be finite"));
                }
                Ok(())
            }
            ScenarioSpec::Failure { n_params, noise_var, alphas, failed, .. } => {
                if *n_params == 0 || alphas.len() != *n_params {
                    return Err(bad("need one alpha per parameter"));
                }
                if alphas.iter().any(|&a| !(a >= -1.0 && a.is_finite())) {
                    return Err(bad("alphas must be at least -1"));
                }
                if !(*noise_var > 0.0 && noise_var.is_finite()) {
                    return Err(bad("noise variance must be positive"));
                }
                if failed.is_some_and(|k| k >= *n_params) {
                    return Err(bad("failed index out of range"));
                }
                Ok(())
            }
        }
    }

    /// The network channel of a failure scenario, shared by all trials.
    pub fn failure_channel(&self) -> Result<ComplexMatrix> {
        match self {
            ScenarioSpec::Failure { n_dim, n_params, seed, .. } => {
                let mut rng = RngStream::new(*seed, u64::MAX);
                Ok(complex_gaussian(*n_dim, *n_params, &mut rng).scale(1.0 / (*n_dim as f64).sqrt()))
            }
            _ => Err(bad("not a failure scenario")),
        }
    }
}

/// What a trial was generated from, sufficient to rebuild its population covariance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum GroundTruth {
    MpNull { n_dim: usize },
    Masses { powers: Vec<f64>, multiplicities: Vec<usize>, unitary: ComplexMatrix },
    Spike { n_dim: usize, omegas: Vec<f64> },
    IidChannel { powers: Vec<f64>, multiplicities: Vec<usize>, noise_var: f64, channel: ComplexMatrix },
    Doa { n_sensors: usize, spacing: f64, angles_deg: Vec<f64>, noise_var: f64 },
    Detection { noise_var: f64, channel: Option<Vec<Complex64>>, n_dim: usize },
    Failure { failed: Option<usize>, alpha: f64, noise_var: f64, channel: ComplexMatrix },
}

fn diag_expand(values: &[f64], counts: &[usize]) -> Vec<f64> {
    values.iter().zip(counts).flat_map(|(&v, &k)| std::iter::repeat_n(v, k)).collect()
}

fn covariance_of(factor: &ComplexMatrix) -> Result<ComplexMatrix> {
    let mut t = factor.matmul(&factor.adjoint())?;
    t.symmetrize();
    Ok(t)
}

impl GroundTruth {
    /// `E[y yᴴ]`, rebuilt from the record alone.
    pub fn population_covariance(&self) -> Result<ComplexMatrix> {
        match self {
            GroundTruth::MpNull { n_dim } => Ok(ComplexMatrix::identity(*n_dim)),
            GroundTruth::Masses { powers, multiplicities, unitary } => {
                let p = ComplexMatrix::from_real_diagonal(&diag_expand(powers, multiplicities));
                let mut t = unitary.matmul(&p)?.matmul(&unitary.adjoint())?;
                t.symmetrize();
                Ok(t)
            }
            GroundTruth::Spike { n_dim, omegas } => {
                let mut d = vec![1.0; *n_dim];
                d.iter_mut().zip(omegas).for_each(|(x, w)| *x += w);
                Ok(ComplexMatrix::from_real_diagonal(&d))
            }
            GroundTruth::IidChannel { powers, multiplicities, noise_var, channel } => {
                let p = ComplexMatrix::from_real_diagonal(&diag_expand(powers, multiplicities));
                let n = channel.rows();
                let mut t = channel
                    .matmul(&p)?
                    .matmul(&channel.adjoint())?
                    .add(&ComplexMatrix::identity(n).scale(*noise_var))?;
                t.symmetrize();
                Ok(t)
            }
            GroundTruth::Doa { n_sensors, spacing, angles_deg, noise_var } => {
                let s = steering_matrix(&SteeringModel::new(*n_sensors, *spacing)?, angles_deg);
                let mut t = s.matmul(&s.adjoint())?.add(&ComplexMatrix::identity(*n_sensors).scale(*noise_var))?;
                t.symmetrize();
                Ok(t)
            }
            GroundTruth::Detection { noise_var, channel, n_dim } => {
                let mut t = ComplexMatrix::identity(*n_dim).scale(*noise_var);
                if let Some(h) = channel {
                    let hh = ComplexMatrix::from_fn(*n_dim, *n_dim, |i, j| h[i] * h[j].conj());
                    t = t.add(&hh)?;
                }
                t.symmetrize();
                Ok(t)
            }
            GroundTruth::Failure { failed, alpha, noise_var, channel } => {
                let (n, m) = (channel.rows(), channel.cols());
                let t = covariance_of(&channel)?.add(&ComplexMatrix::identity(n).scale(*noise_var))?;
                let w = inverse_sqrt(&t)?;
                let mut d = vec![1.0; m];
                if let Some(k) = failed {
                    d[*k] = (1.0 + alpha).powi(2);
                }
                let hd = channel.matmul(&ComplexMatrix::from_real_diagonal(&d))?.matmul(&channel.adjoint())?;
                let inner = hd.add(&ComplexMatrix::identity(n).scale(*noise_var))?;
                let mut out = w.matmul(&inner)?.matmul(&w)?;
                out.symmetrize();
                Ok(out)
            }
        }
    }
}

/// One draw: observations `y = A z` for a standard complex Gaussian `z`, the ground truth,
/// and the generating factor `A` (so that `E[y yᴴ] = A Aᴴ`).
#[derive(Debug, Clone)]
pub struct Trial {
    pub y: ComplexMatrix,
    pub truth: GroundTruth,
    pub factor: ComplexMatrix,
}

/// Generates trial `index` of `spec`.
pub fn generate_trial(spec: &ScenarioSpec, index: u64) -> Result<Trial> {
    spec.validate()?;
    let mut rng = RngStream::new(spec.seed(), index);
    let n = spec.n_samples();
    let big_n = spec.n_dim();
    let (factor, truth) = match spec {
        ScenarioSpec::MpNull { n_dim, .. } => (ComplexMatrix::identity(*n_dim), GroundTruth::MpNull { n_dim: *n_dim }),
        ScenarioSpec::Masses { powers, multiplicities, haar, .. } => {
            let unitary = if *haar { haar_unitary(big_n, &mut rng) } else { ComplexMatrix::identity(big_n) };
            let roots: Vec<f64> = diag_expand(powers, multiplicities).iter().map(|p| p.sqrt()).collect();
            let factor = unitary.matmul(&ComplexMatrix::from_real_diagonal(&roots))?;
            let truth = GroundTruth::Masses { powers: powers.clone(), multiplicities: multiplicities.clone(), unitary };
            (factor, truth)
        }
        ScenarioSpec::Spike { n_dim, omegas, .. } => {
            let mut d = vec![1.0; *n_dim];
            d.iter_mut().zip(omegas).for_each(|(x, w)| *x = (1.0 + w).sqrt());
            (ComplexMatrix::from_real_diagonal(&d), GroundTruth::Spike { n_dim: *n_dim, omegas: omegas.clone() })
        }
        ScenarioSpec::IidChannel { powers, multiplicities, snr_db, .. } => {
            let m: usize = multiplicities.iter().sum();
            let noise_var = snr_to_noise_var(*snr_db);
            let channel = complex_gaussian(big_n, m, &mut rng).scale(1.0 / (big_n as f64).sqrt());
            let roots: Vec<f64> = diag_expand(powers, multiplicities).iter().map(|p| p.sqrt()).collect();
            let sigma = noise_var.sqrt();
            let factor = ComplexMatrix::from_fn(big_n, m + big_n, |i, j| {
                if j < m {
                    channel.get(i, j) * roots[j]
                } else if j - m == i {
                    Complex64::new(sigma, 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            });
            let truth = GroundTruth::IidChannel {
                powers: powers.clone(),
                multiplicities: multiplicities.clone(),
                noise_var,
                channel,
            };
            (factor, truth)
        }
        ScenarioSpec::Doa { n_sensors, spacing, angles_deg, snr_db, .. } => {
            let model = SteeringModel::new(*n_sensors, *spacing)?;
            let s = steering_matrix(&model, angles_deg);
            let noise_var = snr_to_noise_var(*snr_db);
            let k = angles_deg.len();
            let sigma = noise_var.sqrt();
            let factor = ComplexMatrix::from_fn(big_n, k + big_n, |i, j| {
                if j < k {
                    s.get(i, j)
                } else if j - k == i {
                    Complex64::new(sigma, 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            });
            let truth = GroundTruth::Doa {
                n_sensors: *n_sensors,
                spacing: *spacing,
                angles_deg: angles_deg.clone(),
                noise_var,
            };
            (factor, truth)
        }
        ScenarioSpec::Detection { n_dim, snr_db, signal, .. } => {
            let noise_var = snr_to_noise_var(*snr_db);
            let sigma = noise_var.sqrt();
            let h = if *signal { Some(complex_gaussian(*n_dim, 1, &mut rng).into_vec()) } else { None };
            let lead = usize::from(*signal);
            let factor = ComplexMatrix::from_fn(*n_dim, lead + n_dim, |i, j| match (&h, j) {
                (Some(h), 0) => h[i],
                _ if j - lead == i => Complex64::new(sigma, 0.0),
                _ => Complex64::new(0.0, 0.0),
            });
            (factor, GroundTruth::Detection { noise_var, channel: h, n_dim: *n_dim })
        }
        ScenarioSpec::Failure { n_params, noise_var, alphas, failed, .. } => {
            let channel = spec.failure_channel()?;
            let m = *n_params;
            let t = covariance_of(&channel)?.add(&ComplexMatrix::identity(big_n).scale(*noise_var))?;
            let w = inverse_sqrt(&t)?;
            let mut d = vec![1.0; m];
            let alpha = failed.map_or(0.0, |k| alphas[k]);
            if let Some(k) = failed {
                d[*k] = 1.0 + alpha;
            }
            let sigma = noise_var.sqrt();
            let raw = ComplexMatrix::from_fn(big_n, m + big_n, |i, j| {
                if j < m {
                    channel.get(i, j) * d[j]
                } else if j - m == i {
                    Complex64::new(sigma, 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            });
            let factor = w.matmul(&raw)?;
            (factor, GroundTruth::Failure { failed: *failed, alpha, noise_var: *noise_var, channel })
        }
    };
    let z = complex_gaussian(factor.cols(), n, &mut rng);
    let y = factor.matmul(&z)?;
    Ok(Trial { y, truth, factor })
}

/// `σ²` for an SNR given in dB, SNR being `σ⁻²`.
pub fn noise_variance(snr_db: f64) -> f64 {
    snr_to_noise_var(snr_db)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn all_kinds() -> Vec<ScenarioSpec> {
        vec![
            ScenarioSpec::MpNull { n_dim: 5, n_samples: 9, trials: 1, seed: 1 },
            ScenarioSpec::Masses {
                powers: vec![1.0, 3.0],
                multiplicities: vec![2, 3],
                n_samples: 11,
                haar: true,
                trials: 1,
                seed: 2,
            },
            ScenarioSpec::Spike { n_dim: 6, n_samples: 12, omegas: vec![2.0, 2.0, -0.5], trials: 1, seed: 3 },
            ScenarioSpec::IidChannel {
                n_dim: 6,
                n_samples: 20,
                powers: vec![0.5, 1.0],
                multiplicities: vec![2, 2],
                snr_db: 10.0,
                trials: 1,
                seed: 4,
            },
            ScenarioSpec::Doa {
                n_sensors: 5,
                spacing: 1.0,
                n_samples: 8,
                angles_deg: vec![-10.0, 30.0],
                snr_db: 5.0,
                trials: 1,
                seed: 5,
            },
            ScenarioSpec::Detection { n_dim: 4, n_samples: 8, snr_db: 0.0, signal: true, trials: 1, seed: 6 },
            ScenarioSpec::Failure {
                n_dim: 4,
                n_params: 4,
                n_samples: 30,
                noise_var: 0.5,
                alphas: vec![-1.0; 4],
                failed: Some(1),
                trials: 1,
                seed: 7,
            },
        ]
    }

    #[test]
    fn population_covariance_matches_generator() {
        for spec in all_kinds() {
            let trial = generate_trial(&spec, 3).unwrap();
            assert_eq!((trial.y.rows(), trial.y.cols()), (spec.n_dim(), spec.n_samples()));
            let from_truth = trial.truth.population_covariance().unwrap();
            let from_factor = covariance_of(&trial.factor).unwrap();
            let diff = from_truth.add(&from_factor.scale(-1.0)).unwrap().max_abs();
            assert!(diff < 1e-12, "{}: {diff:e}", spec.kind());
        }
    }

    #[test]
    fn trials_are_reproducible() {
        for spec in all_kinds() {
            let a = generate_trial(&spec, 7).unwrap();
            let b = generate_trial(&spec, 7).unwrap();
            let c = generate_trial(&spec, 8).unwrap();
            assert_eq!(a.y, b.y);
            assert_ne!(a.y, c.y);
        }
    }

    #[test]
    fn validation_rejects_bad_specs() {
        let bad = [
            ScenarioSpec::MpNull { n_dim: 0, n_samples: 9, trials: 1, seed: 1 },
            ScenarioSpec::MpNull { n_dim: 3, n_samples: 9, trials: 0, seed: 1 },
            ScenarioSpec::Masses {
                powers: vec![1.0],
                multiplicities: vec![2, 3],
                n_samples: 4,
                haar: true,
                trials: 1,
                seed: 1,
            },
            ScenarioSpec::Failure {
                n_dim: 4,
                n_params: 2,
                n_samples: 30,
                noise_var: 0.5,
                alphas: vec![-2.0, 0.0],
                failed: None,
                trials: 1,
                seed: 7,
            },
        ];
        for spec in bad {
            assert!(generate_trial(&spec, 0).is_err(), "{spec:?}");
        }
    }

    #[test]
    fn json_round_trip_uses_kind_tag() {
        let spec = &all_kinds()[4];
        let text = serde_json::to_string(spec).unwrap();
        assert!(text.contains("\"kind\":\"doa\""));
        let back: ScenarioSpec = serde_json::from_str(&text).unwrap();
        assert_eq!(&back, spec);
        let minimal: ScenarioSpec = serde_json::from_str(
            r#"{"kind":"doa","n_sensors":4,"n_samples":9,"angles_deg":[0],"snr_db":0,"trials":2,"seed":1}"#,
        )
        .unwrap();
        assert!(matches!(minimal, ScenarioSpec::Doa { spacing, .. } if spacing == 1.0));
    }
}
