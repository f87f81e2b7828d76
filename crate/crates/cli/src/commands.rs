use crate::parse::Grid;
use crate::BUILD;
use anyhow::{bail, Context, Result};
use clap::ValueEnum;
use rmt_inference::doa::{estimate_doa, AngleGrid, Method as DoaMethod, SteeringModel};
use rmt_inference::gest::{
    classical_estimate, classical_iid_channel, clusters_from_gaps, g_estimate, power_estimate_iid_channel,
};
use rmt_inference::linalg::{
    hermitian_eig, inverse_sqrt, read_binary, read_csv, sample_covariance, sample_eigenvalues, ComplexMatrix,
};
use rmt_inference::spike::painleve::{generate_tw_table, TableConfig};
use rmt_inference::spike::{glrt_test, localize_from_eigen, TracyWidomTable};
use rmt_inference::stieltjes::{density_from_stieltjes, mp_density as mp, support_clusters_default, SolverConfig, SpectralModel};
use rmt_sim::figures::{reproduce as run_figure, write_bundle, FigureId, Scale};
use rmt_sim::{run_monte_carlo, Binding, ColumnAggregate, FailureModel, ScenarioSpec, SeedManifest};
use serde::Serialize;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::sync::Arc;

fn sink(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).with_context(|| format!("creating {}", p.display()))?)),
        None => Box::new(std::io::stdout().lock()),
    })
}

fn write_xy(path: Option<&Path>, header: [&str; 2], rows: impl IntoIterator<Item = (f64, f64)>) -> Result<()> {
    let mut w = csv::Writer::from_writer(sink(path)?);
    w.write_record(header)?;
    for (x, y) in rows {
        w.write_record([format!("{x}"), format!("{y}")])?;
    }
    w.flush()?;
    Ok(())
}

fn write_json<T: Serialize>(path: Option<&Path>, value: &T) -> Result<()> {
    let mut w = sink(path)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn read_matrix(path: &Path) -> Result<ComplexMatrix> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let m = if path.extension().is_some_and(|e| e == "bin") {
        read_binary(std::io::BufReader::new(file))
    } else {
        read_csv(file)
    };
    m.with_context(|| format!("reading matrix {}", path.display()))
}

pub fn mp_density(c: f64, grid: &Grid, output: Option<&Path>) -> Result<()> {
    let xs = grid.points();
    let values = xs.iter().map(|&x| mp(c, x)).collect::<rmt_inference::Result<Vec<_>>>()?;
    write_xy(output, ["x", "density"], xs.into_iter().zip(values))
}

pub fn density_model(
    atoms: &[f64],
    weights: Option<Vec<f64>>,
    multiplicities: Option<Vec<usize>>,
    n_samples: Option<usize>,
    c: Option<f64>,
) -> Result<SpectralModel> {
    if let Some(m) = multiplicities {
        if c.is_some() {
            bail!("--c is implied by --multiplicities and --n-samples");
        }
        let n = n_samples.context("--multiplicities needs --n-samples")?;
        return Ok(SpectralModel::from_multiplicities(atoms, &m, n)?);
    }
    let Some(c) = c else { bail!("give --c, or --multiplicities with --n-samples") };
    let w = weights.unwrap_or_else(|| vec![1.0; atoms.len()]);
    Ok(SpectralModel::normalized(atoms.to_vec(), w, c)?)
}

pub fn density(model: &SpectralModel, grid: &Grid, eps: f64, output: Option<&Path>, clusters: Option<&Path>) -> Result<()> {
    let d = density_from_stieltjes(model, &grid.points(), eps, &SolverConfig::default())?;
    if !d.skipped.is_empty() {
        eprintln!("warning: solver did not converge at {} grid points; they are omitted", d.skipped.len());
    }
    if let Some(path) = clusters {
        write_json(Some(path), &support_clusters_default(&d)?)?;
    }
    write_xy(output, ["x", "density"], d.grid.iter().copied().zip(d.values.iter().copied()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EstimateMethod {
    /// Consistent estimator for the covariance-mixture model.
    #[value(name = "g")]
    GEstimator,
    /// Cluster means of the sample eigenvalues.
    Classical,
    /// Consistent estimator for sources behind i.i.d. Gaussian channels.
    Iid,
    /// Cluster means with the noise variance subtracted (needs --noise-var).
    ClassicalIid,
}

#[derive(Serialize)]
struct EstimateReport {
    method: rmt_inference::gest::Method,
    n_dim: usize,
    n_samples: usize,
    multiplicities: Vec<usize>,
    values: Vec<f64>,
    /// Whether the largest spectral gaps agree with the stated multiplicities.
    gap_consistent: bool,
    warnings: Vec<String>,
}

pub fn estimate(
    input: &Path,
    multiplicities: &[usize],
    method: EstimateMethod,
    noise_var: Option<f64>,
    output: Option<&Path>,
) -> Result<()> {
    let y = read_matrix(input)?;
    let eigs = sample_eigenvalues(&y)?;
    let n = y.cols();
    let gaps = clusters_from_gaps(&eigs, multiplicities)?;
    let clusters = &gaps.assignment;
    let mut est = match method {
        EstimateMethod::GEstimator => {
            let mut e = g_estimate(&eigs, n, clusters)?;
            e.check_separability(clusters)?;
            e
        }
        EstimateMethod::Classical => classical_estimate(&eigs, clusters)?,
        EstimateMethod::Iid => power_estimate_iid_channel(&eigs, n, clusters)?,
        EstimateMethod::ClassicalIid => {
            let s2 = noise_var.context("--method classical-iid needs --noise-var")?;
            classical_iid_channel(&eigs, clusters, s2)?
        }
    };
    if !gaps.gap_consistent {
        est.warnings.push("the largest spectral gaps do not match the stated multiplicities".into());
    }
    let report = EstimateReport {
        method: est.method,
        n_dim: y.rows(),
        n_samples: n,
        multiplicities: clusters.multiplicities(),
        values: est.values,
        gap_consistent: gaps.gap_consistent,
        warnings: est.warnings,
    };
    write_json(output, &report)
}

#[derive(Serialize)]
struct DoaReport {
    method: DoaMethod,
    sources: usize,
    angles_deg: Vec<f64>,
    complete: bool,
}

pub fn doa(
    input: &Path,
    sources: usize,
    method: DoaMethod,
    grid: &AngleGrid,
    spacing: f64,
    output: Option<&Path>,
    curve: Option<&Path>,
) -> Result<()> {
    let y = read_matrix(input)?;
    let model = SteeringModel::new(y.rows(), spacing)?;
    let r = estimate_doa(&y, sources, &model, grid, method)?;
    if !r.complete {
        eprintln!("warning: fewer than {sources} local minima on the grid");
    }
    if let Some(path) = curve {
        write_xy(Some(path), ["theta_deg", "cost_db"], r.cost_curve_db())?;
    }
    write_json(output, &DoaReport { method, sources, angles_deg: r.angles, complete: r.complete })
}

pub fn detect(input: &Path, far: f64, output: Option<&Path>) -> Result<()> {
    let y = read_matrix(input)?;
    let table = TracyWidomTable::from_env_or_bundled()?;
    let eigs = sample_eigenvalues(&y)?;
    let decision = glrt_test(&eigs, y.cols(), far, &table)?;
    #[derive(Serialize)]
    struct Report {
        far: f64,
        n_dim: usize,
        n_samples: usize,
        #[serde(flatten)]
        decision: rmt_inference::spike::GlrtDecision,
    }
    write_json(output, &Report { far, n_dim: y.rows(), n_samples: y.cols(), decision })
}

pub struct LocalizeOptions {
    pub noise_var: f64,
    pub alphas: Vec<f64>,
    pub calibration_trials: usize,
    pub seed: u64,
    pub prewhitened: bool,
}

#[derive(Serialize)]
struct LocalizeReport {
    /// Most likely failed parameter, or null when no hypothesis is detectable.
    index: Option<usize>,
    /// Log-likelihood score per parameter; null where the hypothesis is uncalibrated.
    scores: Vec<Option<f64>>,
    omegas: Vec<f64>,
}

pub fn localize(input: &Path, channel: &Path, opts: &LocalizeOptions, output: Option<&Path>) -> Result<()> {
    let y = read_matrix(input)?;
    let h = read_matrix(channel)?;
    if h.rows() != y.rows() {
        bail!("channel has {} rows but the observations have {}", h.rows(), y.rows());
    }
    let alphas = match opts.alphas.as_slice() {
        [a] => vec![*a; h.cols()],
        a if a.len() == h.cols() => a.to_vec(),
        a => bail!("{} alphas given for {} parameters", a.len(), h.cols()),
    };
    let model =
        FailureModel::from_channel(&h, opts.noise_var, &alphas, y.cols(), opts.calibration_trials, opts.seed)?;
    let white = if opts.prewhitened {
        y
    } else {
        let mut t = h.matmul(&h.adjoint())?.add(&ComplexMatrix::identity(h.rows()).scale(opts.noise_var))?;
        t.symmetrize();
        inverse_sqrt(&t)?.matmul(&y)?
    };
    let eig = hermitian_eig(&sample_covariance(&white)?)?;
    let (hyps, stats): (Vec<_>, Vec<_>) = model
        .hypotheses
        .iter()
        .zip(&model.stats)
        .filter_map(|(h, s)| s.as_ref().map(|s| (h.clone(), s.clone())))
        .unzip();
    let mut scores = vec![None; model.hypotheses.len()];
    let index = if hyps.is_empty() {
        eprintln!("warning: no failure hypothesis is detectable at this sample size");
        None
    } else {
        let loc = localize_from_eigen(&eig, &hyps, &stats)?;
        for (hyp, s) in hyps.iter().zip(&loc.scores) {
            scores[hyp.index] = Some(*s);
        }
        Some(hyps[loc.index].index)
    };
    let omegas = model.hypotheses.iter().map(|h| h.omega).collect();
    write_json(output, &LocalizeReport { index, scores, omegas })
}

pub fn reproduce(figure: FigureId, seed: u64, scale: Scale, dir: &Path) -> Result<()> {
    let out = run_figure(figure, seed, scale)?;
    for path in write_bundle(&out, dir, BUILD)? {
        println!("{}", path.display());
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BindingName {
    Eigenvalues,
    PowerEstimates,
    SpikeCount,
    IidPower,
    Doa,
    Detection,
    TwStatistic,
    Failure,
}

pub struct SimulateOptions {
    pub seed: Option<u64>,
    pub trials: Option<usize>,
    pub threshold: Option<f64>,
    pub grid: AngleGrid,
    pub tolerance: f64,
    pub calibration_trials: usize,
}

#[derive(Serialize)]
struct SimulateReport<'a> {
    spec: &'a ScenarioSpec,
    binding: &'a str,
    columns: &'a [String],
    aggregates: &'a [ColumnAggregate],
    seeds: &'a SeedManifest,
    runtime_secs: f64,
    build: &'a str,
}

pub fn simulate(
    spec_path: &Path,
    binding: BindingName,
    opts: &SimulateOptions,
    output: Option<&Path>,
    records: Option<&Path>,
) -> Result<()> {
    let text = std::fs::read_to_string(spec_path).with_context(|| format!("reading {}", spec_path.display()))?;
    let mut spec: ScenarioSpec = serde_json::from_str(&text).with_context(|| format!("parsing {}", spec_path.display()))?;
    if let Some(s) = opts.seed {
        spec = spec.with_seed(s);
    }
    if let Some(t) = opts.trials {
        spec = spec.with_trials(t);
    }
    spec.validate()?;
    let binding = match binding {
        BindingName::Eigenvalues => Binding::Eigenvalues,
        BindingName::PowerEstimates => Binding::PowerEstimates,
        BindingName::SpikeCount => Binding::SpikeCount {
            threshold: opts.threshold.context("--binding spike-count needs --threshold")?,
        },
        BindingName::IidPower => Binding::IidPower,
        BindingName::Doa => Binding::Doa { grid: opts.grid.clone(), tolerance_deg: opts.tolerance },
        BindingName::Detection => Binding::Detection,
        BindingName::TwStatistic => Binding::TwStatistic,
        BindingName::Failure => Binding::Failure(Arc::new(FailureModel::calibrate(&spec, opts.calibration_trials)?)),
    };
    let s = run_monte_carlo(&spec, &binding)?;
    if let Some(path) = records {
        let mut w = csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
        w.write_record(std::iter::once("trial").chain(s.columns.iter().map(String::as_str)))?;
        for r in &s.records {
            w.write_record(std::iter::once(r.trial.to_string()).chain(r.values.iter().map(|v| format!("{v}"))))?;
        }
        w.flush()?;
    }
    let report = SimulateReport {
        spec: &s.spec,
        binding: &s.binding,
        columns: &s.columns,
        aggregates: &s.aggregates,
        seeds: &s.seeds,
        runtime_secs: s.runtime_secs,
        build: BUILD,
    };
    write_json(output, &report)
}

pub fn tw_table(step: f64, output: Option<&Path>) -> Result<()> {
    let cfg = TableConfig { step, ..TableConfig::default() };
    let table = generate_tw_table(&cfg)?;
    table.write_csv(sink(output)?)?;
    Ok(())
}
