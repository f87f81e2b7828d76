//! `rmt`: spectral densities, estimators, detectors and figure reproduction from the shell.
//!
//! Exit status is 0 on success, 2 on a usage error (unknown flag, malformed value) and 1
//! when the computation itself fails.

mod commands;
mod parse;

use clap::{Parser, Subcommand};
use commands::BindingName;
use parse::{AngleGridArg, Counts, Floats, Grid};
use rmt_sim::figures::{FigureId, Scale};
use std::path::PathBuf;
use std::process::ExitCode;

/// Build identifier recorded in manifests.
pub const BUILD: &str = env!("RMT_GIT_DESCRIBE");

#[derive(Debug, Parser)]
#[command(name = "rmt", version, about = "Random-matrix spectral inference")]
struct Cli {
    /// Cap on worker threads for Monte-Carlo work; results do not depend on it.
    #[arg(long, global = true, value_parser = parse::positive_usize)]
    workers: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Marcenko-Pastur density on a grid, as CSV `x,density`.
    MpDensity {
        /// Ratio N/n.
        #[arg(long, value_parser = parse::positive_f64)]
        c: f64,
        /// `lo:hi:step`.
        #[arg(long, default_value = "0:3:0.01")]
        grid: Grid,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Limiting sample-eigenvalue density of a discrete population spectrum.
    Density {
        /// Population eigenvalues, comma separated.
        #[arg(long, value_parser = parse::positive_list, allow_hyphen_values = true)]
        atoms: Floats,
        /// Relative weights of the atoms (normalized); equal weights if omitted.
        #[arg(long, value_parser = parse::positive_list, conflicts_with = "multiplicities")]
        weights: Option<Floats>,
        /// Atom multiplicities; with --n-samples this fixes both the weights and c.
        #[arg(long, value_parser = parse::count_list, requires = "n_samples")]
        multiplicities: Option<Counts>,
        #[arg(long, value_parser = parse::positive_usize)]
        n_samples: Option<usize>,
        /// Ratio N/n, required unless --multiplicities and --n-samples are given.
        #[arg(long, value_parser = parse::positive_f64)]
        c: Option<f64>,
        #[arg(long)]
        grid: Grid,
        /// Distance above the real axis at which the transform is evaluated.
        #[arg(long, default_value_t = 1e-4, value_parser = parse::positive_f64)]
        eps: f64,
        #[arg(long)]
        output: Option<PathBuf>,
        /// Also write the detected support intervals as JSON.
        #[arg(long)]
        clusters: Option<PathBuf>,
    },
    /// Population power estimates from an observation matrix.
    Estimate {
        /// Observation matrix `N x n` (CSV, or the binary format for `.bin`).
        #[arg(long)]
        input: PathBuf,
        /// Cluster sizes from the bottom of the spectrum upwards.
        #[arg(long, value_parser = parse::count_list)]
        multiplicities: Counts,
        #[arg(long, value_enum, default_value_t = commands::EstimateMethod::GEstimator)]
        method: commands::EstimateMethod,
        /// Noise variance, needed by the classical i.i.d.-channel estimator.
        #[arg(long, value_parser = parse::nonnegative_f64)]
        noise_var: Option<f64>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Direction-of-arrival estimation on a uniform linear array.
    Doa {
        #[arg(long)]
        input: PathBuf,
        /// Number of sources K.
        #[arg(long, value_parser = parse::positive_usize)]
        sources: usize,
        #[arg(long, default_value = "gmusic", value_parser = parse::doa_method)]
        method: rmt_inference::doa::Method,
        /// Angle grid in degrees, `lo:hi:step`.
        #[arg(long, default_value = "-90:90:0.05", allow_hyphen_values = true)]
        grid: AngleGridArg,
        /// Sensor spacing in half wavelengths.
        #[arg(long, default_value_t = 1.0, value_parser = parse::positive_f64)]
        spacing: f64,
        #[arg(long)]
        output: Option<PathBuf>,
        /// Also write the cost curve in dB as CSV `theta_deg,cost_db`.
        #[arg(long)]
        curve: Option<PathBuf>,
    },
    /// GLRT signal detection against white noise of unknown variance.
    Detect {
        #[arg(long)]
        input: PathBuf,
        /// Nominal false-alarm rate in (0, 1); H0 is rejected iff the standardized
        /// statistic is strictly greater than the Tracy-Widom (1 - far) quantile.
        #[arg(long, value_parser = parse::probability)]
        far: f64,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Localize a failed parameter of a sensor network.
    Localize {
        /// Observations `y = H theta + sigma w`, `N x n`.
        #[arg(long)]
        input: PathBuf,
        /// Network channel `H`, `N x M`.
        #[arg(long)]
        channel: PathBuf,
        #[arg(long, value_parser = parse::positive_f64)]
        noise_var: f64,
        /// Failure amplitudes alpha_k >= -1: one per parameter, or one shared by all.
        #[arg(long, value_parser = parse::float_list, allow_hyphen_values = true)]
        alphas: Floats,
        #[arg(long, default_value_t = 2000, value_parser = parse::calibration_trials)]
        calibration_trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// The input is already whitened by `(H H^H + sigma^2 I)^{-1/2}`.
        #[arg(long)]
        prewhitened: bool,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Re-run the experiment behind a figure and write its curves and manifest.
    Reproduce {
        #[arg(value_parser = parse::figure_id)]
        figure: FigureId,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value = "desk", value_parser = parse::scale)]
        scale: Scale,
        /// Output directory.
        #[arg(long, default_value = "figures")]
        output: PathBuf,
    },
    /// Run a Monte-Carlo experiment described by a JSON scenario file.
    Simulate {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long, value_enum)]
        binding: BindingName,
        /// Override the scenario seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the number of trials.
        #[arg(long, value_parser = parse::positive_usize)]
        trials: Option<usize>,
        /// Threshold for the spike-count binding.
        #[arg(long, value_parser = parse::finite_f64, allow_hyphen_values = true)]
        threshold: Option<f64>,
        /// Angle grid for the doa binding.
        #[arg(long, default_value = "-90:90:0.05", allow_hyphen_values = true)]
        grid: AngleGridArg,
        /// Per-source tolerance in degrees for the doa binding.
        #[arg(long, default_value_t = 1.0, value_parser = parse::positive_f64)]
        tolerance: f64,
        #[arg(long, default_value_t = 2000, value_parser = parse::calibration_trials)]
        calibration_trials: usize,
        /// Summary JSON; stdout if omitted.
        #[arg(long)]
        output: Option<PathBuf>,
        /// Per-trial values as CSV.
        #[arg(long)]
        records: Option<PathBuf>,
    },
    /// Regenerate the Tracy-Widom table from the Painleve II equation.
    TwTable {
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long, default_value_t = 0.005, value_parser = parse::positive_f64)]
        step: f64,
    },
}

fn run(cli: Cli) -> anyhow::Result<()> {
    use Command::*;
    match cli.command {
        MpDensity { c, grid, output } => commands::mp_density(c, &grid, output.as_deref()),
        Density { atoms, weights, multiplicities, n_samples, c, grid, eps, output, clusters } => {
            let model = commands::density_model(&atoms.0, weights.map(|w| w.0), multiplicities.map(|m| m.0), n_samples, c)?;
            commands::density(&model, &grid, eps, output.as_deref(), clusters.as_deref())
        }
        Estimate { input, multiplicities, method, noise_var, output } => {
            commands::estimate(&input, &multiplicities.0, method, noise_var, output.as_deref())
        }
        Doa { input, sources, method, grid, spacing, output, curve } => {
            commands::doa(&input, sources, method, &grid.0, spacing, output.as_deref(), curve.as_deref())
        }
        Detect { input, far, output } => commands::detect(&input, far, output.as_deref()),
        Localize { input, channel, noise_var, alphas, calibration_trials, seed, prewhitened, output } => {
            let opts = commands::LocalizeOptions { noise_var, alphas: alphas.0, calibration_trials, seed, prewhitened };
            commands::localize(&input, &channel, &opts, output.as_deref())
        }
        Reproduce { figure, seed, scale, output } => commands::reproduce(figure, seed, scale, &output),
        Simulate { spec, binding, seed, trials, threshold, grid, tolerance, calibration_trials, output, records } => {
            let opts = commands::SimulateOptions { seed, trials, threshold, grid: grid.0, tolerance, calibration_trials };
            commands::simulate(&spec, binding, &opts, output.as_deref(), records.as_deref())
        }
        TwTable { output, step } => commands::tw_table(step, output.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.workers {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| run(cli)),
            Err(e) => Err(e.into()),
        },
        None => run(cli),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
