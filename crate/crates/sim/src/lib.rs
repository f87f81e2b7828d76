//! Monte-Carlo scenarios and figure reproduction for `rmt-inference`.

pub mod figures;
pub mod histogram;
pub mod runner;
pub mod scenario;

pub use histogram::{histogram, Histogram};
pub use runner::{aggregate, nmse_db, run_monte_carlo, Binding, ColumnAggregate, FailureModel, McSummary, SeedManifest, TrialRecord};
pub use scenario::{generate_trial, noise_variance, GroundTruth, ScenarioSpec, Trial};

// Compiles and runs the Rust snippets of the guide and the README as doctests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../README.md")]
    mod readme {}
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/spectra.md")]
    mod spectra {}
    #[doc = include_str!("../../../book/src/estimation.md")]
    mod estimation {}
    #[doc = include_str!("../../../book/src/spikes.md")]
    mod spikes {}
    #[doc = include_str!("../../../book/src/failure.md")]
    mod failure {}
    #[doc = include_str!("../../../book/src/doa.md")]
    mod doa {}
    #[doc = include_str!("../../../book/src/simulation.md")]
    mod simulation {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
