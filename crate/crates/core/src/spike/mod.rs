//! Spiked covariance models: isolated eigenvalues, Tracy–Widom fluctuations, detection
//! and localization of rank-one changes.

mod detect;
mod failure;
mod fluctuations;
mod limits;
pub mod painleve;
mod tracy_widom;

pub use detect::{
    condition_number_statistic, empirical_threshold, exceedance_rate, glrt_statistic, glrt_test, tw_standardize,
    tw_standardize_lower, GlrtDecision,
};
pub use failure::{failure_hypotheses, localize_failure, localize_from_eigen, FailureHypothesis, Localization};
pub use fluctuations::{calibrate_fluctuations, signed_spike_limits, FluctuationStats};
pub use limits::{spike_limits, spike_limits_downward, spike_outlier_root, SpikeLimit};
pub use tracy_widom::{tracy_widom, tw_quantile, TracyWidomTable, TABLE_ENV};
