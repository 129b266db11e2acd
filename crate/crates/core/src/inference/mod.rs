//! Coefficient uncertainty: case-resampling bootstrap, interval estimators
//! and odds-ratio reporting.

mod bootstrap;
mod intervals;
mod odds;

pub use bootstrap::{bootstrap_fit, resample_indices, BootstrapResult};
pub use intervals::{
    bca_ci, bca_ci_all, bca_interval, bias_correction, jackknife_acceleration,
    jackknife_coefficients, normal_cdf, normal_quantile, percentile_ci, quantile_sorted, wald_ci,
    BcaAdjustment, IntervalEstimate, IntervalMethod, IntervalScale, MIN_BCA_REPLICATES,
    MIN_PERCENTILE_REPLICATES,
};
pub use odds::{odds_report, OddsEntry, OddsReport, ScaledOdds};
