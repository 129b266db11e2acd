//! Binary logistic regression fitted by Newton-Raphson maximum likelihood,
//! with bootstrap (percentile, BCa) and Wald intervals, odds-ratio reports,
//! split-sample refits and holdout validation.
//!
//! Numeric code is generic over [`Scalar`] (`f32` or `f64`); the aliases at
//! the crate root fix it to `f64`, which is what the CLI uses.
//!
//! ```
//! use logitboot::{data_io, model, FitConfig};
//!
//! let spec = data_io::SimulationSpec { n: 400, seed: 7, ..Default::default() };
//! let records = data_io::simulate(&spec).unwrap();
//! let data = data_io::encode::<f64>(&records).unwrap().dataset;
//! let fit = model::fit_mle(&data, &FitConfig::default()).unwrap();
//! assert!(fit.converged);
//! ```

// `!(a < b)` comparisons are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod data_io;
pub mod error;
pub mod inference;
pub mod linalg;
pub mod model;
pub mod scalar;
pub mod validation;

pub use error::{Error, Result};
pub use linalg::Matrix;
pub use scalar::Scalar;

pub type EncodedDataset = model::EncodedDataset<f64>;
pub type FitConfig = model::FitConfig<f64>;
pub type FitResult = model::FitResult<f64>;
pub type BootstrapResult = inference::BootstrapResult<f64>;
pub type IntervalEstimate = inference::IntervalEstimate<f64>;
pub type OddsReport = inference::OddsReport<f64>;
pub type SplitSampleReport = validation::SplitSampleReport<f64>;
pub type ValidationReport = validation::ValidationReport<f64>;
pub type GroupProfile = validation::GroupProfile<f64>;
pub type CurveTable = validation::CurveTable<f64>;

pub type EncodedDataset32 = model::EncodedDataset<f32>;
pub type FitConfig32 = model::FitConfig<f32>;
pub type FitResult32 = model::FitResult<f32>;
