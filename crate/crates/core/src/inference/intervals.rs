//! Wald, percentile and bias-corrected accelerated (BCa) intervals.
//!
//! Empirical quantiles use linear interpolation between order statistics:
//! for `R` sorted values and probability `q`, the quantile sits at 0-based
//! position `q·(R-1)`. Percentile and BCa endpoints both go through
//! [`quantile_sorted`].

use rayon::prelude::*;
use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal};

use super::bootstrap::BootstrapResult;
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::model::{fit_mle, EncodedDataset, FitConfig, FitResult};
use crate::scalar::Scalar;

pub const MIN_PERCENTILE_REPLICATES: usize = 100;
pub const MIN_BCA_REPLICATES: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum IntervalMethod {
    Wald,
    Percentile,
    Bca,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum IntervalScale {
    LogOdds,
    Odds,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntervalEstimate<T: Scalar> {
    pub coefficient_index: usize,
    pub method: IntervalMethod,
    pub level: T,
    pub lower: T,
    pub upper: T,
    pub scale: IntervalScale,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
}

impl<T: Scalar> IntervalEstimate<T> {
    /// The same interval with both bounds exponentiated.
    pub fn to_odds_scale(&self) -> Self {
        match self.scale {
            IntervalScale::Odds => self.clone(),
            IntervalScale::LogOdds => Self {
                lower: self.lower.exp(),
                upper: self.upper.exp(),
                scale: IntervalScale::Odds,
                ..self.clone()
            },
        }
    }

    pub fn contains(&self, value: T) -> bool {
        self.lower <= value && value <= self.upper
    }
}

pub fn normal_cdf(x: f64) -> f64 {
    Normal::standard().cdf(x)
}

pub fn normal_quantile(p: f64) -> f64 {
    Normal::standard().inverse_cdf(p)
}

fn check_level<T: Scalar>(level: T) -> Result<f64> {
    let level = level.as_f64();
    if level > 0.0 && level < 1.0 {
        Ok(level)
    } else {
        Err(Error::InvalidConfig(format!("level {level} not in (0, 1)")))
    }
}

/// Interpolated quantile of ascending-sorted values.
pub fn quantile_sorted<T: Scalar>(sorted: &[T], q: f64) -> T {
    assert!(!sorted.is_empty(), "quantile of empty sample");
    let q = q.clamp(0.0, 1.0);
    let h = q * (sorted.len() - 1) as f64;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    let frac = T::lit(h - lo as f64);
    sorted[lo] + frac * (sorted[hi] - sorted[lo])
}

fn sorted_column<T: Scalar>(result: &BootstrapResult<T>, index: usize) -> Result<Vec<T>> {
    if index >= result.replicates.cols() {
        return Err(Error::IndexOutOfRange {
            index,
            len: result.replicates.cols(),
        });
    }
    let mut column = result.column(index);
    column.sort_by(|a, b| a.partial_cmp(b).expect("replicates are finite"));
    Ok(column)
}

fn require_replicates(available: usize, required: usize) -> Result<()> {
    if available < required {
        Err(Error::InsufficientReplicates {
            required,
            available,
        })
    } else {
        Ok(())
    }
}

/// `θ̂ⱼ ± z·seⱼ` for every coefficient, with `z` the normal quantile at `(1 + level)/2`.
pub fn wald_ci<T: Scalar>(fit: &FitResult<T>, level: T) -> Result<Vec<IntervalEstimate<T>>> {
    if !fit.converged {
        return Err(Error::NotConverged {
            iterations: fit.iterations,
        });
    }
    let z = T::lit(normal_quantile((1.0 + check_level(level)?) / 2.0));
    Ok(fit
        .coefficients
        .iter()
        .zip(&fit.standard_errors)
        .enumerate()
        .map(|(j, (&theta, &se))| IntervalEstimate {
            coefficient_index: j,
            method: IntervalMethod::Wald,
            level,
            lower: theta - z * se,
            upper: theta + z * se,
            scale: IntervalScale::LogOdds,
            warning: None,
        })
        .collect())
}

/// Empirical `(1 - level)/2` and `(1 + level)/2` quantiles of one replicate column.
pub fn percentile_ci<T: Scalar>(
    result: &BootstrapResult<T>,
    coefficient_index: usize,
    level: T,
) -> Result<IntervalEstimate<T>> {
    let lvl = check_level(level)?;
    require_replicates(result.replicates.rows(), MIN_PERCENTILE_REPLICATES)?;
    let column = sorted_column(result, coefficient_index)?;
    Ok(percentile_from_sorted(
        &column,
        coefficient_index,
        level,
        lvl,
    ))
}

fn percentile_from_sorted<T: Scalar>(
    sorted: &[T],
    coefficient_index: usize,
    level: T,
    lvl: f64,
) -> IntervalEstimate<T> {
    IntervalEstimate {
        coefficient_index,
        method: IntervalMethod::Percentile,
        level,
        lower: quantile_sorted(sorted, (1.0 - lvl) / 2.0),
        upper: quantile_sorted(sorted, (1.0 + lvl) / 2.0),
        scale: IntervalScale::LogOdds,
        warning: None,
    }
}

/// Bias correction `z₀` and acceleration `a` of a BCa interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BcaAdjustment<T> {
    pub bias_correction: T,
    pub acceleration: T,
}

impl<T: Scalar> BcaAdjustment<T> {
    pub fn zero() -> Self {
        Self {
            bias_correction: T::zero(),
            acceleration: T::zero(),
        }
    }

    /// Quantile probability that replaces the nominal tail probability `alpha`.
    /// `None` when the mapping breaks down (`1 - a(z₀ + z_α) ≤ 0`).
    pub fn adjusted_probability(&self, alpha: f64) -> Option<f64> {
        let z0 = self.bias_correction.as_f64();
        let a = self.acceleration.as_f64();
        if z0 == 0.0 && a == 0.0 {
            return Some(alpha);
        }
        let shifted = z0 + normal_quantile(alpha);
        let denom = 1.0 - a * shifted;
        if !(denom > 0.0) {
            return None;
        }
        Some(normal_cdf(z0 + shifted / denom))
    }
}

/// `Φ⁻¹` of the fraction of replicates strictly below the original estimate.
/// `None` when that fraction is 0 or 1.
pub fn bias_correction<T: Scalar>(replicates: &[T], original: T) -> Option<T> {
    if replicates.is_empty() {
        return None;
    }
    let below = replicates.iter().filter(|&&v| v < original).count();
    if below == 0 || below == replicates.len() {
        return None;
    }
    Some(T::lit(normal_quantile(
        below as f64 / replicates.len() as f64,
    )))
}

/// Skewness-based acceleration from leave-one-out estimates:
/// `a = Σ(θ̄ - θ₍ᵢ₎)³ / (6·[Σ(θ̄ - θ₍ᵢ₎)²]^{3/2})`, zero when all estimates coincide.
pub fn jackknife_acceleration<T: Scalar>(leave_one_out: &[T]) -> T {
    if leave_one_out.is_empty() {
        return T::zero();
    }
    let mean = leave_one_out.iter().copied().sum::<T>() / T::from_count(leave_one_out.len());
    let (mut s2, mut s3) = (T::zero(), T::zero());
    for &v in leave_one_out {
        let d = mean - v;
        s2 = s2 + d * d;
        s3 = s3 + d * d * d;
    }
    if s2 <= T::zero() {
        return T::zero();
    }
    s3 / (T::lit(6.0) * s2.powf(T::lit(1.5)))
}

/// Coefficients refit with each row left out in turn. Rows whose removal
/// leaves an unfittable dataset are skipped.
pub fn jackknife_coefficients<T: Scalar>(
    data: &EncodedDataset<T>,
    config: &FitConfig<T>,
) -> Result<Matrix<T>> {
    let n = data.n_rows();
    let fits: Vec<Option<Vec<T>>> = (0..n)
        .into_par_iter()
        .map(|left_out| {
            let keep: Vec<usize> = (0..n).filter(|&i| i != left_out).collect();
            let sample = data.subset(&keep).ok()?;
            match fit_mle(&sample, config) {
                Ok(fit) if fit.converged => Some(fit.coefficients),
                _ => None,
            }
        })
        .collect();
    let rows: Vec<Vec<T>> = fits.into_iter().flatten().collect();
    if rows.len() < 2 {
        return Err(Error::InvalidDataset(
            "fewer than two leave-one-out refits succeeded".into(),
        ));
    }
    Matrix::from_rows(&rows)
}

/// BCa interval from a replicate column and a given adjustment.
///
/// With `z₀ = a = 0` the endpoints are exactly the percentile endpoints.
/// If the adjusted mapping breaks down the percentile interval is returned
/// with a warning.
pub fn bca_interval<T: Scalar>(
    replicates: &[T],
    adjustment: &BcaAdjustment<T>,
    coefficient_index: usize,
    level: T,
) -> Result<IntervalEstimate<T>> {
    let lvl = check_level(level)?;
    require_replicates(replicates.len(), MIN_BCA_REPLICATES)?;
    let mut sorted = replicates.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("replicates are finite"));
    let lower_p = adjustment.adjusted_probability((1.0 - lvl) / 2.0);
    let upper_p = adjustment.adjusted_probability((1.0 + lvl) / 2.0);
    match (lower_p, upper_p) {
        (Some(lo), Some(hi)) => Ok(IntervalEstimate {
            coefficient_index,
            method: IntervalMethod::Bca,
            level,
            lower: quantile_sorted(&sorted, lo),
            upper: quantile_sorted(&sorted, hi),
            scale: IntervalScale::LogOdds,
            warning: None,
        }),
        _ => Ok(fallback(
            percentile_from_sorted(&sorted, coefficient_index, level, lvl),
            "acceleration too large for the BCa mapping; percentile interval reported",
        )),
    }
}

fn fallback<T: Scalar>(mut interval: IntervalEstimate<T>, why: &str) -> IntervalEstimate<T> {
    interval.method = IntervalMethod::Bca;
    interval.warning = Some(why.to_string());
    interval
}

fn bca_from_jackknife<T: Scalar>(
    result: &BootstrapResult<T>,
    jackknife: &Matrix<T>,
    coefficient_index: usize,
    level: T,
) -> Result<IntervalEstimate<T>> {
    let lvl = check_level(level)?;
    require_replicates(result.replicates.rows(), MIN_BCA_REPLICATES)?;
    let column = sorted_column(result, coefficient_index)?;
    let original = result.original_fit.coefficients[coefficient_index];
    let Some(z0) = bias_correction(&column, original) else {
        return Ok(fallback(
            percentile_from_sorted(&column, coefficient_index, level, lvl),
            "all replicates fall on one side of the original estimate; percentile interval reported",
        ));
    };
    let adjustment = BcaAdjustment {
        bias_correction: z0,
        acceleration: jackknife_acceleration(&jackknife.column(coefficient_index)),
    };
    bca_interval(&column, &adjustment, coefficient_index, level)
}

/// BCa interval for one coefficient. Runs a full leave-one-out jackknife;
/// use [`bca_ci_all`] to share it across coefficients.
pub fn bca_ci<T: Scalar>(
    result: &BootstrapResult<T>,
    data: &EncodedDataset<T>,
    config: &FitConfig<T>,
    coefficient_index: usize,
    level: T,
) -> Result<IntervalEstimate<T>> {
    check_level(level)?;
    require_replicates(result.replicates.rows(), MIN_BCA_REPLICATES)?;
    let jackknife = jackknife_coefficients(data, config)?;
    bca_from_jackknife(result, &jackknife, coefficient_index, level)
}

pub fn bca_ci_all<T: Scalar>(
    result: &BootstrapResult<T>,
    data: &EncodedDataset<T>,
    config: &FitConfig<T>,
    level: T,
) -> Result<Vec<IntervalEstimate<T>>> {
    check_level(level)?;
    require_replicates(result.replicates.rows(), MIN_BCA_REPLICATES)?;
    let jackknife = jackknife_coefficients(data, config)?;
    (0..result.replicates.cols())
        .map(|j| bca_from_jackknife(result, &jackknife, j, level))
        .collect()
}
