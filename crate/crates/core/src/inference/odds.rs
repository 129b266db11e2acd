use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::FitResult;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OddsEntry<T> {
    pub name: String,
    pub log_odds: T,
    pub odds_ratio: T,
}

/// Odds multiplier for a change of `delta` units in one covariate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScaledOdds<T> {
    pub name: String,
    pub coefficient_index: usize,
    pub delta: T,
    /// `delta * coefficient`.
    pub log_odds: T,
    /// `exp(delta * coefficient)`.
    pub odds_multiplier: T,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OddsReport<T> {
    pub entries: Vec<OddsEntry<T>>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub scaled: Vec<ScaledOdds<T>>,
}

/// `exp(θⱼ)` for every coefficient, plus `exp(c·θⱼ)` for each `(j, c)` in `scaled`.
///
/// For a binary covariate the odds ratio compares class 1 with the reference
/// class 0; for the intercept it is the baseline odds of the all-reference group.
pub fn odds_report<T: Scalar>(fit: &FitResult<T>, scaled: &[(usize, T)]) -> Result<OddsReport<T>> {
    let name = |j: usize| {
        fit.column_names
            .get(j)
            .cloned()
            .unwrap_or_else(|| format!("x{j}"))
    };
    let entries = fit
        .coefficients
        .iter()
        .enumerate()
        .map(|(j, &theta)| OddsEntry {
            name: name(j),
            log_odds: theta,
            odds_ratio: theta.exp(),
        })
        .collect();
    let scaled = scaled
        .iter()
        .map(|&(j, delta)| {
            let theta = *fit.coefficients.get(j).ok_or(Error::IndexOutOfRange {
                index: j,
                len: fit.coefficients.len(),
            })?;
            Ok(ScaledOdds {
                name: name(j),
                coefficient_index: j,
                delta,
                log_odds: delta * theta,
                odds_multiplier: (delta * theta).exp(),
            })
        })
        .collect::<Result<_>>()?;
    Ok(OddsReport { entries, scaled })
}
