//! Robustness checks on a fitted model: refits on growing prefixes of the
//! data, train/holdout classification accuracy, and predicted-probability
//! curves across age for fixed demographic profiles.

use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::dot;
use crate::model::{fit_mle, sigmoid_unchecked, EncodedDataset, FitConfig, FitResult};
use crate::scalar::Scalar;

pub const DEFAULT_SPLIT_SIZES: [usize; 5] = [50, 100, 200, 300, 400];
pub const DEFAULT_THRESHOLD: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SplitEntry<T: Scalar> {
    pub size: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fit: Option<FitResult<T>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// One entry per requested size, ascending.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SplitSampleReport<T: Scalar> {
    pub entries: Vec<SplitEntry<T>>,
}

/// Fits the model on the first `size` rows for each size. A size whose
/// prefix cannot be fitted records the error and the rest still run.
pub fn split_sample_fit<T: Scalar>(
    data: &EncodedDataset<T>,
    sizes: &[usize],
    config: &FitConfig<T>,
) -> Result<SplitSampleReport<T>> {
    if sizes.is_empty() {
        return Err(Error::InvalidConfig("no split sizes given".into()));
    }
    let mut sizes = sizes.to_vec();
    sizes.sort_unstable();
    sizes.dedup();
    if let Some(&bad) = sizes.iter().find(|&&s| s == 0 || s > data.n_rows()) {
        return Err(Error::InvalidConfig(format!(
            "split size {bad} outside 1..={}",
            data.n_rows()
        )));
    }
    let entries = sizes
        .into_par_iter()
        .map(|size| {
            let outcome = data
                .prefix(size)
                .and_then(|prefix| fit_mle(&prefix, config));
            match outcome {
                Ok(fit) => SplitEntry {
                    size,
                    fit: Some(fit),
                    error: None,
                },
                Err(e) => SplitEntry {
                    size,
                    fit: None,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect();
    Ok(SplitSampleReport { entries })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport<T: Scalar> {
    pub train_indices: Vec<usize>,
    pub test_indices: Vec<usize>,
    pub threshold: T,
    pub true_positives: usize,
    pub false_positives: usize,
    pub true_negatives: usize,
    pub false_negatives: usize,
    pub accuracy: T,
}

impl<T: Scalar> ValidationReport<T> {
    pub fn correct(&self) -> usize {
        self.true_positives + self.true_negatives
    }

    pub fn total(&self) -> usize {
        self.true_positives + self.false_positives + self.true_negatives + self.false_negatives
    }
}

/// Classifies each test row as positive when its fitted probability is at
/// least `threshold`, and tallies the confusion counts against the observed
/// response. Rows not in `test_indices` are reported as the training set.
pub fn holdout_validate<T: Scalar>(
    data: &EncodedDataset<T>,
    fit: &FitResult<T>,
    test_indices: &[usize],
    threshold: T,
) -> Result<ValidationReport<T>> {
    if test_indices.is_empty() {
        return Err(Error::EmptyTestSet);
    }
    if fit.n_params() != data.n_params() {
        return Err(Error::Dimension {
            expected: data.n_params(),
            found: fit.n_params(),
        });
    }
    if !(threshold >= T::zero() && threshold <= T::one()) {
        return Err(Error::InvalidConfig(format!(
            "threshold {threshold} not in [0, 1]"
        )));
    }
    let n = data.n_rows();
    let mut test = test_indices.to_vec();
    test.sort_unstable();
    if let Some(&index) = test.iter().find(|&&i| i >= n) {
        return Err(Error::IndexOutOfRange { index, len: n });
    }
    if test.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::InvalidConfig("duplicate test index".into()));
    }

    let (mut tp, mut fp, mut tn, mut fn_) = (0, 0, 0, 0);
    for &i in &test {
        let predicted = sigmoid_unchecked(dot(&fit.coefficients, data.row(i))) >= threshold;
        let observed = data.response()[i] == T::one();
        match (predicted, observed) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, false) => tn += 1,
            (false, true) => fn_ += 1,
        }
    }
    let mut in_test = vec![false; n];
    test.iter().for_each(|&i| in_test[i] = true);
    let train_indices = (0..n).filter(|&i| !in_test[i]).collect();
    let accuracy = T::from_count(tp + tn) / T::from_count(test.len());
    Ok(ValidationReport {
        train_indices,
        test_indices: test,
        threshold,
        true_positives: tp,
        false_positives: fp,
        true_negatives: tn,
        false_negatives: fn_,
        accuracy,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HoldoutOutcome<T: Scalar> {
    pub fit: FitResult<T>,
    pub report: ValidationReport<T>,
}

/// Fits on the first `train_count` rows and validates on the remainder.
pub fn holdout_protocol<T: Scalar>(
    data: &EncodedDataset<T>,
    train_count: usize,
    threshold: T,
    config: &FitConfig<T>,
) -> Result<HoldoutOutcome<T>> {
    if train_count >= data.n_rows() {
        return Err(Error::EmptyTestSet);
    }
    let fit = fit_mle(&data.prefix(train_count)?, config)?;
    if !fit.converged {
        return Err(Error::NotConverged {
            iterations: fit.iterations,
        });
    }
    let test: Vec<usize> = (train_count..data.n_rows()).collect();
    let report = holdout_validate(data, &fit, &test, threshold)?;
    Ok(HoldoutOutcome { fit, report })
}

/// Fixed values for every non-age predictor, evaluated over an age grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupProfile<T> {
    pub name: String,
    pub fixed: Vec<(String, T)>,
    pub age_grid: Vec<T>,
}

/// Names accepted by [`GroupProfile::standard`], in plotting order.
pub const STANDARD_PROFILES: [&str; 4] = ["male-emp", "male-unemp", "female-emp", "female-unemp"];

impl<T: Scalar> GroupProfile<T> {
    pub fn new(name: impl Into<String>, fixed: Vec<(String, T)>, age_grid: Vec<T>) -> Result<Self> {
        let name = name.into();
        if age_grid.is_empty() {
            return Err(Error::InvalidConfig(format!(
                "profile `{name}` has an empty age grid"
            )));
        }
        if age_grid.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidConfig(format!(
                "profile `{name}` age grid is not strictly increasing"
            )));
        }
        Ok(Self {
            name,
            fixed,
            age_grid,
        })
    }

    /// One of the four gender × employment groups named in [`STANDARD_PROFILES`].
    pub fn standard(name: &str, age_grid: Vec<T>) -> Result<Self> {
        let (gender, emp) = match name {
            "male-emp" => (0.0, 0.0),
            "male-unemp" => (0.0, 1.0),
            "female-emp" => (1.0, 0.0),
            "female-unemp" => (1.0, 1.0),
            other => {
                return Err(Error::InvalidConfig(format!(
                    "unknown profile `{other}`; expected one of {}",
                    STANDARD_PROFILES.join(", ")
                )))
            }
        };
        Self::new(
            name,
            vec![
                ("Gender".into(), T::lit(gender)),
                ("Emp".into(), T::lit(emp)),
            ],
            age_grid,
        )
    }
}

/// `from, from + step, ...` up to and including `to`.
pub fn age_grid<T: Scalar>(from: T, to: T, step: T) -> Result<Vec<T>> {
    if !(step > T::zero()) || !(from <= to) || !from.is_finite() || !to.is_finite() {
        return Err(Error::InvalidConfig(format!(
            "age grid needs from <= to and step > 0 (got {from}, {to}, {step})"
        )));
    }
    let count = ((to - from) / step + T::lit(1e-9))
        .floor()
        .to_usize()
        .unwrap_or(0)
        + 1;
    Ok((0..count).map(|i| from + T::from_count(i) * step).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurvePoint<T> {
    pub profile: String,
    pub age: T,
    pub probability: T,
}

/// Long-format `(profile, age, probability)` rows.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurveTable<T> {
    pub points: Vec<CurvePoint<T>>,
}

impl<T: Scalar> CurveTable<T> {
    pub fn profile(&self, name: &str) -> Vec<&CurvePoint<T>> {
        self.points.iter().filter(|p| p.profile == name).collect()
    }

    /// Writes `profile,age,probability` CSV.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut csv = csv::Writer::from_writer(writer);
        csv.write_record(["profile", "age", "probability"])?;
        for p in &self.points {
            csv.write_record([
                p.profile.clone(),
                p.age.to_string(),
                p.probability.to_string(),
            ])?;
        }
        csv.flush().map_err(|e| Error::Csv(e.into()))?;
        Ok(())
    }
}

/// Fitted probability across each profile's age grid.
pub fn probability_curves<T: Scalar>(
    fit: &FitResult<T>,
    profiles: &[GroupProfile<T>],
) -> Result<CurveTable<T>> {
    curves_from_coefficients(&fit.coefficients, &fit.column_names, profiles)
}

/// As [`probability_curves`], for coefficients that did not come from a fit.
/// `column_names[0]` is the intercept; the column named `Age` is swept.
pub fn curves_from_coefficients<T: Scalar>(
    coefficients: &[T],
    column_names: &[String],
    profiles: &[GroupProfile<T>],
) -> Result<CurveTable<T>> {
    if coefficients.len() != column_names.len() {
        return Err(Error::Dimension {
            expected: column_names.len(),
            found: coefficients.len(),
        });
    }
    let age_col = column_names
        .iter()
        .position(|c| c.eq_ignore_ascii_case("Age"))
        .ok_or_else(|| Error::UnknownPredictor("Age".into()))?;

    let mut points = Vec::new();
    for profile in profiles {
        let mut row = vec![T::zero(); coefficients.len()];
        let mut assigned = vec![false; coefficients.len()];
        row[0] = T::one();
        assigned[0] = true;
        assigned[age_col] = true;
        for (name, value) in &profile.fixed {
            let j = column_names
                .iter()
                .position(|c| c.eq_ignore_ascii_case(name))
                .filter(|&j| j != 0 && j != age_col)
                .ok_or_else(|| Error::UnknownPredictor(name.clone()))?;
            row[j] = *value;
            assigned[j] = true;
        }
        if let Some(j) = assigned.iter().position(|a| !a) {
            return Err(Error::MissingPredictor {
                profile: profile.name.clone(),
                predictor: column_names[j].clone(),
            });
        }
        for &age in &profile.age_grid {
            row[age_col] = age;
            points.push(CurvePoint {
                profile: profile.name.clone(),
                age,
                probability: sigmoid_unchecked(dot(coefficients, &row)),
            });
        }
    }
    Ok(CurveTable { points })
}
