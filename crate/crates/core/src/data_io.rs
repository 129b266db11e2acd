//! Observation records, CSV ingestion, design-matrix encoding, and the
//! seeded synthetic-data generator.
//!
//! Coding convention: the reference class of every categorical covariate is
//! 0 (male, employed), and a positive HIV test is 1.
//!
//! Input CSVs need a header row naming `Age`, `Gender` (or `Sex`), `Emp` and
//! `HIV`, matched case-insensitively. Any other column (for example `PMOT`)
//! is read past and reported. Categorical cells must already be numeric 0/1;
//! sources that spell classes out ("M"/"F", "Employed") have to be recoded
//! before loading.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::model::{sigmoid_unchecked, EncodedDataset};
use crate::scalar::Scalar;

/// Design column names in encoding order.
pub const COLUMN_NAMES: [&str; 4] = ["Intercept", "Age", "Emp", "Gender"];

/// Intercept, Age, Emp and Gender log-odds of the default generating model.
pub const REFERENCE_COEFFICIENTS: [f64; 4] = [1.56097, -0.07492, 1.64392, 0.08356];

pub const MAX_AGE: f64 = 130.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ObservationRecord {
    /// Age in years.
    pub age: f64,
    /// 0 = male, 1 = female.
    pub gender: u8,
    /// 0 = employed, 1 = unemployed.
    pub employment: u8,
    /// 0 = negative, 1 = positive.
    pub hiv: u8,
}

impl ObservationRecord {
    pub fn validate(&self) -> Result<()> {
        if !self.age.is_finite() || !(0.0..=MAX_AGE).contains(&self.age) {
            return Err(Error::InvalidDataset(format!(
                "age {} outside [0, {MAX_AGE}]",
                self.age
            )));
        }
        for (name, v) in [
            ("gender", self.gender),
            ("employment", self.employment),
            ("hiv", self.hiv),
        ] {
            if v > 1 {
                return Err(Error::InvalidDataset(format!(
                    "{name} must be 0 or 1, found {v}"
                )));
            }
        }
        Ok(())
    }
}

/// Records read from a CSV plus the header names that were skipped.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadedCsv {
    pub records: Vec<ObservationRecord>,
    pub ignored_columns: Vec<String>,
}

#[derive(Debug, Clone, Copy)]
struct ColumnMap {
    age: usize,
    gender: usize,
    emp: usize,
    hiv: usize,
}

fn resolve_columns(headers: &csv::StringRecord) -> Result<(ColumnMap, Vec<String>)> {
    let find = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim().eq_ignore_ascii_case(name))
    };
    let age = find("Age").ok_or(Error::MissingColumn("Age"))?;
    let gender = find("Gender")
        .or_else(|| find("Sex"))
        .ok_or(Error::MissingColumn("Gender"))?;
    let emp = find("Emp").ok_or(Error::MissingColumn("Emp"))?;
    let hiv = find("HIV").ok_or(Error::MissingColumn("HIV"))?;
    let used = [age, gender, emp, hiv];
    let ignored = headers
        .iter()
        .enumerate()
        .filter(|(i, _)| !used.contains(i))
        .map(|(_, h)| h.trim().to_string())
        .collect();
    Ok((
        ColumnMap {
            age,
            gender,
            emp,
            hiv,
        },
        ignored,
    ))
}

fn parse_binary(row: usize, column: &str, cell: &str) -> Result<u8> {
    let value: f64 = cell.trim().parse().map_err(|_| Error::Parse {
        row,
        column: column.into(),
        message: format!("`{cell}` is not numeric"),
    })?;
    if value == 0.0 {
        Ok(0)
    } else if value == 1.0 {
        Ok(1)
    } else {
        Err(Error::Parse {
            row,
            column: column.into(),
            message: format!("{value} is not 0 or 1"),
        })
    }
}

fn parse_age(row: usize, cell: &str) -> Result<f64> {
    let age: f64 = cell.trim().parse().map_err(|_| Error::Parse {
        row,
        column: "Age".into(),
        message: format!("`{cell}` is not numeric"),
    })?;
    if !age.is_finite() || !(0.0..=MAX_AGE).contains(&age) {
        return Err(Error::Parse {
            row,
            column: "Age".into(),
            message: format!("{age} outside [0, {MAX_AGE}]"),
        });
    }
    Ok(age)
}

/// Parses CSV text. Row numbers in errors count data rows from 1, header excluded.
pub fn read_csv<R: Read>(reader: R) -> Result<LoadedCsv> {
    let mut csv = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = csv.headers()?.clone();
    if headers.is_empty() || headers.iter().all(str::is_empty) {
        return Err(Error::EmptyInput);
    }
    let (cols, ignored_columns) = resolve_columns(&headers)?;
    let mut records = Vec::new();
    for (i, row) in csv.records().enumerate() {
        let row_number = i + 1;
        let row = row?;
        let cell = |idx: usize, name: &str| {
            row.get(idx).ok_or_else(|| Error::Parse {
                row: row_number,
                column: name.into(),
                message: "missing cell".into(),
            })
        };
        records.push(ObservationRecord {
            age: parse_age(row_number, cell(cols.age, "Age")?)?,
            gender: parse_binary(row_number, "Gender", cell(cols.gender, "Gender")?)?,
            employment: parse_binary(row_number, "Emp", cell(cols.emp, "Emp")?)?,
            hiv: parse_binary(row_number, "HIV", cell(cols.hiv, "HIV")?)?,
        });
    }
    if records.is_empty() {
        return Err(Error::EmptyInput);
    }
    Ok(LoadedCsv {
        records,
        ignored_columns,
    })
}

pub fn load_csv(path: impl AsRef<Path>) -> Result<LoadedCsv> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    read_csv(file)
}

/// Writes records with the header `Age,Gender,Emp,HIV`. Ages use the
/// shortest representation that parses back to the same `f64`.
pub fn write_csv<W: Write>(writer: W, records: &[ObservationRecord]) -> Result<()> {
    let mut csv = csv::Writer::from_writer(writer);
    csv.write_record(["Age", "Gender", "Emp", "HIV"])?;
    for r in records {
        csv.write_record([
            r.age.to_string(),
            r.gender.to_string(),
            r.employment.to_string(),
            r.hiv.to_string(),
        ])?;
    }
    csv.flush().map_err(|e| Error::Csv(e.into()))?;
    Ok(())
}

pub fn save_csv(path: impl AsRef<Path>, records: &[ObservationRecord]) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    write_csv(std::io::BufWriter::new(file), records)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Encoded<T> {
    pub dataset: EncodedDataset<T>,
    /// Every record has the same HIV status; fitting will be rejected.
    pub single_class_response: bool,
}

/// Builds the `(Intercept, Age, Emp, Gender)` design matrix, preserving row order.
pub fn encode<T: Scalar>(records: &[ObservationRecord]) -> Result<Encoded<T>> {
    if records.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut data = Vec::with_capacity(records.len() * COLUMN_NAMES.len());
    let mut response = Vec::with_capacity(records.len());
    for r in records {
        r.validate()?;
        data.extend([
            T::one(),
            T::lit(r.age),
            T::from_count(r.employment as usize),
            T::from_count(r.gender as usize),
        ]);
        response.push(T::from_count(r.hiv as usize));
    }
    let design = Matrix::from_row_major(records.len(), COLUMN_NAMES.len(), data)?;
    let dataset = EncodedDataset::new(
        design,
        response,
        COLUMN_NAMES.iter().map(|s| s.to_string()).collect(),
    )?;
    Ok(Encoded {
        single_class_response: dataset.is_single_class(),
        dataset,
    })
}

/// Inverse of [`encode`] for datasets in the canonical four-column layout.
pub fn decode<T: Scalar>(dataset: &EncodedDataset<T>) -> Result<Vec<ObservationRecord>> {
    if dataset.n_params() != COLUMN_NAMES.len() {
        return Err(Error::Dimension {
            expected: COLUMN_NAMES.len(),
            found: dataset.n_params(),
        });
    }
    let flag = |v: T| -> u8 { u8::from(v == T::one()) };
    (0..dataset.n_rows())
        .map(|i| {
            let row = dataset.row(i);
            let record = ObservationRecord {
                age: row[1].as_f64(),
                employment: flag(row[2]),
                gender: flag(row[3]),
                hiv: flag(dataset.response()[i]),
            };
            record.validate()?;
            Ok(record)
        })
        .collect()
}

/// Parameters of the synthetic generator.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationSpec {
    /// Intercept, Age, Emp, Gender in log-odds.
    pub coefficients: [f64; 4],
    pub n: usize,
    pub age_low: f64,
    pub age_high: f64,
    pub p_unemployed: f64,
    pub p_female: f64,
    pub seed: u64,
}

impl Default for SimulationSpec {
    fn default() -> Self {
        Self {
            coefficients: REFERENCE_COEFFICIENTS,
            n: 400,
            age_low: 0.0,
            age_high: 90.0,
            p_unemployed: 0.5,
            p_female: 0.5,
            seed: 0,
        }
    }
}

impl SimulationSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidConfig("n must be at least 1".into()));
        }
        if !(self.age_low < self.age_high) || self.age_low < 0.0 || self.age_high > MAX_AGE {
            return Err(Error::InvalidConfig(format!(
                "age range [{}, {}) must satisfy 0 <= lo < hi <= {MAX_AGE}",
                self.age_low, self.age_high
            )));
        }
        for (name, p) in [
            ("p_unemployed", self.p_unemployed),
            ("p_female", self.p_female),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidConfig(format!("{name} = {p} not in [0, 1]")));
            }
        }
        if let Some(c) = self.coefficients.iter().find(|c| !c.is_finite()) {
            return Err(Error::InvalidConfig(format!("non-finite coefficient {c}")));
        }
        Ok(())
    }
}

/// Draws `spec.n` records from the logistic model.
///
/// Generator: `ChaCha8Rng::seed_from_u64(seed)`; for each record, in order,
/// four uniform `f64` draws `u₁..u₄` in `[0, 1)` give
/// `age = lo + (hi - lo)·u₁`, `emp = [u₂ < p_unemployed]`,
/// `gender = [u₃ < p_female]`, `hiv = [u₄ < sigmoid(η)]`.
pub fn simulate(spec: &SimulationSpec) -> Result<Vec<ObservationRecord>> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let [b0, b_age, b_emp, b_gender] = spec.coefficients;
    let records = (0..spec.n)
        .map(|_| {
            let age = spec.age_low + (spec.age_high - spec.age_low) * rng.gen::<f64>();
            let employment = u8::from(rng.gen::<f64>() < spec.p_unemployed);
            let gender = u8::from(rng.gen::<f64>() < spec.p_female);
            let eta =
                b0 + b_age * age + b_emp * f64::from(employment) + b_gender * f64::from(gender);
            let hiv = u8::from(rng.gen::<f64>() < sigmoid_unchecked(eta));
            ObservationRecord {
                age,
                gender,
                employment,
                hiv,
            }
        })
        .collect();
    Ok(records)
}

/// Deterministic Fisher-Yates permutation of row order.
pub fn shuffled<T: Scalar>(dataset: &EncodedDataset<T>, seed: u64) -> EncodedDataset<T> {
    let mut order: Vec<usize> = (0..dataset.n_rows()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    dataset
        .subset(&order)
        .expect("permutation indices are in range")
}
