use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::model::{fit_mle, EncodedDataset, FitConfig, FitResult};
use crate::scalar::Scalar;

/// Refit coefficients from every replicate that converged.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BootstrapResult<T: Scalar> {
    /// One row per converged replicate, ordered by replicate number.
    pub replicates: Matrix<T>,
    /// Replicate number of each row of `replicates`.
    pub replicate_ids: Vec<usize>,
    pub replicate_count_requested: usize,
    pub replicate_count_converged: usize,
    /// Resamples whose response was all 0 or all 1.
    pub dropped_degenerate: usize,
    /// Resamples whose refit failed to converge or hit separation.
    pub dropped_failed: usize,
    pub master_seed: u64,
    pub original_fit: FitResult<T>,
}

impl<T: Scalar> BootstrapResult<T> {
    pub fn column(&self, coefficient_index: usize) -> Vec<T> {
        self.replicates.column(coefficient_index)
    }

    /// Mean of each coefficient over the converged replicates.
    pub fn means(&self) -> Vec<T> {
        let r = T::from_count(self.replicates.rows());
        (0..self.replicates.cols())
            .map(|j| self.column(j).into_iter().sum::<T>() / r)
            .collect()
    }

    /// Sample standard deviation of each coefficient over the replicates.
    pub fn standard_errors(&self) -> Vec<T> {
        let rows = self.replicates.rows();
        if rows < 2 {
            return vec![T::zero(); self.replicates.cols()];
        }
        self.means()
            .into_iter()
            .enumerate()
            .map(|(j, mean)| {
                let ss: T = self
                    .column(j)
                    .into_iter()
                    .map(|v| (v - mean) * (v - mean))
                    .sum();
                (ss / T::from_count(rows - 1)).sqrt()
            })
            .collect()
    }
}

/// Row indices drawn uniformly with replacement for one replicate.
///
/// The stream is ChaCha8 seeded from `master_seed` with stream id
/// `replicate`, so each replicate's draw depends only on its own number.
pub fn resample_indices(n: usize, master_seed: u64, replicate: usize) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(replicate as u64);
    (0..n)
        .map(|_| rng.gen_range(0..n as u64) as usize)
        .collect()
}

enum Outcome<T> {
    Converged(Vec<T>),
    Degenerate,
    Failed,
}

/// Nonparametric case-resampling bootstrap of the full model fit.
///
/// Replicates run in parallel but are assembled by replicate number, so the
/// result is bit-identical for a given `(data, config, replicates, master_seed)`.
/// Replicates with a single-class resampled response or a failed refit are
/// dropped rather than redrawn.
pub fn bootstrap_fit<T: Scalar>(
    data: &EncodedDataset<T>,
    config: &FitConfig<T>,
    replicates: usize,
    master_seed: u64,
) -> Result<BootstrapResult<T>> {
    if replicates == 0 {
        return Err(Error::InvalidConfig("replicates must be at least 1".into()));
    }
    let original_fit = fit_mle(data, config)?;
    if !original_fit.converged {
        return Err(Error::NotConverged {
            iterations: original_fit.iterations,
        });
    }
    let n = data.n_rows();
    let outcomes: Vec<Outcome<T>> = (0..replicates)
        .into_par_iter()
        .map(|b| {
            let indices = resample_indices(n, master_seed, b);
            let sample = data.subset(&indices).expect("resampled indices in range");
            if sample.is_single_class() {
                return Outcome::Degenerate;
            }
            match fit_mle(&sample, config) {
                Ok(fit) if fit.converged && fit.coefficients.iter().all(|c| c.is_finite()) => {
                    Outcome::Converged(fit.coefficients)
                }
                _ => Outcome::Failed,
            }
        })
        .collect();

    let p = data.n_params();
    let mut rows = Vec::new();
    let mut replicate_ids = Vec::new();
    let (mut dropped_degenerate, mut dropped_failed) = (0, 0);
    for (b, outcome) in outcomes.into_iter().enumerate() {
        match outcome {
            Outcome::Converged(coefs) => {
                rows.extend(coefs);
                replicate_ids.push(b);
            }
            Outcome::Degenerate => dropped_degenerate += 1,
            Outcome::Failed => dropped_failed += 1,
        }
    }
    let converged = replicate_ids.len();
    if 2 * converged < replicates {
        return Err(Error::ResamplingInstability {
            converged,
            requested: replicates,
        });
    }
    Ok(BootstrapResult {
        replicates: Matrix::from_row_major(converged, p, rows)?,
        replicate_ids,
        replicate_count_requested: replicates,
        replicate_count_converged: converged,
        dropped_degenerate,
        dropped_failed,
        master_seed,
        original_fit,
    })
}
