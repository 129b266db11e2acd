//! Logit link algebra, the Bernoulli log-likelihood and its derivatives, and
//! the Newton-Raphson maximum-likelihood fitter.
//!
//! Coefficients are in log-odds units and the fitted probability for a row
//! `x` is `1 / (1 + exp(-x·θ))`. Column 0 of every design matrix is the
//! intercept.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{dot, Cholesky, Matrix};
use crate::scalar::Scalar;

/// Fitting aborts once any coefficient grows past this magnitude.
pub const MAX_COEFFICIENT_MAGNITUDE: f64 = 30.0;
/// Fitting aborts once the information matrix condition estimate exceeds this.
pub const MAX_INFORMATION_CONDITION: f64 = 1e12;
/// Step-halving attempts before a non-ascending Newton step is accepted anyway.
pub const MAX_STEP_HALVINGS: usize = 10;
/// A Newton step larger than this at a point whose score is already below
/// tolerance means the likelihood is still climbing toward an infinite
/// maximizer, which only happens under (quasi-)separation.
pub const SEPARATION_STEP_THRESHOLD: f64 = 1e-2;

/// Design matrix with an intercept column paired with a 0/1 response.
#[derive(Debug, Clone, PartialEq)]
pub struct EncodedDataset<T> {
    design: Matrix<T>,
    response: Vec<T>,
    column_names: Vec<String>,
}

impl<T: Scalar> EncodedDataset<T> {
    /// Validates and wraps a design matrix and response.
    ///
    /// Requires at least one row, an all-ones first column, finite design
    /// entries, a 0/1 response and one name per column. Row-count versus
    /// parameter-count identifiability is checked by [`fit_mle`].
    pub fn new(design: Matrix<T>, response: Vec<T>, column_names: Vec<String>) -> Result<Self> {
        if design.rows() == 0 {
            return Err(Error::InvalidDataset("no rows".into()));
        }
        if design.cols() == 0 {
            return Err(Error::InvalidDataset("no columns".into()));
        }
        if response.len() != design.rows() {
            return Err(Error::Dimension {
                expected: design.rows(),
                found: response.len(),
            });
        }
        if column_names.len() != design.cols() {
            return Err(Error::Dimension {
                expected: design.cols(),
                found: column_names.len(),
            });
        }
        for (i, row) in design.row_iter().enumerate() {
            if row[0] != T::one() {
                return Err(Error::InvalidDataset(format!(
                    "row {i}: intercept column must be 1"
                )));
            }
            if let Some(j) = row.iter().position(|v| !v.is_finite()) {
                return Err(Error::InvalidDataset(format!(
                    "row {i}, column {j}: non-finite design entry"
                )));
            }
        }
        if let Some(i) = response
            .iter()
            .position(|&y| y != T::zero() && y != T::one())
        {
            return Err(Error::InvalidDataset(format!(
                "row {i}: response must be 0 or 1, found {}",
                response[i]
            )));
        }
        Ok(Self {
            design,
            response,
            column_names,
        })
    }

    pub fn design(&self) -> &Matrix<T> {
        &self.design
    }

    pub fn response(&self) -> &[T] {
        &self.response
    }

    pub fn column_names(&self) -> &[String] {
        &self.column_names
    }

    pub fn n_rows(&self) -> usize {
        self.design.rows()
    }

    pub fn n_params(&self) -> usize {
        self.design.cols()
    }

    pub fn row(&self, i: usize) -> &[T] {
        self.design.row(i)
    }

    pub fn positives(&self) -> usize {
        self.response.iter().filter(|&&y| y == T::one()).count()
    }

    /// True when every response is the same class.
    pub fn is_single_class(&self) -> bool {
        let ones = self.positives();
        ones == 0 || ones == self.n_rows()
    }

    /// Rows at `indices` (repeats allowed), in the given order.
    pub fn subset(&self, indices: &[usize]) -> Result<Self> {
        if let Some(&index) = indices.iter().find(|&&i| i >= self.n_rows()) {
            return Err(Error::IndexOutOfRange {
                index,
                len: self.n_rows(),
            });
        }
        if indices.is_empty() {
            return Err(Error::InvalidDataset("empty subset".into()));
        }
        Ok(Self {
            design: self.design.select_rows(indices),
            response: indices.iter().map(|&i| self.response[i]).collect(),
            column_names: self.column_names.clone(),
        })
    }

    /// The first `size` rows.
    pub fn prefix(&self, size: usize) -> Result<Self> {
        if size == 0 || size > self.n_rows() {
            return Err(Error::InvalidConfig(format!(
                "prefix size {size} outside 1..={}",
                self.n_rows()
            )));
        }
        let indices: Vec<usize> = (0..size).collect();
        self.subset(&indices)
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.column_names
            .iter()
            .position(|c| c.eq_ignore_ascii_case(name))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitConfig<T> {
    pub max_iterations: usize,
    /// Convergence threshold on the largest absolute score component.
    pub tolerance: T,
    /// Starting coefficients; zeros when `None`.
    pub initial_coefficients: Option<Vec<T>>,
}

impl<T: Scalar> Default for FitConfig<T> {
    fn default() -> Self {
        Self {
            max_iterations: 25,
            tolerance: T::lit(1e-8),
            initial_coefficients: None,
        }
    }
}

impl<T: Scalar> FitConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if self.max_iterations == 0 {
            return Err(Error::InvalidConfig(
                "max_iterations must be at least 1".into(),
            ));
        }
        if !(self.tolerance > T::zero()) || !self.tolerance.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "tolerance must be positive and finite, got {}",
                self.tolerance
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitResult<T: Scalar> {
    pub column_names: Vec<String>,
    pub coefficients: Vec<T>,
    pub standard_errors: Vec<T>,
    pub covariance: Matrix<T>,
    pub log_likelihood: T,
    /// `-2 * log_likelihood`.
    pub deviance: T,
    pub iterations: usize,
    pub converged: bool,
    /// Largest absolute score component at `coefficients`.
    pub max_abs_score: T,
}

impl<T: Scalar> FitResult<T> {
    pub fn n_params(&self) -> usize {
        self.coefficients.len()
    }

    pub fn predict_probability(&self, row: &[T]) -> Result<T> {
        Ok(sigmoid_unchecked(linear_predictor(
            &self.coefficients,
            row,
        )?))
    }
}

fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::Dimension { expected, found })
    }
}

/// `η = x·θ` for one design row.
pub fn linear_predictor<T: Scalar>(coefficients: &[T], row: &[T]) -> Result<T> {
    check_len(coefficients.len(), row.len())?;
    Ok(dot(coefficients, row))
}

/// Logistic function `1 / (1 + e^-η)`.
///
/// Only ever exponentiates a non-positive argument. The result is clamped to
/// the open unit interval, so it stays strictly inside `(0, 1)` even where the
/// exact value rounds to 0 or 1.
pub fn sigmoid<T: Scalar>(eta: T) -> Result<T> {
    if !eta.is_finite() {
        return Err(Error::Domain {
            operation: "sigmoid",
            value: eta.as_f64(),
        });
    }
    Ok(sigmoid_unchecked(eta))
}

#[inline]
pub(crate) fn sigmoid_unchecked<T: Scalar>(eta: T) -> T {
    let p = if eta >= T::zero() {
        T::one() / (T::one() + (-eta).exp())
    } else {
        let e = eta.exp();
        e / (T::one() + e)
    };
    let upper = T::one() - T::epsilon() * T::lit(0.5);
    p.max(T::min_positive_value()).min(upper)
}

/// `ln(1 + e^η)` without overflow.
#[inline]
pub(crate) fn softplus<T: Scalar>(eta: T) -> T {
    if eta > T::zero() {
        eta + (-eta).exp().ln_1p()
    } else {
        eta.exp().ln_1p()
    }
}

/// Log-odds `ln(p / (1 - p))`.
pub fn logit<T: Scalar>(p: T) -> Result<T> {
    if !(p > T::zero() && p < T::one()) {
        return Err(Error::Domain {
            operation: "logit",
            value: p.as_f64(),
        });
    }
    Ok(p.ln() - (-p).ln_1p())
}

fn check_data<T: Scalar>(coefficients: &[T], data: &EncodedDataset<T>) -> Result<()> {
    check_len(data.n_params(), coefficients.len())
}

/// Bernoulli log-likelihood `Σ yᵢηᵢ - Σ ln(1 + e^ηᵢ)`.
pub fn log_likelihood<T: Scalar>(coefficients: &[T], data: &EncodedDataset<T>) -> Result<T> {
    check_data(coefficients, data)?;
    Ok(log_likelihood_unchecked(coefficients, data))
}

fn log_likelihood_unchecked<T: Scalar>(coefficients: &[T], data: &EncodedDataset<T>) -> T {
    data.design
        .row_iter()
        .zip(&data.response)
        .map(|(row, &y)| {
            let eta = dot(coefficients, row);
            y * eta - softplus(eta)
        })
        .sum()
}

/// Gradient of the log-likelihood, `Σ (yᵢ - Hᵢ) xᵢ`.
pub fn score<T: Scalar>(coefficients: &[T], data: &EncodedDataset<T>) -> Result<Vec<T>> {
    check_data(coefficients, data)?;
    Ok(score_unchecked(coefficients, data))
}

fn score_unchecked<T: Scalar>(coefficients: &[T], data: &EncodedDataset<T>) -> Vec<T> {
    let mut grad = vec![T::zero(); coefficients.len()];
    for (row, &y) in data.design.row_iter().zip(&data.response) {
        let residual = y - sigmoid_unchecked(dot(coefficients, row));
        for (g, &x) in grad.iter_mut().zip(row) {
            *g = *g + residual * x;
        }
    }
    grad
}

/// Negative Hessian of the log-likelihood, `XᵀWX` with `W = diag(Hᵢ(1 - Hᵢ))`.
pub fn observed_information<T: Scalar>(
    coefficients: &[T],
    data: &EncodedDataset<T>,
) -> Result<Matrix<T>> {
    check_data(coefficients, data)?;
    Ok(information_unchecked(coefficients, data))
}

fn information_unchecked<T: Scalar>(coefficients: &[T], data: &EncodedDataset<T>) -> Matrix<T> {
    let p = coefficients.len();
    let mut info = Matrix::zeros(p, p);
    for row in data.design.row_iter() {
        let eta = dot(coefficients, row);
        // H(1-H) as H(η)H(-η) keeps precision when H is near 1
        let w = sigmoid_unchecked(eta) * sigmoid_unchecked(-eta);
        for a in 0..p {
            let wa = w * row[a];
            for b in 0..=a {
                info[(a, b)] = info[(a, b)] + wa * row[b];
            }
        }
    }
    for a in 0..p {
        for b in 0..a {
            info[(b, a)] = info[(a, b)];
        }
    }
    info
}

fn max_abs<T: Scalar>(v: &[T]) -> T {
    v.iter().fold(T::zero(), |m, x| m.max(x.abs()))
}

fn factor_information<T: Scalar>(info: &Matrix<T>) -> Result<Cholesky<T>> {
    let chol = Cholesky::new(info).ok_or_else(|| {
        Error::Separation("information matrix is singular (collinear design?)".into())
    })?;
    let cond = chol.condition_estimate();
    if !(cond <= T::lit(MAX_INFORMATION_CONDITION)) {
        return Err(Error::Separation(format!(
            "information matrix condition estimate {cond:e} exceeds {MAX_INFORMATION_CONDITION:e}"
        )));
    }
    Ok(chol)
}

/// Maximum-likelihood fit by Newton-Raphson with step halving.
///
/// Each iteration solves `I(θ) δ = score(θ)` and moves to `θ + δ`, halving
/// `δ` up to [`MAX_STEP_HALVINGS`] times while the log-likelihood drops.
/// Iteration stops when the largest absolute score component is within
/// `config.tolerance`; hitting `max_iterations` first returns a result with
/// `converged = false`.
pub fn fit_mle<T: Scalar>(data: &EncodedDataset<T>, config: &FitConfig<T>) -> Result<FitResult<T>> {
    config.validate()?;
    let n = data.n_rows();
    let p = data.n_params();
    if n < p {
        return Err(Error::TooFewRows { rows: n, params: p });
    }
    let ones = data.positives();
    if ones == 0 || ones == n {
        return Err(Error::DegenerateResponse { ones, rows: n });
    }

    let mut theta = match &config.initial_coefficients {
        Some(init) => {
            check_len(p, init.len())?;
            init.clone()
        }
        None => vec![T::zero(); p],
    };
    let mut ll = log_likelihood_unchecked(&theta, data);
    let mut grad = score_unchecked(&theta, data);
    let mut iterations = 0;

    while max_abs(&grad) > config.tolerance && iterations < config.max_iterations {
        let chol = factor_information(&information_unchecked(&theta, data))?;
        let step = chol.solve(&grad);

        // Near the optimum the likelihood is flat to rounding; a full step that
        // only loses noise must not be halved or the iteration stalls.
        let slack = T::lit(64.0) * T::epsilon() * (ll.abs() + T::one());
        let mut scale = T::one();
        let mut candidate = advance(&theta, &step, scale);
        let mut candidate_ll = log_likelihood_unchecked(&candidate, data);
        for _ in 0..MAX_STEP_HALVINGS {
            if candidate_ll >= ll - slack {
                break;
            }
            scale = scale * T::lit(0.5);
            candidate = advance(&theta, &step, scale);
            candidate_ll = log_likelihood_unchecked(&candidate, data);
        }

        theta = candidate;
        ll = candidate_ll;
        iterations += 1;

        if let Some(j) = theta
            .iter()
            .position(|t| !(t.abs() <= T::lit(MAX_COEFFICIENT_MAGNITUDE)))
        {
            return Err(Error::Separation(format!(
                "coefficient {} ({}) diverged to {} after {iterations} iterations",
                j, data.column_names[j], theta[j]
            )));
        }
        grad = score_unchecked(&theta, data);
    }

    let max_abs_score = max_abs(&grad);
    let converged = max_abs_score <= config.tolerance;
    let chol = factor_information(&information_unchecked(&theta, data))?;
    if converged {
        let residual_step = chol.solve(&grad);
        let step_norm = max_abs(&residual_step);
        if step_norm > T::lit(SEPARATION_STEP_THRESHOLD) {
            return Err(Error::Separation(format!(
                "score vanished but Newton step is still {step_norm:e}; \
                 likelihood is increasing without bound"
            )));
        }
    }
    let covariance = chol.inverse();
    let standard_errors = covariance
        .diagonal()
        .into_iter()
        .map(|v| v.max(T::zero()).sqrt())
        .collect();

    Ok(FitResult {
        column_names: data.column_names.clone(),
        coefficients: theta,
        standard_errors,
        covariance,
        log_likelihood: ll,
        deviance: T::lit(-2.0) * ll,
        iterations,
        converged,
        max_abs_score,
    })
}

fn advance<T: Scalar>(theta: &[T], step: &[T], scale: T) -> Vec<T> {
    theta
        .iter()
        .zip(step)
        .map(|(&t, &s)| t + scale * s)
        .collect()
}

/// Signed square roots of each observation's deviance contribution.
pub fn deviance_residuals<T: Scalar>(
    fit: &FitResult<T>,
    data: &EncodedDataset<T>,
) -> Result<Vec<T>> {
    check_data(&fit.coefficients, data)?;
    Ok(data
        .design
        .row_iter()
        .zip(&data.response)
        .map(|(row, &y)| {
            let eta = dot(&fit.coefficients, row);
            // -[y ln H + (1-y) ln(1-H)] = softplus(η) - yη
            let contribution = (softplus(eta) - y * eta).max(T::zero());
            let magnitude = (T::lit(2.0) * contribution).sqrt();
            if y == T::one() {
                magnitude
            } else {
                -magnitude
            }
        })
        .collect())
}
