//! Independent reference computations used as test oracles. Nothing here
//! calls into the library's likelihood, derivative, quantile or BCa code.
#![allow(dead_code)]

use logitboot::data_io::{encode, simulate, SimulationSpec};
use logitboot::linalg::Matrix;
use logitboot::model::EncodedDataset;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use statrs::distribution::{ContinuousCDF, Normal};

pub const REFERENCE_COEFFICIENTS: [f64; 4] = [1.56097, -0.07492, 1.64392, 0.08356];

/// Random design with intercept and `k` covariates in [-2, 2], random 0/1 response.
pub fn random_dataset(rng: &mut impl Rng, n: usize, k: usize) -> EncodedDataset<f64> {
    let mut rows = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    for _ in 0..n {
        let mut row = vec![1.0];
        row.extend((0..k).map(|_| rng.gen_range(-2.0..2.0)));
        rows.push(row);
        y.push(if rng.gen_bool(0.5) { 1.0 } else { 0.0 });
    }
    let names = (0..=k).map(|j| format!("x{j}")).collect();
    EncodedDataset::new(Matrix::from_rows(&rows).unwrap(), y, names).unwrap()
}

pub fn random_coefficients(rng: &mut impl Rng, p: usize) -> Vec<f64> {
    (0..p).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

pub fn rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

/// Log of the Bernoulli product `Π H^y (1-H)^(1-y)` with `H = e^η / (1 + e^η)`.
pub fn bernoulli_product_log_likelihood(coefs: &[f64], data: &EncodedDataset<f64>) -> f64 {
    let mut product = 1.0f64;
    for i in 0..data.n_rows() {
        let eta: f64 = coefs.iter().zip(data.row(i)).map(|(c, x)| c * x).sum();
        let h = eta.exp() / (1.0 + eta.exp());
        let y = data.response()[i];
        product *= h.powf(y) * (1.0 - h).powf(1.0 - y);
    }
    product.ln()
}

/// Central-difference gradient of `f` at `x`.
pub fn central_gradient(f: impl Fn(&[f64]) -> f64, x: &[f64], h: f64) -> Vec<f64> {
    (0..x.len())
        .map(|j| {
            let mut plus = x.to_vec();
            let mut minus = x.to_vec();
            plus[j] += h;
            minus[j] -= h;
            (f(&plus) - f(&minus)) / (2.0 * h)
        })
        .collect()
}

/// Central-difference Jacobian of a vector field; row `i` is `∂g_i/∂x`.
pub fn central_jacobian(g: impl Fn(&[f64]) -> Vec<f64>, x: &[f64], h: f64) -> Vec<Vec<f64>> {
    let p = x.len();
    let mut jac = vec![vec![0.0; p]; p];
    for j in 0..p {
        let mut plus = x.to_vec();
        let mut minus = x.to_vec();
        plus[j] += h;
        minus[j] -= h;
        let (gp, gm) = (g(&plus), g(&minus));
        for i in 0..p {
            jac[i][j] = (gp[i] - gm[i]) / (2.0 * h);
        }
    }
    jac
}

pub fn close(got: f64, want: f64, rel: f64, abs: f64) -> bool {
    let diff = (got - want).abs();
    diff <= abs || diff <= rel * want.abs().max(got.abs())
}

/// Empirical-influence form of the jackknife acceleration:
/// `L_i = (n - 1)(mean - θ_(i))`, `a = Σ L³ / (6 (Σ L²)^{3/2})`.
pub fn acceleration_from_influence(leave_one_out: &[f64]) -> f64 {
    let n = leave_one_out.len() as f64;
    let mean = leave_one_out.iter().sum::<f64>() / n;
    let influence: Vec<f64> = leave_one_out
        .iter()
        .map(|t| (n - 1.0) * (mean - t))
        .collect();
    let s2: f64 = influence.iter().map(|l| l.powi(2)).sum();
    let s3: f64 = influence.iter().map(|l| l.powi(3)).sum();
    if s2 == 0.0 {
        0.0
    } else {
        s3 / (6.0 * s2.powf(1.5))
    }
}

/// Interpolated quantile with 1-based position `(R - 1)q + 1`.
pub fn type7_quantile(values: &[f64], q: f64) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let pos = (v.len() as f64 - 1.0) * q + 1.0;
    let k = pos.floor() as usize;
    if k >= v.len() {
        return v[v.len() - 1];
    }
    v[k - 1] + (pos - k as f64) * (v[k] - v[k - 1])
}

/// Textbook BCa endpoints from the replicates, the original estimate and a
/// given acceleration.
pub fn bca_reference(
    replicates: &[f64],
    original: f64,
    acceleration: f64,
    level: f64,
) -> (f64, f64) {
    let normal = Normal::new(0.0, 1.0).unwrap();
    let below = replicates.iter().filter(|&&t| t < original).count() as f64;
    let z0 = normal.inverse_cdf(below / replicates.len() as f64);
    let endpoint = |alpha: f64| {
        let z = normal.inverse_cdf(alpha);
        let adjusted = normal.cdf(z0 + (z0 + z) / (1.0 - acceleration * (z0 + z)));
        type7_quantile(replicates, adjusted)
    };
    (endpoint((1.0 - level) / 2.0), endpoint((1.0 + level) / 2.0))
}

#[derive(Debug, Default, PartialEq, Eq, Clone, Copy)]
pub struct Confusion {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    pub fn_: usize,
}

/// Confusion counts by enumerating every (predicted, observed) pair.
pub fn confusion_by_enumeration(
    probabilities: &[f64],
    observed: &[u8],
    threshold: f64,
) -> Confusion {
    let mut c = Confusion::default();
    for (p, &y) in probabilities.iter().zip(observed) {
        let predicted = if *p >= threshold { 1 } else { 0 };
        for (pred, obs, slot) in [
            (1, 1, &mut c.tp),
            (1, 0, &mut c.fp),
            (0, 0, &mut c.tn),
            (0, 1, &mut c.fn_),
        ] {
            if predicted == pred && y == obs {
                *slot += 1;
            }
        }
    }
    c
}

/// `softplus(x) = ln(1 + e^x)` evaluated directly.
fn softplus(x: f64) -> f64 {
    if x > 30.0 {
        x
    } else {
        x.exp().ln_1p()
    }
}

/// Exact expected positive rate under Age ~ U(lo, hi), Emp, Gender ~
/// Bernoulli(p): `∫ sigmoid(c + b·age) d age = softplus(c + b·age) / b`.
pub fn expected_positive_rate(coefs: [f64; 4], lo: f64, hi: f64, p_emp: f64, p_gender: f64) -> f64 {
    let [b0, b_age, b_emp, b_gender] = coefs;
    let mut total = 0.0;
    for (emp, w_emp) in [(0.0, 1.0 - p_emp), (1.0, p_emp)] {
        for (gender, w_gender) in [(0.0, 1.0 - p_gender), (1.0, p_gender)] {
            let c = b0 + b_emp * emp + b_gender * gender;
            let mean = if b_age == 0.0 {
                1.0 / (1.0 + (-c).exp())
            } else {
                (softplus(c + b_age * hi) - softplus(c + b_age * lo)) / (b_age * (hi - lo))
            };
            total += w_emp * w_gender * mean;
        }
    }
    total
}

/// Simulated sample from the reference generating model, Age ~ U(0, 90).
pub fn reference_sample(n: usize, seed: u64) -> EncodedDataset<f64> {
    let spec = SimulationSpec {
        n,
        seed,
        ..SimulationSpec::default()
    };
    encode(&simulate(&spec).unwrap()).unwrap().dataset
}
