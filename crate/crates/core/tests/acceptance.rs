//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.
//!
//! The coverage study is sized by `LOGITBOOT_ACCEPTANCE_SIMULATIONS`
//! (default 200) and `LOGITBOOT_ACCEPTANCE_REPLICATES` (default 1000).

mod common;

use std::time::Instant;

use common::*;
use logitboot::data_io::{encode, simulate, SimulationSpec};
use logitboot::inference::{
    bca_interval, bootstrap_fit, jackknife_acceleration, jackknife_coefficients, odds_report,
    percentile_ci, wald_ci, BcaAdjustment,
};
use logitboot::linalg::Matrix;
use logitboot::model::{
    deviance_residuals, fit_mle, log_likelihood, score, sigmoid, EncodedDataset, FitConfig,
    FitResult,
};
use logitboot::validation::{
    age_grid, curves_from_coefficients, holdout_protocol, holdout_validate, split_sample_fit,
    GroupProfile, STANDARD_PROFILES,
};
use rand::Rng;

struct Outcome {
    passed: bool,
    detail: String,
    notes: Vec<String>,
}

impl Outcome {
    fn new(passed: bool, detail: impl Into<String>) -> Self {
        Self {
            passed,
            detail: detail.into(),
            notes: Vec::new(),
        }
    }
}

fn env_count(name: &str, default: usize) -> usize {
    std::env::var(name)
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(default)
}

fn names() -> Vec<String> {
    ["Intercept", "Age", "Emp", "Gender"]
        .map(String::from)
        .to_vec()
}

fn fit_with(coefficients: &[f64]) -> FitResult<f64> {
    let p = coefficients.len();
    FitResult {
        column_names: names(),
        coefficients: coefficients.to_vec(),
        standard_errors: vec![0.0; p],
        covariance: Matrix::zeros(p, p),
        log_likelihood: 0.0,
        deviance: 0.0,
        iterations: 0,
        converged: true,
        max_abs_score: 0.0,
    }
}

fn golden_arithmetic() -> Outcome {
    let odds_target = [4.7634354, 0.9278142, 5.1753971, 1.0871452];
    let max_odds_error = |coefs: &[f64]| {
        let report = odds_report(&fit_with(coefs), &[]).unwrap();
        report
            .entries
            .iter()
            .zip(odds_target)
            .map(|(e, t)| (e.odds_ratio - t).abs())
            .fold(0.0, f64::max)
    };
    let odds_err = max_odds_error(&REFERENCE_COEFFICIENTS);
    let p1 = (sigmoid(1.56097f64).unwrap() - 0.8264925).abs();
    let p2 = (sigmoid(3.20489f64).unwrap() - 0.9610179).abs();
    let scaled = odds_report(&fit_with(&REFERENCE_COEFFICIENTS), &[(1, 15.0)]).unwrap();
    let s = (scaled.scaled[0].odds_multiplier - 0.3250423).abs();

    let mut outcome = Outcome::new(
        odds_err <= 1e-6 && p1 <= 1e-6 && p2 <= 1e-6 && s <= 1e-6,
        format!(
            "odds max err {odds_err:.1e} (tol 1e-6); sigmoid errs {p1:.1e}, {p2:.1e}; exp(15*age) err {s:.1e}"
        ),
    );
    let precise = max_odds_error(&[1.56096913, -0.074924, 1.64391607, 0.08355517]);
    outcome.notes.push(format!(
        "the odds targets are exp of unrounded coefficients; 8-decimal coefficients give max err {precise:.1e}"
    ));
    outcome
}

fn gradient_correctness() -> Outcome {
    let mut rng = rng(2);
    let mut worst = 0.0f64;
    let mut failures = 0;
    for _ in 0..50 {
        let n = rng.gen_range(10..=200);
        let k = rng.gen_range(1..=4);
        let data = random_dataset(&mut rng, n, k);
        let theta = random_coefficients(&mut rng, k + 1);
        let analytic = score(&theta, &data).unwrap();
        let numeric = central_gradient(|t| log_likelihood(t, &data).unwrap(), &theta, 1e-5);
        for (a, b) in analytic.iter().zip(&numeric) {
            if !close(*a, *b, 1e-6, 1e-8) {
                failures += 1;
            }
            worst = worst.max((a - b).abs() / b.abs().max(1e-300));
        }
    }
    Outcome::new(
        failures == 0,
        format!("50 instances, {failures} components outside tolerance, worst relative diff {worst:.1e}"),
    )
}

fn likelihood_oracle() -> Outcome {
    let mut rng = rng(3);
    let mut worst = 0.0f64;
    let mut patterns = 0usize;
    for n in 1..=12 {
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|_| vec![1.0, rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)])
            .collect();
        let design = Matrix::from_rows(&rows).unwrap();
        let theta = random_coefficients(&mut rng, 3);
        for mask in 0u32..(1 << n) {
            let y: Vec<f64> = (0..n).map(|i| ((mask >> i) & 1) as f64).collect();
            let data = EncodedDataset::new(
                design.clone(),
                y,
                vec!["Intercept".into(), "x1".into(), "x2".into()],
            )
            .unwrap();
            let got = log_likelihood(&theta, &data).unwrap();
            let want = bernoulli_product_log_likelihood(&theta, &data);
            worst = worst.max((got - want).abs());
            patterns += 1;
        }
    }
    Outcome::new(
        worst <= 1e-10,
        format!("{patterns} response patterns, max abs diff {worst:.1e} (tol 1e-10)"),
    )
}

fn mle_recovery() -> Outcome {
    let data = reference_sample(100_000, 20_240_101);
    let fit = fit_mle(&data, &FitConfig::default()).unwrap();
    let worst = fit
        .coefficients
        .iter()
        .zip(REFERENCE_COEFFICIENTS)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    Outcome::new(
        fit.converged && fit.iterations <= 10 && worst < 0.05,
        format!(
            "n=100000, {} iterations, max coefficient error {worst:.4}",
            fit.iterations
        ),
    )
}

fn intercept_only_closed_form() -> Outcome {
    let mut rng = rng(5);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let n = rng.gen_range(10..500);
        let rate = rng.gen_range(0.02..0.98);
        let mut y: Vec<f64> = (0..n)
            .map(|_| if rng.gen_bool(rate) { 1.0 } else { 0.0 })
            .collect();
        y[0] = 1.0;
        y[1] = 0.0;
        let data = EncodedDataset::new(
            Matrix::from_rows(&vec![vec![1.0]; n]).unwrap(),
            y.clone(),
            vec!["Intercept".into()],
        )
        .unwrap();
        let fit = fit_mle(&data, &FitConfig::default()).unwrap();
        let mean = y.iter().sum::<f64>() / n as f64;
        worst = worst.max((fit.coefficients[0] - (mean / (1.0 - mean)).ln()).abs());
    }
    Outcome::new(
        worst <= 1e-8,
        format!("20 response mixes, max |intercept - logit(mean)| {worst:.1e}"),
    )
}

fn bootstrap_determinism_and_coverage() -> Outcome {
    let simulations = env_count("LOGITBOOT_ACCEPTANCE_SIMULATIONS", 200);
    let replicates = env_count("LOGITBOOT_ACCEPTANCE_REPLICATES", 1000);
    let config = FitConfig::default();

    let data = reference_sample(400, 77);
    let a = bootstrap_fit(&data, &config, replicates, 7).unwrap();
    let b = bootstrap_fit(&data, &config, replicates, 7).unwrap();
    let identical = serde_json::to_vec(&a).unwrap() == serde_json::to_vec(&b).unwrap();

    let truth = REFERENCE_COEFFICIENTS[1];
    let mut covered = 0;
    let mut wald_covered = 0;
    let mut usable = 0;
    for sim in 0..simulations as u64 {
        let data = reference_sample(400, 500_000 + sim);
        let Ok(result) = bootstrap_fit(&data, &config, replicates, sim) else {
            continue;
        };
        let interval = percentile_ci(&result, 1, 0.95).unwrap();
        usable += 1;
        if interval.contains(truth) {
            covered += 1;
        }
        if wald_ci(&result.original_fit, 0.95).unwrap()[1].contains(truth) {
            wald_covered += 1;
        }
    }
    let rate = covered as f64 / usable.max(1) as f64;
    let mut outcome = Outcome::new(
        identical && usable == simulations && (0.91..=0.985).contains(&rate),
        format!(
            "byte-identical reruns: {identical}; Age coverage {covered}/{usable} = {rate:.3} \
             ({simulations} simulations x {replicates} replicates)"
        ),
    );
    outcome.notes.push(format!(
        "Wald coverage on the same datasets {wald_covered}/{usable}; the percentile interval \
         carries the estimator's bias twice and sits below nominal"
    ));
    outcome
}

fn bca_degeneracy() -> Outcome {
    let data = reference_sample(400, 88);
    let config = FitConfig::default();
    let result = bootstrap_fit(&data, &config, 1000, 88).unwrap();
    let mut exact = true;
    for j in 0..4 {
        let pct = percentile_ci(&result, j, 0.95).unwrap();
        let bca = bca_interval(&result.column(j), &BcaAdjustment::zero(), j, 0.95).unwrap();
        exact &= pct.lower.to_bits() == bca.lower.to_bits()
            && pct.upper.to_bits() == bca.upper.to_bits();
    }
    let jack = jackknife_coefficients(&data, &config).unwrap();
    let worst = (0..4)
        .map(|j| {
            let column = jack.column(j);
            (jackknife_acceleration(&column) - acceleration_from_influence(&column)).abs()
        })
        .fold(0.0, f64::max);
    Outcome::new(
        exact && worst <= 1e-10,
        format!("z0=a=0 equals percentile bit for bit: {exact}; acceleration max diff {worst:.1e}"),
    )
}

fn validation_protocol() -> Outcome {
    let data = reference_sample(400, 2024);
    let end_to_end = holdout_protocol(&data, 300, 0.5, &FitConfig::default());
    let protocol_ok = matches!(&end_to_end, Ok(o) if o.report.total() == 100);

    let mut rng = rng(8);
    let mut fixtures = 0;
    let mut mismatches = 0;
    while fixtures < 100 {
        let data = random_dataset(&mut rng, 10, 2);
        let theta = random_coefficients(&mut rng, 3);
        let mut fit = fit_with(&theta);
        fit.column_names = data.column_names().to_vec();
        let probabilities: Vec<f64> = (0..10)
            .map(|i| fit.predict_probability(data.row(i)).unwrap())
            .collect();
        let observed: Vec<u8> = data.response().iter().map(|&y| y as u8).collect();
        for threshold in [0.3, 0.5, 0.7] {
            let report =
                holdout_validate(&data, &fit, &(0..10).collect::<Vec<_>>(), threshold).unwrap();
            let want = confusion_by_enumeration(&probabilities, &observed, threshold);
            if (
                report.true_positives,
                report.false_positives,
                report.true_negatives,
                report.false_negatives,
            ) != (want.tp, want.fp, want.tn, want.fn_)
            {
                mismatches += 1;
            }
        }
        fixtures += 1;
    }
    let accuracy = end_to_end
        .as_ref()
        .map(|o| o.report.accuracy)
        .unwrap_or(f64::NAN);
    Outcome::new(
        protocol_ok && mismatches == 0,
        format!(
            "300/100 split ran (accuracy {accuracy:.2}); {mismatches} confusion mismatches over {fixtures} fixtures x 3 thresholds"
        ),
    )
}

fn curve_dominance() -> Outcome {
    let grid = age_grid(0.0, 120.0, 1.0).unwrap();
    let profiles: Vec<GroupProfile<f64>> = STANDARD_PROFILES
        .iter()
        .map(|name| GroupProfile::standard(name, grid.clone()).unwrap())
        .collect();
    let table = curves_from_coefficients(&REFERENCE_COEFFICIENTS, &names(), &profiles).unwrap();
    let decreasing = STANDARD_PROFILES.iter().all(|name| {
        table
            .profile(name)
            .windows(2)
            .all(|w| w[1].probability < w[0].probability)
    });
    let top = table.profile("female-unemp");
    let dominant = STANDARD_PROFILES.iter().all(|name| {
        top.iter()
            .zip(table.profile(name))
            .all(|(a, b)| a.probability >= b.probability)
    });
    Outcome::new(
        decreasing && dominant,
        format!("strictly decreasing: {decreasing}; female-unemp dominant on 0..=120: {dominant}"),
    )
}

fn deviance_identity() -> Outcome {
    let config = FitConfig::default();
    let mut datasets: Vec<EncodedDataset<f64>> = Vec::new();
    datasets.push(reference_sample(100_000, 20_240_101));
    for seed in 0..50 {
        datasets.push(reference_sample(400, 500_000 + seed));
    }
    let sizes = [50, 100, 200, 300, 400];
    let base = reference_sample(400, 2024);
    for entry in split_sample_fit(&base, &sizes, &config).unwrap().entries {
        if entry.fit.is_some() {
            datasets.push(base.prefix(entry.size).unwrap());
        }
    }
    let mut rng = rng(10);
    for _ in 0..50 {
        let n = rng.gen_range(20..200);
        let k = rng.gen_range(1..=4);
        datasets.push(random_dataset(&mut rng, n, k));
    }
    let spec = SimulationSpec {
        n: 1000,
        age_low: 15.0,
        age_high: 60.0,
        seed: 4,
        ..SimulationSpec::default()
    };
    datasets.push(encode(&simulate(&spec).unwrap()).unwrap().dataset);

    let mut checked = 0;
    let mut worst = 0.0f64;
    for data in &datasets {
        let Ok(fit) = fit_mle(data, &config) else {
            continue;
        };
        if !fit.converged {
            continue;
        }
        let r = deviance_residuals(&fit, data).unwrap();
        let sum: f64 = r.iter().map(|v| v * v).sum();
        worst = worst.max((sum + 2.0 * fit.log_likelihood).abs());
        checked += 1;
    }
    Outcome::new(
        checked > 100 && worst <= 1e-8,
        format!("{checked} converged fits, max |sum r^2 + 2 ll| {worst:.1e}"),
    )
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 10] = [
        ("golden arithmetic", golden_arithmetic),
        ("score vs finite differences", gradient_correctness),
        ("log-likelihood vs Bernoulli product", likelihood_oracle),
        ("MLE recovery at n=100000", mle_recovery),
        ("intercept-only closed form", intercept_only_closed_form),
        (
            "bootstrap determinism and coverage",
            bootstrap_determinism_and_coverage,
        ),
        ("BCa degeneracy and acceleration", bca_degeneracy),
        ("holdout protocol and confusion oracle", validation_protocol),
        ("curve dominance and monotonicity", curve_dominance),
        ("deviance identity", deviance_identity),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = check();
        let status = if outcome.passed { "PASS" } else { "FAIL" };
        println!(
            "{status} {:>2} {name}: {} [{:.1?}]",
            i + 1,
            outcome.detail,
            start.elapsed()
        );
        for note in &outcome.notes {
            println!("        note: {note}");
        }
        if !outcome.passed {
            failed += 1;
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
