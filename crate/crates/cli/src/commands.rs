use std::fs;
use std::io::{self, Write};
use std::path::Path;

use logitboot::data_io::{
    encode, load_csv, save_csv, shuffled, simulate, write_csv, SimulationSpec, COLUMN_NAMES,
};
use logitboot::inference::{
    bca_ci_all, bootstrap_fit, odds_report, percentile_ci, wald_ci, IntervalEstimate,
    IntervalMethod, OddsReport, MIN_BCA_REPLICATES, MIN_PERCENTILE_REPLICATES,
};
use logitboot::linalg::Matrix;
use logitboot::model::{fit_mle, EncodedDataset, FitConfig, FitResult};
use logitboot::validation::{
    age_grid, curves_from_coefficients, holdout_protocol, split_sample_fit, CurvePoint,
    GroupProfile, SplitEntry, ValidationReport,
};
use logitboot::Error;
use serde::Serialize;

use crate::args::{
    BootstrapArgs, CiMethod, CurvesArgs, FitArgs, Format, SimulateArgs, SolverArgs, SplitArgs,
    ValidateArgs,
};
use crate::manifest::{ConfigEcho, RunManifest};

/// Why a run stopped, mapped to the process exit code.
#[derive(Debug)]
pub enum Failure {
    Core(Error),
    Usage(String),
    /// Unreadable auxiliary input such as a malformed fit JSON.
    Input(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Input(_) => 4,
            Failure::Core(e) => match e {
                Error::DegenerateResponse { .. }
                | Error::TooFewRows { .. }
                | Error::InvalidDataset(_) => 2,
                Error::Separation(_)
                | Error::NotConverged { .. }
                | Error::ResamplingInstability { .. }
                | Error::InsufficientReplicates { .. }
                | Error::Domain { .. } => 3,
                Error::Io { .. }
                | Error::Csv(_)
                | Error::Parse { .. }
                | Error::EmptyInput
                | Error::MissingColumn(_) => 4,
                Error::InvalidConfig(_)
                | Error::EmptyTestSet
                | Error::IndexOutOfRange { .. }
                | Error::UnknownPredictor(_)
                | Error::MissingPredictor { .. }
                | Error::Dimension { .. } => 1,
            },
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Failure::Usage(_) => "usage",
            Failure::Input(_) => "input",
            Failure::Core(e) => match e {
                Error::Dimension { .. } => "dimension",
                Error::Domain { .. } => "domain",
                Error::InvalidDataset(_) => "invalid_dataset",
                Error::InvalidConfig(_) => "invalid_config",
                Error::DegenerateResponse { .. } => "degenerate_response",
                Error::TooFewRows { .. } => "too_few_rows",
                Error::Separation(_) => "separation",
                Error::NotConverged { .. } => "not_converged",
                Error::InsufficientReplicates { .. } => "insufficient_replicates",
                Error::ResamplingInstability { .. } => "resampling_instability",
                Error::EmptyTestSet => "empty_test_set",
                Error::IndexOutOfRange { .. } => "index_out_of_range",
                Error::UnknownPredictor(_) => "unknown_predictor",
                Error::MissingPredictor { .. } => "missing_predictor",
                Error::MissingColumn(_) => "missing_column",
                Error::Parse { .. } => "parse",
                Error::EmptyInput => "empty_input",
                Error::Io { .. } => "io",
                Error::Csv(_) => "csv",
            },
        }
    }

    pub fn message(&self) -> String {
        match self {
            Failure::Core(e) => e.to_string(),
            Failure::Usage(m) | Failure::Input(m) => m.clone(),
        }
    }
}

pub type Outcome = Result<(), Box<(Failure, Option<RunManifest>)>>;

pub fn warn(message: impl AsRef<str>) {
    eprintln!("warning: {}", message.as_ref());
}

#[derive(Serialize)]
struct Envelope<'a, B: Serialize> {
    manifest: &'a RunManifest,
    #[serde(flatten)]
    body: B,
}

fn write_json(value: &impl Serialize, out: Option<&Path>) -> Result<(), Failure> {
    let mut text = serde_json::to_string_pretty(value).expect("output is serializable");
    text.push('\n');
    match out {
        Some(path) => fs::write(path, text).map_err(|source| io_failure(path, source)),
        None => {
            // A closed pipe is not worth a failure exit.
            let _ = io::stdout().lock().write_all(text.as_bytes());
            Ok(())
        }
    }
}

fn io_failure(path: &Path, source: io::Error) -> Failure {
    Failure::Core(Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Runs `body` and writes its output wrapped with the manifest.
fn finish<B: Serialize>(
    manifest: RunManifest,
    out: Option<&Path>,
    body: impl FnOnce() -> Result<B, Failure>,
) -> Outcome {
    match body().and_then(|b| {
        write_json(
            &Envelope {
                manifest: &manifest,
                body: b,
            },
            out,
        )
    }) {
        Ok(()) => Ok(()),
        Err(f) => Err(Box::new((f, Some(manifest)))),
    }
}

fn solver_config(args: &SolverArgs) -> Result<FitConfig<f64>, Failure> {
    let config = FitConfig {
        max_iterations: args.max_iterations,
        tolerance: args.tolerance,
        initial_coefficients: None,
    };
    config.validate()?;
    Ok(config)
}

fn solver_echo(args: &SolverArgs) -> ConfigEcho {
    ConfigEcho {
        tolerance: Some(args.tolerance),
        max_iterations: Some(args.max_iterations),
        ..ConfigEcho::default()
    }
}

fn with_input(mut manifest: RunManifest, input: &Path) -> RunManifest {
    manifest.input = Some(input.display().to_string());
    manifest
}

fn load(path: &Path) -> Result<EncodedDataset<f64>, Failure> {
    let loaded = load_csv(path)?;
    if !loaded.ignored_columns.is_empty() {
        warn(format!(
            "ignored columns: {}",
            loaded.ignored_columns.join(", ")
        ));
    }
    let encoded = encode::<f64>(&loaded.records)?;
    if encoded.single_class_response {
        warn("every record has the same HIV status");
    }
    Ok(encoded.dataset)
}

fn converged_fit(
    data: &EncodedDataset<f64>,
    config: &FitConfig<f64>,
) -> Result<FitResult<f64>, Failure> {
    let fit = fit_mle(data, config)?;
    if !fit.converged {
        return Err(Error::NotConverged {
            iterations: fit.iterations,
        }
        .into());
    }
    Ok(fit)
}

#[derive(Serialize)]
struct FitOutput<'a> {
    #[serde(flatten)]
    fit: &'a FitResult<f64>,
    odds_report: OddsReport<f64>,
}

fn parse_scale(spec: &str, data: &EncodedDataset<f64>) -> Result<(usize, f64), Failure> {
    let (name, delta) = spec
        .split_once('=')
        .ok_or_else(|| Failure::Usage(format!("--scale expects NAME=DELTA, got `{spec}`")))?;
    let index = data
        .column_index(name.trim())
        .ok_or_else(|| Error::UnknownPredictor(name.trim().to_string()))?;
    let delta: f64 = delta
        .trim()
        .parse()
        .map_err(|_| Failure::Usage(format!("--scale delta `{delta}` is not a number")))?;
    Ok((index, delta))
}

pub fn fit(args: &FitArgs) -> Outcome {
    let manifest = with_input(
        RunManifest::new("fit", solver_echo(&args.solver)),
        &args.input,
    );
    finish(manifest, args.output.out.as_deref(), || {
        let config = solver_config(&args.solver)?;
        let data = load(&args.input)?;
        let scaled = args
            .scale
            .iter()
            .map(|s| parse_scale(s, &data))
            .collect::<Result<Vec<_>, _>>()?;
        let fit = converged_fit(&data, &config)?;
        let odds_report = odds_report(&fit, &scaled)?;
        Ok(serde_json::to_value(FitOutput {
            fit: &fit,
            odds_report,
        })
        .expect("serializable"))
    })
}

#[derive(Serialize)]
struct Bounds {
    lower: f64,
    upper: f64,
}

#[derive(Serialize)]
struct IntervalOutput {
    coefficient: String,
    method: IntervalMethod,
    level: f64,
    log_odds: Bounds,
    odds: Bounds,
    #[serde(skip_serializing_if = "Option::is_none")]
    warning: Option<String>,
}

impl IntervalOutput {
    fn new(interval: &IntervalEstimate<f64>, names: &[String]) -> Self {
        let odds = interval.to_odds_scale();
        Self {
            coefficient: names[interval.coefficient_index].clone(),
            method: interval.method,
            level: interval.level,
            log_odds: Bounds {
                lower: interval.lower,
                upper: interval.upper,
            },
            odds: Bounds {
                lower: odds.lower,
                upper: odds.upper,
            },
            warning: interval.warning.clone(),
        }
    }
}

#[derive(Serialize)]
struct SkippedMethod {
    method: IntervalMethod,
    reason: String,
}

#[derive(Serialize)]
struct BootstrapOutput<'a> {
    original_fit: &'a FitResult<f64>,
    replicates_requested: usize,
    replicates_converged: usize,
    dropped_degenerate: usize,
    dropped_failed: usize,
    master_seed: u64,
    bootstrap_means: Vec<f64>,
    bootstrap_standard_errors: Vec<f64>,
    intervals: Vec<IntervalOutput>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    skipped_methods: Vec<SkippedMethod>,
    #[serde(skip_serializing_if = "Option::is_none")]
    replicates: Option<&'a Matrix<f64>>,
}

fn method_name(method: IntervalMethod) -> &'static str {
    match method {
        IntervalMethod::Wald => "wald",
        IntervalMethod::Percentile => "percentile",
        IntervalMethod::Bca => "bca",
    }
}

fn minimum_replicates(method: IntervalMethod) -> usize {
    match method {
        IntervalMethod::Wald => 0,
        IntervalMethod::Percentile => MIN_PERCENTILE_REPLICATES,
        IntervalMethod::Bca => MIN_BCA_REPLICATES,
    }
}

fn check_bootstrap_args(args: &BootstrapArgs) -> Result<Vec<IntervalMethod>, Failure> {
    if args.replicates == 0 {
        return Err(Failure::Usage("--replicates must be at least 1".into()));
    }
    if !(args.ci_level > 0.0 && args.ci_level < 1.0) {
        return Err(Failure::Usage(format!(
            "--ci-level must lie in (0, 1), got {}",
            args.ci_level
        )));
    }
    let single = |method: IntervalMethod| {
        let needed = minimum_replicates(method);
        if args.replicates < needed {
            Err(Failure::Usage(format!(
                "{} intervals need at least {needed} replicates, got {}",
                method_name(method),
                args.replicates
            )))
        } else {
            Ok(vec![method])
        }
    };
    match args.ci_method {
        CiMethod::Wald => single(IntervalMethod::Wald),
        CiMethod::Percentile => single(IntervalMethod::Percentile),
        CiMethod::Bca => single(IntervalMethod::Bca),
        CiMethod::All => Ok(vec![
            IntervalMethod::Wald,
            IntervalMethod::Percentile,
            IntervalMethod::Bca,
        ]),
    }
}

pub fn bootstrap(args: &BootstrapArgs) -> Outcome {
    let echo = ConfigEcho {
        replicates: Some(args.replicates),
        seed: Some(args.seed),
        ci_level: Some(args.ci_level),
        ci_method: Some(args.ci_method),
        ..solver_echo(&args.solver)
    };
    let manifest = with_input(RunManifest::new("bootstrap", echo), &args.input);
    finish(manifest, args.output.out.as_deref(), || {
        let methods = check_bootstrap_args(args)?;
        let config = solver_config(&args.solver)?;
        let data = load(&args.input)?;
        let result = bootstrap_fit(&data, &config, args.replicates, args.seed)?;
        if result.dropped_degenerate + result.dropped_failed > 0 {
            warn(format!(
                "dropped {} single-class and {} non-converged replicates of {}",
                result.dropped_degenerate, result.dropped_failed, args.replicates
            ));
        }
        let names = &result.original_fit.column_names;
        let available = result.replicate_count_converged;
        let mut intervals = Vec::new();
        let mut skipped_methods = Vec::new();
        for method in methods {
            let needed = minimum_replicates(method);
            if available < needed {
                if args.ci_method != CiMethod::All {
                    return Err(Error::InsufficientReplicates {
                        required: needed,
                        available,
                    }
                    .into());
                }
                let reason = format!("needs {needed} converged replicates, have {available}");
                warn(format!(
                    "skipping {} intervals: {reason}",
                    method_name(method)
                ));
                skipped_methods.push(SkippedMethod { method, reason });
                continue;
            }
            let estimates = match method {
                IntervalMethod::Wald => wald_ci(&result.original_fit, args.ci_level)?,
                IntervalMethod::Percentile => (0..names.len())
                    .map(|j| percentile_ci(&result, j, args.ci_level))
                    .collect::<Result<Vec<_>, _>>()?,
                IntervalMethod::Bca => bca_ci_all(&result, &data, &config, args.ci_level)?,
            };
            for e in &estimates {
                if let Some(w) = &e.warning {
                    warn(format!(
                        "{} {}: {w}",
                        names[e.coefficient_index],
                        method_name(method)
                    ));
                }
            }
            intervals.extend(estimates.iter().map(|e| IntervalOutput::new(e, names)));
        }
        Ok(serde_json::to_value(BootstrapOutput {
            original_fit: &result.original_fit,
            replicates_requested: result.replicate_count_requested,
            replicates_converged: result.replicate_count_converged,
            dropped_degenerate: result.dropped_degenerate,
            dropped_failed: result.dropped_failed,
            master_seed: result.master_seed,
            bootstrap_means: result.means(),
            bootstrap_standard_errors: result.standard_errors(),
            intervals,
            skipped_methods,
            replicates: args.keep_replicates.then_some(&result.replicates),
        })
        .expect("serializable"))
    })
}

fn maybe_shuffle(data: EncodedDataset<f64>, seed: Option<u64>) -> EncodedDataset<f64> {
    match seed {
        Some(s) => shuffled(&data, s),
        None => data,
    }
}

#[derive(Serialize)]
struct SplitOutput<'a> {
    entries: &'a [SplitEntry<f64>],
}

pub fn split(args: &SplitArgs) -> Outcome {
    let echo = ConfigEcho {
        splits: Some(args.sizes.clone()),
        shuffle_seed: args.shuffle_seed,
        ..solver_echo(&args.solver)
    };
    let manifest = with_input(RunManifest::new("split", echo), &args.input);
    finish(manifest, args.output.out.as_deref(), || {
        let config = solver_config(&args.solver)?;
        let data = maybe_shuffle(load(&args.input)?, args.shuffle_seed);
        let report = split_sample_fit(&data, &args.sizes, &config)?;
        for entry in &report.entries {
            if let Some(e) = &entry.error {
                warn(format!("size {}: {e}", entry.size));
            }
        }
        Ok(serde_json::to_value(SplitOutput {
            entries: &report.entries,
        })
        .expect("serializable"))
    })
}

#[derive(Serialize)]
struct ValidateOutput<'a> {
    fit: &'a FitResult<f64>,
    report: &'a ValidationReport<f64>,
}

pub fn validate(args: &ValidateArgs) -> Outcome {
    let echo = ConfigEcho {
        train_count: Some(args.train_count),
        threshold: Some(args.threshold),
        shuffle_seed: args.shuffle_seed,
        ..solver_echo(&args.solver)
    };
    let manifest = with_input(RunManifest::new("validate", echo), &args.input);
    finish(manifest, args.output.out.as_deref(), || {
        let config = solver_config(&args.solver)?;
        let data = maybe_shuffle(load(&args.input)?, args.shuffle_seed);
        if args.train_count >= data.n_rows() {
            return Err(Failure::Usage(format!(
                "--train-count {} leaves no test rows out of {}",
                args.train_count,
                data.n_rows()
            )));
        }
        let outcome = holdout_protocol(&data, args.train_count, args.threshold, &config)?;
        Ok(serde_json::to_value(ValidateOutput {
            fit: &outcome.fit,
            report: &outcome.report,
        })
        .expect("serializable"))
    })
}

/// Coefficients and column names from inline values or a fit JSON.
fn curve_coefficients(args: &CurvesArgs) -> Result<(Vec<f64>, Vec<String>), Failure> {
    let default_names = || COLUMN_NAMES.map(String::from).to_vec();
    if let Some(values) = &args.coefficients {
        if values.len() != COLUMN_NAMES.len() {
            return Err(Failure::Usage(format!(
                "--coefficients needs {} values ({}), got {}",
                COLUMN_NAMES.len(),
                COLUMN_NAMES.join(","),
                values.len()
            )));
        }
        return Ok((values.clone(), default_names()));
    }
    let path = args.fit_json.as_ref().expect("clap requires one source");
    let text = fs::read_to_string(path).map_err(|e| io_failure(path, e))?;
    let json: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    let coefficients: Vec<f64> = json
        .get("coefficients")
        .and_then(|v| serde_json::from_value(v.clone()).ok())
        .ok_or_else(|| {
            Failure::Input(format!(
                "{}: no numeric `coefficients` array",
                path.display()
            ))
        })?;
    let names = match json.get("column_names") {
        Some(v) => serde_json::from_value(v.clone())
            .map_err(|e| Failure::Input(format!("{}: bad `column_names`: {e}", path.display())))?,
        None => default_names(),
    };
    Ok((coefficients, names))
}

#[derive(Serialize)]
struct CurvesOutput<'a> {
    column_names: &'a [String],
    coefficients: &'a [f64],
    #[serde(skip_serializing_if = "Option::is_none")]
    csv: Option<&'a Path>,
    #[serde(skip_serializing_if = "Option::is_none")]
    points: Option<&'a [CurvePoint<f64>]>,
}

type CurveRun = (Vec<f64>, Vec<String>, Vec<CurvePoint<f64>>);

pub fn curves(args: &CurvesArgs) -> Outcome {
    let mut manifest = RunManifest::new("curves", ConfigEcho::default());
    manifest.input = args.fit_json.as_ref().map(|p| p.display().to_string());
    let out = args.output.out.as_deref();
    let run = || -> Result<Option<CurveRun>, Failure> {
        let (coefficients, names) = curve_coefficients(args)?;
        let grid = age_grid(args.age_from, args.age_to, args.age_step)?;
        let profiles = args
            .profiles
            .iter()
            .map(|name| GroupProfile::standard(name.trim(), grid.clone()))
            .collect::<Result<Vec<_>, _>>()?;
        let table = curves_from_coefficients(&coefficients, &names, &profiles)?;
        if args.format == Format::Csv {
            match out {
                Some(path) => {
                    let file = fs::File::create(path).map_err(|e| io_failure(path, e))?;
                    table.write_csv(io::BufWriter::new(file))?;
                }
                None => {
                    table.write_csv(io::stdout().lock())?;
                    return Ok(None);
                }
            }
        }
        Ok(Some((coefficients, names, table.points)))
    };
    match run() {
        // CSV went to stdout; there is no JSON document to attach a manifest to.
        Ok(None) => Ok(()),
        Ok(Some((coefficients, names, points))) => {
            let csv_path = (args.format == Format::Csv).then_some(out).flatten();
            let json_out = if csv_path.is_some() { None } else { out };
            finish(manifest, json_out, || {
                Ok(CurvesOutput {
                    column_names: &names,
                    coefficients: &coefficients,
                    csv: csv_path,
                    points: csv_path.is_none().then_some(points.as_slice()),
                })
            })
        }
        Err(f) => Err(Box::new((f, Some(manifest)))),
    }
}

#[derive(Serialize)]
struct SimulateSummary<'a> {
    out: &'a Path,
    rows: usize,
    positives: usize,
    positive_rate: f64,
}

pub fn simulate_cmd(args: &SimulateArgs) -> Outcome {
    let mut manifest = RunManifest::new(
        "simulate",
        ConfigEcho {
            seed: Some(args.seed),
            ..ConfigEcho::default()
        },
    );
    let spec = match <[f64; 4]>::try_from(args.coefficients.as_slice()) {
        Ok(coefficients) => SimulationSpec {
            coefficients,
            n: args.n,
            age_low: args.age_lo,
            age_high: args.age_hi,
            p_unemployed: args.p_emp,
            p_female: args.p_gender,
            seed: args.seed,
        },
        Err(_) => {
            let f = Failure::Usage(format!(
                "--coefficients needs 4 values ({}), got {}",
                COLUMN_NAMES.join(","),
                args.coefficients.len()
            ));
            return Err(Box::new((f, Some(manifest))));
        }
    };
    manifest.simulation = Some(spec.clone());
    let records = match simulate(&spec) {
        Ok(r) => r,
        Err(e) => return Err(Box::new((e.into(), Some(manifest)))),
    };
    match &args.out {
        None => write_csv(io::stdout().lock(), &records)
            .map_err(|e| Box::new((e.into(), Some(manifest)))),
        Some(path) => finish(manifest, None, || {
            save_csv(path, &records)?;
            let positives = records.iter().filter(|r| r.hiv == 1).count();
            Ok(SimulateSummary {
                out: path.as_path(),
                rows: records.len(),
                positives,
                positive_rate: positives as f64 / records.len() as f64,
            })
        }),
    }
}
