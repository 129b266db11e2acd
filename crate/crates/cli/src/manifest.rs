use chrono::{DateTime, SecondsFormat, Utc};
use logitboot::data_io::SimulationSpec;
use serde::Serialize;

use crate::args::CiMethod;

#[derive(Debug, Default, Serialize)]
pub struct ConfigEcho {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_iterations: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub replicates: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ci_level: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ci_method: Option<CiMethod>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub splits: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub train_count: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub shuffle_seed: Option<u64>,
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub subcommand: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub simulation: Option<SimulationSpec>,
    pub config: ConfigEcho,
    pub tool_version: &'static str,
    pub timestamp: String,
}

impl RunManifest {
    pub fn new(subcommand: &'static str, config: ConfigEcho) -> Self {
        Self {
            subcommand,
            input: None,
            simulation: None,
            config,
            tool_version: env!("CARGO_PKG_VERSION"),
            timestamp: timestamp(),
        }
    }
}

/// UTC time of the run, or `SOURCE_DATE_EPOCH` when set so that reruns
/// produce identical output.
fn timestamp() -> String {
    let fixed = std::env::var("SOURCE_DATE_EPOCH")
        .ok()
        .and_then(|s| s.trim().parse::<i64>().ok())
        .and_then(|secs| DateTime::from_timestamp(secs, 0));
    fixed
        .unwrap_or_else(Utc::now)
        .to_rfc3339_opts(SecondsFormat::Secs, true)
}
