//! Configuration plumbing: an optional JSON config file whose keys mirror
//! the long CLI flags, merged with the flags actually given (flags win),
//! then filled with explicit defaults.
//!
//! Every runner embeds its fully resolved configuration into the artifacts
//! it writes, so an artifact alone suffices to reproduce itself.

use crate::error::CliError;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

/// Values a `--config <file>` may provide. A flat object; unknown keys are
/// rejected so a typo cannot silently fall back to a default.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct FileConfig {
    pub gfn: Option<String>,
    pub init: Option<String>,
    pub init_a: Option<String>,
    pub init_b: Option<String>,
    pub steps: Option<u64>,
    pub paths: Option<u64>,
    pub seed: Option<u64>,
    pub depth: Option<usize>,
    pub truncation: Option<usize>,
    pub starts: Option<usize>,
    pub tol: Option<f64>,
    pub window: Option<i64>,
    pub n_max: Option<u64>,
    pub points: Option<usize>,
    pub contexts: Option<usize>,
    pub proposals: Option<u64>,
    pub target: Option<String>,
    pub source: Option<String>,
    pub base: Option<String>,
    pub out: Option<PathBuf>,
    pub label: Option<String>,
    pub no_timestamp: Option<bool>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else { return Ok(FileConfig::default()) };
        let text = std::fs::read_to_string(path).map_err(|e| {
            CliError::Config(format!("cannot read config file {}: {e}", path.display()))
        })?;
        serde_json::from_str(&text).map_err(|e| {
            CliError::Config(format!("config file {}: {e}", path.display()))
        })
    }
}

/// Flag beats file beats hard default.
pub fn pick<T>(flag: Option<T>, file: Option<T>, default: T) -> T {
    flag.or(file).unwrap_or(default)
}

/// Flag beats file; absence of both is a config error.
pub fn pick_required<T>(flag: Option<T>, file: Option<T>, name: &str) -> Result<T, CliError> {
    flag.or(file)
        .ok_or_else(|| CliError::Config(format!("missing required value --{name}")))
}

// ---------------------------------------------------------------------------
// Resolved per-command configurations (every default made explicit)
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct SimulateConfig {
    pub gfn: String,
    pub init: String,
    pub steps: u64,
    pub seed: u64,
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct HellingerConfig {
    pub gfn: String,
    pub init_a: String,
    pub init_b: String,
    pub paths: u64,
    pub steps: u64,
    pub seed: u64,
    pub tol: f64,
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct SvarConfig {
    pub gfn: String,
    pub n_max: u64,
    pub points: usize,
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct TransferConfig {
    pub gfn: String,
    pub depth: usize,
    /// Number of retained symbols; resolved against the alphabet when the
    /// user does not pin it.
    pub truncation: usize,
    pub starts: usize,
    pub tol: f64,
    pub seed: u64,
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct EscapeConfig {
    pub gfn: String,
    pub init: String,
    pub steps: u64,
    pub paths: u64,
    pub window: i64,
    pub seed: u64,
}

/// Where an envelope comes from on the command line.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum EnvelopeSource {
    /// The family's own shipped certificate.
    Builtin,
    /// Derived from the family's uniform log-ratio bound at a base context.
    Var1,
}

impl EnvelopeSource {
    pub fn parse(s: &str) -> Result<Self, CliError> {
        match s {
            "builtin" => Ok(EnvelopeSource::Builtin),
            "var1" => Ok(EnvelopeSource::Var1),
            other => Err(CliError::Config(format!(
                "unknown envelope source {other:?} (expected builtin or var1)"
            ))),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct EnvelopeConfig {
    pub gfn: String,
    pub source: EnvelopeSource,
    /// Base context for the var1 derivation (ignored for builtin).
    pub base: String,
    pub contexts: usize,
    pub seed: u64,
    pub tol: f64,
    /// When positive, measure the rejection sampler at `target` with this
    /// many draws.
    pub proposals: u64,
    pub target: String,
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct CheckConfig {
    pub gfn: String,
    pub contexts: usize,
    pub seed: u64,
    pub tol: f64,
}
