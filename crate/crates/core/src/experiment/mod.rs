//! Config-driven experiments and machine-readable reports.
//!
//! A config names one command and carries everything the command needs,
//! including the master seed. Running it yields an [`ExperimentReport`]
//! whose `config` block re-runs to the same report.

mod commands;
mod flatten;

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::time::Instant;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::bits::BitBlock;
use crate::bitsource::GeneratorSpec;
use crate::bounds::BoundReport;
use crate::error::{Error, Result};
use crate::protocol::{EveStrategy, SchemeVariant};

pub use commands::{cmd_attack, cmd_bounds, cmd_hash_verify, cmd_protocol, cmd_sweep};
pub use flatten::{flatten_json, to_csv};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Protocol,
    Attack,
    Bounds,
    HashVerify,
    Sweep,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemeSection {
    pub variant: SchemeVariant,
    /// Pre-shared hash key; derived from the master seed when omitted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fixed_hash_key: Option<BitBlock>,
    #[serde(default)]
    pub eve: EveStrategy,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub key_budget: Option<u64>,
}

/// One experiment. Unset optional fields fall back to per-command defaults;
/// command-specific knobs live in `params`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub command: Command,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scheme: Option<SchemeSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator: Option<GeneratorSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trials: Option<u64>,
    pub seed: Option<u64>,
    /// Destination of the report; not echoed, so a report re-runs anywhere.
    #[serde(default, skip_serializing)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub format: OutputFormat,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub params: BTreeMap<String, Value>,
}

impl ExperimentConfig {
    pub fn new(command: Command, seed: u64) -> Self {
        ExperimentConfig {
            command,
            scheme: None,
            generator: None,
            m: None,
            k: None,
            trials: None,
            seed: Some(seed),
            out: None,
            format: OutputFormat::Json,
            params: BTreeMap::new(),
        }
    }

    /// Parses a config, or the `config` block of a report.
    pub fn from_json(text: &str) -> Result<Self> {
        let value: Value = serde_json::from_str(text).map_err(|e| {
            Error::config(
                format!("line {} column {}", e.line(), e.column()),
                e.to_string(),
            )
        })?;
        Self::from_value(value)
    }

    pub fn from_value(mut value: Value) -> Result<Self> {
        if let Some(obj) = value.as_object_mut() {
            if !obj.contains_key("command") {
                if let Some(inner) = obj.remove("config") {
                    value = inner;
                }
            }
        }
        serde_path_to_error::deserialize(value).map_err(|e| {
            let path = e.path().to_string();
            Error::config(path, e.into_inner().to_string())
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.seed.is_none() {
            return Err(Error::config("seed", "a master seed is required"));
        }
        Ok(())
    }

    pub fn master_seed(&self) -> Result<u64> {
        self.seed.ok_or_else(|| Error::config("seed", "a master seed is required"))
    }

    pub fn require_k(&self) -> Result<usize> {
        self.k.ok_or_else(|| Error::config("k", "block length is required"))
    }

    pub fn require_m(&self) -> Result<usize> {
        self.m.ok_or_else(|| Error::config("m", "message length is required"))
    }

    /// `params.<name>`, or `default` when absent.
    pub fn param<T: DeserializeOwned>(&self, name: &str, default: T) -> Result<T> {
        match self.params.get(name) {
            None => Ok(default),
            Some(v) => serde_json::from_value(v.clone())
                .map_err(|e| Error::config(format!("params.{name}"), e.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub elapsed_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub version: String,
    pub config: ExperimentConfig,
    pub results: Value,
    pub bounds: Vec<BoundReport>,
    pub violations: Vec<String>,
    pub timing: Timing,
}

impl ExperimentReport {
    pub(crate) fn new(config: &ExperimentConfig, results: Value, bounds: Vec<BoundReport>) -> Self {
        let violations = bounds
            .iter()
            .filter(|b| !b.satisfied)
            .map(|b| format!("{}: value {} against bound {}", b.name, b.value, b.bound))
            .collect();
        ExperimentReport {
            version: VERSION.to_string(),
            config: config.clone(),
            results,
            bounds,
            violations,
            timing: Timing { elapsed_seconds: 0.0 },
        }
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Invariant(e.to_string()))
    }

    pub fn to_csv(&self) -> Result<String> {
        let value = serde_json::to_value(self).map_err(|e| Error::Invariant(e.to_string()))?;
        to_csv(&value)
    }

    pub fn render(&self) -> Result<String> {
        match self.config.format {
            OutputFormat::Json => self.to_json(),
            OutputFormat::Csv => self.to_csv(),
        }
    }

    /// The report as JSON with the `timing` block removed.
    pub fn without_timing(&self) -> Result<Value> {
        let mut value = serde_json::to_value(self).map_err(|e| Error::Invariant(e.to_string()))?;
        if let Some(obj) = value.as_object_mut() {
            obj.remove("timing");
        }
        Ok(value)
    }

    pub fn exit_code(&self) -> i32 {
        if self.violations.is_empty() {
            0
        } else {
            1
        }
    }
}

/// 1 for invariant violations, 2 for bad configs or arguments, 3 for
/// capacity limits.
pub fn error_exit_code(error: &Error) -> i32 {
    match error {
        Error::Invariant(_) | Error::NotHermitian(_) | Error::InvalidTrace(_) | Error::FunctionalDependence(_) => 1,
        Error::Capacity(_) | Error::KeyExhausted { .. } => 3,
        _ => 2,
    }
}

pub fn run(config: &ExperimentConfig) -> Result<ExperimentReport> {
    config.validate()?;
    let start = Instant::now();
    let mut report = match config.command {
        Command::Protocol => cmd_protocol(config),
        Command::Attack => cmd_attack(config),
        Command::Bounds => cmd_bounds(config),
        Command::HashVerify => cmd_hash_verify(config),
        Command::Sweep => cmd_sweep(config),
    }?;
    report.timing.elapsed_seconds = start.elapsed().as_secs_f64();
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn missing_seed_is_a_config_error() {
        let c = ExperimentConfig::from_json(r#"{"command":"bounds","k":2}"#).unwrap();
        let e = run(&c).unwrap_err();
        assert!(matches!(&e, Error::Config { field, .. } if field == "seed"));
        assert_eq!(error_exit_code(&e), 2);
    }

    #[test]
    fn field_diagnostics() {
        let e = ExperimentConfig::from_json(r#"{"command":"protocol","seed":1,"scheme":{"variant":"nope"}}"#)
            .unwrap_err();
        assert!(matches!(&e, Error::Config { field, .. } if field == "scheme.variant"), "{e}");
        let e = ExperimentConfig::from_json("{\n\"command\": }").unwrap_err();
        assert!(matches!(&e, Error::Config { field, .. } if field.starts_with("line 2")), "{e}");
        let e = ExperimentConfig::from_json(r#"{"command":"bounds","seed":1,"bogus":3}"#).unwrap_err();
        assert!(e.to_string().contains("bogus"), "{e}");
    }

    #[test]
    fn report_config_block_is_accepted() {
        let mut c = ExperimentConfig::new(Command::HashVerify, 5);
        c.m = Some(3);
        c.k = Some(2);
        let r = run(&c).unwrap();
        let text = r.to_json().unwrap();
        let back = ExperimentConfig::from_json(&text).unwrap();
        assert_eq!(back, c);
        assert_eq!(run(&back).unwrap().without_timing().unwrap(), r.without_timing().unwrap());
    }

    #[test]
    fn params_are_typed() {
        let mut c = ExperimentConfig::new(Command::Bounds, 1);
        c.params.insert("eps".into(), Value::from("x"));
        assert!(matches!(c.param::<f64>("eps", 0.1), Err(Error::Config { .. })));
        assert_eq!(c.param::<f64>("delta", 0.1).unwrap(), 0.1);
    }
}
