//! `qauth`: runs one experiment from a config file and/or flags and writes
//! its report as JSON or CSV.
//!
//! Exit codes: 0 success, 1 invariant or bound violation, 2 config error,
//! 3 capacity error.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qauth_core::experiment::{self, Command, ExperimentConfig, OutputFormat, SchemeSection};
use qauth_core::{Error, EveStrategy, GeneratorSpec, SchemeVariant};
use serde_json::Value;

#[derive(Parser, Debug)]
#[command(name = "qauth", version, about = "Message authentication with conjugate-coded tags: experiments")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Run an authenticated session, optionally under attack.
    Protocol(Common),
    /// Run an attack: lcg-recover, intercept, hoeffding, intercept-recover or breidbart.
    Attack {
        strategy: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Evaluate a bound: equivocation, holevo, continuity, block-length or tag-secrecy.
    Bounds {
        #[arg(long)]
        quantity: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Enumerate the hash family and check its universality conditions.
    HashVerify(Common),
    /// Entropy gap along a bias and block-length schedule.
    Sweep(Common),
}

#[derive(Args, Debug, Default)]
struct Common {
    /// Config file, or a previous report whose `config` block is reused.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    #[arg(long, value_parser = parse_variant)]
    variant: Option<SchemeVariant>,
    #[arg(long, value_parser = parse_eve)]
    eve: Option<EveStrategy>,
    /// Generator as JSON, e.g. '{"kind":"lcg","A":251,"a":33,"b":17,"s0":5}'.
    #[arg(long, value_parser = parse_generator)]
    generator: Option<GeneratorSpec>,
    /// `key=value` where value is JSON (bare words are taken as strings).
    #[arg(long = "param", value_parser = parse_param)]
    params: Vec<(String, Value)>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Json,
    Csv,
}

fn parse_variant(s: &str) -> Result<SchemeVariant, String> {
    serde_json::from_value(Value::from(s)).map_err(|e| e.to_string())
}

fn parse_eve(s: &str) -> Result<EveStrategy, String> {
    serde_json::from_value(Value::from(s)).map_err(|e| e.to_string())
}

fn parse_generator(s: &str) -> Result<GeneratorSpec, String> {
    serde_json::from_str(s).map_err(|e| e.to_string())
}

fn parse_param(s: &str) -> Result<(String, Value), String> {
    let (key, raw) = s.split_once('=').ok_or("expected key=value")?;
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::from(raw));
    Ok((key.to_string(), value))
}

fn build_config(command: Command, common: Common, extra: Vec<(String, Value)>) -> Result<ExperimentConfig, Error> {
    let mut config = match &common.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| Error::config("config", format!("cannot read {}: {e}", path.display())))?;
            let mut c = ExperimentConfig::from_json(&text)?;
            c.command = command;
            c
        }
        None => {
            let mut c = ExperimentConfig::new(command, 0);
            c.seed = None;
            c
        }
    };
    if common.seed.is_some() {
        config.seed = common.seed;
    }
    if common.m.is_some() {
        config.m = common.m;
    }
    if common.k.is_some() {
        config.k = common.k;
    }
    if common.trials.is_some() {
        config.trials = common.trials;
    }
    if common.out.is_some() {
        config.out = common.out;
    }
    if let Some(f) = common.format {
        config.format = match f {
            Format::Json => OutputFormat::Json,
            Format::Csv => OutputFormat::Csv,
        };
    }
    if common.generator.is_some() {
        config.generator = common.generator;
    }
    if let Some(variant) = common.variant {
        let section = config.scheme.get_or_insert(SchemeSection {
            variant,
            fixed_hash_key: None,
            eve: EveStrategy::None,
            key_budget: None,
        });
        section.variant = variant;
    }
    if let Some(eve) = common.eve {
        match config.scheme.as_mut() {
            Some(section) => section.eve = eve,
            None => return Err(Error::config("scheme", "--eve needs a scheme; pass --variant")),
        }
    }
    config.params.extend(extra);
    config.params.extend(common.params);
    Ok(config)
}

/// Writes through a temporary file in the destination directory and renames
/// it into place.
fn write_atomic(path: &Path, contents: &str) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents.as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

fn execute(config: &ExperimentConfig) -> Result<i32, Error> {
    let report = experiment::run(config)?;
    let mut text = report.render()?;
    if !text.ends_with('\n') {
        text.push('\n');
    }
    match &config.out {
        Some(path) => write_atomic(path, &text)
            .map_err(|e| Error::config("out", format!("cannot write {}: {e}", path.display())))?,
        None => print!("{text}"),
    }
    for v in &report.violations {
        eprintln!("violation: {v}");
    }
    Ok(report.exit_code())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let built = match cli.command {
        Cmd::Protocol(c) => build_config(Command::Protocol, c, Vec::new()),
        Cmd::Attack { strategy, common } => {
            let extra = strategy.map(|s| ("attack".to_string(), Value::from(s))).into_iter().collect();
            build_config(Command::Attack, common, extra)
        }
        Cmd::Bounds { quantity, common } => {
            let extra = quantity.map(|q| ("quantity".to_string(), Value::from(q))).into_iter().collect();
            build_config(Command::Bounds, common, extra)
        }
        Cmd::HashVerify(c) => build_config(Command::HashVerify, c, Vec::new()),
        Cmd::Sweep(c) => build_config(Command::Sweep, c, Vec::new()),
    };
    let code = match built.and_then(|c| execute(&c)) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            experiment::error_exit_code(&e)
        }
    };
    ExitCode::from(code as u8)
}
