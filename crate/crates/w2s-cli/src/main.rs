//! `w2s` — command-line front end for the W2SG representation-kernel
//! experiments.
//!
//! Commands (all driven by a TOML config file):
//!   gen       write synthetic dataset file(s)
//!   fit       fit the weak/W2S/ceiling heads and emit evaluation JSON
//!   metric    compute the label-free metric report for a model pair
//!   validate  {thm31|benign|pythagoras} numeric theory checks
//!   sweep     metric-vs-error sweep over a weak-model grid (CSV + JSON)
//!   report    render a sweep CSV as an SVG scatter plot
//!
//! Exit codes: 1 usage, 2 config validation, 3 data/io, 4 numerical.

use std::path::PathBuf;
use std::process::ExitCode;

mod commands;
mod config;
mod jsonfmt;
mod svg;

use config::RunConfig;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Config(String),
    Data(String),
    Numerical(String),
}

impl From<w2s_core::Error> for CliError {
    fn from(e: w2s_core::Error) -> Self {
        use w2s_core::Error as E;
        match e {
            E::ConfigViolation(_) | E::PreconditionRatioViolated { .. } => {
                CliError::Config(e.to_string())
            }
            E::Io(_)
            | E::BadMagic
            | E::VersionMismatch(_)
            | E::TruncatedFile
            | E::NonFiniteEntry
            | E::DimensionMismatch(_)
            | E::LengthMismatch(_, _)
            | E::LabelMismatch
            | E::MissingPopulation
            | E::MissingTestSplit
            | E::MissingColumn(_)
            | E::EmptySweep => CliError::Data(e.to_string()),
            E::LinAlg(_)
            | E::NonPsd
            | E::ConstantInput
            | E::SpaceMismatch
            | E::EmptySubspace
            | E::DegenerateData(_) => CliError::Numerical(e.to_string()),
        }
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Config(_) => 2,
            CliError::Data(_) => 3,
            CliError::Numerical(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m)
            | CliError::Config(m)
            | CliError::Data(m)
            | CliError::Numerical(m) => m,
        }
    }
}

const USAGE: &str = "usage: w2s <command> [subcommand] --config <path>

commands:
  gen                       generate dataset file(s)
  fit                       fit the three heads, emit evaluation JSON
  metric                    emit the label-free metric report
  validate <thm31|benign|pythagoras>
                            run a numeric theory check
  sweep                     run the metric-vs-error sweep (CSV + JSON)
  report                    render a sweep CSV as an SVG scatter plot";

struct Args {
    command: String,
    subcommand: Option<String>,
    config: PathBuf,
}

fn parse_args(argv: &[String]) -> Result<Args, CliError> {
    if argv.is_empty() {
        return Err(CliError::Usage(USAGE.into()));
    }
    let command = argv[0].clone();
    let known = ["gen", "fit", "metric", "validate", "sweep", "report"];
    if !known.contains(&command.as_str()) {
        return Err(CliError::Usage(format!(
            "unknown command {command:?}\n\n{USAGE}"
        )));
    }
    let mut rest = &argv[1..];
    let subcommand = if command == "validate" {
        let sub = rest
            .first()
            .filter(|s| !s.starts_with("--"))
            .cloned()
            .ok_or_else(|| {
                CliError::Usage(
                    "validate requires a subcommand: thm31 | benign | pythagoras".into(),
                )
            })?;
        if !["thm31", "benign", "pythagoras"].contains(&sub.as_str()) {
            return Err(CliError::Usage(format!(
                "unknown validate subcommand {sub:?}"
            )));
        }
        rest = &rest[1..];
        Some(sub)
    } else {
        None
    };
    let mut config: Option<PathBuf> = None;
    let mut i = 0;
    while i < rest.len() {
        match rest[i].as_str() {
            "--config" => {
                let v = rest
                    .get(i + 1)
                    .ok_or_else(|| CliError::Usage("--config requires a path".into()))?;
                config = Some(PathBuf::from(v));
                i += 2;
            }
            other => {
                return Err(CliError::Usage(format!(
                    "unknown argument {other:?}\n\n{USAGE}"
                )));
            }
        }
    }
    let config = config.ok_or_else(|| CliError::Usage(format!("missing --config\n\n{USAGE}")))?;
    Ok(Args {
        command,
        subcommand,
        config,
    })
}

fn run(argv: &[String]) -> Result<(), CliError> {
    let args = parse_args(argv)?;
    if !args.config.exists() {
        return Err(CliError::Config(format!(
            "config file not found: {}",
            args.config.display()
        )));
    }
    let cfg = RunConfig::load(&args.config)?;
    match args.command.as_str() {
        "gen" => commands::cmd_gen(&cfg),
        "fit" => commands::cmd_fit(&cfg),
        "metric" => commands::cmd_metric(&cfg),
        "validate" => commands::cmd_validate(&cfg, args.subcommand.as_deref().unwrap()),
        "sweep" => commands::cmd_sweep(&cfg),
        "report" => commands::cmd_report(&cfg),
        _ => unreachable!("parse_args vets the command"),
    }
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().skip(1).collect();
    match run(&argv) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("w2s: {}", e.message());
            ExitCode::from(e.exit_code())
        }
    }
}
