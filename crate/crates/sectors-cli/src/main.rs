//! Batch front end: load group specs and measurement scenarios, run the
//! sector analysis or the measurement pipeline, and emit deterministic
//! reports.
//!
//! Exit status: 0 when every verification passes, 1 on input errors
//! (unreadable files, malformed documents, invalid groups or observables),
//! 2 when the run completes but a verification fails.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use sectors_core::report::{
    analysis_to_json, analysis_to_text, measurement_to_json, measurement_to_text, parse_scenario,
    run_measurement_scenario, run_sector_analysis, AnalysisConfig,
};
use sectors_core::{group, Error};

#[derive(Parser)]
#[command(
    name = "sectors",
    about = "Superselection-sector analysis and measurement scenarios for finite symmetry groups"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Subcommand)]
enum Command {
    /// Run the sector analysis of a field system F = M(V) for H ≤ G.
    Analyze {
        /// Path to a group-spec JSON document.
        #[arg(long)]
        group: PathBuf,
        /// Label of the subgroup of unbroken symmetry (from the document).
        #[arg(long)]
        subgroup: String,
        /// Defining representation: "regular" or a '+'-separated list of
        /// irrep labels.
        #[arg(long, default_value = "regular")]
        rep: String,
        /// Residual threshold for the relation checks.
        #[arg(long)]
        tolerance: Option<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output path (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Run a measurement scenario document.
    Measure {
        /// Path to a scenario JSON document.
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(all_pass) => {
            if all_pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(2)
            }
        }
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_class(&err))
        }
    }
}

fn run(cli: Cli) -> Result<bool, Error> {
    match cli.command {
        Command::Analyze {
            group,
            subgroup,
            rep,
            tolerance,
            seed,
            out,
            format,
        } => {
            let text = std::fs::read_to_string(&group)?;
            let doc = group::parse_group_doc(&text)?;
            let config = AnalysisConfig {
                subgroup,
                representation: rep,
                seed,
                threshold: tolerance.unwrap_or(1e-10),
            };
            let report = run_sector_analysis(&doc, &config)?;
            let rendered = match format {
                Format::Json => analysis_to_json(&report)?,
                Format::Text => analysis_to_text(&report),
            };
            emit(&rendered, out.as_deref())?;
            Ok(report.all_pass)
        }
        Command::Measure {
            scenario,
            seed,
            out,
            format,
        } => {
            let text = std::fs::read_to_string(&scenario)?;
            let doc = parse_scenario(&text)?;
            let report = run_measurement_scenario(&doc, seed)?;
            let rendered = match format {
                Format::Json => measurement_to_json(&report)?,
                Format::Text => measurement_to_text(&report),
            };
            emit(&rendered, out.as_deref())?;
            Ok(report.all_pass)
        }
    }
}

fn emit(rendered: &str, out: Option<&std::path::Path>) -> Result<(), Error> {
    match out {
        Some(path) => std::fs::write(path, rendered)?,
        None => print!("{rendered}"),
    }
    Ok(())
}

/// Input problems exit with 1; failures discovered by the verification
/// machinery itself exit with 2.
fn exit_class(err: &Error) -> u8 {
    match err {
        Error::GroupLoad(_)
        | Error::NonAssociative { .. }
        | Error::MissingInverse(_)
        | Error::MissingIdentity
        | Error::NotASubgroup { .. }
        | Error::DimensionMismatch(_)
        | Error::NotSelfAdjoint(_)
        | Error::BadWeights(_)
        | Error::Scenario(_)
        | Error::AbsentIrrep(_)
        | Error::UndefinedOnSpectrum(_)
        | Error::Io(_)
        | Error::Json(_) => 1,
        _ => 2,
    }
}
