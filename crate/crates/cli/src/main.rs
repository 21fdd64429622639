use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod commands;
mod config;
mod output;
mod reproduce;

use config::{Format, ProblemArgs};

/// Targeted eigenvalues by filtered power iteration.
///
/// Exit codes: 0 converged, 1 bad configuration, 2 iteration limit reached,
/// 3 diverged, 4 reproduction mismatch.
#[derive(Parser)]
#[command(name = "fpower", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Converge to the eigenvalue selected by one filter peak.
    Solve {
        #[command(flatten)]
        problem: ProblemArgs,
        /// Filter peak E_p.
        #[arg(long)]
        ep: f64,
        /// Eigenvector dump path; defaults to `<output stem>.eigenvector.csv` for CSV output.
        #[arg(long)]
        eigenvector: Option<PathBuf>,
    },
    /// Solve over a grid of filter peaks.
    Scan {
        #[command(flatten)]
        problem: ProblemArgs,
        #[arg(long)]
        ep_min: f64,
        #[arg(long)]
        ep_max: f64,
        #[arg(long, default_value_t = 1.0)]
        ep_step: f64,
    },
    /// Rerun a validation table or the 3x3 matrix studies.
    Reproduce {
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=4), required_unless_present = "matrix_figs", conflicts_with = "matrix_figs")]
        table: Option<u8>,
        #[arg(long)]
        matrix_figs: bool,
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long, value_enum)]
        format: Option<Format>,
    },
}

fn run(cli: Cli) -> anyhow::Result<u8> {
    match cli.command {
        Command::Solve { problem, ep, eigenvector } => commands::solve(&problem, ep, eigenvector),
        Command::Scan { problem, ep_min, ep_max, ep_step } => commands::scan(&problem, ep_min, ep_max, ep_step),
        Command::Reproduce { table, matrix_figs, output, format } => {
            let format = format.unwrap_or(match &output {
                Some(p) if p.extension().is_some_and(|e| e == "json") => Format::Json,
                _ => Format::Csv,
            });
            match (table, matrix_figs) {
                (Some(id), _) => reproduce::reproduce_table(id, format, output.as_deref()),
                (None, _) => reproduce::reproduce_matrix(format, output.as_deref()),
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
