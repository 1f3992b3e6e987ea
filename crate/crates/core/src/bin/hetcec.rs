use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use hetcec::cli::{
    cmd_oracle, cmd_plan, cmd_run, CliError, ErrorKind, ReportFile, RunOptions, ScenarioFile,
};

#[derive(Parser)]
#[command(
    name = "hetcec",
    version,
    about = "Coded elastic computing planner and simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    scenario: PathBuf,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Field modulus, overriding the scenario.
    #[arg(long)]
    prime: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Optimal loads and row-set plans, without touching data.
    Plan {
        #[command(flatten)]
        common: Common,
        /// Also write the row-set table as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Encode X, run every step and verify the decoded products.
    Run {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        csv: Option<PathBuf>,
        /// CSV matrix of integers, q rows by r columns.
        #[arg(long, conflicts_with = "seed")]
        matrix: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        /// Corrupt one partial result per step.
        #[arg(long)]
        fault_inject: bool,
    },
    /// Compare the solver with an exact LP and re-verify every plan.
    Oracle {
        #[command(flatten)]
        common: Common,
    },
}

fn write_out(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError {
            kind: ErrorKind::Io,
            key: None,
            message: format!("cannot write {}: {e}", p.display()),
            violations: Vec::new(),
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn emit_report(report: &ReportFile, common: &Common, csv: Option<&Path>) -> Result<i32, CliError> {
    write_out(common.out.as_deref(), &report.to_json())?;
    if let Some(path) = csv {
        write_out(Some(path), &report.to_csv())?;
    }
    Ok(report.status().code())
}

fn dispatch(cli: Cli) -> Result<i32, CliError> {
    match cli.command {
        Command::Plan { common, csv } => {
            let file = ScenarioFile::load(&common.scenario)?;
            let report = cmd_plan(&file, common.prime)?;
            emit_report(&report, &common, csv.as_deref())
        }
        Command::Run {
            common,
            csv,
            matrix,
            seed,
            fault_inject,
        } => {
            let file = ScenarioFile::load(&common.scenario)?;
            let opts = RunOptions {
                matrix,
                seed,
                prime: common.prime,
                fault_inject,
            };
            let report = cmd_run(&file, &opts)?;
            emit_report(&report, &common, csv.as_deref())
        }
        Command::Oracle { common } => {
            let file = ScenarioFile::load(&common.scenario)?;
            let report = cmd_oracle(&file, common.prime)?;
            for step in &report.steps {
                eprintln!("{step}");
            }
            write_out(common.out.as_deref(), &report.to_json())?;
            Ok(report.status().code())
        }
    }
}

fn main() -> ExitCode {
    // Usage errors exit 1; code 2 is reserved for infeasible steps.
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match dispatch(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(1)
        }
    }
}
