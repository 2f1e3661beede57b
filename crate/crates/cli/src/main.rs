//! `premia`: run premium-principle computations on a scenario file.
//!
//! Exit codes: 0 success, 1 invalid input, 2 numerical failure, 3 a check
//! evaluated false under `--strict`.

mod commands;
mod error;
mod scenario;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use commands::{Command, Options};
use error::CliError;
use scenario::Scenario;

#[derive(Debug, Parser)]
#[command(name = "premia", version, about = "Premium principles: pricing, decomposition, duality and market checks")]
struct Cli {
    /// Scenario file (JSON, schema 1).
    #[arg(short, long, global = true)]
    scenario: Option<PathBuf>,

    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    format: Format,

    /// Solver tolerance; pass/fail checks use 100× this value.
    #[arg(long, default_value_t = 1e-8, global = true)]
    tol: f64,

    /// Seed for every sampled check.
    #[arg(long, default_value_t = 1, global = true)]
    seed: u64,

    /// Cross-check against the lattice oracle (at most 3 states).
    #[arg(long, global = true)]
    oracle: bool,

    /// Exit with status 3 when an invariant or statement evaluates false.
    #[arg(long, global = true)]
    strict: bool,

    #[command(subcommand)]
    command: Cmd,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Premium H(X).
    Price { principle: String, claim: String },
    /// Split H(X) into R_Max(X) and D_Min(X).
    Decompose { principle: String, claim: String },
    /// Dual R_Max of a claim, or the conjugate H*(Q) of a measure.
    Dual { principle: String, target: String },
    /// Superhedging price and portfolio.
    Hedge { market: String, claim: String },
    /// Consistency of a sublinear principle with a market.
    Consistency { principle: String, market: String },
    /// Sampled axiom checks.
    Axioms { principle: String },
    /// Dominance, law invariance and safety loading under a measure.
    Lawinv { principle: String, measure: String },
}

impl From<Cmd> for Command {
    fn from(c: Cmd) -> Self {
        match c {
            Cmd::Price { principle, claim } => Command::Price { principle, claim },
            Cmd::Decompose { principle, claim } => Command::Decompose { principle, claim },
            Cmd::Dual { principle, target } => Command::Dual { principle, target },
            Cmd::Hedge { market, claim } => Command::Hedge { market, claim },
            Cmd::Consistency { principle, market } => Command::Consistency { principle, market },
            Cmd::Axioms { principle } => Command::Axioms { principle },
            Cmd::Lawinv { principle, measure } => Command::Lawinv { principle, measure },
        }
    }
}

fn execute(cli: Cli) -> Result<(String, bool), CliError> {
    let path = cli.scenario.ok_or_else(|| CliError::Validation {
        field: "--scenario".into(),
        reason: "a scenario file is required".into(),
    })?;
    let text = std::fs::read_to_string(&path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let scenario = Scenario::parse(&text)?;
    let opts = Options {
        tol: cli.tol,
        seed: cli.seed,
        oracle: cli.oracle,
    };
    let report = commands::run(&scenario, &cli.command.into(), &opts)?;
    let out = match cli.format {
        Format::Json => serde_json::to_string_pretty(&report.json).expect("reports serialize") + "\n",
        Format::Text => report.text,
    };
    Ok((out, report.check_failed))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let strict = cli.strict;
    match execute(cli) {
        Ok((out, check_failed)) => {
            print!("{out}");
            if strict && check_failed {
                eprintln!("premia: a check evaluated false (--strict)");
                ExitCode::from(3)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e) => {
            eprintln!("premia: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
