//! `hstwins`: JSON front end for the twin-observable toolkit.
//!
//! Exit codes: 0 success, 1 invalid input, 2 numerical failure or a matrix
//! that is not a state, 3 usage.

mod commands;
mod io;
mod report;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

const DEFAULT_TOL: f64 = 1e-9;
const DEFAULT_STATE_TOL: f64 = 1e-8;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid input: {0}")]
    Input(String),
    #[error("usage: {0}")]
    Usage(String),
    #[error(transparent)]
    Lib(#[from] hs_twins::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => 1,
            CliError::Usage(_) => 3,
            CliError::Lib(e) if e.is_numerical() => 2,
            CliError::Lib(hs_twins::Error::InvalidState { .. }) => 2,
            CliError::Lib(_) => 1,
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "hstwins", version, about = "Operator Schmidt decompositions and twin observables")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone, Copy)]
pub struct Tols {
    /// Relative rank cutoff and range threshold [default: 1e-9]
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Positivity and trace slack when validating input states
    #[arg(long, global = true, default_value_t = DEFAULT_STATE_TOL)]
    pub state_tol: f64,
}

impl Tols {
    pub fn tol(&self) -> (f64, &'static str) {
        match self.tol {
            Some(t) => (t, "flag"),
            None => (DEFAULT_TOL, "default"),
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Operator Schmidt decomposition of a state
    Osd {
        #[arg(long)]
        input: PathBuf,
        /// Hermitian factors
        #[arg(long)]
        hermitian: bool,
        #[command(flatten)]
        tols: Tols,
    },
    /// Twin space, strength of each basis pair
    Twins {
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        tols: Tols,
    },
    /// Bell-diagonal two-qubit states
    Bell {
        /// Weights of T1, T2, T3, T0
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, global = true, conflicts_with = "t")]
        weights: Option<Vec<f64>>,
        /// Correlation vector t1, t2, t3
        #[arg(long = "t", value_delimiter = ',', allow_hyphen_values = true, global = true)]
        t: Option<Vec<f64>>,
        #[command(subcommand)]
        action: BellAction,
        #[command(flatten)]
        tols: Tols,
    },
    /// Entropic correlation measures for a state and an observable pair
    Info {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        #[command(flatten)]
        tols: Tols,
    },
    /// Biorthogonal grouping of a separable decomposition
    Separable {
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        tols: Tols,
    },
}

#[derive(Subcommand, Debug, Clone, Copy)]
pub enum BellAction {
    Classify,
    Twins,
    Schmidt,
    /// Twin-space dimension over a tetrahedron grid
    Sweep {
        /// Subdivisions per edge
        #[arg(long, default_value_t = 6)]
        grid: usize,
    },
}

fn command_line() -> String {
    std::env::args().skip(1).collect::<Vec<_>>().join(" ")
}

fn run(cli: Cli) -> Result<serde_json::Value, CliError> {
    let echo = command_line();
    match cli.command {
        Command::Osd { input, hermitian, tols } => commands::osd(echo, &input, hermitian, tols),
        Command::Twins { input, tols } => commands::twins(echo, &input, tols),
        Command::Bell { weights, t, action, tols } => commands::bell(echo, weights, t, action, tols),
        Command::Info { input, a, b, tols } => commands::info(echo, &input, &a, &b, tols),
        Command::Separable { input, tols } => commands::separable(echo, &input, tols),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 3 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(report) => {
            let text = serde_json::to_string_pretty(&report).expect("report serializes");
            // a closed pipe is not an error of ours
            let _ = writeln!(std::io::stdout().lock(), "{text}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            if let CliError::Lib(hs_twins::Error::InvalidState { eigenvalues: Some(ev), .. }) = &e {
                eprintln!("eigenvalues: {ev:?}");
            }
            ExitCode::from(e.exit_code())
        }
    }
}
