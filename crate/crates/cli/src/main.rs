//! `toda`: spectral transforms, coordinate charts, flows and invariant
//! checks for finite Jacobi matrices.

use std::fs::File;
use std::io::{self, Write};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

mod commands;
mod input;

use input::Input;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] toda_core::Error),
    #[error("{0}")]
    Input(String),
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("verification failed: {0}")]
    Verify(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(toda_core::Error::NotHerglotzInput(..))
            | CliError::Core(toda_core::Error::NotHerglotz(_)) => 3,
            CliError::Verify(_) => 1,
            _ => 2,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "toda",
    version,
    about = "Jacobi matrices, Weyl functions and Toda flows"
)]
struct Cli {
    /// Input document: a path, inline JSON, or `-` for stdin. Without it a
    /// random matrix is drawn from `--seed` and `--N`.
    #[arg(long = "in", global = true)]
    input: Option<String>,
    /// Output path; stdout if absent.
    #[arg(long, global = true)]
    out: Option<String>,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[arg(long = "N", global = true, default_value_t = 4)]
    n: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Cf,
    Lanczos,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FamilyArg {
    #[value(name = "H")]
    H,
    #[value(name = "T")]
    T,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ChartArg {
    Restricted,
    Unrestricted,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Eigenvalues, weights and divisor of a matrix.
    Spectrum,
    /// Pole-residue form and polynomial quotient of the Weyl function.
    Weyl,
    /// Rebuild the matrix from spectral data or a quotient.
    Reconstruct {
        #[arg(long, value_enum, default_value_t = Method::Both)]
        method: Method,
    },
    /// Action-angle and divisor-quasimomentum coordinates.
    Coords,
    /// Sample a Hamiltonian flow as JSON lines (or CSV).
    Flow {
        #[arg(long, value_enum, default_value_t = FamilyArg::H)]
        family: FamilyArg,
        #[arg(long, default_value_t = 2)]
        j: usize,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        t0: f64,
        #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
        t1: f64,
        #[arg(long, default_value_t = 11)]
        samples: usize,
        #[arg(long)]
        emit_csv: bool,
    },
    /// `{w(λ), w(μ)}` from the closed formula and from the tensor.
    Bracket {
        #[arg(long, allow_negative_numbers = true)]
        lambda: f64,
        #[arg(long, allow_negative_numbers = true)]
        mu: f64,
        #[arg(long, value_enum, default_value_t = ChartArg::Restricted)]
        chart: ChartArg,
    },
    /// Run an invariant suite: roundtrip, traces, brackets, canonical, dual, flows or all.
    Verify {
        #[arg(long, default_value = "all")]
        suite: String,
        /// Replace every threshold.
        #[arg(long)]
        tol: Option<f64>,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    let load = || Input::load(cli.input.as_deref(), cli.seed, cli.n);
    let text = match cli.command {
        Command::Spectrum => commands::spectrum(&load()?)?,
        Command::Weyl => commands::weyl(&load()?)?,
        Command::Reconstruct { method } => commands::reconstruct(&load()?, method)?,
        Command::Coords => commands::coords(&load()?)?,
        Command::Flow {
            family,
            j,
            t0,
            t1,
            samples,
            emit_csv,
        } => commands::flow(&load()?, family, j, t0, t1, samples, emit_csv)?,
        Command::Bracket { lambda, mu, chart } => commands::bracket(&load()?, lambda, mu, chart)?,
        Command::Verify { suite, tol } => {
            let (text, failed) = commands::verify(&suite, cli.seed, cli.n, tol)?;
            emit(cli.out.as_deref(), &text)?;
            return match failed {
                Some(msg) => Err(CliError::Verify(msg)),
                None => Ok(()),
            };
        }
    };
    emit(cli.out.as_deref(), &text)
}

fn emit(out: Option<&str>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => File::create(path)?.write_all(text.as_bytes())?,
        None => io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter("TODA_LOG")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("toda: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
