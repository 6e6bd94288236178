//! `condquant`: exact and numerical quantization results for the two
//! condensation-measure presets, as JSON (and CSV for tables).
//!
//! Exit codes: 0 on success, 1 when a verification check fails or a
//! computation errors, 2 on bad usage.

mod commands;
mod output;

use clap::{Parser, Subcommand, ValueEnum};
use commands::CommandError;
use condquant::verify::VerifyOptions;
use condquant::{Preset, Rational};
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser, Debug)]
#[command(name = "condquant", version, about = "Optimal quantization of condensation measures")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Measure {
    Discrete,
    Uniform,
}

impl From<Measure> for Preset {
    fn from(m: Measure) -> Self {
        match m {
            Measure::Discrete => Preset::Discrete,
            Measure::Uniform => Preset::Uniform,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Suite {
    /// The published reference results.
    Paper,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Exact means and variances of P and ν.
    Moments {
        #[arg(long)]
        measure: Measure,
    },
    /// Constructed n-point codebook with its exact error and optimality tag.
    Construct {
        #[arg(long)]
        measure: Measure,
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        n: u64,
        /// Also write the points as CSV.
        #[arg(long, value_name = "PATH")]
        csv: Option<PathBuf>,
    },
    /// Multi-start Lloyd and the dynamic-programming oracle for n-means.
    Solve {
        #[arg(long)]
        measure: Measure,
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..=64))]
        n: u64,
        #[arg(long, default_value_t = 20, value_parser = clap::value_parser!(u64).range(1..=10_000))]
        restarts: u64,
        /// Discretisation depth of the DP oracle (Lloyd uses the exact region tree).
        #[arg(long, default_value_t = 8, value_parser = clap::value_parser!(u32).range(1..=12))]
        depth: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Quantization-dimension estimates along the F(n) closed forms.
    Dimension {
        #[arg(long)]
        measure: Measure,
        #[arg(long)]
        max_level: u32,
        /// Also write `n, V_n, d_n, coeff` as CSV.
        #[arg(long, value_name = "PATH")]
        csv: Option<PathBuf>,
    },
    /// Quantization-coefficient subsequences and their limits.
    Coefficients {
        #[arg(long)]
        measure: Measure,
        #[arg(long)]
        max_level: u32,
        /// Also write `n, V_n, d_n, coeff` as CSV.
        #[arg(long, value_name = "PATH")]
        csv: Option<PathBuf>,
    },
    /// Run the regression checks and print a pass/fail table.
    Verify {
        #[arg(long)]
        suite: Suite,
        /// Comma-separated criterion numbers to run (default: all).
        #[arg(long, value_delimiter = ',', value_parser = clap::value_parser!(u8).range(1..=10))]
        only: Vec<u8>,
        /// Negative control: add this rational to the computed discrete V(P).
        #[arg(long, hide = true, value_parser = parse_rational)]
        perturb_variance: Option<Rational>,
    },
}

fn parse_rational(s: &str) -> Result<Rational, String> {
    s.parse::<Rational>().map_err(|e| format!("not a rational: {e}"))
}

fn run(cli: Cli) -> Result<(String, bool), CommandError> {
    let ok = |s: String| Ok((s, true));
    match cli.command {
        Command::Moments { measure } => ok(commands::moments(measure.into())?),
        Command::Construct { measure, n, csv } => ok(commands::construct(measure.into(), n, csv.as_deref())?),
        Command::Solve { measure, n, restarts, depth, seed } => {
            ok(commands::solve(measure.into(), n as usize, restarts as usize, depth, seed)?)
        }
        Command::Dimension { measure, max_level, csv } => {
            ok(commands::dimension(measure.into(), max_level, csv.as_deref())?)
        }
        Command::Coefficients { measure, max_level, csv } => {
            ok(commands::coefficients(measure.into(), max_level, csv.as_deref())?)
        }
        Command::Verify { suite: Suite::Paper, only, perturb_variance } => {
            commands::verify(&only, &VerifyOptions { perturb_variance })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok((out, passed)) => {
            // A closed pipe (e.g. `| head`) is not an error worth reporting.
            let _ = writeln!(std::io::stdout().lock(), "{}", out.trim_end());
            if passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(CommandError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CommandError::Failed(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
