use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use liveplan_cli::commands::{
    cmd_explain, cmd_generate, cmd_metrics, cmd_verify, OutputFormat, VerifyCaps,
};

/// Deterministic test plan generation for live testing of cloud services.
#[derive(Parser)]
#[command(name = "liveplan", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Json,
}

impl From<Format> for OutputFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Text => OutputFormat::Text,
            Format::Json => OutputFormat::Json,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate plan.json and metrics.json from an input bundle.
    Generate {
        /// Directory holding the input bundle documents.
        #[arg(long)]
        input: PathBuf,
        /// Where to write the plan document.
        #[arg(long)]
        out: PathBuf,
        /// Where to write the metrics document (default: metrics.json next
        /// to the plan).
        #[arg(long)]
        metrics_out: Option<PathBuf>,
        /// Randomize the similarity ordering's start case.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Check a plan against the bundle it was generated from.
    Verify {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        plan: PathBuf,
        /// Largest run set the minimality oracle will brute-force.
        #[arg(long, default_value_t = 200)]
        oracle_cap_runs: usize,
        /// Largest grouping the ordering oracle will brute-force.
        #[arg(long, default_value_t = 8)]
        oracle_cap_cases: usize,
    },
    /// Print the cost summary of a plan.
    Metrics {
        #[arg(long)]
        plan: PathBuf,
        /// Input bundle; enables the wall-time estimate and outage columns.
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Print the groupings and method decisions recorded in a plan.
    Explain {
        #[arg(long)]
        plan: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Generate {
            input,
            out,
            metrics_out,
            seed,
        } => cmd_generate(&input, &out, metrics_out.as_deref(), seed),
        Command::Verify {
            input,
            plan,
            oracle_cap_runs,
            oracle_cap_cases,
        } => cmd_verify(
            &input,
            &plan,
            VerifyCaps {
                runs: oracle_cap_runs,
                cases: oracle_cap_cases,
            },
        ),
        Command::Metrics {
            plan,
            input,
            format,
        } => cmd_metrics(&plan, input.as_deref(), format.into()),
        Command::Explain { plan } => cmd_explain(&plan),
    };
    ExitCode::from(code as u8)
}
