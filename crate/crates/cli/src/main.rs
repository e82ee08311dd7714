mod commands;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use envadj::io::DataFormat;
use envadj::{Direction, TiePolicy};

/// Global envelope tests and pointwise adjusted permutation p-values.
#[derive(Debug, Parser)]
#[command(name = "envadj", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Adjust p-values for a precomputed ensemble of statistic curves.
    Adjust {
        /// CSV: grid points on line 1, observed curve on line 2, permuted curves after.
        curves: PathBuf,
        #[command(flatten)]
        ranking: Ranking,
        /// Output directory.
        #[arg(short = 'o', long = "output")]
        output: PathBuf,
    },
    /// Permutation test for two-group functional data.
    Test {
        /// CSV of subjects with 0/1 group labels.
        data: PathBuf,
        #[command(flatten)]
        ranking: Ranking,
        /// Number of curves including the observed one.
        #[arg(short = 'M', default_value_t = 4000)]
        n_curves: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "wide")]
        format: DataFormat,
        #[arg(short = 'o', long = "output")]
        output: PathBuf,
    },
    /// Draw the curves, the level-alpha envelope and the adjusted p-values as SVG.
    Plot {
        report: PathBuf,
        curves: PathBuf,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        /// Output SVG file.
        #[arg(short = 'o', long = "output")]
        output: PathBuf,
    },
    /// Monte Carlo estimate of family-wise error rates.
    Simulate(commands::SimulateArgs),
}

#[derive(Debug, Args)]
struct Ranking {
    #[arg(long, default_value = "two-sided")]
    direction: Direction,
    #[arg(long = "ties", default_value = "strict")]
    ties: TiePolicy,
}

fn configure_threads() {
    if let Some(n) = std::env::var("ENVADJ_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&n| n > 0)
    {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    configure_threads();
    let result = match cli.command {
        Command::Adjust {
            curves,
            ranking,
            output,
        } => commands::adjust(&curves, ranking.direction, ranking.ties, &output),
        Command::Test {
            data,
            ranking,
            n_curves,
            seed,
            format,
            output,
        } => commands::test(&commands::TestArgs {
            data: &data,
            direction: ranking.direction,
            ties: ranking.ties,
            n_curves,
            seed,
            format,
            output: &output,
        }),
        Command::Plot {
            report,
            curves,
            alpha,
            output,
        } => commands::plot(&report, &curves, alpha, &output),
        Command::Simulate(args) => commands::simulate(&args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("envadj: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
