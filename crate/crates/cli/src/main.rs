//! `streampca`: iterated and exponentially weighted moving PCA on CSV files.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod sidecar;
mod table;

use std::path::PathBuf;
use std::process::ExitCode;

use chrono::NaiveDateTime;
use clap::{Parser, Subcommand};

use commands::{AlphaArg, ChunkSpec, EwmpcaArgs, GeneratorKind, GridSpec, SynthArgs};

#[derive(Parser)]
#[command(
    name = "streampca",
    version,
    about = "Streaming PCA on CSV observation tables"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a seeded synthetic observation table.
    Synth {
        #[arg(value_enum)]
        generator: GeneratorKind,
        #[arg(long, default_value_t = 1000)]
        rows: usize,
        #[arg(long, default_value_t = 5)]
        cols: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Ratio between consecutive eigenvalues of the covariance.
        #[arg(long, default_value_t = 0.5)]
        ratio: f64,
        /// Axis-aligned (diagonal) covariance; stationary-gaussian only.
        #[arg(long)]
        diagonal: bool,
        /// Comma-separated 0-based rows where a new regime starts
        /// [default: n/3, 2n/3].
        #[arg(long, value_delimiter = ',')]
        switch_points: Option<Vec<usize>>,
        /// GARCH persistence for volatility-cluster.
        #[arg(long, default_value_t = 0.95)]
        persistence: f64,
        /// Add an hourly timestamp column starting here (e.g. 2020-01-01T00:00:00).
        #[arg(long)]
        start: Option<NaiveDateTime>,
        #[arg(long, short)]
        output: PathBuf,
    },
    /// Iterated PCA over consecutive chunks; writes stacked components.
    Ipca {
        #[arg(long, short)]
        input: PathBuf,
        /// chunk=N, by=year or by=month.
        #[arg(long)]
        chunks: ChunkSpec,
        #[arg(long, short)]
        output: PathBuf,
        /// Re-seed a chunk with a fresh eigensolve when refinement fails.
        #[arg(long)]
        reseed: bool,
    },
    /// Exponentially weighted moving PCA, one observation at a time.
    Ewmpca {
        #[arg(long, short)]
        input: PathBuf,
        /// Decay in (0, 1), or "ml" to estimate it first.
        #[arg(long)]
        alpha: AlphaArg,
        /// Observations during which refinement is capped at 20 iterations.
        #[arg(long, default_value_t = 100)]
        warmup: usize,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        #[arg(long)]
        max_iter: Option<usize>,
        /// Burn-in for --alpha ml [default: 10 x columns].
        #[arg(long)]
        burn_in: Option<usize>,
        #[arg(long, short)]
        output: PathBuf,
    },
    /// Maximum-likelihood decay over a grid; prints the estimate.
    EstimateAlpha {
        #[arg(long, short)]
        input: PathBuf,
        /// start:end:step [default: 0.5:0.999:0.001].
        #[arg(long)]
        grid: Option<GridSpec>,
        /// [default: 10 x columns]
        #[arg(long)]
        burn_in: Option<usize>,
        /// CSV of alpha,loglik.
        #[arg(long, short)]
        output: PathBuf,
    },
    /// Cross-covariance and cross-correlation of whole-sample PCA against EWMPCA.
    Compare {
        #[arg(long, short)]
        input: PathBuf,
        #[arg(long)]
        alpha: AlphaArg,
        /// Writes STEM.crosscov.csv, STEM.crosscorr.csv and STEM.json.
        #[arg(long, short)]
        output: PathBuf,
    },
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Synth {
            generator,
            rows,
            cols,
            seed,
            ratio,
            diagonal,
            switch_points,
            persistence,
            start,
            output,
        } => commands::synth(&SynthArgs {
            kind: generator,
            rows,
            cols,
            seed,
            ratio,
            diagonal,
            switch_points,
            persistence,
            start,
            output,
        }),
        Command::Ipca {
            input,
            chunks,
            output,
            reseed,
        } => commands::ipca(&input, chunks, &output, reseed),
        Command::Ewmpca {
            input,
            alpha,
            warmup,
            tol,
            max_iter,
            burn_in,
            output,
        } => commands::ewmpca(&EwmpcaArgs {
            input,
            alpha,
            warmup,
            tol,
            max_iter,
            burn_in,
            output,
        }),
        Command::EstimateAlpha {
            input,
            grid,
            burn_in,
            output,
        } => commands::estimate(&input, grid, burn_in, &output),
        Command::Compare {
            input,
            alpha,
            output,
        } => commands::compare(&input, alpha, &output),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
