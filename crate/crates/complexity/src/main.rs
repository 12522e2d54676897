use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use complexity::pipeline::{run_pipeline, RunConfig, Stage};
use complexity::Error;

/// Multidimensional economic complexity toolkit.
#[derive(Parser)]
#[command(name = "complexity", version, about)]
struct Cli {
    /// Path to the TOML run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Override the configured output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Override the configured seed.
    #[arg(long, global = true)]
    seed: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Load, validate, and filter the input data.
    Ingest,
    /// Compute specialization matrices (through the specialize stage).
    Specialize,
    /// Compute complexity metrics (through the metrics stage).
    Metrics,
    /// Compute similarity instruments (through the instrument stage).
    Instrument,
    /// Estimate the configured regressions (full pipeline).
    Regress,
    /// Run the full pipeline.
    Run,
}

impl Command {
    fn stage(&self) -> Stage {
        match self {
            Command::Ingest => Stage::Ingest,
            Command::Specialize => Stage::Specialize,
            Command::Metrics => Stage::Metrics,
            Command::Instrument => Stage::Instrument,
            Command::Regress | Command::Run => Stage::Regress,
        }
    }
}

/// Exit codes by error class: 2 input/data, 3 configuration, 4 numerical,
/// 5 estimation.
fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Io { .. } | Error::Csv { .. } | Error::Schema { .. } | Error::Validation { .. } => 2,
        Error::Config(_) => 3,
        Error::Degenerate(_)
        | Error::Numerical(_)
        | Error::EigenDegeneracy { .. }
        | Error::Convergence { .. } => 4,
        Error::RankDeficient { .. } | Error::Estimation(_) => 5,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .target(env_logger::Target::Stderr)
        .init();
    let cli = Cli::parse();

    let Some(config_path) = &cli.config else {
        eprintln!("error: --config PATH is required");
        return ExitCode::from(3);
    };
    let mut config = match RunConfig::load(config_path) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(exit_code(&e));
        }
    };
    if let Some(out) = &cli.out {
        config.out_dir = out.clone();
    }
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }

    match run_pipeline(&config, cli.command.stage()) {
        Ok(report) => {
            eprintln!(
                "completed stages: {} ({} artifacts)",
                report.stages.join(", "),
                report.files.len()
            );
            if let Some(model) = &report.selected_model {
                eprintln!("selected model: {model}");
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
