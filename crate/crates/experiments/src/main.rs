use std::path::PathBuf;
use std::process::ExitCode;

use bcf_experiments::results::write_meta;
use bcf_experiments::{emit_results, run, ExperimentConfig, ExperimentKind, OutputFormat};
use clap::{Parser, ValueEnum};
use log::{error, info};

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Experiment {
    Exp1,
    Exp2,
    Tabular,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Csv,
    Json,
}

/// Run a boosted control function experiment.
#[derive(Debug, Parser)]
#[command(name = "bcf", version)]
struct Cli {
    experiment: Experiment,

    /// JSON experiment configuration.
    #[arg(long)]
    config: PathBuf,

    /// Master seed.
    #[arg(long)]
    seed: Option<u64>,

    /// Number of repetitions.
    #[arg(long, conflicts_with = "full")]
    reps: Option<usize>,

    /// Use 50 repetitions.
    #[arg(long)]
    full: bool,

    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,

    #[arg(long, value_enum)]
    format: Option<Format>,

    /// Worker threads.
    #[arg(long)]
    workers: Option<usize>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            error!("{e}");
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn execute(cli: Cli) -> bcf_experiments::Result<()> {
    let kind = match cli.experiment {
        Experiment::Exp1 => ExperimentKind::Exp1,
        Experiment::Exp2 => ExperimentKind::Exp2,
        Experiment::Tabular => ExperimentKind::Tabular,
    };
    let mut cfg = ExperimentConfig::load(&cli.config)?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if cli.full {
        cfg.reps = 50;
    }
    if let Some(reps) = cli.reps {
        cfg.reps = reps;
    }
    if let Some(out) = cli.out {
        cfg.out = Some(out);
    }
    if let Some(format) = cli.format {
        cfg.format = match format {
            Format::Csv => OutputFormat::Csv,
            Format::Json => OutputFormat::Json,
        };
    }
    if cli.workers.is_some() {
        cfg.workers = cli.workers;
    }

    let mut output = run(kind, &cfg)?;
    emit_results(&mut output.rows, cfg.out.as_deref(), cfg.format)?;
    info!(
        "{} rows, {} of {} repetitions excluded",
        output.meta.rows, output.meta.excluded, output.meta.reps
    );
    if let Some(out) = &cfg.out {
        write_meta(&output.meta, out)?;
    }
    Ok(())
}
