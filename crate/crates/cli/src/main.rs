//! `appraise`: train the appraisal model, annotate the thought corpus, and
//! run the significance, profile, and reframing analyses from one config
//! file. Exit codes: 0 success, 1 configuration error, 2 data-validation
//! error, 3 internal error.

mod commands;
mod manifest;
mod plot;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use appraisal_core::error::PipelineError;
use commands::Context;

#[derive(Parser)]
#[command(name = "appraise", version, about = "Distortion-appraisal analysis pipeline")]
struct Cli {
    /// Pipeline configuration file
    #[arg(short, long, default_value = "configs/default.toml", global = true)]
    config: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train the text-to-appraisal regression model and evaluate it
    Train,
    /// Predict appraisals for the expanded thought corpus
    Annotate {
        /// Annotate reframe texts too (overrides the config)
        #[arg(long)]
        reframes: bool,
    },
    /// Mann-Whitney significance grids per negative-group strategy
    Analyze {
        /// Annotated corpus to analyze (defaults to the configured path)
        #[arg(long)]
        annotated: Option<PathBuf>,
        /// Significance level before correction
        #[arg(long)]
        alpha: Option<f64>,
        /// Comma-separated strategies: no_distortion, exclusive, all_others
        #[arg(long, value_delimiter = ',')]
        strategies: Vec<String>,
    },
    /// Median appraisal profiles, absolute and relative to baseline
    Profile {
        #[arg(long)]
        annotated: Option<PathBuf>,
    },
    /// Appraisal shift induced by cognitive reframing
    ReframeShift {
        #[arg(long)]
        annotated: Option<PathBuf>,
        /// Median of per-row differences instead of difference of medians
        #[arg(long)]
        per_pair: bool,
    },
    /// Regenerate every figure from persisted artifacts
    Report,
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let ctx = Context::load(&cli.config)?;
    match cli.command {
        Command::Train => commands::cmd_train(&ctx),
        Command::Annotate { reframes } => {
            commands::cmd_annotate(&ctx, if reframes { Some(true) } else { None })
        }
        Command::Analyze {
            annotated,
            alpha,
            strategies,
        } => commands::cmd_analyze(&ctx, annotated.as_deref(), alpha, &strategies),
        Command::Profile { annotated } => commands::cmd_profile(&ctx, annotated.as_deref()),
        Command::ReframeShift { annotated, per_pair } => {
            commands::cmd_reframe_shift(&ctx, annotated.as_deref(), per_pair)
        }
        Command::Report => commands::cmd_report(&ctx),
    }
}

fn exit_code(error: &anyhow::Error) -> u8 {
    match error.downcast_ref::<PipelineError>() {
        Some(PipelineError::Config(_)) | Some(PipelineError::MissingColumn { .. }) => 1,
        Some(PipelineError::UnknownLabel { .. })
        | Some(PipelineError::Validation(_))
        | Some(PipelineError::EmptyInput(_))
        | Some(PipelineError::EmptyGroup { .. }) => 2,
        _ => 3,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(error) => {
            log::error!("{error:#}");
            ExitCode::from(exit_code(&error))
        }
    }
}
