use thiserror::Error;

/// Errors shared across the pipeline crates.
#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("missing column '{column}' in {path}")]
    MissingColumn { column: String, path: String },

    #[error("unknown label '{label}'; accepted labels: {accepted:?}")]
    UnknownLabel { label: String, accepted: Vec<String> },

    #[error("data validation error: {0}")]
    Validation(String),

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error(
        "non-finite loss at batch {batch_index} (learning rate {learning_rate}); \
         lower the learning rate or inspect the batch"
    )]
    NonFiniteLoss { learning_rate: f64, batch_index: usize },

    #[error("checkpoint error: {0}")]
    Checkpoint(String),

    #[error("group construction failed for class '{class}', strategy {strategy}: {reason}")]
    EmptyGroup {
        class: String,
        strategy: String,
        reason: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
