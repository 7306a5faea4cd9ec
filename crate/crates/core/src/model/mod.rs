//! Multi-output text-to-appraisal regression: encoder interface, regression
//! head, training loop, checkpointing, evaluation, and the median baseline.

mod baseline;
mod checkpoint;
mod encoder;
mod eval;
mod loss;
mod net;
mod train;

pub use baseline::{median_baseline, MedianBaseline};
pub use checkpoint::Checkpoint;
pub use encoder::{build_encoder, Encoder, EncoderConfig, HashedNgramEncoder, PrecomputedEncoder};
pub use eval::{evaluate, write_eval_report, EvalReport};
pub use loss::{smooth_l1, smooth_l1_grad, SMOOTH_L1_BETA};
pub use net::{HeadConfig, RegressionHead};
pub use train::{train, EpochMetrics, TrainConfig, TrainedModel};

use crate::error::PipelineError;
use crate::vector::AppraisalVector;

/// Anything that maps texts to appraisal vectors.
pub trait Predictor {
    fn predict(&self, texts: &[String]) -> Result<Vec<AppraisalVector>, PipelineError>;
}
