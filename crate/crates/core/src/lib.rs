//! End-to-end analysis pipeline linking cognitive distortions and emotional
//! appraisal dimensions: a multi-output text-to-appraisal regression model,
//! automated annotation of a distortion-labeled thought corpus, rank
//! statistics over distortion-appraisal pairs, and median appraisal
//! profiles including reframing shifts.

pub mod annotate;
pub mod config;
pub mod corpus;
pub mod error;
pub mod model;
pub mod profiles;
pub mod stats;
pub mod taxonomy;
pub mod vector;

pub use error::PipelineError;
pub use vector::AppraisalVector;
