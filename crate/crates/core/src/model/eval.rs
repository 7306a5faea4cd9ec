//! RMSE evaluation of appraisal predictions.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::PipelineError;
use crate::taxonomy::{DIMENSION_NAMES, NUM_DIMENSIONS};
use crate::vector::AppraisalVector;

/// Per-dimension and macro-averaged RMSE.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub per_dimension_rmse: AppraisalVector,
    pub macro_rmse: f64,
}

/// Root-mean-squared error per dimension, macro = mean over dimensions.
pub fn evaluate(
    predictions: &[AppraisalVector],
    gold: &[AppraisalVector],
) -> Result<EvalReport, PipelineError> {
    if predictions.is_empty() {
        return Err(PipelineError::EmptyInput("evaluate on empty input".into()));
    }
    if predictions.len() != gold.len() {
        return Err(PipelineError::Validation(format!(
            "{} predictions vs {} gold records",
            predictions.len(),
            gold.len()
        )));
    }
    let n = predictions.len() as f64;
    let mut per_dimension_rmse = AppraisalVector::zeros();
    for d in 0..NUM_DIMENSIONS {
        let sum_sq: f64 = predictions
            .iter()
            .zip(gold.iter())
            .map(|(p, g)| {
                let diff = p[d] - g[d];
                diff * diff
            })
            .sum();
        per_dimension_rmse[d] = (sum_sq / n).sqrt();
    }
    let macro_rmse = per_dimension_rmse.iter().sum::<f64>() / NUM_DIMENSIONS as f64;
    Ok(EvalReport {
        per_dimension_rmse,
        macro_rmse,
    })
}

/// Write the report as CSV: 21 named per-dimension rows plus a macro row.
pub fn write_eval_report(report: &EvalReport, path: &Path) -> Result<(), PipelineError> {
    let mut writer = csv::Writer::from_path(path)?;
    writer.write_record(["dimension", "rmse"])?;
    for (name, value) in DIMENSION_NAMES.iter().zip(report.per_dimension_rmse.iter()) {
        writer.write_record([*name, &format!("{value:.6}")])?;
    }
    writer.write_record(["macro", &format!("{:.6}", report.macro_rmse)])?;
    writer.flush()?;
    Ok(())
}
