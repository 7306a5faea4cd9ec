//! Median-baseline predictor: emits the per-dimension training-set median
//! for every input text.

use serde::{Deserialize, Serialize};

use crate::corpus::EventRecord;
use crate::error::PipelineError;
use crate::model::Predictor;
use crate::profiles::median;
use crate::taxonomy::NUM_DIMENSIONS;
use crate::vector::AppraisalVector;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MedianBaseline {
    pub medians: AppraisalVector,
}

/// Fit the baseline on training gold ratings.
pub fn median_baseline(train_set: &[EventRecord]) -> Result<MedianBaseline, PipelineError> {
    if train_set.is_empty() {
        return Err(PipelineError::EmptyInput(
            "median baseline needs a nonempty training set".into(),
        ));
    }
    let mut medians = AppraisalVector::zeros();
    for d in 0..NUM_DIMENSIONS {
        let mut values: Vec<f64> = train_set.iter().map(|r| r.ratings[d]).collect();
        medians[d] = median(&mut values);
    }
    Ok(MedianBaseline { medians })
}

impl Predictor for MedianBaseline {
    fn predict(&self, texts: &[String]) -> Result<Vec<AppraisalVector>, PipelineError> {
        Ok(vec![self.medians.clone(); texts.len()])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Split;

    fn record(values: [f64; NUM_DIMENSIONS]) -> EventRecord {
        EventRecord {
            text: "t".into(),
            ratings: AppraisalVector(values),
            split: Split::Train,
        }
    }

    #[test]
    fn median_of_full_scale() {
        let records: Vec<EventRecord> = (1..=5)
            .map(|v| record([v as f64; NUM_DIMENSIONS]))
            .collect();
        let baseline = median_baseline(&records).unwrap();
        assert!(baseline.medians.iter().all(|&m| m == 3.0));
    }

    #[test]
    fn single_record_returns_its_ratings() {
        let mut values = [2.0; NUM_DIMENSIONS];
        values[7] = 5.0;
        let baseline = median_baseline(&[record(values)]).unwrap();
        assert_eq!(baseline.medians, AppraisalVector(values));
        let predictions = baseline.predict(&["anything".to_string()]).unwrap();
        assert_eq!(predictions[0], AppraisalVector(values));
    }

    #[test]
    fn empty_train_set_is_error() {
        assert!(median_baseline(&[]).is_err());
    }
}
