//! Fixed-length appraisal rating vector, indexed by the canonical dimension
//! order from [`crate::taxonomy`].

use std::ops::{Index, IndexMut};

use serde::{Deserialize, Serialize};

use crate::error::PipelineError;
use crate::taxonomy::NUM_DIMENSIONS;

/// Ordered 21-tuple of appraisal ratings. Gold ratings are integers 1..=5
/// stored as reals; model predictions are unrestricted reals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AppraisalVector(pub [f64; NUM_DIMENSIONS]);

impl AppraisalVector {
    pub fn zeros() -> Self {
        AppraisalVector([0.0; NUM_DIMENSIONS])
    }

    pub fn from_slice(values: &[f64]) -> Result<Self, PipelineError> {
        let arr: [f64; NUM_DIMENSIONS] = values.try_into().map_err(|_| {
            PipelineError::Validation(format!(
                "expected {NUM_DIMENSIONS} appraisal values, got {}",
                values.len()
            ))
        })?;
        Ok(AppraisalVector(arr))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn iter(&self) -> impl Iterator<Item = &f64> {
        self.0.iter()
    }

    /// True iff every value is an integer in 1..=5.
    pub fn is_valid_gold(&self) -> bool {
        self.0
            .iter()
            .all(|&v| (1.0..=5.0).contains(&v) && v.fract() == 0.0)
    }

    /// Clamp every value into the 5-point scale.
    pub fn clamped(&self) -> Self {
        let mut out = self.0;
        for v in &mut out {
            *v = v.clamp(1.0, 5.0);
        }
        AppraisalVector(out)
    }
}

impl Index<usize> for AppraisalVector {
    type Output = f64;
    fn index(&self, idx: usize) -> &f64 {
        &self.0[idx]
    }
}

impl IndexMut<usize> for AppraisalVector {
    fn index_mut(&mut self, idx: usize) -> &mut f64 {
        &mut self.0[idx]
    }
}
