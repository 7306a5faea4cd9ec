//! Median appraisal profiles: the no-distortion baseline, per-class
//! profiles, profiles relative to the baseline, and the shift induced by
//! cognitive reframing.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::annotate::AnnotatedThought;
use crate::error::PipelineError;
use crate::taxonomy::{DistortionClass, Taxonomy, DIMENSION_NAMES, NUM_DIMENSIONS};
use crate::vector::AppraisalVector;

/// Per-dimension median vector of a group of texts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AppraisalProfile {
    pub label: String,
    pub medians: AppraisalVector,
    pub n: usize,
}

/// A profile expressed as a difference against a baseline profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelativeProfile {
    pub label: String,
    pub deltas: AppraisalVector,
    pub baseline_label: String,
    pub n: usize,
}

/// Median with the mean-of-middle-two convention for even counts.
pub fn median(values: &mut [f64]) -> f64 {
    assert!(!values.is_empty(), "median of empty slice");
    values.sort_by(|a, b| a.partial_cmp(b).expect("non-finite value in median"));
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        (values[n / 2 - 1] + values[n / 2]) / 2.0
    }
}

fn median_vector<'a, I>(rows: I) -> Option<(AppraisalVector, usize)>
where
    I: Iterator<Item = &'a AppraisalVector>,
{
    let rows: Vec<&AppraisalVector> = rows.collect();
    if rows.is_empty() {
        return None;
    }
    let mut medians = AppraisalVector::zeros();
    for d in 0..NUM_DIMENSIONS {
        let mut values: Vec<f64> = rows.iter().map(|v| v[d]).collect();
        medians[d] = median(&mut values);
    }
    Some((medians, rows.len()))
}

/// Profile of the no-distortion rows.
pub fn baseline_profile(data: &[AnnotatedThought]) -> Result<AppraisalProfile, PipelineError> {
    let (medians, n) = median_vector(
        data.iter()
            .filter(|r| r.distortion == "not distorted")
            .map(|r| &r.appraisals),
    )
    .ok_or_else(|| PipelineError::EmptyInput("no no-distortion rows in the data".into()))?;
    Ok(AppraisalProfile {
        label: "baseline".into(),
        medians,
        n,
    })
}

/// Profile of one distortion class.
pub fn distortion_profile(
    data: &[AnnotatedThought],
    class: &DistortionClass,
) -> Result<AppraisalProfile, PipelineError> {
    let (medians, n) = median_vector(
        data.iter()
            .filter(|r| r.distortion == class.name)
            .map(|r| &r.appraisals),
    )
    .ok_or_else(|| PipelineError::EmptyInput(format!("no rows for class '{}'", class.name)))?;
    Ok(AppraisalProfile {
        label: class.name.clone(),
        medians,
        n,
    })
}

/// Element-wise difference `profile - baseline`.
pub fn relative_profile(profile: &AppraisalProfile, baseline: &AppraisalProfile) -> RelativeProfile {
    let mut deltas = AppraisalVector::zeros();
    for d in 0..NUM_DIMENSIONS {
        deltas[d] = profile.medians[d] - baseline.medians[d];
    }
    RelativeProfile {
        label: profile.label.clone(),
        deltas,
        baseline_label: baseline.label.clone(),
        n: profile.n,
    }
}

/// Shift in the class profile after reframing: median of the reframe
/// appraisals minus median of the original appraisals, over rows of the
/// class that have a reframe. Positive deltas mean the median appraisal
/// value increased after reframing.
pub fn reframe_shift(
    data: &[AnnotatedThought],
    class: &DistortionClass,
) -> Result<RelativeProfile, PipelineError> {
    reframe_shift_with(data, class, false)
}

/// As [`reframe_shift`], optionally computing the per-pair variant: the
/// median over rows of (reframe - original) differences.
pub fn reframe_shift_with(
    data: &[AnnotatedThought],
    class: &DistortionClass,
    per_pair: bool,
) -> Result<RelativeProfile, PipelineError> {
    let rows: Vec<&AnnotatedThought> = data
        .iter()
        .filter(|r| r.distortion == class.name && r.reframe_appraisals.is_some())
        .collect();
    if rows.is_empty() {
        return Err(PipelineError::EmptyInput(format!(
            "no reframed rows for class '{}'",
            class.name
        )));
    }
    let mut deltas = AppraisalVector::zeros();
    for d in 0..NUM_DIMENSIONS {
        if per_pair {
            let mut diffs: Vec<f64> = rows
                .iter()
                .map(|r| r.reframe_appraisals.as_ref().unwrap()[d] - r.appraisals[d])
                .collect();
            deltas[d] = median(&mut diffs);
        } else {
            let mut original: Vec<f64> = rows.iter().map(|r| r.appraisals[d]).collect();
            let mut reframed: Vec<f64> = rows
                .iter()
                .map(|r| r.reframe_appraisals.as_ref().unwrap()[d])
                .collect();
            deltas[d] = median(&mut reframed) - median(&mut original);
        }
    }
    Ok(RelativeProfile {
        label: class.name.clone(),
        deltas,
        baseline_label: format!("{} (original)", class.name),
        n: rows.len(),
    })
}

/// Write profiles as CSV: one row per profile, 21 dimension columns plus an
/// n-count column.
pub fn write_profiles(profiles: &[AppraisalProfile], path: &Path) -> Result<(), PipelineError> {
    let mut writer = csv::Writer::from_path(path)?;
    let mut header = vec!["label".to_string()];
    header.extend(DIMENSION_NAMES.iter().map(|d| d.to_string()));
    header.push("n".into());
    writer.write_record(&header)?;
    for p in profiles {
        let mut record = vec![p.label.clone()];
        record.extend(p.medians.iter().map(|v| format!("{v:.6}")));
        record.push(p.n.to_string());
        writer.write_record(&record)?;
    }
    writer.flush()?;
    Ok(())
}

/// Write relative profiles (or reframe shifts) as CSV.
pub fn write_relative_profiles(
    profiles: &[RelativeProfile],
    path: &Path,
) -> Result<(), PipelineError> {
    let mut writer = csv::Writer::from_path(path)?;
    let mut header = vec!["label".to_string(), "baseline".to_string()];
    header.extend(DIMENSION_NAMES.iter().map(|d| d.to_string()));
    header.push("n".into());
    writer.write_record(&header)?;
    for p in profiles {
        let mut record = vec![p.label.clone(), p.baseline_label.clone()];
        record.extend(p.deltas.iter().map(|v| format!("{v:.6}")));
        record.push(p.n.to_string());
        writer.write_record(&record)?;
    }
    writer.flush()?;
    Ok(())
}

/// All 14 relative profiles against the no-distortion baseline, in canonical
/// class order.
pub fn all_relative_profiles(
    data: &[AnnotatedThought],
    taxonomy: &Taxonomy,
) -> Result<Vec<RelativeProfile>, PipelineError> {
    let baseline = baseline_profile(data)?;
    taxonomy
        .distortion_classes()
        .map(|class| {
            let profile = distortion_profile(data, class)?;
            Ok(relative_profile(&profile, &baseline))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(class: &str, values: [f64; NUM_DIMENSIONS]) -> AnnotatedThought {
        AnnotatedThought {
            record_id: "r".into(),
            text: "t".into(),
            distortion: class.into(),
            appraisals: AppraisalVector(values),
            reframe: None,
            reframe_appraisals: None,
        }
    }

    #[test]
    fn single_row_baseline_is_identity() {
        let mut values = [2.0; NUM_DIMENSIONS];
        values[3] = 4.5;
        let data = vec![row("not distorted", values)];
        let profile = baseline_profile(&data).unwrap();
        assert_eq!(profile.medians, AppraisalVector(values));
        assert_eq!(profile.n, 1);
    }

    #[test]
    fn odd_count_median() {
        let mut a = [0.0; NUM_DIMENSIONS];
        let mut b = [0.0; NUM_DIMENSIONS];
        let mut c = [0.0; NUM_DIMENSIONS];
        a[0] = 1.0;
        b[0] = 2.0;
        c[0] = 9.0;
        let data = vec![
            row("not distorted", a),
            row("not distorted", b),
            row("not distorted", c),
        ];
        let profile = baseline_profile(&data).unwrap();
        assert_eq!(profile.medians[0], 2.0);
    }

    #[test]
    fn even_count_median_is_mean_of_middle_two() {
        assert_eq!(median(&mut [1.0, 2.0, 3.0, 4.0]), 2.5);
    }

    #[test]
    fn missing_baseline_is_error() {
        let data = vec![row("blaming", [3.0; NUM_DIMENSIONS])];
        assert!(baseline_profile(&data).is_err());
    }

    #[test]
    fn relative_profile_of_itself_is_zero() {
        let profile = AppraisalProfile {
            label: "blaming".into(),
            medians: AppraisalVector([2.7; NUM_DIMENSIONS]),
            n: 5,
        };
        let rel = relative_profile(&profile, &profile);
        assert!(rel.deltas.iter().all(|&d| d == 0.0));
    }

    #[test]
    fn reframe_shift_single_row() {
        let mut original = [2.0; NUM_DIMENSIONS];
        original[3] = 1.0;
        let mut reframed = original;
        reframed[3] = 4.0;
        let mut r = row("blaming", original);
        r.reframe = Some("better".into());
        r.reframe_appraisals = Some(AppraisalVector(reframed));
        let taxonomy = Taxonomy::new();
        let class = taxonomy.resolve_class("blaming").unwrap();
        let shift = reframe_shift(&[r], class).unwrap();
        assert_eq!(shift.deltas[3], 3.0);
        assert_eq!(shift.deltas[0], 0.0);
    }

    #[test]
    fn reframe_shift_identical_vectors_is_zero() {
        let values = [3.0; NUM_DIMENSIONS];
        let mut r = row("labeling", values);
        r.reframe = Some("same".into());
        r.reframe_appraisals = Some(AppraisalVector(values));
        let taxonomy = Taxonomy::new();
        let class = taxonomy.resolve_class("labeling").unwrap();
        let shift = reframe_shift(&[r], class).unwrap();
        assert!(shift.deltas.iter().all(|&d| d == 0.0));
    }

    #[test]
    fn reframe_shift_without_reframes_is_error() {
        let data = vec![row("blaming", [3.0; NUM_DIMENSIONS])];
        let taxonomy = Taxonomy::new();
        let class = taxonomy.resolve_class("blaming").unwrap();
        assert!(reframe_shift(&data, class).is_err());
    }
}
