//! Applies a trained appraisal predictor to the expanded thought corpus,
//! producing the combined distortion + appraisal dataset that all analyses
//! consume. The annotated file is a first-class artifact: downstream stages
//! never need the model again.

use std::collections::HashMap;
use std::path::Path;

use log::info;
use serde::{Deserialize, Serialize};

use crate::config::Delimiter;
use crate::corpus::ExpandedRecord;
use crate::error::PipelineError;
use crate::model::Predictor;
use crate::taxonomy::{DIMENSION_NAMES, NUM_DIMENSIONS};
use crate::vector::AppraisalVector;

/// One expanded record with predicted appraisals for the thought and,
/// optionally, its reframe.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnotatedThought {
    pub record_id: String,
    pub text: String,
    pub distortion: String,
    pub appraisals: AppraisalVector,
    pub reframe: Option<String>,
    pub reframe_appraisals: Option<AppraisalVector>,
}

/// Annotate every expanded record. Texts are deduplicated before inference
/// and predictions broadcast back to replicas, so replicas of one record
/// always carry identical vectors.
pub fn annotate(
    predictor: &dyn Predictor,
    records: &[ExpandedRecord],
    include_reframes: bool,
) -> Result<Vec<AnnotatedThought>, PipelineError> {
    let mut unique_texts: Vec<&str> = Vec::new();
    let mut text_index: HashMap<&str, usize> = HashMap::new();
    for r in records {
        if !text_index.contains_key(r.text.as_str()) {
            text_index.insert(r.text.as_str(), unique_texts.len());
            unique_texts.push(r.text.as_str());
        }
        if include_reframes {
            if let Some(reframe) = &r.reframe {
                if !text_index.contains_key(reframe.as_str()) {
                    text_index.insert(reframe.as_str(), unique_texts.len());
                    unique_texts.push(reframe.as_str());
                }
            }
        }
    }
    let owned: Vec<String> = unique_texts.iter().map(|s| s.to_string()).collect();
    let predictions = predictor.predict(&owned)?;
    if predictions.len() != owned.len() {
        return Err(PipelineError::Validation(format!(
            "predictor returned {} vectors for {} texts",
            predictions.len(),
            owned.len()
        )));
    }

    let mut missing_reframes = 0usize;
    let annotated = records
        .iter()
        .map(|r| {
            let appraisals = predictions[text_index[r.text.as_str()]].clone();
            let (reframe, reframe_appraisals) = if include_reframes {
                match &r.reframe {
                    Some(reframe) => (
                        Some(reframe.clone()),
                        Some(predictions[text_index[reframe.as_str()]].clone()),
                    ),
                    None => {
                        missing_reframes += 1;
                        (None, None)
                    }
                }
            } else {
                (r.reframe.clone(), None)
            };
            AnnotatedThought {
                record_id: r.record_id.clone(),
                text: r.text.clone(),
                distortion: r.distortion.clone(),
                appraisals,
                reframe,
                reframe_appraisals,
            }
        })
        .collect::<Vec<_>>();
    if include_reframes && missing_reframes > 0 {
        info!("{missing_reframes} records had no reframe text");
    }
    Ok(annotated)
}

fn format_value(v: f64) -> String {
    // fixed precision keeps repeated runs diffable
    format!("{v:.6}")
}

/// Write the annotated corpus as a delimited file with the canonical column
/// layout: record_id, distortion, text, 21 appraisal columns, reframe, 21
/// reframe-appraisal columns.
pub fn write_annotated(
    records: &[AnnotatedThought],
    path: &Path,
    delimiter: Delimiter,
) -> Result<(), PipelineError> {
    let mut writer = csv::WriterBuilder::new()
        .delimiter(delimiter.for_path(path))
        .from_path(path)?;
    let mut header = vec!["record_id".to_string(), "distortion".to_string(), "text".to_string()];
    header.extend(DIMENSION_NAMES.iter().map(|d| format!("a_{}", d.replace(' ', "_"))));
    header.push("reframe".to_string());
    header.extend(DIMENSION_NAMES.iter().map(|d| format!("r_{}", d.replace(' ', "_"))));
    writer.write_record(&header)?;
    for r in records {
        let mut record = vec![r.record_id.clone(), r.distortion.clone(), r.text.clone()];
        record.extend(r.appraisals.iter().map(|&v| format_value(v)));
        record.push(r.reframe.clone().unwrap_or_default());
        match &r.reframe_appraisals {
            Some(v) => record.extend(v.iter().map(|&x| format_value(x))),
            None => record.extend(std::iter::repeat(String::new()).take(NUM_DIMENSIONS)),
        }
        writer.write_record(&record)?;
    }
    writer.flush()?;
    Ok(())
}

/// Read back a file produced by [`write_annotated`].
pub fn read_annotated(
    path: &Path,
    delimiter: Delimiter,
) -> Result<Vec<AnnotatedThought>, PipelineError> {
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(delimiter.for_path(path))
        .from_path(path)?;
    let headers = reader.headers()?.clone();
    let find = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| PipelineError::MissingColumn {
                column: name.to_string(),
                path: path.display().to_string(),
            })
    };
    let id_idx = find("record_id")?;
    let class_idx = find("distortion")?;
    let text_idx = find("text")?;
    let reframe_idx = find("reframe")?;
    let mut a_idx = [0usize; NUM_DIMENSIONS];
    let mut r_idx = [0usize; NUM_DIMENSIONS];
    for (d, name) in DIMENSION_NAMES.iter().enumerate() {
        a_idx[d] = find(&format!("a_{}", name.replace(' ', "_")))?;
        r_idx[d] = find(&format!("r_{}", name.replace(' ', "_")))?;
    }

    let mut records = Vec::new();
    for row in reader.records() {
        let row = row?;
        let parse_vec = |indices: &[usize; NUM_DIMENSIONS]| -> Result<Option<AppraisalVector>, PipelineError> {
            let mut values = [0.0; NUM_DIMENSIONS];
            for (d, &idx) in indices.iter().enumerate() {
                let raw = row.get(idx).unwrap_or("").trim();
                if raw.is_empty() {
                    return Ok(None);
                }
                values[d] = raw.parse::<f64>().map_err(|e| {
                    PipelineError::Validation(format!("bad appraisal value '{raw}': {e}"))
                })?;
            }
            Ok(Some(AppraisalVector(values)))
        };
        let appraisals = parse_vec(&a_idx)?.ok_or_else(|| {
            PipelineError::Validation("annotated row without appraisal values".into())
        })?;
        let reframe = row
            .get(reframe_idx)
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(str::to_string);
        records.push(AnnotatedThought {
            record_id: row.get(id_idx).unwrap_or("").to_string(),
            text: row.get(text_idx).unwrap_or("").to_string(),
            distortion: row.get(class_idx).unwrap_or("").to_string(),
            appraisals,
            reframe,
            reframe_appraisals: parse_vec(&r_idx)?,
        });
    }
    Ok(records)
}
