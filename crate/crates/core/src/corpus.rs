//! Dataset ingestion: the appraisal-annotated event corpus and the
//! distortion-labeled thought corpus, plus the multi-label to multi-class
//! expansion used by all downstream analyses.

use std::collections::{BTreeMap, HashSet};
use std::path::Path;

use log::warn;
use serde::{Deserialize, Serialize};

use crate::config::{Delimiter, EnventColumns, ThinkingTrapColumns};
use crate::error::PipelineError;
use crate::taxonomy::{Taxonomy, DIMENSION_NAMES, NUM_DIMENSIONS};
use crate::vector::AppraisalVector;

/// Dataset split tags for the event corpus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Validation,
    Test,
}

impl Split {
    pub fn parse(raw: &str) -> Result<Self, PipelineError> {
        match raw.trim().to_lowercase().as_str() {
            "train" | "training" => Ok(Split::Train),
            "validation" | "dev" | "val" => Ok(Split::Validation),
            "test" => Ok(Split::Test),
            other => Err(PipelineError::Validation(format!(
                "unknown split tag '{other}'"
            ))),
        }
    }
}

/// One event description with gold appraisal ratings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventRecord {
    pub text: String,
    pub ratings: AppraisalVector,
    pub split: Split,
}

/// One thought with its distortion label set and optional reframe.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThoughtRecord {
    pub record_id: String,
    pub text: String,
    /// Canonical class names; never mixes "not distorted" with a distortion.
    pub distortions: Vec<String>,
    pub reframe: Option<String>,
}

/// A single-class replica produced by multi-label expansion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpandedRecord {
    pub record_id: String,
    pub text: String,
    pub distortion: String,
    pub reframe: Option<String>,
}

fn open_reader(path: &Path, delimiter: Delimiter) -> Result<csv::Reader<std::fs::File>, PipelineError> {
    if !path.exists() {
        return Err(PipelineError::Config(format!(
            "input file not found: {}",
            path.display()
        )));
    }
    Ok(csv::ReaderBuilder::new()
        .delimiter(delimiter.for_path(path))
        .flexible(true)
        .from_path(path)?)
}

fn column_index(
    headers: &csv::StringRecord,
    column: &str,
    path: &Path,
) -> Result<usize, PipelineError> {
    headers
        .iter()
        .position(|h| h.trim() == column)
        .ok_or_else(|| PipelineError::MissingColumn {
            column: column.to_string(),
            path: path.display().to_string(),
        })
}

/// Load the event corpus. Rows with out-of-range or unparsable ratings are
/// skipped with a logged reason; missing columns are fatal.
pub fn load_envent(
    path: &Path,
    columns: &EnventColumns,
    delimiter: Delimiter,
) -> Result<Vec<EventRecord>, PipelineError> {
    let mut reader = open_reader(path, delimiter)?;
    let headers = reader.headers()?.clone();
    let text_idx = column_index(&headers, &columns.text, path)?;
    let split_idx = column_index(&headers, &columns.split, path)?;
    let mut rating_idx = [0usize; NUM_DIMENSIONS];
    for (d, name) in DIMENSION_NAMES.iter().enumerate() {
        let column = columns.ratings.get(*name).ok_or_else(|| {
            PipelineError::Config(format!("column mapping missing for dimension '{name}'"))
        })?;
        rating_idx[d] = column_index(&headers, column, path)?;
    }

    let mut records = Vec::new();
    for (row_number, row) in reader.records().enumerate() {
        let row = row?;
        let text = row.get(text_idx).unwrap_or("").trim().to_string();
        if text.is_empty() {
            warn!("row {row_number}: empty text, skipped");
            continue;
        }
        let split = match Split::parse(row.get(split_idx).unwrap_or("")) {
            Ok(s) => s,
            Err(e) => {
                warn!("row {row_number}: {e}, skipped");
                continue;
            }
        };
        let mut ratings = AppraisalVector::zeros();
        let mut ok = true;
        for (d, &idx) in rating_idx.iter().enumerate() {
            let raw = row.get(idx).unwrap_or("").trim();
            match raw.parse::<f64>() {
                Ok(v) if (1.0..=5.0).contains(&v) && v.fract() == 0.0 => ratings[d] = v,
                _ => {
                    warn!(
                        "row {row_number}: rating '{raw}' for dimension '{}' outside 1..=5, record rejected",
                        DIMENSION_NAMES[d]
                    );
                    ok = false;
                    break;
                }
            }
        }
        if ok {
            records.push(EventRecord { text, ratings, split });
        }
    }
    Ok(records)
}

/// Per-split record counts.
pub fn split_counts(records: &[EventRecord]) -> (usize, usize, usize) {
    let mut counts = (0, 0, 0);
    for r in records {
        match r.split {
            Split::Train => counts.0 += 1,
            Split::Validation => counts.1 += 1,
            Split::Test => counts.2 += 1,
        }
    }
    counts
}

fn parse_label_set(
    raw: &str,
    separator: char,
    taxonomy: &Taxonomy,
) -> Result<Vec<String>, PipelineError> {
    let cleaned = raw.trim().trim_matches(|c| c == '[' || c == ']');
    let mut labels = Vec::new();
    for part in cleaned.split(separator) {
        let part = part.trim().trim_matches(|c| c == '"' || c == '\'');
        if part.is_empty() {
            continue;
        }
        let class = taxonomy.resolve_class(part)?;
        if !labels.contains(&class.name) {
            labels.push(class.name.clone());
        }
    }
    Ok(labels)
}

/// Load the thought corpus from the main multi-label file plus a separate
/// file of extra no-distortion texts. Duplicate record ids are deduplicated
/// keeping the first occurrence.
pub fn load_thinking_trap(
    main_path: &Path,
    extra_no_distortion_path: &Path,
    columns: &ThinkingTrapColumns,
    delimiter: Delimiter,
    taxonomy: &Taxonomy,
) -> Result<Vec<ThoughtRecord>, PipelineError> {
    let no_distortion = taxonomy.no_distortion_class().name.clone();
    let mut records: Vec<ThoughtRecord> = Vec::new();
    let mut seen: HashSet<String> = HashSet::new();

    let mut reader = open_reader(main_path, delimiter)?;
    let headers = reader.headers()?.clone();
    let text_idx = column_index(&headers, &columns.text, main_path)?;
    let labels_idx = column_index(&headers, &columns.distortions, main_path)?;
    let id_idx = match &columns.record_id {
        Some(col) => Some(column_index(&headers, col, main_path)?),
        None => None,
    };
    let reframe_idx = match &columns.reframe {
        Some(col) => Some(column_index(&headers, col, main_path)?),
        None => None,
    };

    for (row_number, row) in reader.records().enumerate() {
        let row = row?;
        let text = row.get(text_idx).unwrap_or("").trim().to_string();
        if text.is_empty() {
            warn!("row {row_number}: empty thought text, skipped");
            continue;
        }
        let record_id = match id_idx {
            Some(idx) => row.get(idx).unwrap_or("").trim().to_string(),
            None => format!("tt-{row_number}"),
        };
        if !seen.insert(record_id.clone()) {
            warn!("duplicate record id '{record_id}', keeping first occurrence");
            continue;
        }
        let mut distortions =
            parse_label_set(row.get(labels_idx).unwrap_or(""), columns.label_separator, taxonomy)?;
        if distortions.is_empty() {
            distortions.push(no_distortion.clone());
        }
        if distortions.len() > 1 && distortions.contains(&no_distortion) {
            warn!(
                "record '{record_id}' mixes '{no_distortion}' with distortion labels, dropping the no-distortion label"
            );
            distortions.retain(|l| l != &no_distortion);
        }
        let reframe = reframe_idx
            .and_then(|idx| row.get(idx))
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(str::to_string);
        records.push(ThoughtRecord {
            record_id,
            text,
            distortions,
            reframe,
        });
    }

    let mut reader = open_reader(extra_no_distortion_path, delimiter)?;
    let headers = reader.headers()?.clone();
    let text_idx = column_index(&headers, &columns.extra_text, extra_no_distortion_path)?;
    for (row_number, row) in reader.records().enumerate() {
        let row = row?;
        let text = row.get(text_idx).unwrap_or("").trim().to_string();
        if text.is_empty() {
            continue;
        }
        let record_id = format!("nd-{row_number}");
        if !seen.insert(record_id.clone()) {
            warn!("duplicate record id '{record_id}', keeping first occurrence");
            continue;
        }
        records.push(ThoughtRecord {
            record_id,
            text,
            distortions: vec![no_distortion.clone()],
            reframe: None,
        });
    }
    Ok(records)
}

/// Multi-label to multi-class expansion: one replica per label.
pub fn expand_multilabel(records: &[ThoughtRecord]) -> Vec<ExpandedRecord> {
    records
        .iter()
        .flat_map(|r| {
            r.distortions.iter().map(move |label| ExpandedRecord {
                record_id: r.record_id.clone(),
                text: r.text.clone(),
                distortion: label.clone(),
                reframe: r.reframe.clone(),
            })
        })
        .collect()
}

/// Per-class record counts over the expanded corpus. Every taxonomy class is
/// present in the map, possibly with count 0.
pub fn class_distribution(
    records: &[ExpandedRecord],
    taxonomy: &Taxonomy,
) -> BTreeMap<String, usize> {
    let mut counts: BTreeMap<String, usize> = taxonomy
        .classes()
        .iter()
        .map(|c| (c.name.clone(), 0))
        .collect();
    for r in records {
        *counts.entry(r.distortion.clone()).or_insert(0) += 1;
    }
    counts
}

/// Write the expanded corpus as a delimited file with a fixed column layout.
pub fn write_expanded(
    records: &[ExpandedRecord],
    path: &Path,
    delimiter: Delimiter,
) -> Result<(), PipelineError> {
    let mut writer = csv::WriterBuilder::new()
        .delimiter(delimiter.for_path(path))
        .from_path(path)?;
    writer.write_record(["record_id", "text", "distortion", "reframe"])?;
    for r in records {
        writer.write_record([
            r.record_id.as_str(),
            r.text.as_str(),
            r.distortion.as_str(),
            r.reframe.as_deref().unwrap_or(""),
        ])?;
    }
    writer.flush()?;
    Ok(())
}

/// Read back a file produced by [`write_expanded`].
pub fn read_expanded(path: &Path, delimiter: Delimiter) -> Result<Vec<ExpandedRecord>, PipelineError> {
    let mut reader = open_reader(path, delimiter)?;
    let headers = reader.headers()?.clone();
    let id_idx = column_index(&headers, "record_id", path)?;
    let text_idx = column_index(&headers, "text", path)?;
    let class_idx = column_index(&headers, "distortion", path)?;
    let reframe_idx = column_index(&headers, "reframe", path)?;
    let mut records = Vec::new();
    for row in reader.records() {
        let row = row?;
        let reframe = row
            .get(reframe_idx)
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(str::to_string);
        records.push(ExpandedRecord {
            record_id: row.get(id_idx).unwrap_or("").to_string(),
            text: row.get(text_idx).unwrap_or("").to_string(),
            distortion: row.get(class_idx).unwrap_or("").to_string(),
            reframe,
        });
    }
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::PipelineConfig;
    use std::io::Write;

    fn write_file(dir: &Path, name: &str, content: &str) -> std::path::PathBuf {
        let path = dir.join(name);
        let mut f = std::fs::File::create(&path).unwrap();
        f.write_all(content.as_bytes()).unwrap();
        path
    }

    fn envent_header(columns: &EnventColumns) -> String {
        let mut cols = vec![columns.text.clone(), columns.split.clone()];
        for name in DIMENSION_NAMES {
            cols.push(columns.ratings[name].clone());
        }
        cols.join("\t")
    }

    #[test]
    fn load_envent_single_row() {
        let dir = tempfile::tempdir().unwrap();
        let config = PipelineConfig::default();
        let header = envent_header(&config.columns.envent);
        let ratings = vec!["3"; NUM_DIMENSIONS].join("\t");
        let path = write_file(
            dir.path(),
            "envent.tsv",
            &format!("{header}\nI missed my train\ttrain\t{ratings}\n"),
        );
        let records = load_envent(&path, &config.columns.envent, Delimiter::Auto).unwrap();
        assert_eq!(records.len(), 1);
        assert_eq!(records[0].text, "I missed my train");
        assert_eq!(records[0].split, Split::Train);
        assert!(records[0].ratings.iter().all(|&v| v == 3.0));
    }

    #[test]
    fn load_envent_rejects_out_of_range_rating() {
        let dir = tempfile::tempdir().unwrap();
        let config = PipelineConfig::default();
        let header = envent_header(&config.columns.envent);
        let good = vec!["2"; NUM_DIMENSIONS].join("\t");
        let mut bad_cols = vec!["2"; NUM_DIMENSIONS];
        bad_cols[5] = "6";
        let bad = bad_cols.join("\t");
        let path = write_file(
            dir.path(),
            "envent.tsv",
            &format!("{header}\ngood row\ttest\t{good}\nbad row\ttest\t{bad}\n"),
        );
        let records = load_envent(&path, &config.columns.envent, Delimiter::Auto).unwrap();
        assert_eq!(records.len(), 1);
        assert_eq!(records[0].text, "good row");
    }

    #[test]
    fn load_envent_missing_column_is_fatal() {
        let dir = tempfile::tempdir().unwrap();
        let config = PipelineConfig::default();
        let path = write_file(dir.path(), "envent.tsv", "text_only\nhello\n");
        let err = load_envent(&path, &config.columns.envent, Delimiter::Auto).unwrap_err();
        match err {
            PipelineError::MissingColumn { .. } => {}
            other => panic!("unexpected error: {other}"),
        }
    }

    #[test]
    fn thinking_trap_merge_and_extra_labels() {
        let dir = tempfile::tempdir().unwrap();
        let config = PipelineConfig::default();
        let taxonomy = Taxonomy::new();
        let main = write_file(
            dir.path(),
            "main.tsv",
            "id\tthought\tthinking_traps_addressed\treframe\n\
             a\tI always fail\tCatastrophizing,Labeling\tSometimes things work out\n\
             b\tNobody likes me\tMind reading\t\n",
        );
        let extra = write_file(dir.path(), "extra.tsv", "thought\nA calm day\n");
        let records = load_thinking_trap(
            &main,
            &extra,
            &config.columns.thinking_trap,
            Delimiter::Auto,
            &taxonomy,
        )
        .unwrap();
        assert_eq!(records.len(), 3);
        assert_eq!(records[0].distortions, vec!["catastrophizing", "labeling"]);
        assert_eq!(records[0].reframe.as_deref(), Some("Sometimes things work out"));
        assert_eq!(records[2].distortions, vec!["not distorted"]);
        assert!(records[2].reframe.is_none());
    }

    #[test]
    fn thinking_trap_unknown_label_is_fatal() {
        let dir = tempfile::tempdir().unwrap();
        let config = PipelineConfig::default();
        let taxonomy = Taxonomy::new();
        let main = write_file(
            dir.path(),
            "main.tsv",
            "id\tthought\tthinking_traps_addressed\treframe\na\tsome thought\twishful thinking\t\n",
        );
        let extra = write_file(dir.path(), "extra.tsv", "thought\n");
        let err = load_thinking_trap(
            &main,
            &extra,
            &config.columns.thinking_trap,
            Delimiter::Auto,
            &taxonomy,
        )
        .unwrap_err();
        match err {
            PipelineError::UnknownLabel { .. } => {}
            other => panic!("unexpected error: {other}"),
        }
    }

    #[test]
    fn expansion_replicates_per_label() {
        let record = ThoughtRecord {
            record_id: "a".into(),
            text: "I always fail".into(),
            distortions: vec!["catastrophizing".into(), "labeling".into()],
            reframe: Some("reframed".into()),
        };
        let expanded = expand_multilabel(&[record.clone()]);
        assert_eq!(expanded.len(), 2);
        assert!(expanded.iter().all(|e| e.text == record.text));
        assert!(expanded.iter().all(|e| e.reframe.as_deref() == Some("reframed")));
        assert_eq!(expanded[0].distortion, "catastrophizing");
        assert_eq!(expanded[1].distortion, "labeling");

        let single = ThoughtRecord {
            distortions: vec!["blaming".into()],
            ..record
        };
        assert_eq!(expand_multilabel(&[single]).len(), 1);
    }

    #[test]
    fn class_distribution_counts() {
        let taxonomy = Taxonomy::new();
        assert!(class_distribution(&[], &taxonomy).values().all(|&c| c == 0));

        let records: Vec<ExpandedRecord> = (0..3)
            .map(|i| ExpandedRecord {
                record_id: format!("r{i}"),
                text: "t".into(),
                distortion: "blaming".into(),
                reframe: None,
            })
            .collect();
        let counts = class_distribution(&records, &taxonomy);
        assert_eq!(counts["blaming"], 3);
        assert_eq!(counts["labeling"], 0);
        assert_eq!(counts.values().sum::<usize>(), 3);
    }

    #[test]
    fn expanded_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let records = vec![
            ExpandedRecord {
                record_id: "a".into(),
                text: "thought one".into(),
                distortion: "blaming".into(),
                reframe: Some("better thought".into()),
            },
            ExpandedRecord {
                record_id: "b".into(),
                text: "thought two".into(),
                distortion: "not distorted".into(),
                reframe: None,
            },
        ];
        let path = dir.path().join("expanded.tsv");
        write_expanded(&records, &path, Delimiter::Auto).unwrap();
        let back = read_expanded(&path, Delimiter::Auto).unwrap();
        assert_eq!(records, back);
    }
}
