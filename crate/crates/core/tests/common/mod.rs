//! Shared synthetic-data builders for integration tests.
// each test binary uses a different subset of these helpers
#![allow(dead_code)]

use appraisal_core::annotate::AnnotatedThought;
use appraisal_core::corpus::ThoughtRecord;
use appraisal_core::taxonomy::{Taxonomy, NUM_DIMENSIONS};
use appraisal_core::vector::AppraisalVector;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

/// Published per-class counts of the expanded thought corpus, in canonical
/// class order.
pub const CLASS_COUNTS: [(&str, usize); 15] = [
    ("all-or-nothing thinking", 99),
    ("blaming", 34),
    ("catastrophizing", 68),
    ("comparing and despairing", 12),
    ("disqualifying the positive", 40),
    ("emotional reasoning", 43),
    ("fortune telling", 78),
    ("labeling", 102),
    ("magnification", 15),
    ("mind reading", 71),
    ("negative feeling or emotion", 151),
    ("overgeneralization", 107),
    ("personalization", 98),
    ("should statements", 22),
    ("not distorted", 96),
];

pub const TOTAL_EXPANDED: usize = 1036;

/// A multi-label corpus whose expansion reproduces [`CLASS_COUNTS`]
/// exactly. A slice of the records carries two labels so the expansion path
/// is genuinely exercised.
pub fn table1_corpus() -> Vec<ThoughtRecord> {
    let mut budgets: Vec<(String, usize)> = CLASS_COUNTS
        .iter()
        .map(|(name, count)| (name.to_string(), *count))
        .collect();
    let mut records = Vec::new();
    let mut next_id = 0usize;
    let push = |labels: Vec<String>, records: &mut Vec<ThoughtRecord>, next_id: &mut usize| {
        records.push(ThoughtRecord {
            record_id: format!("syn-{next_id}"),
            text: format!("synthetic thought number {next_id}"),
            distortions: labels,
            reframe: Some(format!("synthetic reframe number {next_id}")),
        });
        *next_id += 1;
    };

    // 10 double-labeled records between the two largest distortion classes
    let pair_a = "negative feeling or emotion".to_string();
    let pair_b = "overgeneralization".to_string();
    for _ in 0..10 {
        push(vec![pair_a.clone(), pair_b.clone()], &mut records, &mut next_id);
    }
    for (name, count) in &mut budgets {
        let mut remaining = *count;
        if *name == pair_a || *name == pair_b {
            remaining -= 10;
        }
        for _ in 0..remaining {
            push(vec![name.clone()], &mut records, &mut next_id);
        }
    }
    records
}

/// Synthetic annotated data: `per_class` rows per taxonomy class, every
/// appraisal value drawn i.i.d. uniform from {1..5}. If `planted` is set to
/// `(class, dimension, shift)`, that class's values in that dimension are
/// shifted.
pub fn synthetic_annotated(
    per_class: usize,
    planted: Option<(&str, usize, f64)>,
    seed: u64,
) -> Vec<AnnotatedThought> {
    let taxonomy = Taxonomy::new();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::new();
    for class in taxonomy.classes() {
        for i in 0..per_class {
            let mut values = [0.0; NUM_DIMENSIONS];
            for v in &mut values {
                *v = rng.gen_range(1..=5) as f64;
            }
            if let Some((name, dim, shift)) = planted {
                if class.name == name {
                    values[dim] += shift;
                }
            }
            rows.push(AnnotatedThought {
                record_id: format!("{}-{i}", class.id),
                text: format!("text {} {i}", class.name),
                distortion: class.name.clone(),
                appraisals: AppraisalVector(values),
                reframe: None,
                reframe_appraisals: None,
            });
        }
    }
    rows
}
