//! Properties of the multi-label expansion and the corpus file formats.

mod common;

use appraisal_core::config::Delimiter;
use appraisal_core::corpus::{
    class_distribution, expand_multilabel, read_expanded, write_expanded, ThoughtRecord,
};
use appraisal_core::taxonomy::{Taxonomy, CLASS_NAMES};
use proptest::prelude::*;

fn arbitrary_record(index: usize) -> impl proptest::strategy::Strategy<Value = ThoughtRecord> {
    let distortion_labels = prop::sample::subsequence(
        CLASS_NAMES[..CLASS_NAMES.len() - 1].to_vec(),
        1..=4,
    );
    let labels = prop_oneof![
        4 => distortion_labels.prop_map(|ls| ls.iter().map(|s| s.to_string()).collect::<Vec<_>>()),
        1 => Just(vec!["not distorted".to_string()]),
    ];
    // reframes are generated without surrounding whitespace; the file
    // format trims fields on read
    (labels, prop::option::of("[a-z]{1,20}")).prop_map(move |(distortions, reframe)| {
        ThoughtRecord {
            record_id: format!("r{index}"),
            text: format!("thought {index}"),
            distortions,
            reframe,
        }
    })
}

fn arbitrary_corpus() -> impl proptest::strategy::Strategy<Value = Vec<ThoughtRecord>> {
    prop::collection::vec(any::<u8>(), 0..=20).prop_flat_map(|seeds| {
        seeds
            .into_iter()
            .enumerate()
            .map(|(i, _)| arbitrary_record(i))
            .collect::<Vec<_>>()
    })
}

proptest! {
    /// Expansion conservation: total class counts equal the sum of
    /// label-set sizes.
    #[test]
    fn expansion_conservation(records in arbitrary_corpus()) {
        let taxonomy = Taxonomy::new();
        let expanded = expand_multilabel(&records);
        let label_total: usize = records.iter().map(|r| r.distortions.len()).sum();
        prop_assert_eq!(expanded.len(), label_total);
        let counts = class_distribution(&expanded, &taxonomy);
        prop_assert_eq!(counts.values().sum::<usize>(), label_total);
    }

    /// No replica of a no-distortion record carries a distortion class.
    #[test]
    fn no_distortion_never_mixed(records in arbitrary_corpus()) {
        let expanded = expand_multilabel(&records);
        for r in &records {
            let replicas: Vec<_> = expanded
                .iter()
                .filter(|e| e.record_id == r.record_id)
                .collect();
            let has_no_distortion = replicas.iter().any(|e| e.distortion == "not distorted");
            if has_no_distortion {
                prop_assert!(replicas.iter().all(|e| e.distortion == "not distorted"));
            }
        }
    }

    /// Writing and re-reading the expanded corpus is the identity.
    #[test]
    fn expanded_file_roundtrip(records in arbitrary_corpus()) {
        let dir = tempfile::tempdir().unwrap();
        let expanded = expand_multilabel(&records);
        let path = dir.path().join("expanded.tsv");
        write_expanded(&expanded, &path, Delimiter::Auto).unwrap();
        let back = read_expanded(&path, Delimiter::Auto).unwrap();
        prop_assert_eq!(expanded, back);
    }
}

/// The synthetic corpus reproduces the published class counts exactly.
#[test]
fn table1_reconstruction() {
    let taxonomy = Taxonomy::new();
    let corpus = common::table1_corpus();
    let expanded = expand_multilabel(&corpus);
    assert_eq!(expanded.len(), common::TOTAL_EXPANDED);
    let counts = class_distribution(&expanded, &taxonomy);
    for (name, expected) in common::CLASS_COUNTS {
        assert_eq!(counts[name], expected, "class {name}");
    }
}
