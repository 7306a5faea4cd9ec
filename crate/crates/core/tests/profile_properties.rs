//! Algebraic properties of median profiles and reframing shifts.

mod common;

use appraisal_core::annotate::AnnotatedThought;
use appraisal_core::profiles::{
    baseline_profile, distortion_profile, median, reframe_shift, relative_profile,
};
use appraisal_core::taxonomy::{Taxonomy, NUM_DIMENSIONS};
use appraisal_core::vector::AppraisalVector;
use proptest::prelude::*;

proptest! {
    /// Median against a plain sort-based oracle, and robustness: replacing
    /// one value moves the median at most to an adjacent order statistic.
    #[test]
    fn median_matches_sort_oracle(values in prop::collection::vec(-100.0..100.0f64, 1..30)) {
        let mut sorted = values.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let n = sorted.len();
        let oracle = if n % 2 == 1 {
            sorted[n / 2]
        } else {
            (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0
        };
        let mut work = values.clone();
        prop_assert_eq!(median(&mut work), oracle);
    }

    #[test]
    fn median_robust_to_single_replacement(
        values in prop::collection::vec(-50.0..50.0f64, 3..20),
        index in any::<prop::sample::Index>(),
        replacement in -1e6..1e6f64,
    ) {
        let mut original = values.clone();
        let before = median(&mut original);
        // original is now sorted; the window of order statistics adjacent
        // to the middle bounds any single-replacement median
        let n = original.len();
        let (low, high) = if n % 2 == 1 {
            (original[n / 2 - 1], original[n / 2 + 1])
        } else {
            (
                (original[n / 2 - 2] + original[n / 2 - 1]) / 2.0,
                (original[n / 2] + original[n / 2 + 1]) / 2.0,
            )
        };
        let mut perturbed = values.clone();
        let i = index.index(perturbed.len());
        perturbed[i] = replacement;
        let after = median(&mut perturbed);
        prop_assert!(after >= low.min(before) - 1e-12 && after <= high.max(before) + 1e-12,
            "median moved from {} to {} outside [{}, {}]", before, after, low, high);
    }

    /// Adding a constant to one dimension shifts that median by the
    /// constant and leaves the others unchanged.
    #[test]
    fn translation_equivariance(
        seed in any::<u64>(),
        dimension in 0..NUM_DIMENSIONS,
        offset in -3.0..3.0f64,
    ) {
        let data = common::synthetic_annotated(5, None, seed);
        let taxonomy = Taxonomy::new();
        let class = taxonomy.resolve_class("labeling").unwrap();
        let base = distortion_profile(&data, class).unwrap();
        let shifted_data: Vec<AnnotatedThought> = data
            .iter()
            .map(|r| {
                let mut r = r.clone();
                r.appraisals[dimension] += offset;
                r
            })
            .collect();
        let shifted = distortion_profile(&shifted_data, class).unwrap();
        for d in 0..NUM_DIMENSIONS {
            let expected = if d == dimension { offset } else { 0.0 };
            prop_assert!((shifted.medians[d] - base.medians[d] - expected).abs() < 1e-9);
        }
    }
}

/// relative_profile(P, P) = 0 for random profiles.
#[test]
fn self_relative_profile_is_zero() {
    let data = common::synthetic_annotated(6, None, 23);
    let baseline = baseline_profile(&data).unwrap();
    let rel = relative_profile(&baseline, &baseline);
    assert!(rel.deltas.iter().all(|&d| d == 0.0));
}

/// Swapping original and reframe vectors negates the shift.
#[test]
fn reframe_shift_antisymmetry() {
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let taxonomy = Taxonomy::new();
    let class = taxonomy.resolve_class("catastrophizing").unwrap();
    let rows: Vec<AnnotatedThought> = (0..9)
        .map(|i| {
            let originals =
                AppraisalVector(std::array::from_fn(|_| rng.gen_range(1..=5) as f64));
            let reframed =
                AppraisalVector(std::array::from_fn(|_| rng.gen_range(1..=5) as f64));
            AnnotatedThought {
                record_id: format!("r{i}"),
                text: format!("t{i}"),
                distortion: class.name.clone(),
                appraisals: originals,
                reframe: Some(format!("rf{i}")),
                reframe_appraisals: Some(reframed),
            }
        })
        .collect();
    let swapped: Vec<AnnotatedThought> = rows
        .iter()
        .map(|r| {
            let mut s = r.clone();
            s.appraisals = r.reframe_appraisals.clone().unwrap();
            s.reframe_appraisals = Some(r.appraisals.clone());
            s
        })
        .collect();
    let forward = reframe_shift(&rows, class).unwrap();
    let backward = reframe_shift(&swapped, class).unwrap();
    for d in 0..NUM_DIMENSIONS {
        assert!((forward.deltas[d] + backward.deltas[d]).abs() < 1e-12);
    }
}
