//! Rank statistics for distortion-appraisal pairs: two-sided Mann-Whitney U
//! with midranks, an exact permutation null for small samples, a
//! tie-corrected normal approximation otherwise, Bonferroni correction, and
//! the per-strategy significance matrices.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::annotate::AnnotatedThought;
use crate::error::PipelineError;
use crate::taxonomy::{AppraisalDimension, DistortionClass, Taxonomy, NUM_DIMENSIONS, NUM_DISTORTIONS};

/// Default combined sample size up to which the exact permutation null is
/// computed.
pub const DEFAULT_EXACT_THRESHOLD: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PValueMethod {
    Exact,
    NormalApproximation,
}

/// Result of a single two-sided Mann-Whitney U test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    /// U statistic of the first sample.
    pub u_statistic: f64,
    pub p_value: f64,
    pub method: PValueMethod,
}

/// Midranks of the concatenation `a ++ b`, plus tie-group sizes.
fn midranks(a: &[f64], b: &[f64]) -> (Vec<f64>, Vec<usize>) {
    let n = a.len() + b.len();
    let mut order: Vec<usize> = (0..n).collect();
    let value = |i: usize| if i < a.len() { a[i] } else { b[i - a.len()] };
    order.sort_by(|&i, &j| value(i).partial_cmp(&value(j)).expect("non-finite sample value"));

    let mut ranks = vec![0.0; n];
    let mut tie_sizes = Vec::new();
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && value(order[end]) == value(order[start]) {
            end += 1;
        }
        let midrank = (start + end + 1) as f64 / 2.0;
        for &idx in &order[start..end] {
            ranks[idx] = midrank;
        }
        tie_sizes.push(end - start);
        start = end;
    }
    (ranks, tie_sizes)
}

/// Exact two-sided p-value under the permutation null: the probability mass
/// of group assignments whose U deviates from the null mean at least as much
/// as the observed U. Counts subset rank sums by dynamic programming over
/// doubled midranks, which are integers.
fn exact_p_value(ranks: &[f64], n1: usize, observed_dev2: i64) -> f64 {
    let n = ranks.len();
    let doubled: Vec<i64> = ranks.iter().map(|&r| (2.0 * r).round() as i64).collect();
    let total: i64 = doubled.iter().sum();
    // dp[k][s] = number of size-k subsets with doubled rank sum s
    let mut dp = vec![vec![0.0_f64; total as usize + 1]; n1 + 1];
    dp[0][0] = 1.0;
    for &s in &doubled {
        for k in (1..=n1).rev() {
            for sum in (s as usize..=total as usize).rev() {
                let prev = dp[k - 1][sum - s as usize];
                if prev > 0.0 {
                    dp[k][sum] += prev;
                }
            }
        }
    }
    let n2 = n - n1;
    let center = (n1 * (n1 + 1) + n1 * n2) as i64;
    let mut extreme = 0.0;
    let mut all = 0.0;
    for (sum, &count) in dp[n1].iter().enumerate() {
        if count == 0.0 {
            continue;
        }
        all += count;
        if (sum as i64 - center).abs() >= observed_dev2 {
            extreme += count;
        }
    }
    extreme / all
}

/// Tie-corrected standard deviation of U under the null.
fn null_sigma(n1: usize, n2: usize, tie_sizes: &[usize]) -> f64 {
    let n = (n1 + n2) as f64;
    let tie_term: f64 = tie_sizes
        .iter()
        .map(|&t| {
            let t = t as f64;
            t * t * t - t
        })
        .sum();
    let factor = (n + 1.0) - tie_term / (n * (n - 1.0));
    ((n1 * n2) as f64 / 12.0 * factor).sqrt()
}

/// Two-sided Mann-Whitney U test with the default exact-size threshold.
pub fn mann_whitney_u(a: &[f64], b: &[f64]) -> Result<TestResult, PipelineError> {
    mann_whitney_u_with(a, b, DEFAULT_EXACT_THRESHOLD)
}

/// Two-sided Mann-Whitney U test. The exact permutation null is used when
/// the combined sample size is at most `exact_threshold`; otherwise the
/// tie-corrected normal approximation with continuity correction.
pub fn mann_whitney_u_with(
    a: &[f64],
    b: &[f64],
    exact_threshold: usize,
) -> Result<TestResult, PipelineError> {
    if a.is_empty() || b.is_empty() {
        return Err(PipelineError::EmptyInput(
            "mann_whitney_u requires two nonempty samples".into(),
        ));
    }
    let (n1, n2) = (a.len(), b.len());
    let (ranks, tie_sizes) = midranks(a, b);
    let rank_sum_a: f64 = ranks[..n1].iter().sum();
    let u_statistic = rank_sum_a - (n1 * (n1 + 1)) as f64 / 2.0;
    let mean = (n1 * n2) as f64 / 2.0;

    if n1 + n2 <= exact_threshold {
        // all ranks are multiples of 0.5, so doubled deviations are integers
        let observed_dev2 = (2.0 * (u_statistic - mean)).round().abs() as i64;
        let p_value = exact_p_value(&ranks, n1, observed_dev2);
        return Ok(TestResult {
            u_statistic,
            p_value,
            method: PValueMethod::Exact,
        });
    }

    let sigma = null_sigma(n1, n2, &tie_sizes);
    let p_value = if sigma == 0.0 {
        1.0
    } else {
        let z = ((u_statistic - mean).abs() - 0.5).max(0.0) / sigma;
        let normal = Normal::new(0.0, 1.0).expect("unit normal");
        (2.0 * (1.0 - normal.cdf(z))).clamp(0.0, 1.0)
    };
    Ok(TestResult {
        u_statistic,
        p_value,
        method: PValueMethod::NormalApproximation,
    })
}

/// Tie-corrected normal-approximation p-value regardless of sample size.
pub fn mann_whitney_u_approx(a: &[f64], b: &[f64]) -> Result<TestResult, PipelineError> {
    mann_whitney_u_with(a, b, 0)
}

/// Bonferroni-corrected threshold: alpha divided by the number of
/// simultaneous comparisons.
pub fn bonferroni_threshold(alpha: f64, n_distortions: usize, n_dimensions: usize) -> f64 {
    alpha / (n_distortions * n_dimensions) as f64
}

/// Negative-group strategy for a distortion-appraisal pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    /// Negative group = rows of the no-distortion class.
    NoDistortion,
    /// Negative group = rows of other distortion classes, excluding
    /// no-distortion.
    Exclusive,
    /// Negative group = every row not labeled with the distortion.
    AllOthers,
}

impl Strategy {
    pub const ALL: [Strategy; 3] = [Strategy::NoDistortion, Strategy::Exclusive, Strategy::AllOthers];
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Strategy::NoDistortion => "no_distortion",
            Strategy::Exclusive => "exclusive",
            Strategy::AllOthers => "all_others",
        };
        f.write_str(name)
    }
}

impl FromStr for Strategy {
    type Err = PipelineError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_lowercase().replace('-', "_").as_str() {
            "no_distortion" => Ok(Strategy::NoDistortion),
            "exclusive" => Ok(Strategy::Exclusive),
            "all_others" => Ok(Strategy::AllOthers),
            other => Err(PipelineError::Config(format!(
                "unknown strategy '{other}'; expected no_distortion, exclusive, or all_others"
            ))),
        }
    }
}

/// Positive and negative sample values for one distortion-appraisal pair.
#[derive(Debug, Clone)]
pub struct GroupPair {
    pub distortion: String,
    pub dimension: String,
    pub positive: Vec<f64>,
    pub negative: Vec<f64>,
    pub strategy: Strategy,
}

/// Build the positive/negative value groups for one pair.
pub fn build_groups(
    data: &[AnnotatedThought],
    distortion: &DistortionClass,
    dimension: &AppraisalDimension,
    strategy: Strategy,
) -> Result<GroupPair, PipelineError> {
    if distortion.is_no_distortion {
        return Err(PipelineError::Config(
            "build_groups requires a distortion class, not the no-distortion class".into(),
        ));
    }
    let d = dimension.id;
    let mut positive = Vec::new();
    let mut negative = Vec::new();
    for row in data {
        let value = row.appraisals[d];
        if row.distortion == distortion.name {
            positive.push(value);
        } else {
            let in_negative = match strategy {
                Strategy::NoDistortion => row.distortion == "not distorted",
                Strategy::Exclusive => row.distortion != "not distorted",
                Strategy::AllOthers => true,
            };
            if in_negative {
                negative.push(value);
            }
        }
    }
    if positive.is_empty() || negative.is_empty() {
        let side = if positive.is_empty() { "positive" } else { "negative" };
        return Err(PipelineError::EmptyGroup {
            class: distortion.name.clone(),
            strategy: strategy.to_string(),
            reason: format!("{side} group is empty"),
        });
    }
    Ok(GroupPair {
        distortion: distortion.name.clone(),
        dimension: dimension.name.clone(),
        positive,
        negative,
        strategy,
    })
}

/// The full 14x21 significance grid for one strategy.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SignificanceMatrix {
    pub strategy: Strategy,
    /// Row order = canonical distortion order; column order = canonical
    /// dimension order.
    pub p_values: Vec<Vec<f64>>,
    pub significant: Vec<Vec<bool>>,
    pub methods: Vec<Vec<PValueMethod>>,
    pub alpha: f64,
    pub corrected_threshold: f64,
}

impl SignificanceMatrix {
    /// Recompute the decision grid from p-values and threshold.
    pub fn decisions_from_pvalues(&self) -> Vec<Vec<bool>> {
        self.p_values
            .iter()
            .map(|row| row.iter().map(|&p| p < self.corrected_threshold).collect())
            .collect()
    }

    pub fn significant_count(&self) -> usize {
        self.significant.iter().flatten().filter(|&&s| s).count()
    }
}

/// Options for [`significance_matrix`].
#[derive(Debug, Clone, Copy)]
pub struct MatrixOptions {
    pub alpha: f64,
    /// Bonferroni denominator override (the class-by-dimension product when
    /// `None`).
    pub comparison_count: Option<usize>,
    pub exact_threshold: usize,
}

impl Default for MatrixOptions {
    fn default() -> Self {
        MatrixOptions {
            alpha: 0.05,
            comparison_count: None,
            exact_threshold: DEFAULT_EXACT_THRESHOLD,
        }
    }
}

/// Run the Mann-Whitney test for every distortion-dimension pair under one
/// negative-group strategy.
pub fn significance_matrix(
    data: &[AnnotatedThought],
    strategy: Strategy,
    taxonomy: &Taxonomy,
    options: MatrixOptions,
) -> Result<SignificanceMatrix, PipelineError> {
    let corrected_threshold = match options.comparison_count {
        Some(count) => options.alpha / count as f64,
        None => bonferroni_threshold(options.alpha, NUM_DISTORTIONS, NUM_DIMENSIONS),
    };
    let mut p_values = Vec::with_capacity(NUM_DISTORTIONS);
    let mut methods = Vec::with_capacity(NUM_DISTORTIONS);
    for class in taxonomy.distortion_classes() {
        let mut row_p = Vec::with_capacity(NUM_DIMENSIONS);
        let mut row_m = Vec::with_capacity(NUM_DIMENSIONS);
        for dimension in taxonomy.dimensions() {
            let pair = build_groups(data, class, dimension, strategy).map_err(|e| {
                PipelineError::Validation(format!(
                    "cell ({}, {}): {e}",
                    class.name, dimension.name
                ))
            })?;
            let result =
                mann_whitney_u_with(&pair.positive, &pair.negative, options.exact_threshold)?;
            row_p.push(result.p_value);
            row_m.push(result.method);
        }
        p_values.push(row_p);
        methods.push(row_m);
    }
    let significant = p_values
        .iter()
        .map(|row| row.iter().map(|&p| p < corrected_threshold).collect())
        .collect();
    Ok(SignificanceMatrix {
        strategy,
        p_values,
        significant,
        methods,
        alpha: options.alpha,
        corrected_threshold,
    })
}

/// Write the p-value grid as CSV, rows = distortions, columns = dimensions.
pub fn write_pvalue_grid(
    matrix: &SignificanceMatrix,
    taxonomy: &Taxonomy,
    path: &Path,
) -> Result<(), PipelineError> {
    let mut writer = csv::Writer::from_path(path)?;
    let mut header = vec!["distortion".to_string()];
    header.extend(taxonomy.dimensions().iter().map(|d| d.name.clone()));
    writer.write_record(&header)?;
    for (class, row) in taxonomy.distortion_classes().zip(&matrix.p_values) {
        let mut record = vec![class.name.clone()];
        record.extend(row.iter().map(|p| format!("{p:.6e}")));
        writer.write_record(&record)?;
    }
    writer.flush()?;
    Ok(())
}

/// Write the binary decision grid as CSV of 0/1.
pub fn write_decision_grid(
    matrix: &SignificanceMatrix,
    taxonomy: &Taxonomy,
    path: &Path,
) -> Result<(), PipelineError> {
    let mut writer = csv::Writer::from_path(path)?;
    let mut header = vec!["distortion".to_string()];
    header.extend(taxonomy.dimensions().iter().map(|d| d.name.clone()));
    writer.write_record(&header)?;
    for (class, row) in taxonomy.distortion_classes().zip(&matrix.significant) {
        let mut record = vec![class.name.clone()];
        record.extend(row.iter().map(|&s| if s { "1" } else { "0" }.to_string()));
        writer.write_record(&record)?;
    }
    writer.flush()?;
    Ok(())
}

/// JSON metadata for one computed matrix.
pub fn write_matrix_metadata(
    matrix: &SignificanceMatrix,
    path: &Path,
) -> Result<(), PipelineError> {
    let exact = matrix
        .methods
        .iter()
        .flatten()
        .filter(|m| **m == PValueMethod::Exact)
        .count();
    let total = matrix.methods.iter().flatten().count();
    let metadata = serde_json::json!({
        "strategy": matrix.strategy,
        "alpha": matrix.alpha,
        "corrected_threshold": matrix.corrected_threshold,
        "significant_cells": matrix.significant_count(),
        "method_counts": {
            "exact": exact,
            "normal_approximation": total - exact,
        },
    });
    std::fs::write(path, serde_json::to_string_pretty(&metadata)?)?;
    Ok(())
}
