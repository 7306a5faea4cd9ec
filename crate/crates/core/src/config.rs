//! Declarative pipeline configuration. One TOML file drives every stage;
//! CLI flags may override individual values.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::PipelineError;
use crate::taxonomy::{Taxonomy, DIMENSION_NAMES};

/// Field delimiter for tabular inputs. `Auto` picks by file extension
/// (`.tsv` gets a tab, anything else a comma).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Delimiter {
    #[default]
    Auto,
    Tab,
    Comma,
}

impl Delimiter {
    pub fn for_path(self, path: &Path) -> u8 {
        match self {
            Delimiter::Tab => b'\t',
            Delimiter::Comma => b',',
            Delimiter::Auto => match path.extension().and_then(|e| e.to_str()) {
                Some("tsv") => b'\t',
                _ => b',',
            },
        }
    }
}

/// Column mapping for the event corpus file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EnventColumns {
    pub text: String,
    pub split: String,
    /// Canonical dimension name -> column name in the file.
    pub ratings: BTreeMap<String, String>,
}

impl Default for EnventColumns {
    fn default() -> Self {
        // Column names of the official corpus release; override in the
        // config file if the upstream format drifts.
        let columns = [
            ("suddenness", "suddenness"),
            ("familiarity", "familiarity"),
            ("event predictability", "predict_event"),
            ("pleasantness", "pleasantness"),
            ("unpleasantness", "unpleasantness"),
            ("goal relevance", "goal_relevance"),
            ("situational responsibility", "chance_responsblt"),
            ("self responsibility", "self_responsblt"),
            ("others responsibility", "other_responsblt"),
            ("anticipated consequence", "predict_conseq"),
            ("goal support", "goal_support"),
            ("urgency", "urgency"),
            ("self control", "self_control"),
            ("others control", "other_control"),
            ("chance control", "chance_control"),
            ("consequence acceptance", "accept_conseq"),
            ("internal standards", "standards"),
            ("external standards", "social_norms"),
            ("attention", "attention"),
            ("not consider", "not_consider"),
            ("effort", "effort"),
        ];
        EnventColumns {
            text: "generated_text".into(),
            split: "split".into(),
            ratings: columns
                .into_iter()
                .map(|(k, v)| (k.to_string(), v.to_string()))
                .collect(),
        }
    }
}

impl EnventColumns {
    /// Every canonical dimension must have a mapped column.
    pub fn validate(&self) -> Result<(), PipelineError> {
        for name in DIMENSION_NAMES {
            if !self.ratings.contains_key(name) {
                return Err(PipelineError::Config(format!(
                    "columns.envent.ratings is missing dimension '{name}'"
                )));
            }
        }
        Ok(())
    }
}

/// Column mapping for the thought corpus files.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ThinkingTrapColumns {
    pub record_id: Option<String>,
    pub text: String,
    pub distortions: String,
    pub reframe: Option<String>,
    pub label_separator: char,
    /// Text column of the extra no-distortion file.
    pub extra_text: String,
}

impl Default for ThinkingTrapColumns {
    fn default() -> Self {
        ThinkingTrapColumns {
            record_id: Some("id".into()),
            text: "thought".into(),
            distortions: "thinking_traps_addressed".into(),
            reframe: Some("reframe".into()),
            label_separator: ',',
            extra_text: "thought".into(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
pub struct ColumnsConfig {
    #[serde(default)]
    pub envent: EnventColumns,
    #[serde(default)]
    pub thinking_trap: ThinkingTrapColumns,
}

/// Input and output locations. Dataset paths may be relative to a data
/// directory supplied via environment variable.
#[derive(Debug, Clone, Serialize, Deserialize, Default)]
pub struct PathsConfig {
    pub envent: Option<PathBuf>,
    pub thinking_trap: Option<PathBuf>,
    pub thinking_trap_extra: Option<PathBuf>,
    pub output_dir: Option<PathBuf>,
    pub checkpoint_dir: Option<PathBuf>,
    pub annotated: Option<PathBuf>,
}

/// Training stage settings, see [`crate::model::TrainConfig`] for semantics.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainSection {
    pub encoder: String,
    pub embedding_dim: usize,
    pub hidden_dim: usize,
    pub learning_rate: f64,
    pub dropout_rate: f64,
    pub weight_decay: f64,
    pub max_epochs: usize,
    pub patience: usize,
    pub batch_size: usize,
    pub seed: u64,
    /// Path to a text-to-embedding table, required by the precomputed encoder.
    pub embedding_table: Option<PathBuf>,
}

impl Default for TrainSection {
    fn default() -> Self {
        TrainSection {
            encoder: "hashed-ngram".into(),
            embedding_dim: 256,
            hidden_dim: 128,
            learning_rate: 1e-5,
            dropout_rate: 0.3,
            weight_decay: 0.01,
            max_epochs: 30,
            patience: 5,
            batch_size: 32,
            seed: 42,
            embedding_table: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AnnotateSection {
    pub include_reframes: bool,
    pub clamp_predictions: bool,
}

impl Default for AnnotateSection {
    fn default() -> Self {
        AnnotateSection {
            include_reframes: true,
            clamp_predictions: false,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AnalyzeSection {
    pub alpha: f64,
    /// Bonferroni denominator override; `None` uses the class-by-dimension
    /// product.
    pub comparison_count: Option<usize>,
    /// Combined sample size up to which the exact permutation null is used.
    pub exact_threshold: usize,
    pub strategies: Vec<String>,
}

impl Default for AnalyzeSection {
    fn default() -> Self {
        AnalyzeSection {
            alpha: 0.05,
            comparison_count: None,
            exact_threshold: 20,
            strategies: vec!["no_distortion".into(), "exclusive".into(), "all_others".into()],
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
pub struct ProfileSection {
    /// Compute reframe shifts per matched pair instead of as a difference of
    /// group medians.
    pub per_pair_shift: bool,
}

/// The whole pipeline configuration file.
#[derive(Debug, Clone, Serialize, Deserialize, Default)]
pub struct PipelineConfig {
    #[serde(default)]
    pub paths: PathsConfig,
    #[serde(default)]
    pub columns: ColumnsConfig,
    #[serde(default, rename = "taxonomy-aliases")]
    pub taxonomy_aliases: BTreeMap<String, String>,
    #[serde(default)]
    pub train: TrainSection,
    #[serde(default)]
    pub annotate: AnnotateSection,
    #[serde(default)]
    pub analyze: AnalyzeSection,
    #[serde(default)]
    pub profile: ProfileSection,
    #[serde(default)]
    pub delimiter: Delimiter,
}

impl PipelineConfig {
    pub fn load(path: &Path) -> Result<Self, PipelineError> {
        let content = std::fs::read_to_string(path).map_err(|e| {
            PipelineError::Config(format!("cannot read config {}: {e}", path.display()))
        })?;
        let config: PipelineConfig = toml::from_str(&content)
            .map_err(|e| PipelineError::Config(format!("invalid config {}: {e}", path.display())))?;
        config.columns.envent.validate()?;
        Ok(config)
    }

    /// Build the taxonomy with any config-supplied aliases applied.
    pub fn taxonomy(&self) -> Taxonomy {
        let mut taxonomy = Taxonomy::new();
        for (alias, canonical) in &self.taxonomy_aliases {
            taxonomy.add_alias(alias, canonical);
        }
        taxonomy
    }
}
