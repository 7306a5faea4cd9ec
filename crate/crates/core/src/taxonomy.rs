//! Canonical label taxonomies: the 21 appraisal dimensions and the 15
//! cognitive distortion classes, with alias normalization for the spelling
//! variants that appear across dataset releases.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::PipelineError;

/// Number of appraisal dimensions.
pub const NUM_DIMENSIONS: usize = 21;
/// Number of distortion classes excluding "not distorted".
pub const NUM_DISTORTIONS: usize = 14;
/// Total classes including "not distorted".
pub const NUM_CLASSES: usize = 15;

/// Canonical appraisal dimension names, index order fixed across the whole
/// pipeline.
pub const DIMENSION_NAMES: [&str; NUM_DIMENSIONS] = [
    "suddenness",
    "familiarity",
    "event predictability",
    "pleasantness",
    "unpleasantness",
    "goal relevance",
    "situational responsibility",
    "self responsibility",
    "others responsibility",
    "anticipated consequence",
    "goal support",
    "urgency",
    "self control",
    "others control",
    "chance control",
    "consequence acceptance",
    "internal standards",
    "external standards",
    "attention",
    "not consider",
    "effort",
];

const DIMENSION_DEFINITIONS: [&str; NUM_DIMENSIONS] = [
    "The event was sudden or abrupt",
    "The event was familiar",
    "I could have predicted the occurrence of the event",
    "The event was pleasant",
    "The event was unpleasant",
    "I expected the event to have important consequences for me",
    "The event was caused by chance, special circumstances, or natural forces",
    "The event was caused by my own behavior",
    "The event was caused by somebody else's behavior",
    "I anticipated the consequences of the event",
    "I expected positive consequences for me",
    "The event required an immediate response",
    "I was able to influence what was going on during the event",
    "Someone other than me was influencing what was going on",
    "The situation was the result of outside influences of which nobody had control",
    "I anticipated that I would easily live with the unavoidable consequences of the event",
    "The event clashed with my standards and ideals",
    "The actions that produced the event violated laws or socially accepted norms",
    "I had to pay attention to the situation",
    "I tried to shut the situation out of my mind",
    "The situation required me a great deal of energy to deal with it",
];

/// Canonical distortion class names. The last entry is the no-distortion
/// class.
pub const CLASS_NAMES: [&str; NUM_CLASSES] = [
    "all-or-nothing thinking",
    "blaming",
    "catastrophizing",
    "comparing and despairing",
    "disqualifying the positive",
    "emotional reasoning",
    "fortune telling",
    "labeling",
    "magnification",
    "mind reading",
    "negative feeling or emotion",
    "overgeneralization",
    "personalization",
    "should statements",
    "not distorted",
];

const CLASS_DEFINITIONS: [&str; NUM_CLASSES] = [
    "Thinking in extremes.",
    "Giving away your own power to other people.",
    "Focusing on the worst-case scenario.",
    "Comparing your worst to someone else's best.",
    "When something good happens, you ignore it or think it does not count.",
    "Treating your feelings like facts.",
    "Trying to predict the future, focusing on one possibility and ignoring more likely outcomes.",
    "Defining a person based on one action or characteristic.",
    "Exaggerating certain aspects while downplaying others.",
    "Assuming that you know what someone else is thinking.",
    "Getting stuck on a distressing thought, emotion, or belief.",
    "Jumping to conclusions based on one experience.",
    "Taking things personally, or making them about you.",
    "Setting unrealistic expectations of yourself.",
    "No cognitive distortion present.",
];

/// A single appraisal dimension with its fixed index.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AppraisalDimension {
    pub id: usize,
    pub name: String,
    pub definition: String,
}

/// A single cognitive distortion class with its fixed index.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DistortionClass {
    pub id: usize,
    pub name: String,
    pub definition: String,
    pub is_no_distortion: bool,
}

/// Lowercase, trim, and collapse internal whitespace.
pub fn normalize_label(raw: &str) -> String {
    raw.trim()
        .to_lowercase()
        .split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
}

/// The shared taxonomy: fixed dimension and class lists plus an alias table
/// mapping variant spellings to canonical names.
#[derive(Debug, Clone)]
pub struct Taxonomy {
    dimensions: Vec<AppraisalDimension>,
    classes: Vec<DistortionClass>,
    aliases: HashMap<String, String>,
}

impl Default for Taxonomy {
    fn default() -> Self {
        Self::new()
    }
}

impl Taxonomy {
    pub fn new() -> Self {
        let dimensions = DIMENSION_NAMES
            .iter()
            .zip(DIMENSION_DEFINITIONS.iter())
            .enumerate()
            .map(|(id, (name, definition))| AppraisalDimension {
                id,
                name: (*name).to_string(),
                definition: (*definition).to_string(),
            })
            .collect();
        let classes = CLASS_NAMES
            .iter()
            .zip(CLASS_DEFINITIONS.iter())
            .enumerate()
            .map(|(id, (name, definition))| DistortionClass {
                id,
                name: (*name).to_string(),
                definition: (*definition).to_string(),
                is_no_distortion: *name == "not distorted",
            })
            .collect();
        let mut taxonomy = Taxonomy {
            dimensions,
            classes,
            aliases: HashMap::new(),
        };
        for (alias, canonical) in DEFAULT_ALIASES {
            taxonomy.add_alias(alias, canonical);
        }
        taxonomy
    }

    /// Register an extra alias (already-normalized or raw spelling).
    pub fn add_alias(&mut self, alias: &str, canonical: &str) {
        self.aliases
            .insert(normalize_label(alias), normalize_label(canonical));
    }

    pub fn dimensions(&self) -> &[AppraisalDimension] {
        &self.dimensions
    }

    pub fn classes(&self) -> &[DistortionClass] {
        &self.classes
    }

    /// The 14 distortion classes, excluding "not distorted".
    pub fn distortion_classes(&self) -> impl Iterator<Item = &DistortionClass> {
        self.classes.iter().filter(|c| !c.is_no_distortion)
    }

    pub fn no_distortion_class(&self) -> &DistortionClass {
        self.classes
            .iter()
            .find(|c| c.is_no_distortion)
            .expect("taxonomy always contains the no-distortion class")
    }

    fn canonicalize(&self, raw: &str) -> String {
        let normalized = normalize_label(raw);
        self.aliases
            .get(&normalized)
            .cloned()
            .unwrap_or(normalized)
    }

    /// Resolve a raw class label to its canonical class.
    pub fn resolve_class(&self, raw: &str) -> Result<&DistortionClass, PipelineError> {
        let canonical = self.canonicalize(raw);
        self.classes
            .iter()
            .find(|c| c.name == canonical)
            .ok_or_else(|| PipelineError::UnknownLabel {
                label: raw.to_string(),
                accepted: CLASS_NAMES.iter().map(|s| s.to_string()).collect(),
            })
    }

    /// Resolve a raw dimension name to its canonical dimension.
    pub fn resolve_dimension(&self, raw: &str) -> Result<&AppraisalDimension, PipelineError> {
        let canonical = self.canonicalize(raw);
        self.dimensions
            .iter()
            .find(|d| d.name == canonical)
            .ok_or_else(|| PipelineError::UnknownLabel {
                label: raw.to_string(),
                accepted: DIMENSION_NAMES.iter().map(|s| s.to_string()).collect(),
            })
    }
}

// Spelling variants observed across the dataset releases and write-ups.
const DEFAULT_ALIASES: &[(&str, &str)] = &[
    ("personalizing", "personalization"),
    ("negative feeling and emotion", "negative feeling or emotion"),
    ("no distortion", "not distorted"),
    ("none", "not distorted"),
    ("black-and-white thinking", "all-or-nothing thinking"),
    ("all or nothing thinking", "all-or-nothing thinking"),
    ("chance responsibility", "situational responsibility"),
    ("situational/chance responsibility", "situational responsibility"),
    ("predictability", "event predictability"),
    ("accept consequences", "consequence acceptance"),
    ("social norms", "external standards"),
    ("own responsibility", "self responsibility"),
    ("others' responsibility", "others responsibility"),
    ("other's responsibility", "others responsibility"),
    ("others' control", "others control"),
    ("other's control", "others control"),
];
