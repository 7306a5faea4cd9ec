//! Text encoders. The regression head only sees an embedding, so the
//! encoder is an interface with registered implementations: a fast hashed
//! character n-gram encoder for desk-scale runs and CI, and a table lookup
//! for embeddings precomputed offline with a full-size sentence encoder.

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::PipelineError;

/// Deterministic text-to-vector encoder.
pub trait Encoder: Send + Sync {
    fn name(&self) -> &str;
    fn embedding_dim(&self) -> usize;
    fn encode(&self, text: &str) -> Result<Vec<f64>, PipelineError>;
}

/// Serializable encoder identity, stored in checkpoints so loading rebuilds
/// the exact same encoder.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncoderConfig {
    pub name: String,
    pub embedding_dim: usize,
    pub embedding_table: Option<PathBuf>,
}

/// Build a registered encoder from its config.
pub fn build_encoder(config: &EncoderConfig) -> Result<Box<dyn Encoder>, PipelineError> {
    match config.name.as_str() {
        "hashed-ngram" => Ok(Box::new(HashedNgramEncoder::new(config.embedding_dim))),
        "precomputed" => {
            let table = config.embedding_table.as_ref().ok_or_else(|| {
                PipelineError::Config(
                    "encoder 'precomputed' requires an embedding_table path".into(),
                )
            })?;
            Ok(Box::new(PrecomputedEncoder::load(table)?))
        }
        other => Err(PipelineError::Config(format!(
            "unknown encoder '{other}'; registered encoders: hashed-ngram, precomputed"
        ))),
    }
}

/// Hashed character n-gram encoder: signed feature hashing of 3- to 5-grams
/// into a fixed-width l2-normalized vector. Deterministic by construction.
#[derive(Debug, Clone)]
pub struct HashedNgramEncoder {
    dim: usize,
    max_chars: usize,
}

impl HashedNgramEncoder {
    pub fn new(dim: usize) -> Self {
        HashedNgramEncoder {
            dim,
            max_chars: 2000,
        }
    }
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf29ce484222325;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x100000001b3);
    }
    hash
}

impl Encoder for HashedNgramEncoder {
    fn name(&self) -> &str {
        "hashed-ngram"
    }

    fn embedding_dim(&self) -> usize {
        self.dim
    }

    fn encode(&self, text: &str) -> Result<Vec<f64>, PipelineError> {
        let mut chars: Vec<char> = text.to_lowercase().chars().collect();
        if chars.len() > self.max_chars {
            warn!("text of {} chars truncated to {}", chars.len(), self.max_chars);
            chars.truncate(self.max_chars);
        }
        let mut padded = vec![' '];
        padded.extend(chars);
        padded.push(' ');

        let mut features = vec![0.0_f64; self.dim];
        for n in 3..=5 {
            if padded.len() < n {
                continue;
            }
            for window in padded.windows(n) {
                let gram: String = window.iter().collect();
                let hash = fnv1a(gram.as_bytes());
                let bucket = (hash % self.dim as u64) as usize;
                let sign = if (hash >> 63) & 1 == 0 { 1.0 } else { -1.0 };
                features[bucket] += sign;
            }
        }
        let norm = features.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 0.0 {
            for v in &mut features {
                *v /= norm;
            }
        }
        Ok(features)
    }
}

/// Lookup encoder over a table of precomputed embeddings, one row per text:
/// `text <tab> v1 <tab> v2 ...`.
pub struct PrecomputedEncoder {
    table: HashMap<String, Vec<f64>>,
    dim: usize,
}

impl PrecomputedEncoder {
    pub fn load(path: &Path) -> Result<Self, PipelineError> {
        let content = std::fs::read_to_string(path)?;
        let mut table = HashMap::new();
        let mut dim = 0;
        for (line_number, line) in content.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let mut parts = line.split('\t');
            let text = parts.next().unwrap_or("").to_string();
            let vector: Vec<f64> = parts
                .map(|p| {
                    p.trim().parse::<f64>().map_err(|e| {
                        PipelineError::Validation(format!(
                            "embedding table line {line_number}: bad value '{p}': {e}"
                        ))
                    })
                })
                .collect::<Result<_, _>>()?;
            if vector.is_empty() {
                return Err(PipelineError::Validation(format!(
                    "embedding table line {line_number}: no values"
                )));
            }
            if dim == 0 {
                dim = vector.len();
            } else if vector.len() != dim {
                return Err(PipelineError::Validation(format!(
                    "embedding table line {line_number}: expected {dim} values, got {}",
                    vector.len()
                )));
            }
            table.insert(text, vector);
        }
        if table.is_empty() {
            return Err(PipelineError::EmptyInput("embedding table is empty".into()));
        }
        Ok(PrecomputedEncoder { table, dim })
    }
}

impl Encoder for PrecomputedEncoder {
    fn name(&self) -> &str {
        "precomputed"
    }

    fn embedding_dim(&self) -> usize {
        self.dim
    }

    fn encode(&self, text: &str) -> Result<Vec<f64>, PipelineError> {
        self.table.get(text).cloned().ok_or_else(|| {
            PipelineError::Validation(format!(
                "text not present in the embedding table: '{}'",
                text.chars().take(60).collect::<String>()
            ))
        })
    }
}
