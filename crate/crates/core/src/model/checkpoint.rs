//! Checkpoint persistence: a directory holding the head weights, a config
//! snapshot, and the dev metric history. Weights are stored as raw
//! little-endian f64 so save/load/predict round-trips are bit-identical.

use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::PipelineError;
use crate::model::encoder::{build_encoder, Encoder};
use crate::model::net::{HeadConfig, RegressionHead};
use crate::model::train::{encode_batch, EpochMetrics, TrainConfig, TrainedModel};
use crate::model::Predictor;
use crate::vector::AppraisalVector;

const WEIGHTS_FILE: &str = "weights.bin";
const CONFIG_FILE: &str = "config.json";
const HISTORY_FILE: &str = "history.csv";

#[derive(Debug, Clone, Serialize, Deserialize)]
struct CheckpointMeta {
    train_config: TrainConfig,
    head_config: HeadConfig,
    best_epoch: usize,
    parameter_count: usize,
}

/// A loadable trained model: encoder identity plus head weights.
pub struct Checkpoint {
    pub meta_path: PathBuf,
    pub train_config: TrainConfig,
    pub best_epoch: usize,
    encoder: Box<dyn Encoder>,
    head: RegressionHead,
    weights_digest: String,
}

impl Checkpoint {
    /// Persist a trained model into `dir`.
    pub fn save(model: &TrainedModel, dir: &Path) -> Result<(), PipelineError> {
        std::fs::create_dir_all(dir)?;
        let flat = model.head.to_flat();
        let mut weights = std::fs::File::create(dir.join(WEIGHTS_FILE))?;
        for v in &flat {
            weights.write_f64::<LittleEndian>(*v)?;
        }
        weights.flush()?;

        let meta = CheckpointMeta {
            train_config: model.config.clone(),
            head_config: model.head.config.clone(),
            best_epoch: model.best_epoch,
            parameter_count: flat.len(),
        };
        std::fs::write(
            dir.join(CONFIG_FILE),
            serde_json::to_string_pretty(&meta)?,
        )?;

        let mut history = csv::Writer::from_path(dir.join(HISTORY_FILE))?;
        history.write_record(["epoch", "train_loss", "dev_macro_rmse"])?;
        for m in &model.history {
            history.write_record([
                m.epoch.to_string(),
                format!("{:.12}", m.train_loss),
                format!("{:.12}", m.dev_macro_rmse),
            ])?;
        }
        history.flush()?;
        Ok(())
    }

    /// Load a checkpoint directory, rebuilding the encoder from its stored
    /// identity.
    pub fn load(dir: &Path) -> Result<Self, PipelineError> {
        let meta_path = dir.join(CONFIG_FILE);
        let meta: CheckpointMeta = serde_json::from_str(
            &std::fs::read_to_string(&meta_path).map_err(|e| {
                PipelineError::Checkpoint(format!("cannot read {}: {e}", meta_path.display()))
            })?,
        )
        .map_err(|e| PipelineError::Checkpoint(format!("bad checkpoint config: {e}")))?;

        let weights_path = dir.join(WEIGHTS_FILE);
        let bytes = std::fs::read(&weights_path).map_err(|e| {
            PipelineError::Checkpoint(format!("cannot read {}: {e}", weights_path.display()))
        })?;
        let weights_digest = format!("{:x}", Sha256::digest(&bytes));
        let mut cursor = std::io::Cursor::new(&bytes);
        let mut flat = Vec::with_capacity(meta.parameter_count);
        for _ in 0..meta.parameter_count {
            flat.push(cursor.read_f64::<LittleEndian>().map_err(|e| {
                PipelineError::Checkpoint(format!("truncated weights file: {e}"))
            })?);
        }
        let mut rest = Vec::new();
        cursor.read_to_end(&mut rest)?;
        if !rest.is_empty() {
            return Err(PipelineError::Checkpoint(
                "weights file longer than declared parameter count".into(),
            ));
        }

        let head = RegressionHead::from_flat(meta.head_config.clone(), &flat).ok_or_else(|| {
            PipelineError::Checkpoint("weight count does not match head shape".into())
        })?;
        let encoder = build_encoder(&meta.train_config.encoder)?;
        if encoder.embedding_dim() != meta.head_config.input_dim {
            return Err(PipelineError::Checkpoint(format!(
                "encoder dim {} does not match head input dim {}",
                encoder.embedding_dim(),
                meta.head_config.input_dim
            )));
        }
        Ok(Checkpoint {
            meta_path,
            train_config: meta.train_config,
            best_epoch: meta.best_epoch,
            encoder,
            head,
            weights_digest,
        })
    }

    /// SHA-256 of the weights file, recorded in run manifests.
    pub fn weights_digest(&self) -> &str {
        &self.weights_digest
    }

    /// Load the persisted metric history.
    pub fn history(dir: &Path) -> Result<Vec<EpochMetrics>, PipelineError> {
        let mut reader = csv::Reader::from_path(dir.join(HISTORY_FILE))?;
        let mut history = Vec::new();
        for row in reader.records() {
            let row = row?;
            history.push(EpochMetrics {
                epoch: row[0].parse().map_err(|e| {
                    PipelineError::Checkpoint(format!("bad history row: {e}"))
                })?,
                train_loss: row[1].parse().map_err(|e| {
                    PipelineError::Checkpoint(format!("bad history row: {e}"))
                })?,
                dev_macro_rmse: row[2].parse().map_err(|e| {
                    PipelineError::Checkpoint(format!("bad history row: {e}"))
                })?,
            });
        }
        Ok(history)
    }

    /// Predict with clamping into the 5-point scale.
    pub fn predict_clamped(&self, texts: &[String]) -> Result<Vec<AppraisalVector>, PipelineError> {
        Ok(self
            .predict(texts)?
            .into_iter()
            .map(|v| v.clamped())
            .collect())
    }
}

impl Predictor for Checkpoint {
    fn predict(&self, texts: &[String]) -> Result<Vec<AppraisalVector>, PipelineError> {
        let refs: Vec<&str> = texts.iter().map(|s| s.as_str()).collect();
        let x = encode_batch(self.encoder.as_ref(), &refs)?;
        let y = self.head.forward(&x);
        y.rows()
            .into_iter()
            .map(|row| AppraisalVector::from_slice(row.as_slice().expect("contiguous row")))
            .collect()
    }
}
