//! Training loop: AdamW on the smooth-L1 loss, seeded shuffling and
//! dropout, early stopping on dev macro-RMSE, best-epoch checkpoint
//! selection.

use log::info;
use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::EventRecord;
use crate::error::PipelineError;
use crate::model::encoder::{build_encoder, Encoder, EncoderConfig};
use crate::model::eval::evaluate;
use crate::model::loss::{smooth_l1, smooth_l1_grad};
use crate::model::net::{AdamW, HeadConfig, RegressionHead};
use crate::taxonomy::NUM_DIMENSIONS;
use crate::vector::AppraisalVector;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub encoder: EncoderConfig,
    pub hidden_dim: usize,
    pub learning_rate: f64,
    pub dropout_rate: f64,
    pub weight_decay: f64,
    pub max_epochs: usize,
    pub patience: usize,
    pub batch_size: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            encoder: EncoderConfig {
                name: "hashed-ngram".into(),
                embedding_dim: 256,
                embedding_table: None,
            },
            hidden_dim: 128,
            learning_rate: 1e-5,
            dropout_rate: 0.3,
            weight_decay: 0.01,
            max_epochs: 30,
            patience: 5,
            batch_size: 32,
            seed: 42,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochMetrics {
    pub epoch: usize,
    pub train_loss: f64,
    pub dev_macro_rmse: f64,
}

/// A trained head together with everything needed to persist and reload it.
#[derive(Debug, Clone)]
pub struct TrainedModel {
    pub head: RegressionHead,
    pub config: TrainConfig,
    pub history: Vec<EpochMetrics>,
    pub best_epoch: usize,
}

pub(crate) fn encode_batch(
    encoder: &dyn Encoder,
    texts: &[&str],
) -> Result<Array2<f64>, PipelineError> {
    let dim = encoder.embedding_dim();
    let mut matrix = Array2::zeros((texts.len(), dim));
    for (i, text) in texts.iter().enumerate() {
        let embedding = encoder.encode(text)?;
        if embedding.len() != dim {
            return Err(PipelineError::Validation(format!(
                "encoder '{}' returned {} values, declared dim {dim}",
                encoder.name(),
                embedding.len()
            )));
        }
        for (j, v) in embedding.into_iter().enumerate() {
            matrix[[i, j]] = v;
        }
    }
    Ok(matrix)
}

fn targets_matrix(records: &[EventRecord]) -> Array2<f64> {
    let mut matrix = Array2::zeros((records.len(), NUM_DIMENSIONS));
    for (i, r) in records.iter().enumerate() {
        for d in 0..NUM_DIMENSIONS {
            matrix[[i, d]] = r.ratings[d];
        }
    }
    matrix
}

/// Train the regression head. All stochastic stages (init, shuffling,
/// dropout) derive from `config.seed`, so identical configs give identical
/// metric histories.
pub fn train(
    config: &TrainConfig,
    train_set: &[EventRecord],
    dev_set: &[EventRecord],
) -> Result<TrainedModel, PipelineError> {
    if train_set.is_empty() {
        return Err(PipelineError::EmptyInput("empty training set".into()));
    }
    if dev_set.is_empty() {
        return Err(PipelineError::EmptyInput("empty dev set".into()));
    }
    for r in train_set.iter().chain(dev_set) {
        if !r.ratings.is_valid_gold() {
            return Err(PipelineError::Validation(format!(
                "gold ratings outside 1..=5 for text '{}'",
                r.text.chars().take(40).collect::<String>()
            )));
        }
    }

    let encoder = build_encoder(&config.encoder)?;
    let train_texts: Vec<&str> = train_set.iter().map(|r| r.text.as_str()).collect();
    let dev_texts: Vec<&str> = dev_set.iter().map(|r| r.text.as_str()).collect();
    let train_x = encode_batch(encoder.as_ref(), &train_texts)?;
    let dev_x = encode_batch(encoder.as_ref(), &dev_texts)?;
    let train_y = targets_matrix(train_set);
    let dev_gold: Vec<AppraisalVector> = dev_set.iter().map(|r| r.ratings.clone()).collect();

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let head_config = HeadConfig {
        input_dim: encoder.embedding_dim(),
        hidden_dim: config.hidden_dim,
        output_dim: NUM_DIMENSIONS,
        dropout_rate: config.dropout_rate,
    };
    let mut head = RegressionHead::init(head_config, &mut rng);
    let mut optimizer = AdamW::new(
        head.to_flat().len(),
        config.learning_rate,
        config.weight_decay,
    );

    let mut history = Vec::new();
    let mut best: Option<(usize, f64, Vec<f64>)> = None;
    let mut epochs_without_improvement = 0;
    let mut indices: Vec<usize> = (0..train_set.len()).collect();

    for epoch in 0..config.max_epochs {
        indices.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        let mut batches = 0.0;
        for (batch_index, batch) in indices.chunks(config.batch_size.max(1)).enumerate() {
            let batch_x = train_x.select(ndarray::Axis(0), batch);
            let batch_y = train_y.select(ndarray::Axis(0), batch);
            let (output, cache) = head.forward_train(&batch_x, &mut rng);
            let residuals = &output - &batch_y;
            let count = (residuals.nrows() * residuals.ncols()) as f64;
            let loss = residuals.iter().map(|&r| smooth_l1(r)).sum::<f64>() / count;
            if !loss.is_finite() {
                return Err(PipelineError::NonFiniteLoss {
                    learning_rate: config.learning_rate,
                    batch_index,
                });
            }
            let d_output = residuals.mapv(|r| smooth_l1_grad(r) / count);
            let grads = head.backward(&cache, &d_output);
            optimizer.update(&mut head, &grads);
            epoch_loss += loss;
            batches += 1.0;
        }
        let train_loss = epoch_loss / batches;

        let dev_pred = head.forward(&dev_x);
        let dev_vectors: Vec<AppraisalVector> = dev_pred
            .rows()
            .into_iter()
            .map(|row| AppraisalVector::from_slice(row.as_slice().expect("contiguous row")))
            .collect::<Result<_, _>>()?;
        let dev_macro_rmse = evaluate(&dev_vectors, &dev_gold)?.macro_rmse;
        info!("epoch {epoch}: train loss {train_loss:.6}, dev macro-RMSE {dev_macro_rmse:.6}");
        history.push(EpochMetrics {
            epoch,
            train_loss,
            dev_macro_rmse,
        });

        let improved = best
            .as_ref()
            .map(|(_, best_rmse, _)| dev_macro_rmse < *best_rmse)
            .unwrap_or(true);
        if improved {
            best = Some((epoch, dev_macro_rmse, head.to_flat()));
            epochs_without_improvement = 0;
        } else {
            epochs_without_improvement += 1;
            if epochs_without_improvement >= config.patience {
                info!("early stop after epoch {epoch}");
                break;
            }
        }
    }

    let (best_epoch, _, best_weights) = best.expect("at least one epoch ran");
    let head = RegressionHead::from_flat(head.config.clone(), &best_weights)
        .expect("stored weights match head shape");
    Ok(TrainedModel {
        head,
        config: config.clone(),
        history,
        best_epoch,
    })
}
