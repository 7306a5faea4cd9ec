//! The regression head: one hidden projection with ReLU, layer
//! normalization, dropout, and a linear output layer producing the 21
//! appraisal ratings. Forward, backward, and AdamW updates are implemented
//! directly on `ndarray` tensors so training is fully deterministic for a
//! fixed seed.

use ndarray::{Array1, Array2, Axis};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

const LN_EPS: f64 = 1e-5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeadConfig {
    pub input_dim: usize,
    pub hidden_dim: usize,
    pub output_dim: usize,
    pub dropout_rate: f64,
}

#[derive(Debug, Clone)]
pub struct RegressionHead {
    pub config: HeadConfig,
    pub w1: Array2<f64>,
    pub b1: Array1<f64>,
    pub ln_gain: Array1<f64>,
    pub ln_bias: Array1<f64>,
    pub w2: Array2<f64>,
    pub b2: Array1<f64>,
}

/// Intermediate activations kept for the backward pass.
pub struct ForwardCache {
    input: Array2<f64>,
    relu_out: Array2<f64>,
    normalized: Array2<f64>,
    inv_std: Array1<f64>,
    dropped: Array2<f64>,
    dropout_mask: Option<Array2<f64>>,
}

#[derive(Debug, Clone)]
pub struct Gradients {
    pub w1: Array2<f64>,
    pub b1: Array1<f64>,
    pub ln_gain: Array1<f64>,
    pub ln_bias: Array1<f64>,
    pub w2: Array2<f64>,
    pub b2: Array1<f64>,
}

impl RegressionHead {
    /// Xavier-uniform initialization from the given RNG.
    pub fn init(config: HeadConfig, rng: &mut ChaCha8Rng) -> Self {
        let uniform = |rows: usize, cols: usize, rng: &mut ChaCha8Rng| {
            let bound = (6.0 / (rows + cols) as f64).sqrt();
            Array2::from_shape_fn((rows, cols), |_| rng.gen_range(-bound..bound))
        };
        RegressionHead {
            w1: uniform(config.input_dim, config.hidden_dim, rng),
            b1: Array1::zeros(config.hidden_dim),
            ln_gain: Array1::ones(config.hidden_dim),
            ln_bias: Array1::zeros(config.hidden_dim),
            w2: uniform(config.hidden_dim, config.output_dim, rng),
            b2: Array1::zeros(config.output_dim),
            config,
        }
    }

    fn layer_norm(&self, activations: &Array2<f64>) -> (Array2<f64>, Array1<f64>) {
        let h = self.config.hidden_dim as f64;
        let mean = activations.mean_axis(Axis(1)).expect("nonempty rows");
        let mut normalized = activations.clone();
        let mut inv_std = Array1::zeros(activations.nrows());
        for (i, mut row) in normalized.axis_iter_mut(Axis(0)).enumerate() {
            let mu = mean[i];
            let var = row.iter().map(|v| (v - mu) * (v - mu)).sum::<f64>() / h;
            let inv = 1.0 / (var + LN_EPS).sqrt();
            inv_std[i] = inv;
            row.mapv_inplace(|v| (v - mu) * inv);
        }
        (normalized, inv_std)
    }

    /// Inference-mode forward pass: dropout disabled, deterministic.
    pub fn forward(&self, input: &Array2<f64>) -> Array2<f64> {
        self.forward_cached(input, None).0
    }

    /// Training-mode forward pass; `rng` enables dropout.
    pub fn forward_train(
        &self,
        input: &Array2<f64>,
        rng: &mut ChaCha8Rng,
    ) -> (Array2<f64>, ForwardCache) {
        self.forward_cached(input, Some(rng))
    }

    fn forward_cached(
        &self,
        input: &Array2<f64>,
        rng: Option<&mut ChaCha8Rng>,
    ) -> (Array2<f64>, ForwardCache) {
        let hidden = input.dot(&self.w1) + &self.b1;
        let relu_out = hidden.mapv(|v| v.max(0.0));
        let (normalized, inv_std) = self.layer_norm(&relu_out);
        let scaled = &normalized * &self.ln_gain + &self.ln_bias;

        let (dropped, dropout_mask) = match rng {
            Some(rng) if self.config.dropout_rate > 0.0 => {
                let keep = 1.0 - self.config.dropout_rate;
                let mask = Array2::from_shape_fn(scaled.dim(), |_| {
                    if rng.gen::<f64>() < keep {
                        1.0 / keep
                    } else {
                        0.0
                    }
                });
                (&scaled * &mask, Some(mask))
            }
            _ => (scaled, None),
        };
        let output = dropped.dot(&self.w2) + &self.b2;
        let cache = ForwardCache {
            input: input.clone(),
            relu_out,
            normalized,
            inv_std,
            dropped,
            dropout_mask,
        };
        (output, cache)
    }

    /// Backpropagate `d_output` (dLoss/dOutput) through the head.
    pub fn backward(&self, cache: &ForwardCache, d_output: &Array2<f64>) -> Gradients {
        let h = self.config.hidden_dim as f64;

        let w2_grad = cache.dropped.t().dot(d_output);
        let b2_grad = d_output.sum_axis(Axis(0));
        let mut d_scaled = d_output.dot(&self.w2.t());
        if let Some(mask) = &cache.dropout_mask {
            d_scaled *= mask;
        }

        let ln_gain_grad = (&d_scaled * &cache.normalized).sum_axis(Axis(0));
        let ln_bias_grad = d_scaled.sum_axis(Axis(0));

        // layer norm backward, row-wise
        let d_normalized = &d_scaled * &self.ln_gain;
        let mut d_relu = Array2::zeros(cache.relu_out.dim());
        for i in 0..cache.relu_out.nrows() {
            let dn = d_normalized.row(i);
            let xhat = cache.normalized.row(i);
            let mean_dn = dn.sum() / h;
            let mean_dn_xhat = dn.iter().zip(xhat.iter()).map(|(a, b)| a * b).sum::<f64>() / h;
            let inv = cache.inv_std[i];
            for j in 0..cache.relu_out.ncols() {
                d_relu[[i, j]] = inv * (dn[j] - mean_dn - xhat[j] * mean_dn_xhat);
            }
        }

        let d_hidden = &d_relu * &cache.relu_out.mapv(|v| if v > 0.0 { 1.0 } else { 0.0 });
        let w1_grad = cache.input.t().dot(&d_hidden);
        let b1_grad = d_hidden.sum_axis(Axis(0));

        Gradients {
            w1: w1_grad,
            b1: b1_grad,
            ln_gain: ln_gain_grad,
            ln_bias: ln_bias_grad,
            w2: w2_grad,
            b2: b2_grad,
        }
    }

    /// Flatten all parameters in a fixed order.
    pub fn to_flat(&self) -> Vec<f64> {
        let mut flat = Vec::new();
        flat.extend(self.w1.iter());
        flat.extend(self.b1.iter());
        flat.extend(self.ln_gain.iter());
        flat.extend(self.ln_bias.iter());
        flat.extend(self.w2.iter());
        flat.extend(self.b2.iter());
        flat
    }

    /// Restore parameters from [`Self::to_flat`] output.
    pub fn from_flat(config: HeadConfig, flat: &[f64]) -> Option<Self> {
        let (i, h, o) = (config.input_dim, config.hidden_dim, config.output_dim);
        let expected = i * h + h + h + h + h * o + o;
        if flat.len() != expected {
            return None;
        }
        let mut offset = 0;
        let mut take = |len: usize| {
            let slice = &flat[offset..offset + len];
            offset += len;
            slice.to_vec()
        };
        Some(RegressionHead {
            w1: Array2::from_shape_vec((i, h), take(i * h)).ok()?,
            b1: Array1::from_vec(take(h)),
            ln_gain: Array1::from_vec(take(h)),
            ln_bias: Array1::from_vec(take(h)),
            w2: Array2::from_shape_vec((h, o), take(h * o)).ok()?,
            b2: Array1::from_vec(take(o)),
            config,
        })
    }
}

/// Decoupled-weight-decay adaptive gradient optimizer over the flattened
/// parameter vector.
pub struct AdamW {
    first_moment: Vec<f64>,
    second_moment: Vec<f64>,
    step: usize,
    pub learning_rate: f64,
    pub weight_decay: f64,
    beta1: f64,
    beta2: f64,
    eps: f64,
}

impl AdamW {
    pub fn new(parameter_count: usize, learning_rate: f64, weight_decay: f64) -> Self {
        AdamW {
            first_moment: vec![0.0; parameter_count],
            second_moment: vec![0.0; parameter_count],
            step: 0,
            learning_rate,
            weight_decay,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }

    pub fn update(&mut self, head: &mut RegressionHead, grads: &Gradients) {
        self.step += 1;
        let mut flat = head.to_flat();
        let mut grad_flat: Vec<f64> = Vec::with_capacity(flat.len());
        grad_flat.extend(grads.w1.iter());
        grad_flat.extend(grads.b1.iter());
        grad_flat.extend(grads.ln_gain.iter());
        grad_flat.extend(grads.ln_bias.iter());
        grad_flat.extend(grads.w2.iter());
        grad_flat.extend(grads.b2.iter());

        let bias1 = 1.0 - self.beta1.powi(self.step as i32);
        let bias2 = 1.0 - self.beta2.powi(self.step as i32);
        for ((p, &g), (m, v)) in flat
            .iter_mut()
            .zip(grad_flat.iter())
            .zip(self.first_moment.iter_mut().zip(self.second_moment.iter_mut()))
        {
            *m = self.beta1 * *m + (1.0 - self.beta1) * g;
            *v = self.beta2 * *v + (1.0 - self.beta2) * g * g;
            let m_hat = *m / bias1;
            let v_hat = *v / bias2;
            *p -= self.learning_rate * (m_hat / (v_hat.sqrt() + self.eps) + self.weight_decay * *p);
        }
        *head = RegressionHead::from_flat(head.config.clone(), &flat)
            .expect("flat vector length matches config");
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::loss::{smooth_l1, smooth_l1_grad};
    use rand::SeedableRng;

    fn tiny_head(rng: &mut ChaCha8Rng) -> RegressionHead {
        RegressionHead::init(
            HeadConfig {
                input_dim: 4,
                hidden_dim: 6,
                output_dim: 3,
                dropout_rate: 0.0,
            },
            rng,
        )
    }

    #[test]
    fn output_shape_contract() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let head = tiny_head(&mut rng);
        let x = Array2::from_shape_fn((5, 4), |_| rng.gen::<f64>());
        let y = head.forward(&x);
        assert_eq!(y.dim(), (5, 3));
    }

    #[test]
    fn inference_forward_is_deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let head = tiny_head(&mut rng);
        let x = Array2::from_shape_fn((2, 4), |_| rng.gen::<f64>());
        assert_eq!(head.forward(&x), head.forward(&x));
    }

    #[test]
    fn flat_roundtrip_is_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let head = tiny_head(&mut rng);
        let flat = head.to_flat();
        let back = RegressionHead::from_flat(head.config.clone(), &flat).unwrap();
        assert_eq!(head.w1, back.w1);
        assert_eq!(head.w2, back.w2);
        assert_eq!(head.ln_gain, back.ln_gain);
    }

    /// Full-network gradient check against central finite differences,
    /// with the smooth-L1 loss on top.
    #[test]
    fn backward_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let head = tiny_head(&mut rng);
        let x = Array2::from_shape_fn((3, 4), |_| rng.gen_range(-1.0..1.0));
        let target = Array2::from_shape_fn((3, 3), |_| rng.gen_range(1.0..5.0));

        let loss_of = |h: &RegressionHead| -> f64 {
            let y = h.forward(&x);
            (&y - &target).iter().map(|&r| smooth_l1(r)).sum::<f64>() / (3.0 * 3.0)
        };

        let (y, cache) = head.forward_cached(&x, None);
        let d_output = (&y - &target).mapv(|r| smooth_l1_grad(r) / (3.0 * 3.0));
        let grads = head.backward(&cache, &d_output);

        let analytic = {
            let mut flat: Vec<f64> = Vec::new();
            flat.extend(grads.w1.iter());
            flat.extend(grads.b1.iter());
            flat.extend(grads.ln_gain.iter());
            flat.extend(grads.ln_bias.iter());
            flat.extend(grads.w2.iter());
            flat.extend(grads.b2.iter());
            flat
        };

        let flat = head.to_flat();
        let h = 1e-6;
        for idx in (0..flat.len()).step_by(7) {
            let mut plus = flat.clone();
            plus[idx] += h;
            let mut minus = flat.clone();
            minus[idx] -= h;
            let head_plus = RegressionHead::from_flat(head.config.clone(), &plus).unwrap();
            let head_minus = RegressionHead::from_flat(head.config.clone(), &minus).unwrap();
            let numeric = (loss_of(&head_plus) - loss_of(&head_minus)) / (2.0 * h);
            let denom = numeric.abs().max(1e-6);
            assert!(
                ((numeric - analytic[idx]) / denom).abs() < 1e-3,
                "grad mismatch at parameter {idx}: {numeric} vs {}",
                analytic[idx]
            );
        }
    }

    #[test]
    fn adamw_reduces_loss() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut head = tiny_head(&mut rng);
        let x = Array2::from_shape_fn((8, 4), |_| rng.gen_range(-1.0..1.0));
        let target = Array2::from_shape_fn((8, 3), |_| rng.gen_range(1.0..5.0));
        let mut optimizer = AdamW::new(head.to_flat().len(), 1e-2, 0.0);

        let loss_of = |h: &RegressionHead| {
            let y = h.forward(&x);
            (&y - &target).iter().map(|&r| smooth_l1(r)).sum::<f64>() / 24.0
        };
        let before = loss_of(&head);
        for _ in 0..200 {
            let (y, cache) = head.forward_cached(&x, None);
            let d_output = (&y - &target).mapv(|r| smooth_l1_grad(r) / 24.0);
            let grads = head.backward(&cache, &d_output);
            optimizer.update(&mut head, &grads);
        }
        assert!(loss_of(&head) < before * 0.5);
    }
}
