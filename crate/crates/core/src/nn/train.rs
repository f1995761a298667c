use ndarray::Axis;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::adam::Adam;
use super::dataset::SignalDataset;
use super::mlp::{loss_and_grads, MlpModel};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub steps: usize,
    pub lr_init: f64,
    /// Learning rate at the last step as a fraction of `lr_init`.
    pub lr_final_fraction: f64,
    /// Mini-batch size; `None` trains on the full signal every step.
    pub batch: Option<usize>,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            steps: 2000,
            lr_init: 1e-3,
            lr_final_fraction: 0.1,
            batch: None,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.steps == 0 {
            return Err(Error::InvalidArgument("steps must be at least 1".into()));
        }
        if !(self.lr_init > 0.0 && self.lr_init.is_finite()) {
            return Err(Error::InvalidArgument(format!("bad learning rate {}", self.lr_init)));
        }
        if !(self.lr_final_fraction > 0.0 && self.lr_final_fraction <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "final learning-rate fraction must be in (0, 1], got {}",
                self.lr_final_fraction
            )));
        }
        if self.batch == Some(0) {
            return Err(Error::InvalidArgument("batch size must be positive".into()));
        }
        Ok(())
    }

    /// Exponential decay `lr_init · fraction^(t/steps)`.
    pub fn lr_at(&self, t: usize) -> f64 {
        self.lr_init * self.lr_final_fraction.powf(t as f64 / self.steps as f64)
    }
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub model: MlpModel,
    /// Loss before each update.
    pub loss_trace: Vec<f64>,
}

impl TrainOutcome {
    pub fn final_loss(&self) -> f64 {
        self.loss_trace.last().copied().unwrap_or(f64::NAN)
    }
}

pub fn train(model: &MlpModel, data: &SignalDataset, cfg: &TrainConfig) -> Result<TrainOutcome> {
    train_with_progress(model, data, cfg, |_, _| {})
}

/// Adam training on MSE. Update `k` (1-based) uses `lr_at(k)`, so the last
/// update runs at exactly `lr_final_fraction · lr_init`. Parameters are
/// rounded back to binary32 after every update.
pub fn train_with_progress(
    model: &MlpModel,
    data: &SignalDataset,
    cfg: &TrainConfig,
    mut progress: impl FnMut(usize, f64),
) -> Result<TrainOutcome> {
    cfg.validate()?;
    model.validate()?;
    if data.channels() != model.output_dim() {
        return Err(Error::DimensionMismatch(format!(
            "dataset has {} channels, model outputs {}",
            data.channels(),
            model.output_dim()
        )));
    }
    let mut params = model.params();
    let mut adam = Adam::new(
        params
            .weights
            .iter()
            .chain(params.biases.iter())
            .map(|a| a.dim()),
    );
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut cursor = order.len();
    let mut trace = Vec::with_capacity(cfg.steps);

    for step in 0..cfg.steps {
        let result = match cfg.batch {
            Some(b) if b < data.len() => {
                if cursor + b > order.len() {
                    order.shuffle(&mut rng);
                    cursor = 0;
                }
                let idx = &order[cursor..cursor + b];
                cursor += b;
                let coords = data.coords.select(Axis(0), idx);
                let targets = data.targets.select(Axis(0), idx);
                loss_and_grads(model, &params, &coords, &targets)
            }
            _ => loss_and_grads(model, &params, &data.coords, &data.targets),
        };
        let (loss, grads) = match result {
            Ok(v) => v,
            Err(Error::NonFinite { layer, .. }) => {
                return Err(Error::Divergence {
                    step,
                    loss: f64::NAN,
                    layer: Some(layer),
                    trace,
                })
            }
            Err(e) => return Err(e),
        };
        trace.push(loss);
        progress(step, loss);
        adam.step(
            params.weights.iter_mut().chain(params.biases.iter_mut()),
            grads.weights.iter().chain(grads.biases.iter()),
            cfg.lr_at(step + 1),
        );
        params.round_to_f32();
    }
    let mut trained = model.clone();
    trained.set_params(&params);
    Ok(TrainOutcome {
        model: trained,
        loss_trace: trace,
    })
}
