//! Loss, optimizer, training loop and the repeated-split evaluation harness.

mod adam;
mod evaluate;
mod loss;
mod trainer;

pub use adam::{adam_update, AdamState};
pub use evaluate::{
    evaluate_model, evaluate_repeated, rng_seed, run_repeat, CrossValReport, ExperimentConfig,
    Predictions, RepeatOutcome,
};
pub use loss::{softmax, softmax_cross_entropy};
pub use trainer::{train, EncodedDataset, TrainHistory};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 100,
            learning_rate: 0.001,
            batch_size: 32,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 {
            return Err(Error::param("epochs must be >= 1"));
        }
        if !(self.learning_rate > 0.0) || !self.learning_rate.is_finite() {
            return Err(Error::param(format!(
                "learning_rate must be > 0, got {}",
                self.learning_rate
            )));
        }
        if self.batch_size == 0 {
            return Err(Error::param("batch_size must be >= 1"));
        }
        if !(0.0..1.0).contains(&self.beta1) || !(0.0..1.0).contains(&self.beta2) {
            return Err(Error::param("adam betas must be in [0, 1)"));
        }
        if !(self.epsilon > 0.0) {
            return Err(Error::param("adam epsilon must be > 0"));
        }
        Ok(())
    }
}
