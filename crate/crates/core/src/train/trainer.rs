use std::time::Instant;

use rand::seq::SliceRandom;
use rayon::prelude::*;

use super::adam::{adam_update, AdamState};
use super::TrainConfig;
use crate::encode::{one_hot_encode, Alphabet, OneHotTensor};
use crate::error::{Error, Result};
use crate::rng;
use crate::seqio::Dataset;
use crate::snn::{ExampleGradient, Parameters, SnnModel};

/// One-hot inputs and class targets, encoded once up front.
#[derive(Clone, Debug)]
pub struct EncodedDataset {
    pub inputs: Vec<OneHotTensor>,
    pub targets: Vec<usize>,
    pub classes: Vec<String>,
}

impl EncodedDataset {
    pub fn new(dataset: &Dataset, alphabet: &Alphabet, max_len: usize) -> Result<Self> {
        let inputs = dataset
            .records()
            .iter()
            .map(|r| one_hot_encode(&r.residues, alphabet, max_len))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            inputs,
            targets: dataset.targets(),
            classes: dataset.classes().to_vec(),
        })
    }

    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainHistory {
    pub epoch_losses: Vec<f64>,
    pub seconds: f64,
}

impl TrainHistory {
    /// `epoch,mean_loss` rows followed by a `# total_seconds=` summary line.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("epoch,mean_loss\n");
        for (i, l) in self.epoch_losses.iter().enumerate() {
            out.push_str(&format!("{},{l:?}\n", i + 1));
        }
        out.push_str(&format!("# total_seconds={:.6}\n", self.seconds));
        out
    }
}

/// Mini-batch ADAM on softmax cross-entropy. Batches are reshuffled every
/// epoch from `(seed, epoch)`; per-example gradients are computed in
/// parallel but always summed in batch order, so results are bit-identical
/// across runs and thread counts.
pub fn train(mut model: SnnModel, data: &EncodedDataset, cfg: &TrainConfig) -> Result<(SnnModel, TrainHistory)> {
    cfg.validate()?;
    if data.is_empty() {
        return Err(Error::param("training set is empty"));
    }
    if let Some(t) = data.targets.iter().find(|&&t| t >= model.classes) {
        return Err(Error::param(format!("target {t} out of range for {} classes", model.classes)));
    }
    let start = Instant::now();
    let mut state = AdamState::new(&model.params);
    let mut grads = Parameters::zeros_like(&model.params);
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut epoch_losses = Vec::with_capacity(cfg.epochs);

    for epoch in 0..cfg.epochs {
        let mut rng = rng::stream(cfg.seed, "shuffle", &[epoch as u64]);
        order.sort_unstable();
        order.shuffle(&mut rng);
        let mut loss_sum = 0.0;
        for (batch_index, batch) in order.chunks(cfg.batch_size).enumerate() {
            let per_example: Vec<ExampleGradient> = batch
                .par_iter()
                .map(|&i| model.example_gradient(&data.inputs[i], data.targets[i]))
                .collect::<Result<_>>()?;
            for (_, t) in grads.tensors_mut() {
                t.fill(0.0);
            }
            let scale = 1.0 / batch.len() as f64;
            let mut batch_loss = 0.0;
            for g in &per_example {
                batch_loss += g.loss;
                g.add_to(&mut grads, scale);
            }
            if !batch_loss.is_finite() {
                return Err(Error::NonFiniteLoss {
                    epoch: epoch + 1,
                    batch: batch_index,
                });
            }
            loss_sum += batch_loss;
            adam_update(&mut model.params, &grads, &mut state, cfg)?;
        }
        let mean = loss_sum / data.len() as f64;
        log::debug!("epoch {} mean loss {mean:.6}", epoch + 1);
        epoch_losses.push(mean);
    }
    Ok((
        model,
        TrainHistory {
            epoch_losses,
            seconds: start.elapsed().as_secs_f64(),
        },
    ))
}
