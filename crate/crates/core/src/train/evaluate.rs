use rayon::prelude::*;

use super::loss::softmax;
use super::trainer::{train, EncodedDataset, TrainHistory};
use super::TrainConfig;
use crate::encode::Alphabet;
use crate::error::{Error, Result};
use crate::metrics::{ConfusionMatrix, MetricsReport};
use crate::rng;
use crate::seqio::{stratified_split, Dataset, SplitPlan};
use crate::snn::{argmax, GradientFlow, LifConfig, Readout, SnnModel};

/// Everything needed to build, train and score a fresh model.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub alphabet: Alphabet,
    /// Defaults to the longest sequence in the data being trained on.
    pub max_len: Option<usize>,
    pub hidden: usize,
    pub lif: LifConfig,
    pub readout: Readout,
    pub gradient_flow: GradientFlow,
    pub train: TrainConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            alphabet: Alphabet::default(),
            max_len: None,
            hidden: 128,
            lif: LifConfig::default(),
            readout: Readout::SpikeRate,
            gradient_flow: GradientFlow::Isolated,
            train: TrainConfig::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn build_model(&self, max_len: usize, classes: usize, seed: u64) -> Result<SnnModel> {
        let mut model = SnnModel::new(max_len * self.alphabet.len(), self.hidden, classes, self.lif, seed)?;
        model.readout = self.readout;
        model.gradient_flow = self.gradient_flow;
        Ok(model)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Predictions {
    pub y_true: Vec<usize>,
    pub y_pred: Vec<usize>,
    /// Softmax of the class scores, used as AUC scores.
    pub probabilities: Vec<Vec<f64>>,
}

pub fn evaluate_model(model: &SnnModel, data: &EncodedDataset) -> Result<Predictions> {
    let scores: Vec<Vec<f64>> = data
        .inputs
        .par_iter()
        .map(|x| model.forward(x, false).map(|o| o.class_scores))
        .collect::<Result<_>>()?;
    Ok(Predictions {
        y_true: data.targets.clone(),
        y_pred: scores.iter().map(|s| argmax(s)).collect(),
        probabilities: scores.iter().map(|s| softmax(s)).collect(),
    })
}

/// Result of one train/test repeat.
#[derive(Clone, Debug)]
pub struct RepeatOutcome {
    pub model: SnnModel,
    pub history: TrainHistory,
    pub report: MetricsReport,
    pub confusion: ConfusionMatrix,
    pub max_len: usize,
}

#[derive(Clone, Debug)]
pub struct CrossValReport {
    pub repeats: Vec<RepeatOutcome>,
    pub mean: MetricsReport,
}

impl CrossValReport {
    pub fn per_repeat(&self) -> impl Iterator<Item = &MetricsReport> {
        self.repeats.iter().map(|r| &r.report)
    }
}

/// Trains on split `repeat_index` and scores the held-out side.
pub fn run_repeat(
    dataset: &Dataset,
    plan: &SplitPlan,
    exp: &ExperimentConfig,
    repeat_index: usize,
) -> Result<RepeatOutcome> {
    let (train_set, test_set) = stratified_split(dataset, plan, repeat_index)?;
    let max_len = exp.max_len.unwrap_or_else(|| train_set.max_len());
    let train_data = EncodedDataset::new(&train_set, &exp.alphabet, max_len)?;
    let test_data = EncodedDataset::new(&test_set, &exp.alphabet, max_len)?;

    let seed = rng_seed(exp.train.seed, repeat_index);
    let model = exp.build_model(max_len, dataset.n_classes(), seed)?;
    let cfg = TrainConfig { seed, ..exp.train };
    let (model, history) = train(model, &train_data, &cfg)?;

    let preds = evaluate_model(&model, &test_data)?;
    let (report, confusion) = MetricsReport::from_predictions(
        &preds.y_true,
        &preds.y_pred,
        &preds.probabilities,
        dataset.classes(),
        history.seconds,
    )?;
    Ok(RepeatOutcome {
        model,
        history,
        report,
        confusion,
        max_len,
    })
}

/// Per-repeat seed for model init and batch shuffling.
pub fn rng_seed(seed: u64, repeat_index: usize) -> u64 {
    let bytes = rng::derive_seed(seed, "repeat", &[repeat_index as u64]);
    u64::from_le_bytes(bytes[..8].try_into().unwrap())
}

/// Runs every repeat of `plan` and averages the reports. `parallel` fans
/// repeats out over threads; results are identical either way except for
/// wall-clock fields.
pub fn evaluate_repeated(
    dataset: &Dataset,
    plan: &SplitPlan,
    exp: &ExperimentConfig,
    parallel: bool,
) -> Result<CrossValReport> {
    plan.validate()?;
    if dataset.n_classes() < 2 {
        return Err(Error::param("evaluation needs at least 2 classes"));
    }
    let repeats: Vec<RepeatOutcome> = if parallel {
        (0..plan.repeats)
            .into_par_iter()
            .map(|r| run_repeat(dataset, plan, exp, r))
            .collect::<Result<_>>()?
    } else {
        (0..plan.repeats)
            .map(|r| run_repeat(dataset, plan, exp, r))
            .collect::<Result<_>>()?
    };
    let reports: Vec<MetricsReport> = repeats.iter().map(|r| r.report.clone()).collect();
    let mean = MetricsReport::mean(&reports)?;
    Ok(CrossValReport { repeats, mean })
}
