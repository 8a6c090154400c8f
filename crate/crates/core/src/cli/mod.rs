//! Command-line entry point: `datagen`, `encode`, `transform`, `train`,
//! `eval`, `crossval`.
//!
//! Settings come from an optional config file (`--config`), then `--set
//! key=value` overrides, then the dedicated flags. Every command writes a
//! `run_manifest.txt` holding the fully-resolved config.

pub mod config;

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

pub use config::{DataSource, RunConfig, SyntheticParams};

use crate::encode::{one_hot_encode, signal_encode};
use crate::error::{Error, Result};
use crate::metrics::MetricsReport;
use crate::seqio::{self, Dataset};
use crate::snn::Checkpoint;
use crate::train::{evaluate_model, evaluate_repeated, run_repeat, EncodedDataset};
use crate::transforms::{matrix_to_csv, matrix_to_grayscale, TransformRegistry};

pub const MANIFEST_FILE: &str = "run_manifest.txt";

#[derive(Debug, Parser)]
#[command(name = "spikeseq", version, about = "Spiking neural network protein sequence classifier")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// `key = value` config file (a previous run_manifest.txt works too).
    #[arg(long, short)]
    config: Option<PathBuf>,
    /// Override a config key, e.g. `--set snn.decay_multiplier=0.9`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Output directory (`output.dir`).
    #[arg(long, short)]
    out: Option<PathBuf>,
    /// Master seed (`seed`).
    #[arg(long)]
    seed: Option<u64>,
    /// Input FASTA (`data.fasta`).
    #[arg(long)]
    fasta: Option<PathBuf>,
    /// `id,label` CSV (`data.labels`).
    #[arg(long)]
    labels: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write a synthetic FASTA and label CSV.
    Datagen(Common),
    /// Write one-hot tensors and integer signal series.
    Encode(Common),
    /// Write RP / GAF / MTF matrices per record.
    Transform {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        kind: String,
        /// Also write grayscale PNGs.
        #[arg(long)]
        png: bool,
    },
    /// Train on split 0 and score its test side.
    Train(Common),
    /// Score a dataset with a saved checkpoint.
    Eval {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        checkpoint: PathBuf,
    },
    /// Repeated stratified train/test evaluation.
    Crossval {
        #[command(flatten)]
        common: Common,
        /// Run repeats on worker threads.
        #[arg(long)]
        parallel: bool,
    },
}

impl Common {
    fn resolve(&self) -> Result<RunConfig> {
        let mut entries = match &self.config {
            Some(path) => RunConfig::from_file(path)?,
            None => Vec::new(),
        };
        for o in &self.overrides {
            let (k, v) = o
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("--set expects KEY=VALUE, got \"{o}\"")))?;
            entries.push((k.trim().to_string(), v.trim().to_string()));
        }
        let mut push = |k: &str, v: String| entries.push((k.to_string(), v));
        if let Some(s) = self.seed {
            push("seed", s.to_string());
        }
        if let Some(p) = &self.fasta {
            push("data.fasta", p.display().to_string());
        }
        if let Some(p) = &self.labels {
            push("data.labels", p.display().to_string());
        }
        if let Some(p) = &self.out {
            push("output.dir", p.display().to_string());
        }
        RunConfig::resolve(&entries)
    }
}

/// Parses `argv` (including the program name) and runs the command.
pub fn run<I, T>(argv: I) -> Result<()>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv).map_err(|e| match e.kind() {
        clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
            let _ = e.print();
            Error::Config("help requested".into())
        }
        _ => Error::Config(e.to_string().lines().next().unwrap_or("bad arguments").to_string()),
    })?;
    match cli.command {
        Command::Datagen(common) => datagen(&common.resolve()?),
        Command::Encode(common) => encode(&mut common.resolve()?),
        Command::Transform { common, kind, png } => {
            let mut cfg = common.resolve()?;
            cfg.transform_png |= png;
            transform(&mut cfg, &kind)
        }
        Command::Train(common) => train(&mut common.resolve()?),
        Command::Eval { common, checkpoint } => eval(&common.resolve()?, &checkpoint),
        Command::Crossval { common, parallel } => crossval(&mut common.resolve()?, parallel),
    }
}

fn write(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

fn prepare_output(cfg: &RunConfig) -> Result<&Path> {
    let dir = cfg.output_dir.as_path();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    Ok(dir)
}

fn write_manifest(cfg: &RunConfig) -> Result<()> {
    write(&cfg.output_dir.join(MANIFEST_FILE), cfg.to_manifest())
}

pub fn load_dataset(cfg: &RunConfig) -> Result<Dataset> {
    match &cfg.data {
        DataSource::Fasta { path, labels } => {
            let table = match labels {
                Some(l) => {
                    let f = fs::File::open(l).map_err(|e| Error::io(l, e))?;
                    Some(seqio::read_label_csv(f)?)
                }
                None => None,
            };
            let f = fs::File::open(path).map_err(|e| Error::io(path, e))?;
            seqio::parse_fasta(std::io::BufReader::new(f), table.as_ref())
        }
        DataSource::Synthetic(s) => {
            seqio::generate_synthetic(s.classes, &s.per_class, s.length, s.mutation_rate, cfg.seed)
        }
    }
}

/// Pins `encode.max_len` to the longest sequence of the loaded data when it
/// was left on auto, so the manifest reproduces the run exactly.
fn resolve_max_len(cfg: &mut RunConfig, dataset: &Dataset) -> usize {
    *cfg.max_len.get_or_insert_with(|| dataset.max_len())
}

/// File stem for a record: its position plus the id with unsafe characters
/// replaced.
fn record_stem(index: usize, id: &str) -> String {
    let safe: String = id
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || "._-".contains(c) { c } else { '_' })
        .collect();
    format!("{index:05}_{safe}")
}

fn datagen(cfg: &RunConfig) -> Result<()> {
    if !matches!(cfg.data, DataSource::Synthetic(_)) {
        return Err(Error::Config("datagen needs synthetic data settings, not data.fasta".into()));
    }
    let dir = prepare_output(cfg)?;
    let ds = load_dataset(cfg)?;
    write(&dir.join("synthetic.fasta"), seqio::write_fasta(&ds, 60))?;
    write(&dir.join("labels.csv"), seqio::write_label_csv(&ds)?)?;
    write_manifest(cfg)?;
    log::info!("wrote {} records in {} classes to {}", ds.len(), ds.n_classes(), dir.display());
    Ok(())
}

fn encode(cfg: &mut RunConfig) -> Result<()> {
    let ds = load_dataset(cfg)?;
    let max_len = resolve_max_len(cfg, &ds);
    let alphabet = cfg.alphabet()?;
    let dir = prepare_output(cfg)?.to_path_buf();
    let onehot_dir = dir.join("onehot");
    fs::create_dir_all(&onehot_dir).map_err(|e| Error::io(&onehot_dir, e))?;

    let mut signals = csv::Writer::from_path(dir.join("signals.csv"))?;
    let mut header = vec!["id".to_string(), "label".into(), "true_length".into()];
    header.extend((0..max_len).map(|i| format!("v{i}")));
    signals.write_record(&header)?;
    for (i, r) in ds.records().iter().enumerate() {
        let s = signal_encode(&r.residues, &alphabet, max_len)?;
        let mut row = vec![r.id.clone(), r.label.clone(), s.true_length.to_string()];
        row.extend(s.values.iter().map(ToString::to_string));
        signals.write_record(&row)?;

        let t = one_hot_encode(&r.residues, &alphabet, max_len)?;
        let mut w = csv::WriterBuilder::new()
            .has_headers(false)
            .from_path(onehot_dir.join(format!("{}.csv", record_stem(i, &r.id))))?;
        for row in 0..t.rows() {
            w.write_record((0..t.cols()).map(|c| if t.get(row, c) == 1.0 { "1" } else { "0" }))?;
        }
        w.flush().map_err(|e| Error::io(&onehot_dir, e))?;
    }
    signals.flush().map_err(|e| Error::io(&dir, e))?;
    write_manifest(cfg)?;
    log::info!("encoded {} records (max length {max_len})", ds.len());
    Ok(())
}

fn transform(cfg: &mut RunConfig, kind: &str) -> Result<()> {
    let registry = TransformRegistry::with_builtins(&cfg.transform)?;
    let strategy = registry.get(kind)?;
    let ds = load_dataset(cfg)?;
    let max_len = resolve_max_len(cfg, &ds);
    let alphabet = cfg.alphabet()?;
    let dir = prepare_output(cfg)?.join(strategy.name());
    fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    for (i, r) in ds.records().iter().enumerate() {
        let signal = signal_encode(&r.residues, &alphabet, max_len)?;
        let series = if cfg.transform_trim {
            signal.trimmed_f64()
        } else {
            signal.to_f64()
        };
        let m = strategy.apply(&series)?;
        let stem = record_stem(i, &r.id);
        write(&dir.join(format!("{stem}.csv")), matrix_to_csv(&m)?)?;
        if cfg.transform_png {
            matrix_to_grayscale(&m).save(dir.join(format!("{stem}.png")))?;
        }
    }
    write_manifest(cfg)?;
    log::info!("wrote {} {} matrices to {}", ds.len(), strategy.name(), dir.display());
    Ok(())
}

fn train(cfg: &mut RunConfig) -> Result<()> {
    let ds = load_dataset(cfg)?;
    resolve_max_len(cfg, &ds);
    let dir = prepare_output(cfg)?.to_path_buf();
    let exp = cfg.experiment()?;
    let outcome = run_repeat(&ds, &cfg.split, &exp, 0)?;
    let ckpt = Checkpoint {
        model: outcome.model,
        alphabet: exp.alphabet,
        max_len: outcome.max_len,
        classes: ds.classes().to_vec(),
    };
    ckpt.write(&dir.join("model.ckpt"))?;
    write(&dir.join("train_history.csv"), outcome.history.to_csv())?;
    write(&dir.join("metrics.json"), outcome.report.to_json()?)?;
    write(&dir.join("confusion.csv"), outcome.confusion.to_csv(ds.classes())?)?;
    write_manifest(cfg)?;
    log::info!(
        "trained in {:.2}s; test accuracy {:.4}, weighted F1 {:.4}",
        outcome.history.seconds,
        outcome.report.accuracy,
        outcome.report.f1_weighted
    );
    Ok(())
}

fn eval(cfg: &RunConfig, checkpoint: &Path) -> Result<()> {
    let ckpt = Checkpoint::read(checkpoint)?;
    let loaded = load_dataset(cfg)?;
    let ds = Dataset::with_classes(loaded.records().to_vec(), ckpt.classes.clone())?;
    let dir = prepare_output(cfg)?.to_path_buf();
    let data = EncodedDataset::new(&ds, &ckpt.alphabet, ckpt.max_len)?;
    let preds = evaluate_model(&ckpt.model, &data)?;
    let (report, cm) =
        MetricsReport::from_predictions(&preds.y_true, &preds.y_pred, &preds.probabilities, &ckpt.classes, 0.0)?;
    write(&dir.join("metrics.json"), report.to_json()?)?;
    write(&dir.join("confusion.csv"), cm.to_csv(&ckpt.classes)?)?;
    write_manifest(cfg)?;
    log::info!("accuracy {:.4}, weighted F1 {:.4}", report.accuracy, report.f1_weighted);
    Ok(())
}

fn crossval(cfg: &mut RunConfig, parallel: bool) -> Result<()> {
    let ds = load_dataset(cfg)?;
    resolve_max_len(cfg, &ds);
    let dir = prepare_output(cfg)?.to_path_buf();
    let report = evaluate_repeated(&ds, &cfg.split, &cfg.experiment()?, parallel)?;
    for (k, r) in report.repeats.iter().enumerate() {
        write(&dir.join(format!("repeat_{k}.json")), r.report.to_json()?)?;
        write(&dir.join(format!("confusion_{k}.csv")), r.confusion.to_csv(ds.classes())?)?;
        write(&dir.join(format!("train_history_{k}.csv")), r.history.to_csv())?;
    }
    write(&dir.join("averaged.json"), report.mean.to_json()?)?;
    write_manifest(cfg)?;
    log::info!(
        "{} repeats: mean accuracy {:.4}, weighted F1 {:.4}, macro F1 {:.4}, ROC AUC {:.4}",
        report.repeats.len(),
        report.mean.accuracy,
        report.mean.f1_weighted,
        report.mean.f1_macro,
        report.mean.roc_auc_ovr
    );
    Ok(())
}
