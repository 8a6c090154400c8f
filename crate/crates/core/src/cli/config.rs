//! Run configuration: line-oriented `key = value` with dotted section
//! prefixes. `#` starts a comment. Keys not listed in [`RunConfig::KEYS`] are
//! rejected.

use std::path::{Path, PathBuf};

use crate::encode::Alphabet;
use crate::error::{Error, Result};
use crate::seqio::SplitPlan;
use crate::snn::{GradientFlow, LifConfig, Readout, ResetMode};
use crate::train::{ExperimentConfig, TrainConfig};
use crate::transforms::TransformParams;

#[derive(Clone, Debug, PartialEq)]
pub struct SyntheticParams {
    pub classes: usize,
    pub per_class: Vec<usize>,
    pub length: usize,
    pub mutation_rate: f64,
}

impl Default for SyntheticParams {
    fn default() -> Self {
        Self {
            classes: 5,
            per_class: vec![100; 5],
            length: 200,
            mutation_rate: 0.02,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum DataSource {
    Fasta { path: PathBuf, labels: Option<PathBuf> },
    Synthetic(SyntheticParams),
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub seed: u64,
    pub data: DataSource,
    pub alphabet: String,
    pub fallback: Option<char>,
    pub max_len: Option<usize>,
    pub hidden: usize,
    pub lif: LifConfig,
    pub readout: Readout,
    pub gradient_flow: GradientFlow,
    pub train: TrainConfig,
    pub split: SplitPlan,
    pub transform: TransformParams,
    pub transform_trim: bool,
    pub transform_png: bool,
    pub output_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        let alphabet = Alphabet::default();
        Self {
            seed: 0,
            data: DataSource::Synthetic(SyntheticParams::default()),
            alphabet: alphabet.symbol_string(),
            fallback: alphabet.fallback(),
            max_len: None,
            hidden: 128,
            lif: LifConfig::default(),
            readout: Readout::SpikeRate,
            gradient_flow: GradientFlow::Isolated,
            train: TrainConfig::default(),
            split: SplitPlan::default(),
            transform: TransformParams::default(),
            transform_trim: false,
            transform_png: false,
            output_dir: PathBuf::from("out"),
        }
    }
}

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("{key}: cannot parse \"{value}\"")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err(Error::Config(format!("{key}: expected true/false, got \"{value}\""))),
    }
}

fn parse_list(key: &str, value: &str) -> Result<Vec<usize>> {
    value
        .split(',')
        .map(|v| parse(key, v.trim()))
        .collect()
}

impl RunConfig {
    pub const KEYS: &'static [&'static str] = &[
        "seed",
        "data.fasta",
        "data.labels",
        "data.synthetic.classes",
        "data.synthetic.per_class",
        "data.synthetic.length",
        "data.synthetic.mutation_rate",
        "encode.alphabet",
        "encode.fallback",
        "encode.max_len",
        "snn.hidden",
        "snn.decay_multiplier",
        "snn.threshold",
        "snn.time_steps",
        "snn.surrogate_width",
        "snn.reset",
        "snn.readout",
        "snn.gradient_flow",
        "train.epochs",
        "train.learning_rate",
        "train.batch_size",
        "train.beta1",
        "train.beta2",
        "train.epsilon",
        "split.train_fraction",
        "split.repeats",
        "transform.rp.dimension",
        "transform.rp.delay",
        "transform.gaf.lower",
        "transform.gaf.upper",
        "transform.mtf.bins",
        "transform.trim",
        "transform.png",
        "output.dir",
    ];

    /// Splits config text into `(key, value)` pairs in file order.
    pub fn parse_entries(text: &str) -> Result<Vec<(String, String)>> {
        let mut entries = Vec::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", n + 1)))?;
            entries.push((k.trim().to_string(), v.trim().to_string()));
        }
        Ok(entries)
    }

    pub fn from_file(path: &Path) -> Result<Vec<(String, String)>> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse_entries(&text)
    }

    /// Applies entries on top of the defaults, then validates.
    pub fn resolve(entries: &[(String, String)]) -> Result<Self> {
        let mut cfg = Self::default();
        let mut fasta: Option<PathBuf> = None;
        let mut labels: Option<PathBuf> = None;
        let mut synthetic = SyntheticParams::default();
        let mut synthetic_set = false;
        let mut per_class_set = false;
        for (key, value) in entries {
            let (k, v) = (key.as_str(), value.as_str());
            match k {
                "seed" => cfg.seed = parse(k, v)?,
                "data.fasta" => fasta = Some(PathBuf::from(v)),
                "data.labels" => labels = Some(PathBuf::from(v)),
                "data.synthetic.classes" => {
                    synthetic.classes = parse(k, v)?;
                    synthetic_set = true;
                }
                "data.synthetic.per_class" => {
                    synthetic.per_class = parse_list(k, v)?;
                    synthetic_set = true;
                    per_class_set = true;
                }
                "data.synthetic.length" => {
                    synthetic.length = parse(k, v)?;
                    synthetic_set = true;
                }
                "data.synthetic.mutation_rate" => {
                    synthetic.mutation_rate = parse(k, v)?;
                    synthetic_set = true;
                }
                "encode.alphabet" => cfg.alphabet = v.to_string(),
                "encode.fallback" => {
                    cfg.fallback = match v {
                        "" | "none" => None,
                        s if s.chars().count() == 1 => s.chars().next(),
                        _ => return Err(Error::Config(format!("{k}: expected one character or none"))),
                    }
                }
                "encode.max_len" => {
                    cfg.max_len = match v {
                        "" | "auto" => None,
                        _ => Some(parse(k, v)?),
                    }
                }
                "snn.hidden" => cfg.hidden = parse(k, v)?,
                "snn.decay_multiplier" => cfg.lif.decay_multiplier = parse(k, v)?,
                "snn.threshold" => cfg.lif.threshold = parse(k, v)?,
                "snn.time_steps" => cfg.lif.time_steps = parse(k, v)?,
                "snn.surrogate_width" => cfg.lif.surrogate_width = parse(k, v)?,
                "snn.reset" => {
                    cfg.lif.reset = match v {
                        "subtract" => ResetMode::Subtract,
                        "zero" => ResetMode::Zero,
                        _ => return Err(Error::Config(format!("{k}: expected subtract|zero"))),
                    }
                }
                "snn.readout" => {
                    cfg.readout = match v {
                        "spike_rate" => Readout::SpikeRate,
                        "membrane_mean" => Readout::MembraneMean,
                        _ => return Err(Error::Config(format!("{k}: expected spike_rate|membrane_mean"))),
                    }
                }
                "snn.gradient_flow" => {
                    cfg.gradient_flow = match v {
                        "isolated" => GradientFlow::Isolated,
                        "through_time" => GradientFlow::ThroughTime,
                        _ => return Err(Error::Config(format!("{k}: expected isolated|through_time"))),
                    }
                }
                "train.epochs" => cfg.train.epochs = parse(k, v)?,
                "train.learning_rate" => cfg.train.learning_rate = parse(k, v)?,
                "train.batch_size" => cfg.train.batch_size = parse(k, v)?,
                "train.beta1" => cfg.train.beta1 = parse(k, v)?,
                "train.beta2" => cfg.train.beta2 = parse(k, v)?,
                "train.epsilon" => cfg.train.epsilon = parse(k, v)?,
                "split.train_fraction" => cfg.split.train_fraction = parse(k, v)?,
                "split.repeats" => cfg.split.repeats = parse(k, v)?,
                "transform.rp.dimension" => cfg.transform.rp_dimension = parse(k, v)?,
                "transform.rp.delay" => cfg.transform.rp_delay = parse(k, v)?,
                "transform.gaf.lower" => cfg.transform.gaf_lower = parse(k, v)?,
                "transform.gaf.upper" => cfg.transform.gaf_upper = parse(k, v)?,
                "transform.mtf.bins" => cfg.transform.mtf_bins = parse(k, v)?,
                "transform.trim" => cfg.transform_trim = parse_bool(k, v)?,
                "transform.png" => cfg.transform_png = parse_bool(k, v)?,
                "output.dir" => cfg.output_dir = PathBuf::from(v),
                _ => return Err(Error::Config(format!("unknown key \"{k}\""))),
            }
        }

        if synthetic_set && !per_class_set {
            synthetic.per_class = vec![100; synthetic.classes];
        }
        cfg.data = match (fasta, synthetic_set) {
            (Some(_), true) => {
                return Err(Error::Config(
                    "both data.fasta and data.synthetic.* are set; choose one data source".into(),
                ))
            }
            (Some(path), false) => DataSource::Fasta { path, labels },
            (None, _) => {
                if labels.is_some() {
                    return Err(Error::Config("data.labels requires data.fasta".into()));
                }
                DataSource::Synthetic(synthetic)
            }
        };
        cfg.split.seed = cfg.seed;
        cfg.train.seed = cfg.seed;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.lif.validate()?;
        self.train.validate()?;
        self.split.validate()?;
        self.alphabet()?;
        if self.hidden == 0 {
            return Err(Error::Config("snn.hidden must be >= 1".into()));
        }
        if let DataSource::Fasta { path, labels } = &self.data {
            for p in std::iter::once(path).chain(labels) {
                if !p.exists() {
                    return Err(Error::Config(format!("{}: no such file", p.display())));
                }
            }
        }
        if let DataSource::Synthetic(s) = &self.data {
            if s.per_class.len() != s.classes {
                return Err(Error::Config(format!(
                    "data.synthetic.per_class has {} entries for {} classes",
                    s.per_class.len(),
                    s.classes
                )));
            }
        }
        Ok(())
    }

    pub fn alphabet(&self) -> Result<Alphabet> {
        Alphabet::new(&self.alphabet, self.fallback)
    }

    pub fn experiment(&self) -> Result<ExperimentConfig> {
        Ok(ExperimentConfig {
            alphabet: self.alphabet()?,
            max_len: self.max_len,
            hidden: self.hidden,
            lif: self.lif,
            readout: self.readout,
            gradient_flow: self.gradient_flow,
            train: self.train,
        })
    }

    /// Fully-resolved config in the same `key = value` format; loading it
    /// back yields an equal [`RunConfig`].
    pub fn to_manifest(&self) -> String {
        let mut lines: Vec<(String, String)> = vec![("seed".into(), self.seed.to_string())];
        match &self.data {
            DataSource::Fasta { path, labels } => {
                lines.push(("data.fasta".into(), path.display().to_string()));
                if let Some(l) = labels {
                    lines.push(("data.labels".into(), l.display().to_string()));
                }
            }
            DataSource::Synthetic(s) => {
                lines.push(("data.synthetic.classes".into(), s.classes.to_string()));
                let per: Vec<String> = s.per_class.iter().map(ToString::to_string).collect();
                lines.push(("data.synthetic.per_class".into(), per.join(",")));
                lines.push(("data.synthetic.length".into(), s.length.to_string()));
                lines.push(("data.synthetic.mutation_rate".into(), format!("{:?}", s.mutation_rate)));
            }
        }
        let f = |v: f64| format!("{v:?}");
        lines.extend([
            ("encode.alphabet".into(), self.alphabet.clone()),
            (
                "encode.fallback".into(),
                self.fallback.map(String::from).unwrap_or_else(|| "none".into()),
            ),
            (
                "encode.max_len".into(),
                self.max_len.map_or_else(|| "auto".into(), |m| m.to_string()),
            ),
            ("snn.hidden".into(), self.hidden.to_string()),
            ("snn.decay_multiplier".into(), f(self.lif.decay_multiplier)),
            ("snn.threshold".into(), f(self.lif.threshold)),
            ("snn.time_steps".into(), self.lif.time_steps.to_string()),
            ("snn.surrogate_width".into(), f(self.lif.surrogate_width)),
            (
                "snn.reset".into(),
                match self.lif.reset {
                    ResetMode::Subtract => "subtract",
                    ResetMode::Zero => "zero",
                }
                .into(),
            ),
            (
                "snn.readout".into(),
                match self.readout {
                    Readout::SpikeRate => "spike_rate",
                    Readout::MembraneMean => "membrane_mean",
                }
                .into(),
            ),
            (
                "snn.gradient_flow".into(),
                match self.gradient_flow {
                    GradientFlow::Isolated => "isolated",
                    GradientFlow::ThroughTime => "through_time",
                }
                .into(),
            ),
            ("train.epochs".into(), self.train.epochs.to_string()),
            ("train.learning_rate".into(), f(self.train.learning_rate)),
            ("train.batch_size".into(), self.train.batch_size.to_string()),
            ("train.beta1".into(), f(self.train.beta1)),
            ("train.beta2".into(), f(self.train.beta2)),
            ("train.epsilon".into(), f(self.train.epsilon)),
            ("split.train_fraction".into(), f(self.split.train_fraction)),
            ("split.repeats".into(), self.split.repeats.to_string()),
            ("transform.rp.dimension".into(), self.transform.rp_dimension.to_string()),
            ("transform.rp.delay".into(), self.transform.rp_delay.to_string()),
            ("transform.gaf.lower".into(), f(self.transform.gaf_lower)),
            ("transform.gaf.upper".into(), f(self.transform.gaf_upper)),
            ("transform.mtf.bins".into(), self.transform.mtf_bins.to_string()),
            ("transform.trim".into(), self.transform_trim.to_string()),
            ("transform.png".into(), self.transform_png.to_string()),
            ("output.dir".into(), self.output_dir.display().to_string()),
        ]);
        let mut out = String::new();
        for (k, v) in lines {
            out.push_str(&format!("{k} = {v}\n"));
        }
        out
    }
}
