//! Sequence-to-matrix imaging transforms.
//!
//! Each transform implements [`Transform`] and is looked up by name through a
//! [`TransformRegistry`], so callers (the CLI `transform --kind` flag in
//! particular) pick the strategy at runtime.

mod gramian;
mod markov;
mod output;
mod recurrence;

use std::collections::BTreeMap;
use std::fmt;

pub use gramian::{gramian_angular_field, GramianAngularField};
pub use markov::{empirical_quantile, markov_transition_field, MarkovTransitionField, MtfTransition};
pub use output::{matrix_to_csv, matrix_to_grayscale};
pub use recurrence::{recurrence_plot, RecurrencePlot};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TransformKind {
    Recurrence,
    Gramian,
    Markov,
}

impl fmt::Display for TransformKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TransformKind::Recurrence => "rp",
            TransformKind::Gramian => "gaf",
            TransformKind::Markov => "mtf",
        })
    }
}

/// Square real matrix, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct TransformMatrix {
    pub kind: TransformKind,
    pub size: usize,
    pub entries: Vec<f64>,
}

impl TransformMatrix {
    pub fn new(kind: TransformKind, size: usize, entries: Vec<f64>) -> Self {
        debug_assert_eq!(entries.len(), size * size);
        Self {
            kind,
            size,
            entries,
        }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.size + j]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.entries.chunks(self.size.max(1))
    }
}

pub trait Transform: Send + Sync {
    fn name(&self) -> &'static str;

    fn apply(&self, series: &[f64]) -> Result<TransformMatrix>;
}

/// Parameters for the built-in transforms, defaulting to m = 1, tau = 1,
/// [a, b] = [-1, 1] and Q = 8.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TransformParams {
    pub rp_dimension: usize,
    pub rp_delay: usize,
    pub gaf_lower: f64,
    pub gaf_upper: f64,
    pub mtf_bins: usize,
}

impl Default for TransformParams {
    fn default() -> Self {
        Self {
            rp_dimension: 1,
            rp_delay: 1,
            gaf_lower: -1.0,
            gaf_upper: 1.0,
            mtf_bins: 8,
        }
    }
}

#[derive(Default)]
pub struct TransformRegistry {
    entries: BTreeMap<&'static str, Box<dyn Transform>>,
}

impl TransformRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    /// Registry holding `rp`, `gaf` and `mtf` configured from `params`.
    pub fn with_builtins(params: &TransformParams) -> Result<Self> {
        let mut reg = Self::new();
        reg.register(Box::new(RecurrencePlot::new(params.rp_dimension, params.rp_delay)?));
        reg.register(Box::new(GramianAngularField::new(params.gaf_lower, params.gaf_upper)?));
        reg.register(Box::new(MarkovTransitionField::new(params.mtf_bins)?));
        Ok(reg)
    }

    /// Adds a transform, replacing any previous one with the same name.
    pub fn register(&mut self, transform: Box<dyn Transform>) {
        self.entries.insert(transform.name(), transform);
    }

    pub fn get(&self, name: &str) -> Result<&dyn Transform> {
        self.entries
            .get(name)
            .map(|b| b.as_ref())
            .ok_or_else(|| {
                Error::param(format!(
                    "unknown transform \"{name}\" (available: {})",
                    self.names().join(", ")
                ))
            })
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.entries.keys().copied().collect()
    }
}
