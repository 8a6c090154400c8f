use super::{Transform, TransformKind, TransformMatrix};
use crate::error::{Error, Result};

/// Unthresholded recurrence plot: Euclidean distance between time-delay
/// embedded trajectories `(x_i, x_{i+tau}, ..., x_{i+(m-1)tau})`.
pub fn recurrence_plot(series: &[f64], dimension: usize, delay: usize) -> Result<TransformMatrix> {
    if dimension == 0 || delay == 0 {
        return Err(Error::param("recurrence plot needs dimension >= 1 and delay >= 1"));
    }
    let span = (dimension - 1) * delay;
    let required = span + 2;
    if series.len() < required {
        return Err(Error::SeriesTooShort {
            len: series.len(),
            required,
        });
    }
    let n = series.len() - span;
    let mut entries = vec![0.0; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let sq: f64 = (0..dimension)
                .map(|k| {
                    let d = series[i + k * delay] - series[j + k * delay];
                    d * d
                })
                .sum();
            let d = sq.sqrt();
            entries[i * n + j] = d;
            entries[j * n + i] = d;
        }
    }
    Ok(TransformMatrix::new(TransformKind::Recurrence, n, entries))
}

#[derive(Clone, Copy, Debug)]
pub struct RecurrencePlot {
    dimension: usize,
    delay: usize,
}

impl RecurrencePlot {
    pub fn new(dimension: usize, delay: usize) -> Result<Self> {
        if dimension == 0 || delay == 0 {
            return Err(Error::param("recurrence plot needs dimension >= 1 and delay >= 1"));
        }
        Ok(Self { dimension, delay })
    }
}

impl Transform for RecurrencePlot {
    fn name(&self) -> &'static str {
        "rp"
    }

    fn apply(&self, series: &[f64]) -> Result<TransformMatrix> {
        recurrence_plot(series, self.dimension, self.delay)
    }
}
