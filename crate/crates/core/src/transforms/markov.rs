use super::{Transform, TransformKind, TransformMatrix};
use crate::error::{Error, Result};

/// Row-stochastic `Q x Q` bin-to-bin transition matrix and the quantile edges
/// that define the bins.
#[derive(Clone, Debug, PartialEq)]
pub struct MtfTransition {
    pub bins: usize,
    pub edges: Vec<f64>,
    pub entries: Vec<f64>,
}

impl MtfTransition {
    pub fn get(&self, from: usize, to: usize) -> f64 {
        self.entries[from * self.bins + to]
    }
}

/// Linear-interpolation empirical quantile of an ascending slice.
pub fn empirical_quantile(sorted: &[f64], level: f64) -> f64 {
    let pos = level * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] + (sorted[hi] - sorted[lo]) * frac
}

/// Markov transition field over `bins` quantile bins.
///
/// A bin that never has a successor gets a uniform row.
pub fn markov_transition_field(
    series: &[f64],
    bins: usize,
) -> Result<(MtfTransition, TransformMatrix)> {
    let n = series.len();
    if n < 2 {
        return Err(Error::SeriesTooShort { len: n, required: 2 });
    }
    if bins < 2 || bins > n {
        return Err(Error::param(format!(
            "MTF needs 2 <= Q <= n, got Q={bins}, n={n}"
        )));
    }
    if series.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("MTF input series".into()));
    }

    let mut sorted = series.to_vec();
    sorted.sort_by(f64::total_cmp);
    let edges: Vec<f64> = (1..bins)
        .map(|k| empirical_quantile(&sorted, k as f64 / bins as f64))
        .collect();
    let assign: Vec<usize> = series
        .iter()
        .map(|&v| edges.partition_point(|&e| e < v))
        .collect();

    let mut w = vec![0.0; bins * bins];
    for pair in assign.windows(2) {
        w[pair[0] * bins + pair[1]] += 1.0;
    }
    for row in w.chunks_mut(bins) {
        let total: f64 = row.iter().sum();
        if total > 0.0 {
            row.iter_mut().for_each(|v| *v /= total);
        } else {
            row.fill(1.0 / bins as f64);
        }
    }

    let mut field = vec![0.0; n * n];
    for (i, &bi) in assign.iter().enumerate() {
        for (j, &bj) in assign.iter().enumerate() {
            field[i * n + j] = w[bi * bins + bj];
        }
    }
    Ok((
        MtfTransition {
            bins,
            edges,
            entries: w,
        },
        TransformMatrix::new(TransformKind::Markov, n, field),
    ))
}

#[derive(Clone, Copy, Debug)]
pub struct MarkovTransitionField {
    bins: usize,
}

impl MarkovTransitionField {
    pub fn new(bins: usize) -> Result<Self> {
        if bins < 2 {
            return Err(Error::param("MTF needs at least 2 bins"));
        }
        Ok(Self { bins })
    }
}

impl Transform for MarkovTransitionField {
    fn name(&self) -> &'static str {
        "mtf"
    }

    fn apply(&self, series: &[f64]) -> Result<TransformMatrix> {
        markov_transition_field(series, self.bins).map(|(_, m)| m)
    }
}
