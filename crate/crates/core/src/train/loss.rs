use crate::error::{Error, Result};

/// Softmax probabilities with max-subtraction.
pub fn softmax(scores: &[f64]) -> Vec<f64> {
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exp: Vec<f64> = scores.iter().map(|s| (s - max).exp()).collect();
    let total: f64 = exp.iter().sum();
    exp.into_iter().map(|e| e / total).collect()
}

/// Returns `(-ln p[target], p - onehot(target))` for `p = softmax(scores)`.
pub fn softmax_cross_entropy(scores: &[f64], target: usize) -> Result<(f64, Vec<f64>)> {
    if target >= scores.len() {
        return Err(Error::param(format!(
            "target {target} out of range for {} scores",
            scores.len()
        )));
    }
    if scores.iter().any(|s| !s.is_finite()) {
        return Err(Error::NonFinite("class scores".into()));
    }
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let log_total = scores.iter().map(|s| (s - max).exp()).sum::<f64>().ln();
    let loss = (log_total - (scores[target] - max)).max(0.0);
    let mut grad = softmax(scores);
    grad[target] -= 1.0;
    Ok((loss, grad))
}
