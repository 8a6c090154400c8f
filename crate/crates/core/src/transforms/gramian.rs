use super::{Transform, TransformKind, TransformMatrix};
use crate::error::{Error, Result};

/// Gramian angular (summation) field: `cos(phi_i + phi_j)` where `phi` is the
/// arccosine of the series min-max rescaled into `[lower, upper]`.
///
/// A constant series rescales to the midpoint `(lower + upper) / 2`.
pub fn gramian_angular_field(series: &[f64], lower: f64, upper: f64) -> Result<TransformMatrix> {
    check_bounds(lower, upper)?;
    let n = series.len();
    if n == 0 {
        return Err(Error::SeriesTooShort { len: 0, required: 1 });
    }
    let (min, max) = series
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    if !min.is_finite() || !max.is_finite() {
        return Err(Error::NonFinite("GAF input series".into()));
    }
    let range = max - min;
    let phi: Vec<f64> = series
        .iter()
        .map(|&v| {
            let scaled = if range > 0.0 {
                lower + (upper - lower) * (v - min) / range
            } else {
                0.5 * (lower + upper)
            };
            scaled.clamp(-1.0, 1.0).acos()
        })
        .collect();
    let mut entries = vec![0.0; n * n];
    for i in 0..n {
        for j in i..n {
            let v = (phi[i] + phi[j]).cos();
            entries[i * n + j] = v;
            entries[j * n + i] = v;
        }
    }
    Ok(TransformMatrix::new(TransformKind::Gramian, n, entries))
}

fn check_bounds(lower: f64, upper: f64) -> Result<()> {
    if !(-1.0 <= lower && lower < upper && upper <= 1.0) {
        return Err(Error::param(format!(
            "GAF bounds must satisfy -1 <= a < b <= 1, got a={lower}, b={upper}"
        )));
    }
    Ok(())
}

#[derive(Clone, Copy, Debug)]
pub struct GramianAngularField {
    lower: f64,
    upper: f64,
}

impl GramianAngularField {
    pub fn new(lower: f64, upper: f64) -> Result<Self> {
        check_bounds(lower, upper)?;
        Ok(Self { lower, upper })
    }
}

impl Transform for GramianAngularField {
    fn name(&self) -> &'static str {
        "gaf"
    }

    fn apply(&self, series: &[f64]) -> Result<TransformMatrix> {
        gramian_angular_field(series, self.lower, self.upper)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const EXPECTED: [f64; 9] = [1.0, 0.0, -1.0, 0.0, -1.0, 0.0, -1.0, 0.0, 1.0];

    fn close(a: &[f64], b: &[f64]) -> bool {
        a.iter().zip(b).all(|(x, y)| (x - y).abs() < 1e-12)
    }

    #[test]
    fn identity_rescale() {
        let m = gramian_angular_field(&[-1.0, 0.0, 1.0], -1.0, 1.0).unwrap();
        assert!(close(&m.entries, &EXPECTED), "{:?}", m.entries);
    }

    #[test]
    fn min_max_rescale() {
        let m = gramian_angular_field(&[0.0, 2.0, 4.0], -1.0, 1.0).unwrap();
        assert!(close(&m.entries, &EXPECTED));
    }

    #[test]
    fn constant_series_uses_midpoint() {
        let m = gramian_angular_field(&[3.0; 4], -1.0, 1.0).unwrap();
        assert!(m.entries.iter().all(|&v| (v + 1.0).abs() < 1e-12));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(gramian_angular_field(&[], -1.0, 1.0).is_err());
        assert!(gramian_angular_field(&[1.0], 0.5, 0.5).is_err());
        assert!(gramian_angular_field(&[1.0], -2.0, 1.0).is_err());
    }
}
