use image::{GrayImage, Luma};

use super::TransformMatrix;
use crate::error::Result;

pub fn matrix_to_csv(matrix: &TransformMatrix) -> Result<String> {
    let mut writer = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(Vec::new());
    for row in matrix.rows() {
        writer.write_record(row.iter().map(|v| format!("{v:?}")))?;
    }
    let bytes = writer
        .into_inner()
        .map_err(|e| crate::error::Error::Config(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Min-max scales entries to 0..=255. A constant matrix maps to all zeros.
pub fn matrix_to_grayscale(matrix: &TransformMatrix) -> GrayImage {
    let (lo, hi) = matrix
        .entries
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let range = hi - lo;
    let n = matrix.size as u32;
    GrayImage::from_fn(n, n, |x, y| {
        let v = matrix.get(y as usize, x as usize);
        let scaled = if range > 0.0 { (v - lo) / range * 255.0 } else { 0.0 };
        Luma([scaled.round() as u8])
    })
}
