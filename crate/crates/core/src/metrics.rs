//! Classification metrics: confusion matrix, weighted/macro summaries and
//! one-vs-rest ROC AUC.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `counts[i * n + j]` = records of true class `i` predicted as `j`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConfusionMatrix {
    pub n: usize,
    pub counts: Vec<u64>,
}

impl ConfusionMatrix {
    pub fn get(&self, truth: usize, pred: usize) -> u64 {
        self.counts[truth * self.n + pred]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn row_sum(&self, c: usize) -> u64 {
        self.counts[c * self.n..(c + 1) * self.n].iter().sum()
    }

    pub fn col_sum(&self, c: usize) -> u64 {
        (0..self.n).map(|r| self.get(r, c)).sum()
    }

    pub fn to_csv(&self, classes: &[String]) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["true\\pred".to_string()];
        header.extend(classes.iter().cloned());
        w.write_record(&header)?;
        for (i, name) in classes.iter().enumerate().take(self.n) {
            let mut row = vec![name.clone()];
            row.extend((0..self.n).map(|j| self.get(i, j).to_string()));
            w.write_record(&row)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Config(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

pub fn confusion(y_true: &[usize], y_pred: &[usize], n_classes: usize) -> Result<ConfusionMatrix> {
    if y_true.len() != y_pred.len() {
        return Err(Error::DimensionMismatch {
            expected: y_true.len(),
            actual: y_pred.len(),
        });
    }
    let mut counts = vec![0u64; n_classes * n_classes];
    for (&t, &p) in y_true.iter().zip(y_pred) {
        if t >= n_classes || p >= n_classes {
            return Err(Error::param(format!(
                "class index out of range for {n_classes} classes: true {t}, predicted {p}"
            )));
        }
        counts[t * n_classes + p] += 1;
    }
    Ok(ConfusionMatrix {
        n: n_classes,
        counts,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub class: String,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Summary {
    pub accuracy: f64,
    pub precision_weighted: f64,
    pub recall_weighted: f64,
    pub f1_weighted: f64,
    pub f1_macro: f64,
    pub per_class: Vec<(f64, f64, f64, u64)>,
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Undefined per-class precision/recall/F1 count as 0. Macro F1 averages over
/// all `n` classes, including ones without support.
pub fn summary(cm: &ConfusionMatrix) -> Result<Summary> {
    let total = cm.total();
    if total == 0 {
        return Err(Error::param("summary needs at least one evaluated record"));
    }
    let mut per_class = Vec::with_capacity(cm.n);
    let (mut pw, mut rw, mut fw, mut fsum) = (0.0, 0.0, 0.0, 0.0);
    let mut trace = 0;
    for c in 0..cm.n {
        let tp = cm.get(c, c);
        trace += tp;
        let support = cm.row_sum(c);
        let precision = ratio(tp, cm.col_sum(c));
        let recall = ratio(tp, support);
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        let weight = support as f64 / total as f64;
        pw += weight * precision;
        rw += weight * recall;
        fw += weight * f1;
        fsum += f1;
        per_class.push((precision, recall, f1, support));
    }
    Ok(Summary {
        accuracy: trace as f64 / total as f64,
        precision_weighted: pw,
        recall_weighted: rw,
        f1_weighted: fw,
        f1_macro: if cm.n == 0 { 0.0 } else { fsum / cm.n as f64 },
        per_class,
    })
}

/// Binary ROC AUC via the Mann-Whitney rank statistic with average ranks for
/// ties. `None` when either side is empty.
pub fn binary_auc(scores: &[f64], positive: &[bool]) -> Option<f64> {
    let n_pos = positive.iter().filter(|&&p| p).count();
    let n_neg = positive.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return None;
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    let mut rank_sum = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        // ranks i+1 ..= j+1 share their mean
        let avg_rank = (i + j + 2) as f64 / 2.0;
        for &k in &order[i..=j] {
            if positive[k] {
                rank_sum += avg_rank;
            }
        }
        i = j + 1;
    }
    let p = n_pos as f64;
    Some((rank_sum - p * (p + 1.0) / 2.0) / (p * n_neg as f64))
}

/// Unweighted mean of per-class one-vs-rest AUCs over classes that have both
/// positives and negatives.
pub fn roc_auc_ovr(y_true: &[usize], scores: &[Vec<f64>]) -> Result<f64> {
    if y_true.len() != scores.len() {
        return Err(Error::DimensionMismatch {
            expected: y_true.len(),
            actual: scores.len(),
        });
    }
    let n_classes = scores.first().map_or(0, Vec::len);
    if scores.iter().any(|row| row.len() != n_classes) {
        return Err(Error::param("score rows have differing lengths"));
    }
    if scores.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("AUC scores".into()));
    }
    if let Some(&bad) = y_true.iter().find(|&&t| t >= n_classes) {
        return Err(Error::param(format!("class index {bad} out of range")));
    }
    let mut present = vec![false; n_classes];
    y_true.iter().for_each(|&t| present[t] = true);
    if present.iter().filter(|&&p| p).count() < 2 {
        return Err(Error::param("ROC AUC needs at least 2 classes present"));
    }
    let mut aucs = Vec::new();
    for c in 0..n_classes {
        let column: Vec<f64> = scores.iter().map(|row| row[c]).collect();
        let positive: Vec<bool> = y_true.iter().map(|&t| t == c).collect();
        if let Some(auc) = binary_auc(&column, &positive) {
            aucs.push(auc);
        }
    }
    Ok(aucs.iter().sum::<f64>() / aucs.len() as f64)
}

/// Evaluation report. Precision and recall are support-weighted; macro F1
/// averages over every dataset class.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub accuracy: f64,
    pub precision_weighted: f64,
    pub recall_weighted: f64,
    pub f1_weighted: f64,
    pub f1_macro: f64,
    pub roc_auc_ovr: f64,
    pub train_time_seconds: f64,
    pub f1_macro_averaging: String,
    pub roc_auc_averaging: String,
    pub per_class: Vec<ClassMetrics>,
}

impl MetricsReport {
    /// `probabilities[i]` is the per-class score row used for AUC.
    pub fn from_predictions(
        y_true: &[usize],
        y_pred: &[usize],
        probabilities: &[Vec<f64>],
        classes: &[String],
        train_time_seconds: f64,
    ) -> Result<(Self, ConfusionMatrix)> {
        let cm = confusion(y_true, y_pred, classes.len())?;
        let s = summary(&cm)?;
        let auc = roc_auc_ovr(y_true, probabilities)?;
        let per_class = classes
            .iter()
            .zip(&s.per_class)
            .map(|(name, &(precision, recall, f1, support))| ClassMetrics {
                class: name.clone(),
                precision,
                recall,
                f1,
                support: support as f64,
            })
            .collect();
        Ok((
            Self {
                accuracy: s.accuracy,
                precision_weighted: s.precision_weighted,
                recall_weighted: s.recall_weighted,
                f1_weighted: s.f1_weighted,
                f1_macro: s.f1_macro,
                roc_auc_ovr: auc,
                train_time_seconds,
                f1_macro_averaging: "all_classes".into(),
                roc_auc_averaging: "ovr_unweighted_present_classes".into(),
                per_class,
            },
            cm,
        ))
    }

    /// Field-wise arithmetic mean (per-class entries included).
    pub fn mean(reports: &[MetricsReport]) -> Result<Self> {
        let first = reports
            .first()
            .ok_or_else(|| Error::param("cannot average zero reports"))?;
        let n = reports.len() as f64;
        let avg = |f: fn(&MetricsReport) -> f64| reports.iter().map(f).sum::<f64>() / n;
        let per_class = (0..first.per_class.len())
            .map(|c| {
                let pc = |f: fn(&ClassMetrics) -> f64| {
                    reports.iter().map(|r| f(&r.per_class[c])).sum::<f64>() / n
                };
                ClassMetrics {
                    class: first.per_class[c].class.clone(),
                    precision: pc(|m| m.precision),
                    recall: pc(|m| m.recall),
                    f1: pc(|m| m.f1),
                    support: pc(|m| m.support),
                }
            })
            .collect();
        Ok(Self {
            accuracy: avg(|r| r.accuracy),
            precision_weighted: avg(|r| r.precision_weighted),
            recall_weighted: avg(|r| r.recall_weighted),
            f1_weighted: avg(|r| r.f1_weighted),
            f1_macro: avg(|r| r.f1_macro),
            roc_auc_ovr: avg(|r| r.roc_auc_ovr),
            train_time_seconds: avg(|r| r.train_time_seconds),
            f1_macro_averaging: first.f1_macro_averaging.clone(),
            roc_auc_averaging: first.roc_auc_averaging.clone(),
            per_class,
        })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn confusion_examples() {
        let cm = confusion(&[0, 1, 2], &[0, 1, 2], 3).unwrap();
        assert_eq!(cm.counts, [1, 0, 0, 0, 1, 0, 0, 0, 1]);
        let cm = confusion(&[0, 0], &[1, 1], 2).unwrap();
        assert_eq!(cm.counts, [0, 2, 0, 0]);
        let cm = confusion(&[], &[], 3).unwrap();
        assert!(cm.counts.iter().all(|&c| c == 0));
        assert!(confusion(&[0], &[0, 1], 2).is_err());
        assert!(confusion(&[2], &[0], 2).is_err());
    }

    #[test]
    fn perfect_summary() {
        let cm = confusion(&[0, 1, 2, 2], &[0, 1, 2, 2], 3).unwrap();
        let s = summary(&cm).unwrap();
        for v in [s.accuracy, s.precision_weighted, s.recall_weighted, s.f1_weighted, s.f1_macro] {
            assert_eq!(v, 1.0);
        }
    }

    #[test]
    fn hand_computed_summary() {
        let cm = ConfusionMatrix { n: 2, counts: vec![2, 0, 1, 1] };
        let s = summary(&cm).unwrap();
        assert!((s.accuracy - 0.75).abs() < 1e-12);
        assert!((s.per_class[0].0 - 2.0 / 3.0).abs() < 1e-12);
        assert!((s.per_class[1].2 - 2.0 / 3.0).abs() < 1e-12);
        assert!((s.f1_weighted - 0.7333333333333333).abs() < 1e-12);
        assert!((s.f1_macro - 0.7333333333333333).abs() < 1e-12);
    }

    #[test]
    fn zero_support_class_enters_macro() {
        let cm = confusion(&[0, 1], &[0, 1], 3).unwrap();
        let s = summary(&cm).unwrap();
        assert_eq!(s.per_class[2], (0.0, 0.0, 0.0, 0));
        assert!((s.f1_macro - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(s.f1_weighted, 1.0);
    }

    #[test]
    fn auc_examples() {
        let y = [1, 0, 1, 0];
        let scores: Vec<Vec<f64>> = [0.9, 0.8, 0.3, 0.2].iter().map(|&s| vec![1.0 - s, s]).collect();
        assert!((binary_auc(&[0.9, 0.8, 0.3, 0.2], &[true, false, true, false]).unwrap() - 0.75).abs() < 1e-15);
        assert!((roc_auc_ovr(&y, &scores).unwrap() - 0.75).abs() < 1e-15);

        let tied = vec![vec![0.5; 3]; 6];
        assert_eq!(roc_auc_ovr(&[0, 1, 2, 0, 1, 2], &tied).unwrap(), 0.5);

        let perfect: Vec<Vec<f64>> = [0, 1, 2, 1]
            .iter()
            .map(|&t| (0..3).map(|c| if c == t { 1.0 } else { 0.0 }).collect())
            .collect();
        assert_eq!(roc_auc_ovr(&[0, 1, 2, 1], &perfect).unwrap(), 1.0);
    }

    #[test]
    fn auc_skips_absent_class_and_rejects_single_class() {
        let scores = vec![vec![0.9, 0.1, 0.0], vec![0.2, 0.8, 0.0]];
        assert_eq!(roc_auc_ovr(&[0, 1], &scores).unwrap(), 1.0);
        assert!(roc_auc_ovr(&[0, 0], &scores).is_err());
    }

    #[test]
    fn mean_of_one_is_identity() {
        let classes = vec!["a".to_string(), "b".to_string()];
        let (r, _) = MetricsReport::from_predictions(
            &[0, 1, 1],
            &[0, 1, 0],
            &[vec![0.7, 0.3], vec![0.2, 0.8], vec![0.6, 0.4]],
            &classes,
            1.5,
        )
        .unwrap();
        assert_eq!(MetricsReport::mean(std::slice::from_ref(&r)).unwrap(), r);
    }

    proptest! {
        #[test]
        fn accuracy_is_mean_agreement(pairs in prop::collection::vec((0usize..4, 0usize..4), 1..100)) {
            let (t, p): (Vec<_>, Vec<_>) = pairs.into_iter().unzip();
            let s = summary(&confusion(&t, &p, 4).unwrap()).unwrap();
            let agree = t.iter().zip(&p).filter(|(a, b)| a == b).count() as f64 / t.len() as f64;
            prop_assert!((s.accuracy - agree).abs() < 1e-12);
            prop_assert!((s.recall_weighted - s.accuracy).abs() < 1e-12);
        }

        #[test]
        fn auc_invariant_under_monotone_transform(
            rows in prop::collection::vec((0usize..3, prop::collection::vec(-3.0f64..3.0, 3)), 4..60),
        ) {
            let (y, s): (Vec<_>, Vec<_>) = rows.into_iter().unzip();
            prop_assume!(y.iter().any(|&c| c != y[0]));
            let a = roc_auc_ovr(&y, &s).unwrap();
            let t: Vec<Vec<f64>> = s.iter().map(|r| r.iter().map(|v| v.exp() * 2.0 + 1.0).collect()).collect();
            let b = roc_auc_ovr(&y, &t).unwrap();
            prop_assert!((a - b).abs() < 1e-12);
        }

        #[test]
        fn relabeling_leaves_metrics_unchanged(
            rows in prop::collection::vec((0usize..3, 0usize..3, prop::collection::vec(0.0f64..1.0, 3)), 4..60),
        ) {
            let y: Vec<usize> = rows.iter().map(|r| r.0).collect();
            prop_assume!(y.iter().any(|&c| c != y[0]));
            let p: Vec<usize> = rows.iter().map(|r| r.1).collect();
            let s: Vec<Vec<f64>> = rows.iter().map(|r| r.2.clone()).collect();
            let perm = [2usize, 0, 1];
            let y2: Vec<usize> = y.iter().map(|&c| perm[c]).collect();
            let p2: Vec<usize> = p.iter().map(|&c| perm[c]).collect();
            let s2: Vec<Vec<f64>> = s
                .iter()
                .map(|r| {
                    let mut out = vec![0.0; 3];
                    for c in 0..3 {
                        out[perm[c]] = r[c];
                    }
                    out
                })
                .collect();
            let a = summary(&confusion(&y, &p, 3).unwrap()).unwrap();
            let b = summary(&confusion(&y2, &p2, 3).unwrap()).unwrap();
            prop_assert!((a.accuracy - b.accuracy).abs() < 1e-12);
            prop_assert!((a.f1_weighted - b.f1_weighted).abs() < 1e-12);
            prop_assert!((a.f1_macro - b.f1_macro).abs() < 1e-12);
            prop_assert!((a.precision_weighted - b.precision_weighted).abs() < 1e-12);
            let auc_a = roc_auc_ovr(&y, &s).unwrap();
            let auc_b = roc_auc_ovr(&y2, &s2).unwrap();
            prop_assert!((auc_a - auc_b).abs() < 1e-12);
        }
    }
}
