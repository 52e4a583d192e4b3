//! Evaluation metrics and replicate summaries.
//!
//! Normalized AIC is `(2k - 2 lnL) / n` with `lnL` the held-out log-likelihood,
//! i.e. twice the per-row test cross-entropy plus a `2k/n` complexity term.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Fraction of rows where `p >= 0.5` (predict left) agrees with the label.
pub fn accuracy(preds: &[f64], left_labels: &[bool]) -> Result<f64> {
    check_lengths(preds, left_labels)?;
    let hits = preds
        .iter()
        .zip(left_labels)
        .filter(|(p, y)| (**p >= 0.5) == **y)
        .count();
    Ok(hits as f64 / preds.len() as f64)
}

/// ROC AUC via the Mann-Whitney U statistic with midranks for ties.
/// Left-saved rows are the positive class.
pub fn auc(preds: &[f64], left_labels: &[bool]) -> Result<f64> {
    check_lengths(preds, left_labels)?;
    let n_pos = left_labels.iter().filter(|y| **y).count();
    let n_neg = left_labels.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::validation("AUC is undefined when only one class is present"));
    }
    if preds.iter().any(|p| p.is_nan()) {
        return Err(Error::validation("AUC is undefined for NaN predictions"));
    }
    let mut order: Vec<usize> = (0..preds.len()).collect();
    order.sort_by(|&a, &b| preds[a].total_cmp(&preds[b]));
    let mut rank_sum_pos = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i + 1;
        while j < order.len() && preds[order[j]] == preds[order[i]] {
            j += 1;
        }
        // Ranks i+1 ..= j share the midrank.
        let midrank = (i + 1 + j) as f64 / 2.0;
        let pos_in_tie = order[i..j].iter().filter(|&&k| left_labels[k]).count();
        rank_sum_pos += midrank * pos_in_tie as f64;
        i = j;
    }
    let n_pos = n_pos as f64;
    let u = rank_sum_pos - n_pos * (n_pos + 1.0) / 2.0;
    Ok(u / (n_pos * n_neg as f64))
}

/// Mean binary cross-entropy in nats; probabilities are clamped to
/// `[1e-15, 1 - 1e-15]`.
pub fn cross_entropy(preds: &[f64], left_labels: &[bool]) -> Result<f64> {
    check_lengths(preds, left_labels)?;
    let total: f64 = preds
        .iter()
        .zip(left_labels)
        .map(|(p, y)| {
            let p = p.clamp(1e-15, 1.0 - 1e-15);
            if *y {
                -p.ln()
            } else {
                -(1.0 - p).ln()
            }
        })
        .sum();
    Ok(total / preds.len() as f64)
}

pub fn normalized_aic(log_lik: f64, k: usize, n: usize) -> f64 {
    (2.0 * k as f64 - 2.0 * log_lik) / n as f64
}

fn check_lengths(preds: &[f64], labels: &[bool]) -> Result<()> {
    if preds.len() != labels.len() {
        return Err(Error::validation(format!(
            "{} predictions for {} labels",
            preds.len(),
            labels.len()
        )));
    }
    if preds.is_empty() {
        return Err(Error::validation("no predictions"));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub model_id: String,
    pub accuracy: f64,
    pub auc: f64,
    pub normalized_aic: f64,
    pub cross_entropy: f64,
    pub n: usize,
    pub k: usize,
}

impl EvalReport {
    /// Score held-out predictions of a model with `k` free parameters.
    pub fn evaluate(model_id: impl Into<String>, preds: &[f64], left_labels: &[bool], k: usize) -> Result<Self> {
        let ce = cross_entropy(preds, left_labels)?;
        let n = preds.len();
        Ok(Self {
            model_id: model_id.into(),
            accuracy: accuracy(preds, left_labels)?,
            auc: auc(preds, left_labels)?,
            normalized_aic: normalized_aic(-ce * n as f64, k, n),
            cross_entropy: ce,
            n,
            k,
        })
    }
}

pub const REPORT_COLUMNS: [&str; 7] = ["model", "accuracy", "auc", "normalized_aic", "cross_entropy", "n", "k"];

/// Tab-separated table with a header row.
pub fn reports_to_tsv(reports: &[EvalReport]) -> String {
    let mut out = REPORT_COLUMNS.join("\t");
    out.push('\n');
    for r in reports {
        let _ = writeln!(
            out,
            "{}\t{:.6}\t{:.6}\t{:.6}\t{:.6}\t{}\t{}",
            r.model_id, r.accuracy, r.auc, r.normalized_aic, r.cross_entropy, r.n, r.k
        );
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanSem {
    pub mean: f64,
    pub sem: f64,
}

impl MeanSem {
    /// Mean and standard error (sample standard deviation / √n).
    pub fn of(values: &[f64]) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::validation("standard error needs at least two values"));
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
        Ok(Self {
            mean,
            sem: (var / n).sqrt(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub model_id: String,
    pub accuracy: MeanSem,
    pub auc: MeanSem,
    pub normalized_aic: MeanSem,
    pub cross_entropy: MeanSem,
    pub replicate_count: usize,
}

pub fn summarize_runs(reports: &[EvalReport]) -> Result<RunSummary> {
    if reports.len() < 2 {
        return Err(Error::validation(format!("need at least 2 reports, got {}", reports.len())));
    }
    let col = |f: fn(&EvalReport) -> f64| MeanSem::of(&reports.iter().map(f).collect::<Vec<_>>());
    Ok(RunSummary {
        model_id: reports[0].model_id.clone(),
        accuracy: col(|r| r.accuracy)?,
        auc: col(|r| r.auc)?,
        normalized_aic: col(|r| r.normalized_aic)?,
        cross_entropy: col(|r| r.cross_entropy)?,
        replicate_count: reports.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn report(acc: f64) -> EvalReport {
        EvalReport {
            model_id: "m".into(),
            accuracy: acc,
            auc: 0.5,
            normalized_aic: 1.0,
            cross_entropy: 0.5,
            n: 10,
            k: 1,
        }
    }

    #[test]
    fn accuracy_examples() {
        assert_eq!(accuracy(&[0.9, 0.2], &[true, false]).unwrap(), 1.0);
        let labels = [true, false, false, true, true];
        assert_eq!(accuracy(&[0.5; 5], &labels).unwrap(), 0.6);
        assert!(accuracy(&[0.5], &[true, false]).is_err());
    }

    #[test]
    fn auc_examples() {
        assert_eq!(auc(&[0.1, 0.2, 0.8, 0.9], &[false, false, true, true]).unwrap(), 1.0);
        assert_eq!(auc(&[0.3; 6], &[true, false, true, false, false, true]).unwrap(), 0.5);
        assert!(auc(&[0.1, 0.2], &[true, true]).is_err());
        // Classic four-point example with one inversion.
        assert_eq!(auc(&[0.1, 0.4, 0.35, 0.8], &[false, false, true, true]).unwrap(), 0.75);
    }

    #[test]
    fn aic_examples() {
        let n = 1_000_000;
        let coin = normalized_aic(n as f64 * 0.5f64.ln(), 1, n);
        assert!((coin - 2.0 * 2f64.ln()).abs() < 1e-5);
        assert_eq!(normalized_aic(-3.0, 2, 4), 2.5);
        // Mean test NLL 0.4915 with the default network's 3,521 parameters:
        // 0.983 from the likelihood plus 0.0028 from the complexity term.
        let n = 2_500_000;
        let v = normalized_aic(-0.4915 * n as f64, 3_521, n);
        assert!((v - 0.9858168).abs() < 1e-9, "{v}");
        assert!((v - 0.983).abs() < 0.005);
    }

    #[test]
    fn summary_examples() {
        let s = summarize_runs(&[report(0.7), report(0.8)]).unwrap();
        assert!((s.accuracy.mean - 0.75).abs() < 1e-15);
        assert!((s.accuracy.sem - 0.05).abs() < 1e-15);
        let s = summarize_runs(&vec![report(0.7); 4]).unwrap();
        assert_eq!(s.accuracy.sem, 0.0);
        assert!(summarize_runs(&[report(0.7)]).is_err());
    }

    #[test]
    fn tsv_has_fixed_columns() {
        let tsv = reports_to_tsv(&[report(0.75)]);
        let lines: Vec<&str> = tsv.lines().collect();
        assert_eq!(lines[0], "model\taccuracy\tauc\tnormalized_aic\tcross_entropy\tn\tk");
        assert_eq!(lines[1].split('\t').count(), 7);
    }
}
