//! Evaluation: confusion matrices, class recalls, binary attack-vs-normal
//! rates, ROC curves and AUC.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::Label;

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("length mismatch: {truth} truth labels vs {pred} predictions")]
    LengthMismatch { truth: usize, pred: usize },
    #[error("need observations from both classes")]
    SingleClass,
    #[error("no observations")]
    Empty,
}

/// 5x5 count matrix, rows = truth, columns = predicted, class order as in
/// [`Label::ALL`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub counts: [[usize; 5]; 5],
}

impl ConfusionMatrix {
    pub fn total(&self) -> usize {
        self.counts.iter().flatten().sum()
    }

    pub fn accuracy(&self) -> f64 {
        let trace: usize = (0..5).map(|i| self.counts[i][i]).sum();
        trace as f64 / self.total() as f64
    }

    /// Attacks whose final verdict was Normal.
    pub fn false_negatives(&self) -> usize {
        Label::ALL
            .iter()
            .filter(|l| l.is_attack())
            .map(|l| self.counts[l.index()][0])
            .sum()
    }
}

pub fn confusion(truth: &[Label], pred: &[Label]) -> Result<ConfusionMatrix, MetricsError> {
    if truth.len() != pred.len() {
        return Err(MetricsError::LengthMismatch {
            truth: truth.len(),
            pred: pred.len(),
        });
    }
    if truth.is_empty() {
        return Err(MetricsError::Empty);
    }
    let mut counts = [[0usize; 5]; 5];
    for (t, p) in truth.iter().zip(pred) {
        counts[t.index()][p.index()] += 1;
    }
    Ok(ConfusionMatrix { counts })
}

/// Summary rates from a confusion matrix, with the binary collapse
/// (positive = attack) for TPR/FPR/FNR. Undefined ratios (zero denominator)
/// are `None`, never a panic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rates {
    pub accuracy: f64,
    /// Class recalls (diagonal over row sum), indexed like [`Label::ALL`].
    pub per_class_recall: [Option<f64>; 5],
    pub tpr: Option<f64>,
    pub fpr: Option<f64>,
    pub fnr: Option<f64>,
    pub true_positives: usize,
    pub false_positives: usize,
    pub true_negatives: usize,
    pub false_negatives: usize,
}

fn ratio(num: usize, den: usize) -> Option<f64> {
    if den == 0 {
        None
    } else {
        Some(num as f64 / den as f64)
    }
}

pub fn rates(cm: &ConfusionMatrix) -> Rates {
    let mut per_class_recall = [None; 5];
    for i in 0..5 {
        let row: usize = cm.counts[i].iter().sum();
        per_class_recall[i] = ratio(cm.counts[i][i], row);
    }
    let mut tp = 0;
    let mut fp = 0;
    let mut tn = 0;
    let mut fn_ = 0;
    for t in 0..5 {
        for p in 0..5 {
            let c = cm.counts[t][p];
            match (t != 0, p != 0) {
                (true, true) => tp += c,
                (true, false) => fn_ += c,
                (false, true) => fp += c,
                (false, false) => tn += c,
            }
        }
    }
    Rates {
        accuracy: cm.accuracy(),
        per_class_recall,
        tpr: ratio(tp, tp + fn_),
        fpr: ratio(fp, tn + fp),
        fnr: ratio(fn_, tp + fn_),
        true_positives: tp,
        false_positives: fp,
        true_negatives: tn,
        false_negatives: fn_,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RocPoint {
    pub threshold: f64,
    pub fpr: f64,
    pub tpr: f64,
}

/// ROC curve over thresholds at every unique score plus +/- infinity
/// sentinels, sorted by threshold descending. A record is predicted positive
/// when its score >= threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RocCurve {
    pub points: Vec<RocPoint>,
    pub auc: f64,
}

pub fn roc(scores: &[f64], is_positive: &[bool]) -> Result<RocCurve, MetricsError> {
    if scores.len() != is_positive.len() {
        return Err(MetricsError::LengthMismatch {
            truth: is_positive.len(),
            pred: scores.len(),
        });
    }
    let positives = is_positive.iter().filter(|&&p| p).count();
    let negatives = is_positive.len() - positives;
    if positives == 0 || negatives == 0 {
        return Err(MetricsError::SingleClass);
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].partial_cmp(&scores[a]).unwrap());

    let mut points = vec![RocPoint {
        threshold: f64::INFINITY,
        fpr: 0.0,
        tpr: 0.0,
    }];
    let mut tp = 0usize;
    let mut fp = 0usize;
    let mut i = 0;
    while i < order.len() {
        let threshold = scores[order[i]];
        // group tied scores at a single threshold
        while i < order.len() && scores[order[i]] == threshold {
            if is_positive[order[i]] {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        points.push(RocPoint {
            threshold,
            fpr: fp as f64 / negatives as f64,
            tpr: tp as f64 / positives as f64,
        });
    }
    points.push(RocPoint {
        threshold: f64::NEG_INFINITY,
        fpr: 1.0,
        tpr: 1.0,
    });

    let mut auc = 0.0;
    for pair in points.windows(2) {
        auc += (pair[1].fpr - pair[0].fpr) * (pair[1].tpr + pair[0].tpr) / 2.0;
    }
    Ok(RocCurve { points, auc })
}
