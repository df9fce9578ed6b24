use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::corpus::LabelSet;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub class: String,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// Gold count.
    pub support: usize,
    pub predicted: usize,
    /// Never predicted and never gold; left out of the macro averages.
    pub excluded: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub classes: Vec<ClassMetrics>,
    pub accuracy: f64,
    pub macro_precision: f64,
    pub macro_recall: f64,
    pub macro_f1: f64,
    pub micro_precision: f64,
    pub micro_recall: f64,
    pub micro_f1: f64,
    /// `confusion[gold][predicted]`.
    pub confusion: Vec<Vec<usize>>,
    pub total: usize,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

fn harmonic(p: f64, r: f64) -> f64 {
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

impl MetricsReport {
    /// Metrics from a square confusion matrix indexed `[gold][predicted]`.
    pub fn from_confusion(confusion: Vec<Vec<usize>>, label_set: &LabelSet) -> Result<Self> {
        let c = label_set.len();
        if confusion.len() != c || confusion.iter().any(|r| r.len() != c) {
            return Err(Error::DimensionMismatch {
                expected: c,
                found: confusion.len(),
            });
        }
        let total: usize = confusion.iter().flatten().sum();
        if total == 0 {
            return Err(Error::InvalidInput("no predictions to score".into()));
        }
        let correct: usize = (0..c).map(|k| confusion[k][k]).sum();
        let classes: Vec<ClassMetrics> = label_set
            .classes()
            .iter()
            .enumerate()
            .map(|(k, class)| {
                let tp = confusion[k][k];
                let support: usize = confusion[k].iter().sum();
                let predicted: usize = confusion.iter().map(|r| r[k]).sum();
                let precision = ratio(tp, predicted);
                let recall = ratio(tp, support);
                ClassMetrics {
                    class: class.clone(),
                    precision,
                    recall,
                    f1: harmonic(precision, recall),
                    support,
                    predicted,
                    excluded: support == 0 && predicted == 0,
                }
            })
            .collect();
        let active: Vec<&ClassMetrics> = classes.iter().filter(|m| !m.excluded).collect();
        let mean = |f: fn(&ClassMetrics) -> f64| {
            active.iter().map(|m| f(m)).sum::<f64>() / active.len() as f64
        };
        // pooled one-vs-rest counts
        let (mut tp, mut fp, mut fn_) = (0, 0, 0);
        for (k, m) in classes.iter().enumerate() {
            tp += confusion[k][k];
            fp += m.predicted - confusion[k][k];
            fn_ += m.support - confusion[k][k];
        }
        let micro_precision = ratio(tp, tp + fp);
        let micro_recall = ratio(tp, tp + fn_);
        Ok(Self {
            accuracy: ratio(correct, total),
            macro_precision: mean(|m| m.precision),
            macro_recall: mean(|m| m.recall),
            macro_f1: mean(|m| m.f1),
            micro_precision,
            micro_recall,
            micro_f1: harmonic(micro_precision, micro_recall),
            classes,
            confusion,
            total,
        })
    }
}

/// One-vs-rest precision, recall and F1 per class (0/0 = 0), macro and
/// micro averages, accuracy and the confusion matrix.
pub fn compute_metrics(
    predictions: &BTreeMap<String, String>,
    gold: &BTreeMap<String, String>,
    label_set: &LabelSet,
) -> Result<MetricsReport> {
    if gold.is_empty() {
        return Err(Error::InvalidInput(
            "no gold labels to score against".into(),
        ));
    }
    if let Some(id) = gold.keys().find(|id| !predictions.contains_key(*id)) {
        return Err(Error::MissingId(id.clone()));
    }
    if let Some(id) = predictions.keys().find(|id| !gold.contains_key(*id)) {
        return Err(Error::ExtraId(id.clone()));
    }
    let c = label_set.len();
    let mut confusion = vec![vec![0; c]; c];
    for (id, g) in gold {
        let gi = label_set.check(g)?;
        let pi = label_set.check(&predictions[id])?;
        confusion[gi][pi] += 1;
    }
    MetricsReport::from_confusion(confusion, label_set)
}
