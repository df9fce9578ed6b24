use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::head::{labeled_rows, predict, train_rows, TrainConfig};
use super::metrics::{compute_metrics, MetricsReport};
use crate::corpus::LabelSet;
use crate::embed::EmbeddingMatrix;
use crate::error::{Error, Result};
use crate::rng::seeded;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanStd {
    pub mean: f64,
    /// Population standard deviation over folds.
    pub std: f64,
}

impl MeanStd {
    pub fn of(values: &[f64]) -> Self {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        Self {
            mean,
            std: var.sqrt(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvSummary {
    pub accuracy: MeanStd,
    pub precision: MeanStd,
    pub recall: MeanStd,
    pub f1: MeanStd,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossValidation {
    pub folds: Vec<MetricsReport>,
    /// Test fold of every labeled id.
    pub fold_of: BTreeMap<String, usize>,
    pub summary: CvSummary,
    pub warnings: Vec<String>,
}

/// Stratified fold assignment: each class's members are shuffled with a
/// single seeded generator (classes in label-set order) and dealt
/// round-robin, the dealing position carrying over from one class to the
/// next so fold sizes stay balanced.
pub fn stratified_folds(
    classes: &[usize],
    n_classes: usize,
    folds: usize,
    seed: u64,
) -> Vec<usize> {
    let mut rng = seeded(seed);
    let mut fold = vec![0; classes.len()];
    let mut next = 0;
    for c in 0..n_classes {
        let mut members: Vec<usize> = (0..classes.len()).filter(|&s| classes[s] == c).collect();
        members.shuffle(&mut rng);
        for s in members {
            fold[s] = next % folds;
            next += 1;
        }
    }
    fold
}

/// k-fold cross-validation of [`super::train_head`]: each labeled row is
/// tested exactly once by a head trained on the other folds.
pub fn cross_validate(
    x: &EmbeddingMatrix,
    labels: &BTreeMap<String, String>,
    label_set: &LabelSet,
    folds: usize,
    cfg: &TrainConfig,
) -> Result<CrossValidation> {
    let (rows, classes) = labeled_rows(x, labels, label_set)?;
    if folds < 2 || folds > rows.len() {
        return Err(Error::InvalidParameter(format!(
            "folds = {folds} outside [2, {}]",
            rows.len()
        )));
    }
    let mut warnings = Vec::new();
    for (c, class) in label_set.classes().iter().enumerate() {
        let count = classes.iter().filter(|&&k| k == c).count();
        if count > 0 && count < folds {
            warnings.push(format!(
                "class `{class}` has {count} labeled provisions, fewer than {folds} folds"
            ));
        }
    }
    let fold = stratified_folds(&classes, label_set.len(), folds, cfg.seed);
    let reports = (0..folds)
        .into_par_iter()
        .map(|f| {
            let split = |test: bool| -> (Vec<usize>, Vec<usize>) {
                (0..rows.len())
                    .filter(|&s| (fold[s] == f) == test)
                    .map(|s| (rows[s], classes[s]))
                    .unzip()
            };
            let (train_r, train_c) = split(false);
            let (test_r, test_c) = split(true);
            let head = train_rows(x, &train_r, &train_c, label_set, cfg)?;
            let test_x = x.select(&test_r);
            let predicted: BTreeMap<String, String> = predict(&head, &test_x)?
                .into_iter()
                .map(|p| (p.id, p.class))
                .collect();
            let gold: BTreeMap<String, String> = test_x
                .ids()
                .iter()
                .zip(&test_c)
                .map(|(id, &c)| (id.clone(), label_set.classes()[c].clone()))
                .collect();
            compute_metrics(&predicted, &gold, label_set)
        })
        .collect::<Result<Vec<_>>>()?;
    let stat =
        |f: fn(&MetricsReport) -> f64| MeanStd::of(&reports.iter().map(f).collect::<Vec<_>>());
    let summary = CvSummary {
        accuracy: stat(|m| m.accuracy),
        precision: stat(|m| m.macro_precision),
        recall: stat(|m| m.macro_recall),
        f1: stat(|m| m.macro_f1),
    };
    let fold_of = rows
        .iter()
        .zip(&fold)
        .map(|(&r, &f)| (x.ids()[r].clone(), f))
        .collect();
    Ok(CrossValidation {
        folds: reports,
        fold_of,
        summary,
        warnings,
    })
}
