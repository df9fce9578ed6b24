use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::loss::{argmax, softmax_into, PROB_FLOOR};
use crate::corpus::LabelSet;
use crate::embed::{dot, EmbeddingMatrix};
use crate::error::{Error, Result};
use crate::rng::seeded;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.5,
            batch_size: 8,
            epochs: 100,
            seed: 0,
        }
    }
}

impl TrainConfig {
    /// Names accepted by [`TrainConfig::preset`].
    pub const PRESETS: [&'static str; 2] = ["default", "bert-base"];

    /// Named hyperparameter sets. `bert-base` is η = 2e-5, B = 16, E = 4,
    /// the values published for full BERT fine-tuning; on a linear head they
    /// barely move the parameters.
    pub fn preset(name: &str) -> Result<Self> {
        match name {
            "default" => Ok(Self::default()),
            "bert-base" => Ok(Self {
                learning_rate: 2e-5,
                batch_size: 16,
                epochs: 4,
                seed: 0,
            }),
            other => Err(Error::InvalidParameter(format!(
                "unknown training preset `{other}` (expected one of {:?})",
                Self::PRESETS
            ))),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::InvalidParameter(
                "learning rate must be positive".into(),
            ));
        }
        if self.batch_size == 0 {
            return Err(Error::InvalidParameter(
                "batch size must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

/// Softmax-over-linear classifier on fixed embeddings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearHead {
    pub dim: usize,
    /// `classes × dim`, row-major.
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
    pub label_set: LabelSet,
    /// Mean loss over the training set after each epoch.
    #[serde(default)]
    pub loss_trace: Vec<f64>,
}

/// One predicted row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub id: String,
    pub class: String,
    pub class_index: usize,
    pub probabilities: Vec<f64>,
}

impl LinearHead {
    pub fn zeros(dim: usize, label_set: LabelSet) -> Self {
        let c = label_set.len();
        Self {
            dim,
            weights: vec![0.0; c * dim],
            bias: vec![0.0; c],
            label_set,
            loss_trace: Vec::new(),
        }
    }

    pub fn n_classes(&self) -> usize {
        self.bias.len()
    }

    pub fn probabilities(&self, x: &[f64]) -> Vec<f64> {
        let mut p = vec![0.0; self.n_classes()];
        self.probabilities_into(x, &mut p);
        p
    }

    fn probabilities_into(&self, x: &[f64], out: &mut [f64]) {
        let logits: Vec<f64> = self
            .weights
            .chunks(self.dim)
            .zip(&self.bias)
            .map(|(w, b)| dot(w, x) + b)
            .collect();
        softmax_into(&logits, out);
    }

    /// Mean cross-entropy over `(row, class)` samples.
    pub fn mean_loss(&self, rows: &[&[f64]], classes: &[usize]) -> f64 {
        let mut p = vec![0.0; self.n_classes()];
        let total: f64 = rows
            .iter()
            .zip(classes)
            .map(|(x, &c)| {
                self.probabilities_into(x, &mut p);
                -p[c].max(PROB_FLOOR).ln()
            })
            .sum();
        total / rows.len() as f64
    }

    /// Mean loss and its gradient `(∂W, ∂b)`:
    /// `∂W = mean (p − y) xᵀ`, `∂b = mean (p − y)`.
    pub fn loss_gradient(&self, rows: &[&[f64]], classes: &[usize]) -> (f64, Vec<f64>, Vec<f64>) {
        let c = self.n_classes();
        let mut gw = vec![0.0; self.weights.len()];
        let mut gb = vec![0.0; c];
        let mut p = vec![0.0; c];
        let mut loss = 0.0;
        for (x, &y) in rows.iter().zip(classes) {
            self.probabilities_into(x, &mut p);
            loss -= p[y].max(PROB_FLOOR).ln();
            for k in 0..c {
                let r = p[k] - if k == y { 1.0 } else { 0.0 };
                gb[k] += r;
                for (g, xv) in gw[k * self.dim..(k + 1) * self.dim]
                    .iter_mut()
                    .zip(x.iter())
                {
                    *g += r * xv;
                }
            }
        }
        let m = rows.len() as f64;
        gw.iter_mut().chain(gb.iter_mut()).for_each(|g| *g /= m);
        (loss / m, gw, gb)
    }

    fn check_dim(&self, x: &EmbeddingMatrix) -> Result<()> {
        if x.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: x.dim(),
            });
        }
        Ok(())
    }
}

/// Labeled rows of `x` in row order, with class indices.
pub(crate) fn labeled_rows(
    x: &EmbeddingMatrix,
    labels: &BTreeMap<String, String>,
    label_set: &LabelSet,
) -> Result<(Vec<usize>, Vec<usize>)> {
    for id in labels.keys() {
        if x.index_of(id).is_none() {
            return Err(Error::UnknownId(id.clone()));
        }
    }
    let mut rows = Vec::with_capacity(labels.len());
    let mut classes = Vec::with_capacity(labels.len());
    for (i, id) in x.ids().iter().enumerate() {
        if let Some(class) = labels.get(id) {
            rows.push(i);
            classes.push(label_set.check(class)?);
        }
    }
    Ok((rows, classes))
}

/// Trains on the rows `rows` of `x` with class indices `classes`.
pub(crate) fn train_rows(
    x: &EmbeddingMatrix,
    rows: &[usize],
    classes: &[usize],
    label_set: &LabelSet,
    cfg: &TrainConfig,
) -> Result<LinearHead> {
    cfg.validate()?;
    label_set.require_supervised()?;
    let present: BTreeSet<usize> = classes.iter().copied().collect();
    if present.len() < 2 {
        return Err(Error::InvalidInput(format!(
            "training needs at least two classes, found {}",
            present.len()
        )));
    }
    let mut head = LinearHead::zeros(x.dim(), label_set.clone());
    let all: Vec<&[f64]> = rows.iter().map(|&r| x.row(r)).collect();
    let mut rng = seeded(cfg.seed);
    let mut order: Vec<usize> = (0..rows.len()).collect();
    for _ in 0..cfg.epochs {
        order.sort_unstable();
        order.shuffle(&mut rng);
        for batch in order.chunks(cfg.batch_size) {
            let bx: Vec<&[f64]> = batch.iter().map(|&s| all[s]).collect();
            let by: Vec<usize> = batch.iter().map(|&s| classes[s]).collect();
            let (_, gw, gb) = head.loss_gradient(&bx, &by);
            for (w, g) in head.weights.iter_mut().zip(&gw) {
                *w -= cfg.learning_rate * g;
            }
            for (b, g) in head.bias.iter_mut().zip(&gb) {
                *b -= cfg.learning_rate * g;
            }
        }
        let loss = head.mean_loss(&all, classes);
        head.loss_trace.push(loss);
    }
    if head
        .weights
        .iter()
        .chain(&head.bias)
        .any(|v| !v.is_finite())
    {
        return Err(Error::Numeric(
            "training diverged to non-finite parameters".into(),
        ));
    }
    Ok(head)
}

/// Mini-batch gradient descent on mean cross-entropy from a zero
/// initialization, reshuffling with a seeded generator every epoch. Rows of
/// `x` without a label are ignored.
pub fn train_head(
    x: &EmbeddingMatrix,
    labels: &BTreeMap<String, String>,
    label_set: &LabelSet,
    cfg: &TrainConfig,
) -> Result<LinearHead> {
    let (rows, classes) = labeled_rows(x, labels, label_set)?;
    train_rows(x, &rows, &classes, label_set, cfg)
}

/// Argmax of the softmax for every row of `x`, in row order.
pub fn predict(head: &LinearHead, x: &EmbeddingMatrix) -> Result<Vec<Prediction>> {
    head.check_dim(x)?;
    Ok(x.ids()
        .iter()
        .zip(x.rows())
        .map(|(id, row)| {
            let probabilities = head.probabilities(row);
            let class_index = argmax(&probabilities);
            Prediction {
                id: id.clone(),
                class: head.label_set.classes()[class_index].clone(),
                class_index,
                probabilities,
            }
        })
        .collect())
}
