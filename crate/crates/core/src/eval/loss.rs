use crate::error::{Error, Result};

/// Probabilities are clamped from below before taking logs.
pub const PROB_FLOOR: f64 = 1e-12;
const SUM_TOL: f64 = 1e-6;

/// `L = −Σ y_c ln ŷ_c` with `ŷ` clamped at [`PROB_FLOOR`].
pub fn cross_entropy_loss(predicted: &[f64], target: &[f64]) -> Result<f64> {
    if predicted.len() != target.len() {
        return Err(Error::DimensionMismatch {
            expected: target.len(),
            found: predicted.len(),
        });
    }
    let total: f64 = predicted.iter().sum();
    if (total - 1.0).abs() > SUM_TOL || predicted.iter().any(|p| !(0.0..=1.0 + SUM_TOL).contains(p))
    {
        return Err(Error::InvalidInput(format!(
            "prediction is not a probability vector (sum {total})"
        )));
    }
    Ok(predicted
        .iter()
        .zip(target)
        .map(|(p, y)| -y * p.max(PROB_FLOOR).ln())
        .sum::<f64>()
        .max(0.0))
}

/// Numerically stable softmax, written into `out`.
pub(crate) fn softmax_into(logits: &[f64], out: &mut [f64]) {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for (o, z) in out.iter_mut().zip(logits) {
        *o = (z - max).exp();
        sum += *o;
    }
    for o in out.iter_mut() {
        *o /= sum;
    }
}

pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; logits.len()];
    softmax_into(logits, &mut out);
    out
}

/// Index of the largest entry; ties go to the lowest index.
pub(crate) fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate() {
        if x > v[best] {
            best = i;
        }
    }
    best
}
