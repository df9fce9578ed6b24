use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::embed::EmbeddingMatrix;
use crate::error::{Error, Result};
use crate::rng::seeded;

const EARLY_EXAGGERATION: f64 = 4.0;
const EXAGGERATION_ITERS: usize = 100;
const MOMENTUM_SWITCH_ITER: usize = 250;
const INITIAL_MOMENTUM: f64 = 0.5;
const FINAL_MOMENTUM: f64 = 0.8;
const MIN_GAIN: f64 = 0.01;
const SIGMA_SEARCH_STEPS: usize = 30;
const SIGMA_SEARCH_TOL: f64 = 1e-5;
const INIT_SCALE: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TsneParams {
    pub perplexity: f64,
    pub iterations: usize,
    pub learning_rate: f64,
    pub seed: u64,
}

impl Default for TsneParams {
    fn default() -> Self {
        Self {
            perplexity: 30.0,
            iterations: 1000,
            learning_rate: 200.0,
            seed: 0,
        }
    }
}

impl TsneParams {
    /// Largest perplexity accepted for `n` points (exclusive bound).
    pub fn perplexity_bound(n: usize) -> f64 {
        (n as f64 - 1.0) / 3.0
    }

    /// Copy with perplexity pulled just under the bound for `n` points.
    pub fn clamped_for(mut self, n: usize) -> Self {
        let bound = Self::perplexity_bound(n);
        if self.perplexity >= bound {
            self.perplexity = bound * 0.99;
        }
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Projection2D {
    pub provision_ids: Vec<String>,
    pub coords: Vec<[f64; 2]>,
    /// KL(P‖Q) right after early exaggeration ends.
    pub kl_initial: f64,
    pub kl_final: f64,
    pub params: TsneParams,
}

fn squared_distances(x: &EmbeddingMatrix) -> Vec<f64> {
    let n = x.len();
    let mut d = vec![0.0; n * n];
    d.par_chunks_mut(n).enumerate().for_each(|(i, row)| {
        let xi = x.row(i);
        for (j, out) in row.iter_mut().enumerate() {
            *out = xi
                .iter()
                .zip(x.row(j))
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
        }
    });
    d
}

/// Conditional distribution `p_{·|i}` for one precision `beta`, with its
/// entropy in bits. Distances are shifted by their minimum for stability.
fn conditional_row(dist: &[f64], i: usize, beta: f64, out: &mut [f64]) -> f64 {
    let d_min = dist
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != i)
        .map(|(_, &d)| d)
        .fold(f64::INFINITY, f64::min);
    let mut sum = 0.0;
    let mut weighted = 0.0;
    for (j, (&d, p)) in dist.iter().zip(out.iter_mut()).enumerate() {
        if j == i {
            *p = 0.0;
            continue;
        }
        let shifted = d - d_min;
        *p = (-beta * shifted).exp();
        sum += *p;
        weighted += shifted * *p;
    }
    for p in out.iter_mut() {
        *p /= sum;
    }
    (sum.ln() + beta * weighted / sum) / std::f64::consts::LN_2
}

/// Binary search on the Gaussian precision so each row's entropy matches
/// `log2(perplexity)`. Returns the row-stochastic conditional matrix and
/// the achieved entropies (bits).
pub fn conditional_probabilities(x: &EmbeddingMatrix, perplexity: f64) -> (Vec<f64>, Vec<f64>) {
    let n = x.len();
    let dist = squared_distances(x);
    let target = perplexity.log2();
    let mut cond = vec![0.0; n * n];
    let entropies: Vec<f64> = cond
        .par_chunks_mut(n)
        .enumerate()
        .map(|(i, row)| {
            let d = &dist[i * n..(i + 1) * n];
            let (mut beta, mut lo, mut hi) = (1.0, f64::NEG_INFINITY, f64::INFINITY);
            let mut h = conditional_row(d, i, beta, row);
            for _ in 0..SIGMA_SEARCH_STEPS {
                let diff = h - target;
                if diff.abs() < SIGMA_SEARCH_TOL {
                    break;
                }
                if diff > 0.0 {
                    lo = beta;
                    beta = if hi.is_finite() {
                        (beta + hi) / 2.0
                    } else {
                        beta * 2.0
                    };
                } else {
                    hi = beta;
                    beta = if lo.is_finite() {
                        (beta + lo) / 2.0
                    } else {
                        beta / 2.0
                    };
                }
                h = conditional_row(d, i, beta, row);
            }
            h
        })
        .collect();
    (cond, entropies)
}

/// Symmetrized joint affinities `P = (P_{j|i} + P_{i|j}) / 2n`.
pub fn joint_probabilities(x: &EmbeddingMatrix, perplexity: f64) -> Vec<f64> {
    let n = x.len();
    let (cond, _) = conditional_probabilities(x, perplexity);
    let mut p = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            p[i * n + j] = (cond[i * n + j] + cond[j * n + i]) / (2.0 * n as f64);
        }
    }
    p
}

/// Student-t kernel `1 / (1 + ‖y_i − y_j‖²)` (zero on the diagonal) and
/// its total, summed row by row in index order.
fn student_kernel(y: &[f64], n: usize) -> (Vec<f64>, f64) {
    let mut num = vec![0.0; n * n];
    let row_sums: Vec<f64> = num
        .par_chunks_mut(n)
        .enumerate()
        .map(|(i, row)| {
            let mut s = 0.0;
            for (j, out) in row.iter_mut().enumerate() {
                if i != j {
                    let dx = y[2 * i] - y[2 * j];
                    let dy = y[2 * i + 1] - y[2 * j + 1];
                    *out = 1.0 / (1.0 + dx * dx + dy * dy);
                    s += *out;
                }
            }
            s
        })
        .collect();
    (num, row_sums.iter().sum())
}

/// `KL(P‖Q)` for a 2D layout `y` (row-major `n × 2`).
pub fn kl_divergence(p: &[f64], y: &[f64], n: usize) -> f64 {
    let (num, z) = student_kernel(y, n);
    let mut kl = 0.0;
    for (idx, &pij) in p.iter().enumerate() {
        if pij > 0.0 {
            let q = (num[idx] / z).max(f64::MIN_POSITIVE);
            kl += pij * (pij / q).ln();
        }
    }
    kl
}

/// `∂KL/∂y_i = 4 Σ_j (p_ij − q_ij)(y_i − y_j)(1 + ‖y_i − y_j‖²)⁻¹`, with
/// `P` scaled by `exaggeration`.
pub fn kl_gradient(p: &[f64], y: &[f64], n: usize, exaggeration: f64) -> Vec<f64> {
    let (num, z) = student_kernel(y, n);
    let mut grad = vec![0.0; 2 * n];
    grad.par_chunks_mut(2).enumerate().for_each(|(i, g)| {
        let (mut gx, mut gy) = (0.0, 0.0);
        for j in 0..n {
            if i == j {
                continue;
            }
            let w = num[i * n + j];
            let coef = (exaggeration * p[i * n + j] - w / z) * w;
            gx += coef * (y[2 * i] - y[2 * j]);
            gy += coef * (y[2 * i + 1] - y[2 * j + 1]);
        }
        g[0] = 4.0 * gx;
        g[1] = 4.0 * gy;
    });
    grad
}

/// Exact t-SNE to two dimensions.
pub fn tsne_project(x: &EmbeddingMatrix, params: TsneParams) -> Result<Projection2D> {
    let n = x.len();
    if n < 4 {
        return Err(Error::InvalidInput(format!(
            "t-SNE needs at least 4 points, got {n}"
        )));
    }
    let bound = TsneParams::perplexity_bound(n);
    if !(params.perplexity > 0.0 && params.perplexity < bound) {
        return Err(Error::InvalidParameter(format!(
            "perplexity {} must lie in (0, {bound}) for {n} points",
            params.perplexity
        )));
    }
    if params.learning_rate.is_nan() || params.learning_rate <= 0.0 {
        return Err(Error::InvalidParameter(
            "learning rate must be positive".into(),
        ));
    }

    let p = joint_probabilities(x, params.perplexity);
    let mut rng = seeded(params.seed);
    let mut y: Vec<f64> = (0..2 * n)
        .map(|_| {
            let z: f64 = StandardNormal.sample(&mut rng);
            z * INIT_SCALE
        })
        .collect();
    let mut update = vec![0.0f64; 2 * n];
    let mut gains = vec![1.0f64; 2 * n];
    let mut kl_initial = None;

    for iter in 0..params.iterations {
        let exaggeration = if iter < EXAGGERATION_ITERS {
            EARLY_EXAGGERATION
        } else {
            1.0
        };
        let momentum = if iter < MOMENTUM_SWITCH_ITER {
            INITIAL_MOMENTUM
        } else {
            FINAL_MOMENTUM
        };
        let grad = kl_gradient(&p, &y, n, exaggeration);
        for ((g, u), gain) in grad.iter().zip(update.iter_mut()).zip(gains.iter_mut()) {
            *gain = if (*g > 0.0) != (*u > 0.0) {
                *gain + 0.2
            } else {
                *gain * 0.8
            };
            *gain = gain.max(MIN_GAIN);
            *u = momentum * *u - params.learning_rate * *gain * g;
        }
        for (yi, u) in y.iter_mut().zip(&update) {
            *yi += u;
        }
        let (mx, my) = (0..n).fold((0.0, 0.0), |(sx, sy), i| (sx + y[2 * i], sy + y[2 * i + 1]));
        let (mx, my) = (mx / n as f64, my / n as f64);
        for i in 0..n {
            y[2 * i] -= mx;
            y[2 * i + 1] -= my;
        }
        if iter + 1 == EXAGGERATION_ITERS {
            kl_initial = Some(kl_divergence(&p, &y, n));
        }
    }

    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric(
            "t-SNE produced non-finite coordinates".into(),
        ));
    }
    let kl_final = kl_divergence(&p, &y, n);
    Ok(Projection2D {
        provision_ids: x.ids().to_vec(),
        coords: y.chunks(2).map(|c| [c[0], c[1]]).collect(),
        kl_initial: kl_initial.unwrap_or(kl_final),
        kl_final,
        params,
    })
}
