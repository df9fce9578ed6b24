use std::collections::BTreeMap;

use rand::seq::index::sample;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::embed::{dot, normalize, EmbeddingMatrix};
use crate::error::{Error, Result};
use crate::rng::seeded;

/// Input rows may deviate from unit norm by this much (f32 round trips).
const INPUT_NORM_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KMeansParams {
    pub max_iters: usize,
    pub tol: f64,
    pub restarts: usize,
}

impl Default for KMeansParams {
    fn default() -> Self {
        Self {
            max_iters: 300,
            tol: 1e-6,
            restarts: 10,
        }
    }
}

impl KMeansParams {
    /// Restart seeds derived from a stage seed: `seed, seed+1, …`.
    pub fn seeds(&self, seed: u64) -> Vec<u64> {
        (0..self.restarts.max(1) as u64)
            .map(|i| seed.wrapping_add(i))
            .collect()
    }
}

/// Result of one spherical K-means run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "ClusterDump", try_from = "ClusterDump")]
pub struct ClusterModel {
    pub k: usize,
    pub dim: usize,
    /// `k × dim`, row-major, unit-norm rows.
    pub centroids: Vec<f64>,
    pub provision_ids: Vec<String>,
    pub assignments: Vec<usize>,
    /// Σ (1 − cos(x_i, c_{a(i)})).
    pub wcss: f64,
    pub iterations: usize,
    pub converged: bool,
    pub seed: u64,
    /// Objective after initialization and after each centroid update.
    pub wcss_history: Vec<f64>,
}

impl ClusterModel {
    pub fn centroid(&self, j: usize) -> &[f64] {
        &self.centroids[j * self.dim..(j + 1) * self.dim]
    }

    pub fn cluster_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &a in &self.assignments {
            sizes[a] += 1;
        }
        sizes
    }

    /// Recomputes the objective from the stored fields.
    pub fn recompute_wcss(&self, x: &EmbeddingMatrix) -> f64 {
        wcss(x, &self.assignments, &self.centroids, self.dim)
    }
}

/// JSON layout of a model dump.
#[derive(Serialize, Deserialize)]
struct ClusterDump {
    k: usize,
    seed: u64,
    iterations: usize,
    converged: bool,
    wcss: f64,
    provision_ids: Vec<String>,
    assignments: BTreeMap<String, usize>,
    centroids: Vec<Vec<f64>>,
    wcss_history: Vec<f64>,
}

impl From<ClusterModel> for ClusterDump {
    fn from(m: ClusterModel) -> Self {
        let dim = m.dim.max(1);
        ClusterDump {
            k: m.k,
            seed: m.seed,
            iterations: m.iterations,
            converged: m.converged,
            wcss: m.wcss,
            assignments: m
                .provision_ids
                .iter()
                .cloned()
                .zip(m.assignments.iter().copied())
                .collect(),
            provision_ids: m.provision_ids,
            centroids: m.centroids.chunks(dim).map(<[f64]>::to_vec).collect(),
            wcss_history: m.wcss_history,
        }
    }
}

impl TryFrom<ClusterDump> for ClusterModel {
    type Error = Error;

    fn try_from(d: ClusterDump) -> Result<Self> {
        let dim = d.centroids.first().map_or(0, Vec::len);
        if d.centroids.len() != d.k || d.centroids.iter().any(|c| c.len() != dim) {
            return Err(Error::InvalidInput(
                "centroid matrix does not match k".into(),
            ));
        }
        let assignments = d
            .provision_ids
            .iter()
            .map(|id| match d.assignments.get(id) {
                Some(&a) if a < d.k => Ok(a),
                Some(&a) => Err(Error::InvalidInput(format!("assignment {a} out of range"))),
                None => Err(Error::MissingId(id.clone())),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ClusterModel {
            k: d.k,
            dim,
            centroids: d.centroids.into_iter().flatten().collect(),
            provision_ids: d.provision_ids,
            assignments,
            wcss: d.wcss,
            iterations: d.iterations,
            converged: d.converged,
            seed: d.seed,
            wcss_history: d.wcss_history,
        })
    }
}

/// Most similar centroid; ties go to the lowest index.
fn nearest(row: &[f64], centroids: &[f64], dim: usize) -> (usize, f64) {
    let mut best = (0, f64::NEG_INFINITY);
    for (j, c) in centroids.chunks(dim).enumerate() {
        let s = dot(row, c);
        if s > best.1 {
            best = (j, s);
        }
    }
    best
}

fn assign(x: &EmbeddingMatrix, centroids: &[f64]) -> Vec<usize> {
    let dim = x.dim();
    (0..x.len())
        .into_par_iter()
        .map(|i| nearest(x.row(i), centroids, dim).0)
        .collect()
}

fn wcss(x: &EmbeddingMatrix, assignments: &[usize], centroids: &[f64], dim: usize) -> f64 {
    assignments
        .iter()
        .enumerate()
        .map(|(i, &a)| (1.0 - dot(x.row(i), &centroids[a * dim..(a + 1) * dim])).max(0.0))
        .sum()
}

/// Normalized member sum of cluster `j`, summed in row order.
fn cluster_mean(x: &EmbeddingMatrix, assignments: &[usize], j: usize) -> Option<Vec<f64>> {
    let mut sum = vec![0.0; x.dim()];
    let mut any = false;
    for (i, _) in assignments.iter().enumerate().filter(|(_, &a)| a == j) {
        any = true;
        for (s, v) in sum.iter_mut().zip(x.row(i)) {
            *s += v;
        }
    }
    if !any {
        return None;
    }
    if !normalize(&mut sum) {
        // antipodal members cancel; fall back to the first member
        let first = assignments.iter().position(|&a| a == j)?;
        sum = x.row(first).to_vec();
    }
    Some(sum)
}

/// Recomputes all centroids. Each empty cluster takes over the point that
/// is least similar to its own centroid, drawn from clusters that keep at
/// least one other member.
fn update(x: &EmbeddingMatrix, assignments: &mut [usize], k: usize) -> Vec<f64> {
    let dim = x.dim();
    let mut centroids = vec![0.0; k * dim];
    let mut sizes = vec![0usize; k];
    for &a in assignments.iter() {
        sizes[a] += 1;
    }
    for j in 0..k {
        if let Some(c) = cluster_mean(x, assignments, j) {
            centroids[j * dim..(j + 1) * dim].copy_from_slice(&c);
        }
    }
    for j in 0..k {
        if sizes[j] > 0 {
            continue;
        }
        let mut farthest: Option<(usize, f64)> = None;
        for (i, &a) in assignments.iter().enumerate() {
            if sizes[a] < 2 {
                continue;
            }
            let s = dot(x.row(i), &centroids[a * dim..(a + 1) * dim]);
            if farthest.is_none_or(|(_, best)| s < best) {
                farthest = Some((i, s));
            }
        }
        let Some((i, _)) = farthest else { break };
        let donor = assignments[i];
        assignments[i] = j;
        sizes[donor] -= 1;
        sizes[j] = 1;
        centroids[j * dim..(j + 1) * dim].copy_from_slice(x.row(i));
        if let Some(c) = cluster_mean(x, assignments, donor) {
            centroids[donor * dim..(donor + 1) * dim].copy_from_slice(&c);
        }
    }
    centroids
}

/// Spherical K-means: Lloyd iterations with cosine assignment and
/// re-normalized mean centroids, initialized from `k` distinct data rows
/// sampled with `seed`.
pub fn kmeans_fit(
    x: &EmbeddingMatrix,
    k: usize,
    seed: u64,
    max_iters: usize,
    tol: f64,
) -> Result<ClusterModel> {
    let n = x.len();
    if k == 0 || k > n {
        return Err(Error::InvalidParameter(format!("k = {k} outside [1, {n}]")));
    }
    x.check_unit_rows(INPUT_NORM_TOL)?;
    let dim = x.dim();

    let mut rng = seeded(seed);
    let mut init = sample(&mut rng, n, k).into_vec();
    init.sort_unstable();
    let mut centroids: Vec<f64> = init.iter().flat_map(|&i| x.row(i).to_vec()).collect();
    let mut assignments = assign(x, &centroids);
    let mut history = vec![wcss(x, &assignments, &centroids, dim)];

    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iters {
        iterations += 1;
        let updated = update(x, &mut assignments, k);
        let movement = centroids
            .chunks(dim)
            .zip(updated.chunks(dim))
            .map(|(old, new)| 1.0 - dot(old, new))
            .fold(0.0, f64::max);
        centroids = updated;
        history.push(wcss(x, &assignments, &centroids, dim));

        let next = assign(x, &centroids);
        let changed = next != assignments;
        assignments = next;
        if !changed {
            converged = true;
            break;
        }
        if movement < tol {
            converged = true;
            break;
        }
    }

    let total = wcss(x, &assignments, &centroids, dim);
    // the last reassignment may have lowered the objective further
    if total < *history.last().unwrap() {
        history.push(total);
    }
    Ok(ClusterModel {
        k,
        dim,
        centroids,
        provision_ids: x.ids().to_vec(),
        assignments,
        wcss: total,
        iterations,
        converged,
        seed,
        wcss_history: history,
    })
}

/// Best of several seeded runs: lowest WCSS, ties to the lowest seed.
pub fn kmeans_restarts(
    x: &EmbeddingMatrix,
    k: usize,
    seeds: &[u64],
    max_iters: usize,
    tol: f64,
) -> Result<ClusterModel> {
    if seeds.is_empty() {
        return Err(Error::InvalidParameter(
            "at least one seed is required".into(),
        ));
    }
    let mut seeds = seeds.to_vec();
    seeds.sort_unstable();
    seeds.dedup();
    let runs = seeds
        .par_iter()
        .map(|&s| kmeans_fit(x, k, s, max_iters, tol))
        .collect::<Result<Vec<_>>>()?;
    Ok(runs
        .into_iter()
        .reduce(|best, run| if run.wcss < best.wcss { run } else { best })
        .expect("non-empty"))
}
