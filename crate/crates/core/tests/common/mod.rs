//! Generators and independent reference implementations shared by the
//! integration tests.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use regconv::EmbeddingMatrix;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn normalized(mut v: Vec<f64>) -> Vec<f64> {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter_mut().for_each(|x| *x /= norm);
    v
}

/// Uniformly distributed directions on the unit sphere.
pub fn random_unit_rows(rng: &mut impl Rng, n: usize, dim: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|_| normalized((0..dim).map(|_| StandardNormal.sample(rng)).collect()))
        .collect()
}

/// `per_center` noisy copies of every center, normalized.
pub fn blobs(
    rng: &mut impl Rng,
    centers: &[Vec<f64>],
    per_center: usize,
    sigma: f64,
) -> Vec<Vec<f64>> {
    centers
        .iter()
        .flat_map(|c| {
            (0..per_center)
                .map(|_| {
                    normalized(
                        c.iter()
                            .map(|v| {
                                let z: f64 = StandardNormal.sample(&mut *rng);
                                v + sigma * z
                            })
                            .collect(),
                    )
                })
                .collect::<Vec<_>>()
        })
        .collect()
}

pub fn basis(dim: usize, i: usize) -> Vec<f64> {
    let mut v = vec![0.0; dim];
    v[i] = 1.0;
    v
}

pub fn matrix(rows: &[Vec<f64>]) -> EmbeddingMatrix {
    matrix_with_ids(rows, (0..rows.len()).map(|i| format!("p{i:03}")).collect())
}

pub fn matrix_with_ids(rows: &[Vec<f64>], ids: Vec<String>) -> EmbeddingMatrix {
    let dim = rows[0].len();
    EmbeddingMatrix::from_rows(ids, dim, rows.concat(), "test").unwrap()
}

/// Minimum cosine WCSS over every partition of the rows into exactly `k`
/// non-empty blocks. For a block B the best unit centroid is its normalized
/// sum, which costs |B| − ‖Σ_B x‖.
pub fn exhaustive_min_wcss(rows: &[Vec<f64>], k: usize) -> f64 {
    fn cost(rows: &[Vec<f64>], labels: &[usize], k: usize) -> f64 {
        let dim = rows[0].len();
        let mut sums = vec![vec![0.0; dim]; k];
        let mut sizes = vec![0usize; k];
        for (row, &l) in rows.iter().zip(labels) {
            sizes[l] += 1;
            sums[l].iter_mut().zip(row).for_each(|(s, v)| *s += v);
        }
        sums.iter()
            .zip(&sizes)
            .map(|(s, &n)| n as f64 - s.iter().map(|v| v * v).sum::<f64>().sqrt())
            .sum()
    }
    // restricted growth strings enumerate set partitions once each
    fn walk(rows: &[Vec<f64>], k: usize, labels: &mut Vec<usize>, used: usize, best: &mut f64) {
        let n = rows.len();
        if labels.len() == n {
            if used == k {
                *best = best.min(cost(rows, labels, k));
            }
            return;
        }
        if k - used > n - labels.len() {
            return;
        }
        for l in 0..(used + 1).min(k) {
            labels.push(l);
            walk(rows, k, labels, used.max(l + 1), best);
            labels.pop();
        }
    }
    let mut best = f64::INFINITY;
    walk(rows, k, &mut Vec::with_capacity(rows.len()), 0, &mut best);
    best
}

/// Knee of a (k, wcss) curve: the point farthest from the chord between
/// the end points after scaling both axes to [0, 1].
pub fn chord_knee(ks: &[usize], wcss: &[f64]) -> usize {
    let kmin = ks[0] as f64;
    let kspan = (ks[ks.len() - 1] - ks[0]) as f64;
    let wmax = wcss.iter().cloned().fold(f64::MIN, f64::max);
    let wmin = wcss.iter().cloned().fold(f64::MAX, f64::min);
    let pts: Vec<(f64, f64)> = ks
        .iter()
        .zip(wcss)
        .map(|(&k, &w)| ((k as f64 - kmin) / kspan, (w - wmin) / (wmax - wmin)))
        .collect();
    let (a, b) = (pts[0], pts[pts.len() - 1]);
    // distance to the line through a and b via the cross product
    let dist = |p: (f64, f64)| ((b.0 - a.0) * (a.1 - p.1) - (a.0 - p.0) * (b.1 - a.1)).abs();
    let mut best = 0;
    for i in 1..pts.len() {
        if dist(pts[i]) > dist(pts[best]) {
            best = i;
        }
    }
    ks[best]
}

/// Mean silhouette of 2D points under the given labels.
pub fn silhouette(coords: &[[f64; 2]], labels: &[usize]) -> f64 {
    let d = |a: [f64; 2], b: [f64; 2]| ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt();
    let k = labels.iter().max().unwrap() + 1;
    let n = coords.len();
    let mut total = 0.0;
    for i in 0..n {
        let mut sum = vec![0.0; k];
        let mut count = vec![0usize; k];
        for j in (0..n).filter(|&j| j != i) {
            sum[labels[j]] += d(coords[i], coords[j]);
            count[labels[j]] += 1;
        }
        let own = labels[i];
        if count[own] == 0 {
            continue;
        }
        let a = sum[own] / count[own] as f64;
        let b = (0..k)
            .filter(|&c| c != own && count[c] > 0)
            .map(|c| sum[c] / count[c] as f64)
            .fold(f64::INFINITY, f64::min);
        total += (b - a) / a.max(b);
    }
    total / n as f64
}
