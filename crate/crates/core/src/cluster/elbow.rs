use serde::{Deserialize, Serialize};

use super::kmeans::kmeans_restarts;
use crate::embed::EmbeddingMatrix;
use crate::error::{Error, Result};

/// Knee distances below this make the curve count as straight.
pub const DEGENERATE_DISTANCE: f64 = 0.01;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ElbowCurve {
    pub k_values: Vec<usize>,
    pub wcss_values: Vec<f64>,
    /// Normalized distance of each point to the end-to-end chord.
    pub chord_distances: Vec<f64>,
    pub selected_k: usize,
    pub degenerate: bool,
}

/// Picks the K whose (k, wcss) point lies farthest from the chord joining
/// the first and last points, after min-max scaling both axes to [0, 1].
pub fn select_knee(k_values: &[usize], wcss: &[f64]) -> Result<ElbowCurve> {
    if k_values.len() != wcss.len() || k_values.len() < 2 {
        return Err(Error::InvalidParameter(
            "an elbow curve needs at least two (k, wcss) points".into(),
        ));
    }
    if k_values.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParameter("k values must be ascending".into()));
    }
    let scale = |v: f64, lo: f64, hi: f64| if hi > lo { (v - lo) / (hi - lo) } else { 0.0 };
    let (k_lo, k_hi) = (k_values[0] as f64, *k_values.last().unwrap() as f64);
    let w_lo = wcss.iter().copied().fold(f64::INFINITY, f64::min);
    let w_hi = wcss.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let points: Vec<(f64, f64)> = k_values
        .iter()
        .zip(wcss)
        .map(|(&k, &w)| (scale(k as f64, k_lo, k_hi), scale(w, w_lo, w_hi)))
        .collect();

    let (x0, y0) = points[0];
    let (x1, y1) = *points.last().unwrap();
    let (dx, dy) = (x1 - x0, y1 - y0);
    let chord = (dx * dx + dy * dy).sqrt();
    let distances: Vec<f64> = points
        .iter()
        .map(|&(x, y)| {
            if chord == 0.0 {
                0.0
            } else {
                (dx * (y0 - y) - dy * (x0 - x)).abs() / chord
            }
        })
        .collect();

    let (best, max_distance) =
        distances
            .iter()
            .enumerate()
            .fold(
                (0, f64::NEG_INFINITY),
                |acc, (i, &d)| if d > acc.1 { (i, d) } else { acc },
            );
    let degenerate = max_distance < DEGENERATE_DISTANCE;
    Ok(ElbowCurve {
        k_values: k_values.to_vec(),
        wcss_values: wcss.to_vec(),
        chord_distances: distances,
        selected_k: if degenerate {
            k_values[0]
        } else {
            k_values[best]
        },
        degenerate,
    })
}

/// Best-of-restarts WCSS for every K in `k_min..=k_max`, then the knee.
pub fn elbow_select_k(
    x: &EmbeddingMatrix,
    k_min: usize,
    k_max: usize,
    seeds: &[u64],
    max_iters: usize,
    tol: f64,
) -> Result<ElbowCurve> {
    if k_min < 1 || k_max > x.len() || k_min >= k_max {
        return Err(Error::InvalidParameter(format!(
            "elbow range [{k_min}, {k_max}] invalid for {} provisions",
            x.len()
        )));
    }
    let k_values: Vec<usize> = (k_min..=k_max).collect();
    let wcss = k_values
        .iter()
        .map(|&k| kmeans_restarts(x, k, seeds, max_iters, tol).map(|m| m.wcss))
        .collect::<Result<Vec<_>>>()?;
    select_knee(&k_values, &wcss)
}
