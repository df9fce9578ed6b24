//! Spherical K-means over unit-norm provision vectors and elbow-based
//! selection of K.

mod elbow;
mod kmeans;

pub use elbow::{elbow_select_k, select_knee, ElbowCurve, DEGENERATE_DISTANCE};
pub use kmeans::{kmeans_fit, kmeans_restarts, ClusterModel, KMeansParams};

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embed::EmbeddingMatrix;
    use crate::error::Error;
    use proptest::prelude::*;

    fn matrix(rows: &[&[f64]]) -> EmbeddingMatrix {
        let dim = rows[0].len();
        EmbeddingMatrix::from_rows(
            (0..rows.len()).map(|i| format!("p{i}")).collect(),
            dim,
            rows.iter().flat_map(|r| r.to_vec()).collect(),
            "test",
        )
        .unwrap()
    }

    fn four_points() -> EmbeddingMatrix {
        matrix(&[&[1.0, 0.0], &[0.981, 0.196], &[0.0, 1.0], &[0.196, 0.981]])
    }

    /// Relabels clusters by first appearance so partitions compare directly.
    fn canonical(assignments: &[usize]) -> Vec<usize> {
        let mut map = std::collections::HashMap::new();
        assignments
            .iter()
            .map(|a| {
                let next = map.len();
                *map.entry(*a).or_insert(next)
            })
            .collect()
    }

    #[test]
    fn four_point_partition() {
        let x = four_points();
        let m = kmeans_restarts(&x, 2, &(1..=50).collect::<Vec<_>>(), 300, 1e-6).unwrap();
        assert_eq!(canonical(&m.assignments), [0, 0, 1, 1]);
        for seed in 0..20 {
            let m = kmeans_fit(&x, 2, seed, 300, 1e-6).unwrap();
            assert_eq!(canonical(&m.assignments), [0, 0, 1, 1], "seed {seed}");
        }
    }

    #[test]
    fn single_cluster_is_normalized_mean() {
        let x = four_points();
        let m = kmeans_fit(&x, 1, 3, 300, 1e-6).unwrap();
        assert!(m.assignments.iter().all(|&a| a == 0));
        let mut mean = [0.0, 0.0];
        for r in x.rows() {
            mean[0] += r[0];
            mean[1] += r[1];
        }
        let norm = (mean[0] * mean[0] + mean[1] * mean[1]).sqrt();
        assert!((m.centroid(0)[0] - mean[0] / norm).abs() < 1e-12);
        assert!((m.centroid(0)[1] - mean[1] / norm).abs() < 1e-12);
        assert!(m.converged);
    }

    #[test]
    fn k_equals_n_has_zero_wcss() {
        let x = four_points();
        let m = kmeans_fit(&x, 4, 9, 300, 1e-6).unwrap();
        let mut sorted = m.assignments.clone();
        sorted.sort_unstable();
        assert_eq!(sorted, [0, 1, 2, 3]);
        assert!(m.wcss.abs() < 1e-12);
    }

    #[test]
    fn invalid_k_and_non_unit_rows() {
        let x = four_points();
        assert!(matches!(
            kmeans_fit(&x, 0, 0, 10, 1e-6),
            Err(Error::InvalidParameter(_))
        ));
        assert!(matches!(
            kmeans_fit(&x, 5, 0, 10, 1e-6),
            Err(Error::InvalidParameter(_))
        ));
        let raw: EmbeddingMatrix = serde_json::from_value(serde_json::json!({
            "provision_ids": ["a", "b"],
            "dim": 2,
            "rows": [2.0, 0.0, 0.0, 1.0],
            "backend_tag": "raw"
        }))
        .unwrap();
        assert!(kmeans_fit(&raw, 1, 0, 10, 1e-6).is_err());
    }

    #[test]
    fn restarts_degenerate_cases() {
        let x = four_points();
        let single = kmeans_restarts(&x, 2, &[7], 300, 1e-6).unwrap();
        assert_eq!(single, kmeans_fit(&x, 2, 7, 300, 1e-6).unwrap());
        let dup = kmeans_restarts(&x, 2, &[3, 3, 5, 5], 300, 1e-6).unwrap();
        let dedup = kmeans_restarts(&x, 2, &[3, 5], 300, 1e-6).unwrap();
        assert_eq!(dup, dedup);
        assert!(kmeans_restarts(&x, 2, &[], 300, 1e-6).is_err());
    }

    #[test]
    fn model_dump_round_trip() {
        let x = four_points();
        let m = kmeans_fit(&x, 2, 1, 300, 1e-6).unwrap();
        let json = serde_json::to_value(&m).unwrap();
        assert_eq!(json["k"], 2);
        assert_eq!(json["assignments"]["p0"], m.assignments[0]);
        assert_eq!(json["centroids"].as_array().unwrap().len(), 2);
        let back: ClusterModel = serde_json::from_value(json).unwrap();
        assert_eq!(back, m);
        assert!((m.recompute_wcss(&x) - m.wcss).abs() < 1e-12);
    }

    #[test]
    fn hand_curve_knee() {
        let curve = select_knee(&[1, 2, 3, 4], &[100.0, 20.0, 18.0, 17.0]).unwrap();
        assert_eq!(curve.selected_k, 2);
        assert!(!curve.degenerate);
        // (1/3, 3/83) against the chord x + y = 1
        let expected = (1.0 - 1.0 / 3.0 - 3.0 / 83.0) / 2f64.sqrt();
        assert!((curve.chord_distances[1] - expected).abs() < 1e-12);
    }

    #[test]
    fn linear_curve_is_degenerate() {
        let curve = select_knee(&[2, 3, 4, 5, 6], &[10.0, 8.0, 6.0, 4.0, 2.0]).unwrap();
        assert!(curve.degenerate);
        assert_eq!(curve.selected_k, 2);
        let flat = select_knee(&[1, 2, 3], &[5.0, 5.0, 5.0]).unwrap();
        assert!(flat.degenerate);
    }

    #[test]
    fn elbow_range_validation() {
        let x = four_points();
        assert!(elbow_select_k(&x, 0, 3, &[1], 10, 1e-6).is_err());
        assert!(elbow_select_k(&x, 2, 5, &[1], 10, 1e-6).is_err());
        assert!(elbow_select_k(&x, 3, 3, &[1], 10, 1e-6).is_err());
        let curve = elbow_select_k(&x, 1, 4, &[1, 2, 3], 300, 1e-6).unwrap();
        assert_eq!(curve.k_values, [1, 2, 3, 4]);
    }

    fn random_rows(seed: u64, n: usize, dim: usize) -> EmbeddingMatrix {
        use rand::Rng;
        let mut rng = crate::rng::seeded(seed);
        let rows: Vec<f64> = (0..n * dim).map(|_| rng.random_range(-1.0..1.0)).collect();
        EmbeddingMatrix::from_rows((0..n).map(|i| format!("r{i}")).collect(), dim, rows, "t")
            .unwrap()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn wcss_non_increasing_per_iteration(seed in 0u64..10_000, k in 1usize..5) {
            let x = random_rows(seed, 25, 4);
            let m = kmeans_fit(&x, k, seed, 300, 0.0).unwrap();
            for w in m.wcss_history.windows(2) {
                prop_assert!(w[1] <= w[0] + 1e-12, "{:?}", m.wcss_history);
            }
            prop_assert!((m.recompute_wcss(&x) - m.wcss).abs() < 1e-9);
            prop_assert!(m.assignments.iter().all(|&a| a < k));
            prop_assert_eq!(m.cluster_sizes().iter().filter(|&&s| s == 0).count(), 0);
            for j in 0..k {
                let c = m.centroid(j);
                let norm: f64 = c.iter().map(|v| v * v).sum::<f64>().sqrt();
                prop_assert!((norm - 1.0).abs() < 1e-9);
            }
        }

        #[test]
        fn rescaling_rows_keeps_assignments(seed in 0u64..10_000, scales in proptest::collection::vec(0.1f64..10.0, 12)) {
            let x = random_rows(seed, 12, 3);
            let scaled_rows: Vec<f64> = x
                .rows()
                .zip(&scales)
                .flat_map(|(r, s)| r.iter().map(move |v| v * s).collect::<Vec<_>>())
                .collect();
            let y = EmbeddingMatrix::from_rows(x.ids().to_vec(), 3, scaled_rows, "t").unwrap();
            let a = kmeans_fit(&x, 3, seed, 300, 1e-6).unwrap();
            let b = kmeans_fit(&y, 3, seed, 300, 1e-6).unwrap();
            prop_assert_eq!(a.assignments, b.assignments);
        }

        #[test]
        fn permuting_rows_permutes_assignments(seed in 0u64..10_000) {
            use rand::seq::SliceRandom;
            // well-separated groups so the optimum is unique up to relabeling
            let centers = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
            let mut rng = crate::rng::seeded(seed);
            let mut rows = Vec::new();
            for c in &centers {
                for _ in 0..5 {
                    use rand::Rng;
                    rows.extend(c.iter().map(|v| v + rng.random_range(-0.1..0.1)));
                }
            }
            let x = EmbeddingMatrix::from_rows((0..15).map(|i| format!("r{i}")).collect(), 3, rows, "t").unwrap();
            let mut perm: Vec<usize> = (0..15).collect();
            perm.shuffle(&mut rng);
            let y = x.select(&perm);
            let seeds: Vec<u64> = (0..10).collect();
            let a = kmeans_restarts(&x, 3, &seeds, 300, 1e-6).unwrap();
            let b = kmeans_restarts(&y, 3, &seeds, 300, 1e-6).unwrap();
            let permuted: Vec<usize> = perm.iter().map(|&i| a.assignments[i]).collect();
            prop_assert_eq!(canonical(&permuted), canonical(&b.assignments));
        }
    }
}
