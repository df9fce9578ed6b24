//! Synthetic inputs for the benchmarks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use regconv::embed::{build_vocabulary, Vocabulary};
use regconv::{EmbeddingMatrix, Preprocessor, ProcessedProvision};

/// `clusters × per_cluster` unit rows scattered around random directions.
pub fn gaussian_blobs(
    clusters: usize,
    per_cluster: usize,
    dim: usize,
    spread: f64,
    seed: u64,
) -> EmbeddingMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, spread).unwrap();
    let centers: Vec<Vec<f64>> = (0..clusters)
        .map(|_| (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect())
        .collect();
    let mut rows = Vec::with_capacity(clusters * per_cluster * dim);
    for c in &centers {
        for _ in 0..per_cluster {
            rows.extend(c.iter().map(|v| v + noise.sample(&mut rng)));
        }
    }
    let ids = (0..clusters * per_cluster)
        .map(|i| format!("p{i:05}"))
        .collect();
    EmbeddingMatrix::from_rows(ids, dim, rows, "synthetic").unwrap()
}

const WORDS: &[&str] = &[
    "controller",
    "processor",
    "consumer",
    "business",
    "personal",
    "data",
    "information",
    "sale",
    "disclose",
    "erase",
    "request",
    "notify",
    "breach",
    "authority",
    "penalty",
    "consent",
    "child",
    "transfer",
    "record",
    "security",
    "purpose",
    "retain",
    "access",
    "portability",
    "object",
    "profiling",
    "deadline",
    "days",
    "fine",
    "third",
    "party",
    "service",
    "provider",
    "opt",
    "out",
];

/// Preprocessed provisions of random legal-sounding sentences.
pub fn processed_docs(n: usize, words_per_doc: usize, seed: u64) -> Vec<ProcessedProvision> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pre = Preprocessor::default();
    (0..n)
        .map(|i| {
            let text: Vec<&str> = (0..words_per_doc)
                .map(|_| WORDS[rng.random_range(0..WORDS.len())])
                .collect();
            pre.process_text(&format!("d{i:05}"), &text.join(" "))
        })
        .collect()
}

pub fn vocabulary(docs: &[ProcessedProvision]) -> Vocabulary {
    build_vocabulary(docs, 1).unwrap()
}
