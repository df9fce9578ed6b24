use std::collections::BTreeMap;

use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{normalize, EmbeddingMatrix};
use crate::error::{Error, Result};
use crate::preprocess::ProcessedProvision;
use crate::rng::seeded;

/// Sorted term list with document frequencies.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Vocabulary {
    pub terms: Vec<String>,
    pub document_frequency: Vec<usize>,
    /// Number of documents the frequencies were counted over.
    pub n_documents: usize,
}

impl Vocabulary {
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn index_of(&self, term: &str) -> Option<usize> {
        self.terms.binary_search_by(|t| t.as_str().cmp(term)).ok()
    }
}

pub fn build_vocabulary(processed: &[ProcessedProvision], min_df: usize) -> Result<Vocabulary> {
    if processed.iter().all(|p| p.tokens.is_empty()) {
        return Err(Error::InvalidInput(
            "cannot build a vocabulary: every provision is empty".into(),
        ));
    }
    let mut df: BTreeMap<&str, usize> = BTreeMap::new();
    for p in processed {
        let mut terms: Vec<&str> = p.lemmas().collect();
        terms.sort_unstable();
        terms.dedup();
        for t in terms {
            *df.entry(t).or_default() += 1;
        }
    }
    let (terms, document_frequency) = df
        .into_iter()
        .filter(|&(_, count)| count >= min_df.max(1))
        .map(|(t, count)| (t.to_string(), count))
        .unzip();
    Ok(Vocabulary {
        terms,
        document_frequency,
        n_documents: processed.len(),
    })
}

/// Smoothed inverse document frequency `ln((1+N)/(1+df)) + 1`.
pub fn idf(n_documents: usize, df: usize) -> f64 {
    ((1.0 + n_documents as f64) / (1.0 + df as f64)).ln() + 1.0
}

/// Seeded Gaussian projection matrix (`input_dim × output_dim`, row-major),
/// entries drawn from `N(0, 1/output_dim)`.
pub fn random_projection(input_dim: usize, output_dim: usize, seed: u64) -> Vec<f64> {
    let mut rng = seeded(seed);
    let scale = 1.0 / (output_dim as f64).sqrt();
    (0..input_dim * output_dim)
        .map(|_| {
            let z: f64 = StandardNormal.sample(&mut rng);
            z * scale
        })
        .collect()
}

/// TF-IDF rows with raw term counts, optionally randomly projected, then
/// L2-normalized. Rows without any vocabulary term become the first basis
/// vector and are listed in `sentinel_rows`.
pub fn tfidf_embed(
    processed: &[ProcessedProvision],
    vocab: &Vocabulary,
    target_dim: Option<usize>,
    seed: u64,
) -> Result<EmbeddingMatrix> {
    if target_dim == Some(0) {
        return Err(Error::InvalidParameter(
            "target dim must be positive".into(),
        ));
    }
    if vocab.is_empty() {
        return Err(Error::InvalidInput("vocabulary is empty".into()));
    }
    let idf: Vec<f64> = vocab
        .document_frequency
        .iter()
        .map(|&df| idf(vocab.n_documents, df))
        .collect();
    let projection = match target_dim {
        Some(d) if d < vocab.len() => Some((d, random_projection(vocab.len(), d, seed))),
        _ => None,
    };
    let dim = projection.as_ref().map_or(vocab.len(), |(d, _)| *d);

    let rows: Vec<(Vec<f64>, bool)> = processed
        .par_iter()
        .map(|p| {
            let mut counts: BTreeMap<usize, f64> = BTreeMap::new();
            for lemma in p.lemmas() {
                if let Some(t) = vocab.index_of(lemma) {
                    *counts.entry(t).or_default() += 1.0;
                }
            }
            let mut row = vec![0.0; dim];
            match &projection {
                None => {
                    for (&t, &tf) in &counts {
                        row[t] = tf * idf[t];
                    }
                }
                Some((d, r)) => {
                    for (&t, &tf) in &counts {
                        let w = tf * idf[t];
                        for (out, coef) in row.iter_mut().zip(&r[t * d..(t + 1) * d]) {
                            *out += w * coef;
                        }
                    }
                }
            }
            if normalize(&mut row) {
                (row, false)
            } else {
                row.iter_mut().for_each(|x| *x = 0.0);
                row[0] = 1.0;
                (row, true)
            }
        })
        .collect();

    let sentinels = rows
        .iter()
        .enumerate()
        .filter_map(|(i, (_, s))| s.then_some(i))
        .collect();
    let ids = processed.iter().map(|p| p.provision_id.clone()).collect();
    let data = rows.into_iter().flat_map(|(r, _)| r).collect();
    Ok(EmbeddingMatrix::from_rows(ids, dim, data, "tfidf")?.with_sentinels(sentinels))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embed::{cosine_similarity, UNIT_NORM_TOL};
    use crate::preprocess::Token;
    use proptest::prelude::*;
    use rand::Rng;

    fn doc(id: &str, lemmas: &[&str]) -> ProcessedProvision {
        ProcessedProvision {
            provision_id: id.into(),
            tokens: lemmas.iter().map(|l| Token::new(*l, *l)).collect(),
            entity_spans: vec![],
            empty: lemmas.is_empty(),
        }
    }

    fn two_docs() -> Vec<ProcessedProvision> {
        vec![
            doc("d0", &["data", "protect"]),
            doc("d1", &["data", "sale"]),
        ]
    }

    #[test]
    fn vocabulary_counts() {
        let v = build_vocabulary(&two_docs(), 1).unwrap();
        assert_eq!(v.terms, ["data", "protect", "sale"]);
        assert_eq!(v.document_frequency, [2, 1, 1]);
        let v2 = build_vocabulary(&two_docs(), 2).unwrap();
        assert_eq!(v2.terms, ["data"]);
        assert!(build_vocabulary(&[doc("e", &[])], 1).is_err());
        assert!(build_vocabulary(&[], 1).is_err());
    }

    #[test]
    fn hand_computed_weights() {
        let docs = two_docs();
        let v = build_vocabulary(&docs, 1).unwrap();
        let m = tfidf_embed(&docs, &v, None, 0).unwrap();
        // N = 2: idf(df=2) = ln(3/3) + 1 = 1, idf(df=1) = ln(3/2) + 1
        let rare = (1.5f64).ln() + 1.0;
        let norm = (1.0 + rare * rare).sqrt();
        let expected0 = [1.0 / norm, rare / norm, 0.0];
        let expected1 = [1.0 / norm, 0.0, rare / norm];
        for (a, b) in m.row(0).iter().zip(expected0) {
            assert!((a - b).abs() < 1e-12);
        }
        for (a, b) in m.row(1).iter().zip(expected1) {
            assert!((a - b).abs() < 1e-12);
        }
        assert_eq!(m.backend_tag(), "tfidf");
    }

    #[test]
    fn raw_counts_are_used() {
        let docs = vec![doc("a", &["x", "x", "y"]), doc("b", &["y"])];
        let v = build_vocabulary(&docs, 1).unwrap();
        let m = tfidf_embed(&docs, &v, None, 0).unwrap();
        let wx = 2.0 * idf(2, 1);
        let wy = idf(2, 2);
        let n = (wx * wx + wy * wy).sqrt();
        assert!((m.row(0)[0] - wx / n).abs() < 1e-12);
    }

    #[test]
    fn single_document_is_unit() {
        let docs = vec![doc("a", &["x", "y", "y"])];
        let v = build_vocabulary(&docs, 1).unwrap();
        let m = tfidf_embed(&docs, &v, None, 0).unwrap();
        m.check_unit_rows(UNIT_NORM_TOL).unwrap();
    }

    #[test]
    fn empty_rows_get_sentinel() {
        let docs = vec![doc("a", &["x"]), doc("b", &[])];
        let v = build_vocabulary(&docs, 1).unwrap();
        let m = tfidf_embed(&docs, &v, None, 0).unwrap();
        assert_eq!(m.row(1), &[1.0]);
        assert_eq!(m.sentinel_rows(), &[1]);
        assert_eq!(m.len(), 2);
    }

    #[test]
    fn zero_dim_rejected() {
        let docs = two_docs();
        let v = build_vocabulary(&docs, 1).unwrap();
        assert!(matches!(
            tfidf_embed(&docs, &v, Some(0), 0),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn seeded_projection_is_deterministic() {
        let docs: Vec<_> = (0..20)
            .map(|i| {
                let words: Vec<String> = (0..8)
                    .map(|j| format!("w{}", (i * 7 + j * 3) % 40))
                    .collect();
                let refs: Vec<&str> = words.iter().map(String::as_str).collect();
                doc(&format!("d{i}"), &refs)
            })
            .collect();
        let v = build_vocabulary(&docs, 1).unwrap();
        let a = tfidf_embed(&docs, &v, Some(8), 42).unwrap();
        let b = tfidf_embed(&docs, &v, Some(8), 42).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.dim(), 8);
        a.check_unit_rows(UNIT_NORM_TOL).unwrap();
        let c = tfidf_embed(&docs, &v, Some(8), 43).unwrap();
        assert_ne!(a, c);
    }

    /// Pairwise cosines of 50 nonnegative (TF-IDF-like) unit vectors survive
    /// a 1000 → 256 projection within 0.15.
    #[test]
    fn projection_preserves_cosines() {
        let mut rng = crate::rng::seeded(2024);
        let (n, d, k) = (50, 1000, 256);
        let mut xs: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..d).map(|_| rng.random::<f64>()).collect())
            .collect();
        xs.iter_mut().for_each(|x| assert!(normalize(x)));
        let r = random_projection(d, k, 7);
        let ys: Vec<Vec<f64>> = xs
            .iter()
            .map(|x| {
                let mut y = vec![0.0; k];
                for (t, w) in x.iter().enumerate() {
                    for (o, c) in y.iter_mut().zip(&r[t * k..(t + 1) * k]) {
                        *o += w * c;
                    }
                }
                y
            })
            .collect();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                let before = cosine_similarity(&xs[i], &xs[j]).unwrap();
                let after = cosine_similarity(&ys[i], &ys[j]).unwrap();
                worst = worst.max((before - after).abs());
            }
        }
        assert!(worst < 0.15, "worst cosine distortion {worst}");
    }

    proptest! {
        #[test]
        fn permutation_equivariant(seed in 0u64..1000) {
            let docs = vec![
                doc("a", &["data", "protect", "right"]),
                doc("b", &["data", "sale"]),
                doc("c", &["fine", "penalty", "data"]),
                doc("d", &["consent", "sale", "sale"]),
            ];
            let mut perm: Vec<usize> = (0..docs.len()).collect();
            let mut rng = crate::rng::seeded(seed);
            for i in (1..perm.len()).rev() {
                perm.swap(i, rng.random_range(0..=i));
            }
            let shuffled: Vec<_> = perm.iter().map(|&i| docs[i].clone()).collect();
            let v = build_vocabulary(&docs, 1).unwrap();
            let m = tfidf_embed(&docs, &v, Some(3), 5).unwrap();
            let ms = tfidf_embed(&shuffled, &v, Some(3), 5).unwrap();
            for (row, &src) in perm.iter().enumerate() {
                prop_assert_eq!(ms.row(row), m.row(src));
                prop_assert_eq!(&ms.ids()[row], &m.ids()[src]);
            }
        }
    }
}
