//! Provision embeddings: the built-in TF-IDF backend, the EMB1 interchange
//! format for externally computed vectors, and cosine similarity.

mod emb1;
mod tfidf;

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub(crate) use emb1::matrix_from_emb1;
pub use emb1::{
    load_external_embeddings, parse_emb1, read_emb1, write_emb1, write_matrix, Emb1Data,
};
pub use tfidf::{build_vocabulary, idf, random_projection, tfidf_embed, Vocabulary};

/// Maximum deviation from unit L2 norm accepted for stored rows.
pub const UNIT_NORM_TOL: f64 = 1e-9;

/// `n × dim` row-major matrix of unit-norm provision vectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingMatrix {
    provision_ids: Vec<String>,
    dim: usize,
    rows: Vec<f64>,
    backend_tag: String,
    /// Rows that had no weight and were replaced by the first basis vector.
    #[serde(default)]
    sentinel_rows: Vec<usize>,
}

impl EmbeddingMatrix {
    /// Builds a matrix from raw rows, L2-normalizing each one. Zero rows are
    /// rejected.
    pub fn from_rows(
        provision_ids: Vec<String>,
        dim: usize,
        mut rows: Vec<f64>,
        backend_tag: impl Into<String>,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter(
                "embedding dim must be positive".into(),
            ));
        }
        if rows.len() != provision_ids.len() * dim {
            return Err(Error::DimensionMismatch {
                expected: provision_ids.len() * dim,
                found: rows.len(),
            });
        }
        let mut seen = HashSet::new();
        for id in &provision_ids {
            if !seen.insert(id.as_str()) {
                return Err(Error::DuplicateId(id.clone()));
            }
        }
        for (i, row) in rows.chunks_mut(dim).enumerate() {
            if !normalize(row) {
                return Err(Error::Numeric(format!(
                    "row {i} (`{}`) has zero or non-finite norm",
                    provision_ids[i]
                )));
            }
        }
        Ok(Self {
            provision_ids,
            dim,
            rows,
            backend_tag: backend_tag.into(),
            sentinel_rows: Vec::new(),
        })
    }

    pub(crate) fn with_sentinels(mut self, sentinel_rows: Vec<usize>) -> Self {
        self.sentinel_rows = sentinel_rows;
        self
    }

    pub fn len(&self) -> usize {
        self.provision_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.provision_ids.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn ids(&self) -> &[String] {
        &self.provision_ids
    }

    pub fn backend_tag(&self) -> &str {
        &self.backend_tag
    }

    pub fn sentinel_rows(&self) -> &[usize] {
        &self.sentinel_rows
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.rows[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> {
        self.rows.chunks(self.dim)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.rows
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.provision_ids.iter().position(|p| p == id)
    }

    /// Checks every row against the unit-norm invariant.
    pub fn check_unit_rows(&self, tol: f64) -> Result<()> {
        for (i, row) in self.rows().enumerate() {
            let norm = dot(row, row).sqrt();
            if (norm - 1.0).abs() > tol {
                return Err(Error::InvalidInput(format!(
                    "row {i} (`{}`) has norm {norm}, expected unit norm",
                    self.provision_ids[i]
                )));
            }
        }
        Ok(())
    }

    /// Matrix restricted to the given rows, in the given order.
    pub fn select(&self, rows: &[usize]) -> EmbeddingMatrix {
        let mut data = Vec::with_capacity(rows.len() * self.dim);
        for &r in rows {
            data.extend_from_slice(self.row(r));
        }
        EmbeddingMatrix {
            provision_ids: rows
                .iter()
                .map(|&r| self.provision_ids[r].clone())
                .collect(),
            dim: self.dim,
            rows: data,
            backend_tag: self.backend_tag.clone(),
            sentinel_rows: Vec::new(),
        }
    }
}

pub(crate) fn dot(u: &[f64], v: &[f64]) -> f64 {
    u.iter().zip(v).map(|(a, b)| a * b).sum()
}

/// Scales `v` to unit length. Returns false for zero or non-finite norms.
pub(crate) fn normalize(v: &mut [f64]) -> bool {
    let norm = dot(v, v).sqrt();
    if norm == 0.0 || !norm.is_finite() {
        return false;
    }
    for x in v.iter_mut() {
        *x /= norm;
    }
    true
}

/// `u·v / (‖u‖‖v‖)`, clamped to `[-1, 1]` against rounding.
pub fn cosine_similarity(u: &[f64], v: &[f64]) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::DimensionMismatch {
            expected: u.len(),
            found: v.len(),
        });
    }
    let nu = dot(u, u).sqrt();
    let nv = dot(v, v).sqrt();
    if nu == 0.0 || nv == 0.0 {
        return Err(Error::ZeroVector);
    }
    Ok((dot(u, v) / (nu * nv)).clamp(-1.0, 1.0))
}
