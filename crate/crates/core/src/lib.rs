//! Regulatory corpus comparison toolkit.
//!
//! Segments regulation texts into provisions, preprocesses them with a
//! deterministic rule-based pipeline, embeds them as unit-norm vectors,
//! clusters them with spherical K-means and reports which clusters mix
//! provisions from several corpora (convergence) and which stay within one
//! (divergence). A t-SNE projection gives a 2D view, and a small linear
//! classification harness evaluates annotated provisions.
//!
//! Every stage is seeded and thread-count independent: the same inputs and
//! seed produce byte-identical artifacts.

pub mod analysis;
pub mod cluster;
pub mod corpus;
pub mod embed;
pub mod error;
pub mod eval;
pub mod pipeline;
pub mod preprocess;
pub mod projection;
mod rng;

pub use analysis::{ClusterProfile, ConvergenceReport, ReportFormat, Verdict};
pub use cluster::{ClusterModel, ElbowCurve, KMeansParams};
pub use corpus::{Corpus, LabelSet, Provision};
pub use embed::{cosine_similarity, EmbeddingMatrix, Vocabulary};
pub use error::{Error, ErrorKind, Result};
pub use eval::{LinearHead, MetricsReport, TrainConfig};
pub use preprocess::{Entity, PosTag, Preprocessor, ProcessedProvision, Token};
pub use projection::{Projection2D, TsneParams};
