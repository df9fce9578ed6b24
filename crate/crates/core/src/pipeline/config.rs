use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::cluster::KMeansParams;
use crate::corpus::{LabelSet, DEFAULT_CLASSES};
use crate::error::{Error, Result};
use crate::eval::TrainConfig;
use crate::projection::TsneParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CorpusFormat {
    #[default]
    Jsonl,
    Text,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorpusSpec {
    pub id: String,
    pub path: PathBuf,
    #[serde(default)]
    pub format: CorpusFormat,
    /// JSON object mapping provision id to class.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PreprocessConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stop_list: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gazetteer: Option<PathBuf>,
    /// Heading regexes for plain-text corpora; an optional `citation`
    /// group selects the citation text.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub heading_patterns: Option<Vec<String>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    #[default]
    Tfidf,
    External,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmbedConfig {
    #[serde(default)]
    pub backend: Backend,
    #[serde(default = "one")]
    pub min_df: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_dim: Option<usize>,
    /// EMB1 file for the external backend.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
}

impl Default for EmbedConfig {
    fn default() -> Self {
        Self {
            backend: Backend::Tfidf,
            min_df: 1,
            target_dim: None,
            path: None,
        }
    }
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ClusterConfig {
    /// Fixed K; when absent K comes from the elbow over `k_min..=k_max`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    pub k_min: usize,
    pub k_max: usize,
    pub restarts: usize,
    pub tol: f64,
    pub max_iters: usize,
}

impl Default for ClusterConfig {
    fn default() -> Self {
        let p = KMeansParams::default();
        Self {
            k: None,
            k_min: 2,
            k_max: 10,
            restarts: p.restarts,
            tol: p.tol,
            max_iters: p.max_iters,
        }
    }
}

impl ClusterConfig {
    pub fn params(&self) -> KMeansParams {
        KMeansParams {
            max_iters: self.max_iters,
            tol: self.tol,
            restarts: self.restarts,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AnalyzeConfig {
    pub top_pairs: usize,
}

impl Default for AnalyzeConfig {
    fn default() -> Self {
        Self { top_pairs: 20 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProjectionConfig {
    pub perplexity: f64,
    pub iterations: usize,
    pub learning_rate: f64,
}

impl Default for ProjectionConfig {
    fn default() -> Self {
        let p = TsneParams::default();
        Self {
            perplexity: p.perplexity,
            iterations: p.iterations,
            learning_rate: p.learning_rate,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvalConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub label_set: Option<Vec<String>>,
    pub folds: usize,
    /// Named [`TrainConfig`] preset; the fields below override it.
    pub preset: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub learning_rate: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub batch_size: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epochs: Option<usize>,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            label_set: None,
            folds: 5,
            preset: "default".into(),
            learning_rate: None,
            batch_size: None,
            epochs: None,
        }
    }
}

impl EvalConfig {
    pub fn label_set(&self) -> Result<LabelSet> {
        match &self.label_set {
            Some(classes) => LabelSet::new(classes),
            None => LabelSet::new(DEFAULT_CLASSES),
        }
    }

    pub fn train_config(&self, seed: u64) -> Result<TrainConfig> {
        let mut cfg = TrainConfig::preset(&self.preset)?;
        if let Some(lr) = self.learning_rate {
            cfg.learning_rate = lr;
        }
        if let Some(b) = self.batch_size {
            cfg.batch_size = b;
        }
        if let Some(e) = self.epochs {
            cfg.epochs = e;
        }
        cfg.seed = seed;
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Declarative description of a run, read from TOML. Relative paths are
/// resolved against the directory of the config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_output_dir", skip_serializing)]
    pub output_dir: PathBuf,
    pub corpora: Vec<CorpusSpec>,
    #[serde(default)]
    pub preprocess: PreprocessConfig,
    #[serde(default)]
    pub embed: EmbedConfig,
    #[serde(default)]
    pub cluster: ClusterConfig,
    #[serde(default)]
    pub analyze: AnalyzeConfig,
    #[serde(default)]
    pub projection: ProjectionConfig,
    #[serde(default)]
    pub eval: EvalConfig,
    #[serde(skip)]
    base_dir: PathBuf,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

/// Fixed offsets added to the global seed for each seeded stage.
pub mod seed_offset {
    pub const EMBED: u64 = 1;
    pub const CLUSTER: u64 = 2;
    pub const PROJECT: u64 = 3;
    pub const EVALUATE: u64 = 4;
}

impl RunConfig {
    /// Parses TOML; paths stay relative to `base_dir`.
    pub fn from_toml(text: &str, base_dir: impl Into<PathBuf>) -> Result<Self> {
        let mut cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.base_dir = base_dir.into();
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::from_toml(&text, base)
    }

    pub fn base_dir(&self) -> &Path {
        &self.base_dir
    }

    /// Resolves a path from the config against its directory.
    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn output_dir(&self) -> PathBuf {
        self.resolve(&self.output_dir)
    }

    pub fn stage_seed(&self, offset: u64) -> u64 {
        self.seed.wrapping_add(offset)
    }

    /// Checks referenced files and parameter ranges.
    pub fn validate(&self) -> Result<()> {
        if self.corpora.is_empty() {
            return Err(Error::Config("at least one corpus is required".into()));
        }
        let mut ids = std::collections::BTreeSet::new();
        for c in &self.corpora {
            if c.id.trim().is_empty() {
                return Err(Error::Config("corpus id must be non-empty".into()));
            }
            if !ids.insert(c.id.as_str()) {
                return Err(Error::Config(format!("corpus id `{}` listed twice", c.id)));
            }
            self.require_file(&c.path, "corpus")?;
            if let Some(l) = &c.labels {
                self.require_file(l, "label file")?;
            }
        }
        if let Some(p) = &self.preprocess.stop_list {
            self.require_file(p, "stop list")?;
        }
        if let Some(p) = &self.preprocess.gazetteer {
            self.require_file(p, "gazetteer")?;
        }
        match (self.embed.backend, &self.embed.path) {
            (Backend::External, None) => {
                return Err(Error::Config(
                    "external embedding backend needs `embed.path`".into(),
                ))
            }
            (Backend::External, Some(p)) => self.require_file(p, "embedding file")?,
            (Backend::Tfidf, Some(_)) => {
                return Err(Error::Config(
                    "`embed.path` is only used by the external backend".into(),
                ))
            }
            (Backend::Tfidf, None) => {}
        }
        if self.embed.min_df == 0 {
            return Err(Error::Config("embed.min_df must be at least 1".into()));
        }
        let c = &self.cluster;
        if c.k == Some(0) {
            return Err(Error::Config("cluster.k must be at least 1".into()));
        }
        if c.k.is_none() && (c.k_min < 1 || c.k_min >= c.k_max) {
            return Err(Error::Config(format!(
                "cluster.k_min ({}) must be at least 1 and below cluster.k_max ({})",
                c.k_min, c.k_max
            )));
        }
        if c.restarts == 0 || c.max_iters == 0 || c.tol.is_nan() || c.tol < 0.0 {
            return Err(Error::Config(
                "cluster restarts/max_iters must be positive and tol non-negative".into(),
            ));
        }
        let p = &self.projection;
        if !(p.perplexity > 0.0 && p.learning_rate > 0.0) {
            return Err(Error::Config(
                "projection perplexity and learning_rate must be positive".into(),
            ));
        }
        if self.eval.folds < 2 {
            return Err(Error::Config("eval.folds must be at least 2".into()));
        }
        self.eval.label_set()?;
        self.eval
            .train_config(0)
            .map_err(|e| Error::Config(e.to_string()))?;
        Ok(())
    }

    fn require_file(&self, p: &Path, what: &str) -> Result<()> {
        let full = self.resolve(p);
        if full.is_file() {
            Ok(())
        } else {
            Err(Error::Config(format!(
                "{what} {} does not exist",
                full.display()
            )))
        }
    }

    /// SHA-256 of the canonical JSON form (the output directory is not part
    /// of it).
    pub fn hash(&self) -> String {
        sha256_hex(&serde_json::to_vec(self).expect("config serializes"))
    }
}

pub(crate) fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}
