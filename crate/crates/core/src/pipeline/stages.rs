use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::config::{seed_offset, sha256_hex, Backend, CorpusFormat, RunConfig};
use crate::analysis::{build_report, render_report, ReportFormat};
use crate::cluster::{elbow_select_k, kmeans_restarts, ClusterModel, ElbowCurve};
use crate::corpus::{
    attach_labels, check_unique_ids, load_corpus, load_text_document, HeadingRules, Provision,
};
use crate::embed::{
    build_vocabulary, matrix_from_emb1, read_emb1, tfidf_embed, write_matrix, EmbeddingMatrix,
};
use crate::error::{Error, Result};
use crate::eval::{cross_validate, render_metrics_table, ModelScores};
use crate::preprocess::{Gazetteer, Preprocessor, ProcessedProvision, StopList};
use crate::projection::{emit_scatter, tsne_project, TsneParams};

pub const PROVISIONS: &str = "provisions.jsonl";
pub const PROCESSED: &str = "processed.jsonl";
pub const EMBEDDINGS: &str = "embeddings.emb1";
pub const EMBED_INFO: &str = "embed.json";
pub const ELBOW: &str = "elbow.json";
pub const CLUSTER: &str = "cluster.json";
pub const REPORT_MD: &str = "report.md";
pub const REPORT_JSON: &str = "report.json";
pub const REPORT_CSV: &str = "report.csv";
pub const PROJECTION: &str = "projection.json";
pub const SCATTER_SVG: &str = "scatter.svg";
pub const SCATTER_CSV: &str = "scatter.csv";
pub const METRICS_JSON: &str = "metrics.json";
pub const METRICS_MD: &str = "metrics.md";
pub const META_DIR: &str = "meta";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Ingest,
    Preprocess,
    Embed,
    Elbow,
    Cluster,
    Analyze,
    Project,
    Evaluate,
}

impl Stage {
    pub const ALL: [Stage; 8] = [
        Stage::Ingest,
        Stage::Preprocess,
        Stage::Embed,
        Stage::Elbow,
        Stage::Cluster,
        Stage::Analyze,
        Stage::Project,
        Stage::Evaluate,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Ingest => "ingest",
            Stage::Preprocess => "preprocess",
            Stage::Embed => "embed",
            Stage::Elbow => "elbow",
            Stage::Cluster => "cluster",
            Stage::Analyze => "analyze",
            Stage::Project => "project",
            Stage::Evaluate => "evaluate",
        }
    }

    /// Files written by the stage (besides its metadata record).
    pub fn outputs(self) -> &'static [&'static str] {
        match self {
            Stage::Ingest => &[PROVISIONS],
            Stage::Preprocess => &[PROCESSED],
            Stage::Embed => &[EMBEDDINGS, EMBED_INFO],
            Stage::Elbow => &[ELBOW],
            Stage::Cluster => &[CLUSTER],
            Stage::Analyze => &[REPORT_MD, REPORT_JSON, REPORT_CSV],
            Stage::Project => &[PROJECTION, SCATTER_SVG, SCATTER_CSV],
            Stage::Evaluate => &[METRICS_JSON, METRICS_MD],
        }
    }

    pub fn meta_file(self) -> String {
        format!("{META_DIR}/{}.json", self.name())
    }

    /// Seed offset for seeded stages.
    fn seed_offset(self) -> Option<u64> {
        match self {
            Stage::Embed => Some(seed_offset::EMBED),
            Stage::Elbow | Stage::Cluster => Some(seed_offset::CLUSTER),
            Stage::Project => Some(seed_offset::PROJECT),
            Stage::Evaluate => Some(seed_offset::EVALUATE),
            _ => None,
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Stage {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Stage::ALL
            .into_iter()
            .find(|st| st.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown stage `{s}`")))
    }
}

/// Hash of the configuration that determines a stage's outputs, chained
/// through the stages it reads from. Changing a downstream parameter leaves
/// upstream hashes untouched.
pub fn lineage_hash(cfg: &RunConfig, stage: Stage) -> String {
    let parent = |s: Stage| lineage_hash(cfg, s);
    let seed = stage.seed_offset().map(|o| cfg.stage_seed(o));
    let value = match stage {
        Stage::Ingest => json!({
            "corpora": cfg.corpora,
            "heading_patterns": cfg.preprocess.heading_patterns,
            "label_set": cfg.eval.label_set,
        }),
        Stage::Preprocess => json!({
            "ingest": parent(Stage::Ingest),
            "stop_list": cfg.preprocess.stop_list,
            "gazetteer": cfg.preprocess.gazetteer,
        }),
        Stage::Embed => {
            // the seed only matters when rows are randomly projected
            let seeded = cfg.embed.backend == Backend::Tfidf && cfg.embed.target_dim.is_some();
            json!({
                "preprocess": parent(Stage::Preprocess),
                "embed": cfg.embed,
                "seed": if seeded { seed } else { None },
            })
        }
        Stage::Elbow => json!({
            "embed": parent(Stage::Embed),
            "k_min": cfg.cluster.k_min,
            "k_max": cfg.cluster.k_max,
            "params": cfg.cluster.params(),
            "seed": seed,
        }),
        Stage::Cluster => json!({
            "embed": parent(Stage::Embed),
            "elbow": if cfg.cluster.k.is_none() { Some(parent(Stage::Elbow)) } else { None },
            "k": cfg.cluster.k,
            "params": cfg.cluster.params(),
            "seed": seed,
        }),
        Stage::Analyze => json!({
            "cluster": parent(Stage::Cluster),
            "analyze": cfg.analyze,
        }),
        Stage::Project => json!({
            "cluster": parent(Stage::Cluster),
            "projection": cfg.projection,
            "seed": seed,
        }),
        Stage::Evaluate => json!({
            "embed": parent(Stage::Embed),
            "eval": cfg.eval,
            "seed": seed,
        }),
    };
    let tagged = json!({ "stage": stage.name(), "config": value });
    sha256_hex(tagged.to_string().as_bytes())
}

/// Metadata record written next to every stage's outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageMeta {
    pub stage: Stage,
    pub config_hash: String,
    pub run_config_hash: String,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stage_seed: Option<u64>,
    pub inputs: BTreeMap<String, String>,
    pub outputs: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub skipped: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

/// What a stage reports back to the caller.
#[derive(Debug, Clone, PartialEq)]
pub struct StageReport {
    pub stage: Stage,
    pub outputs: Vec<String>,
    pub message: Option<String>,
    pub skipped: Option<String>,
    pub notes: Vec<String>,
}

pub(crate) fn file_hash(path: &Path) -> Result<String> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(sha256_hex(&bytes))
}

pub(crate) fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).expect("artifact serializes");
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let raw = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&raw).map_err(|e| Error::Malformed {
        path: path.to_path_buf(),
        line: e.line(),
        message: e.to_string(),
    })
}

fn write_jsonl<T: Serialize>(path: &Path, items: &[T]) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    for item in items {
        serde_json::to_writer(&mut out, item).expect("record serializes");
        out.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    }
    out.flush().map_err(|e| Error::io(path, e))
}

fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut items = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        items.push(serde_json::from_str(&line).map_err(|e| Error::Malformed {
            path: path.to_path_buf(),
            line: i + 1,
            message: e.to_string(),
        })?);
    }
    Ok(items)
}

/// Inputs, outputs and bookkeeping for one stage execution.
pub(crate) struct StageCtx<'a> {
    pub cfg: &'a RunConfig,
    pub stage: Stage,
    /// Where prerequisite artifacts are read from.
    pub input_dir: &'a Path,
    /// Where this stage's artifacts are written.
    pub output_dir: &'a Path,
    pub force: bool,
    inputs: BTreeMap<String, String>,
    notes: Vec<String>,
}

impl<'a> StageCtx<'a> {
    pub fn new(
        cfg: &'a RunConfig,
        stage: Stage,
        input_dir: &'a Path,
        output_dir: &'a Path,
        force: bool,
    ) -> Self {
        Self {
            cfg,
            stage,
            input_dir,
            output_dir,
            force,
            inputs: BTreeMap::new(),
            notes: Vec::new(),
        }
    }

    fn stage_seed(&self) -> Option<u64> {
        self.stage.seed_offset().map(|o| self.cfg.stage_seed(o))
    }

    /// Path of an upstream artifact after checking that it exists and was
    /// produced under the current configuration.
    fn input(&mut self, artifact: &str, producer: Stage) -> Result<PathBuf> {
        let path = self.input_dir.join(artifact);
        let meta_path = self.input_dir.join(producer.meta_file());
        if !path.is_file() || !meta_path.is_file() {
            return Err(Error::MissingArtifact {
                artifact: artifact.to_string(),
                producer: producer.name().to_string(),
            });
        }
        let meta: StageMeta = read_json(&meta_path)?;
        let expected = lineage_hash(self.cfg, producer);
        if meta.config_hash != expected && !self.force {
            return Err(Error::ConfigHashMismatch {
                artifact: artifact.to_string(),
                expected,
                found: meta.config_hash,
            });
        }
        let hash = file_hash(&path)?;
        if meta.outputs.get(artifact).is_some_and(|h| *h != hash) && !self.force {
            return Err(Error::ConfigHashMismatch {
                artifact: artifact.to_string(),
                expected: meta.outputs[artifact].clone(),
                found: hash,
            });
        }
        self.inputs.insert(artifact.to_string(), hash);
        Ok(path)
    }

    fn out(&self, artifact: &str) -> PathBuf {
        self.output_dir.join(artifact)
    }

    fn note(&mut self, note: impl Into<String>) {
        self.notes.push(note.into());
    }

    fn provisions(&mut self) -> Result<Vec<Provision>> {
        let path = self.input(PROVISIONS, Stage::Ingest)?;
        read_jsonl(&path)
    }

    fn embeddings(&mut self) -> Result<EmbeddingMatrix> {
        let info_path = self.input(EMBED_INFO, Stage::Embed)?;
        let info: EmbedInfo = read_json(&info_path)?;
        let path = self.input(EMBEDDINGS, Stage::Embed)?;
        let data = read_emb1(&path)?;
        let ids = data.ids.clone();
        matrix_from_emb1(data, &ids, &info.backend)
    }

    fn cluster_model(&mut self) -> Result<ClusterModel> {
        let path = self.input(CLUSTER, Stage::Cluster)?;
        read_json(&path)
    }

    fn corpus_of(&mut self) -> Result<BTreeMap<String, String>> {
        Ok(self
            .provisions()?
            .into_iter()
            .map(|p| (p.id, p.corpus_id))
            .collect())
    }

    /// Runs the stage body and writes its metadata record.
    pub fn execute(mut self) -> Result<StageReport> {
        let outcome = match self.stage {
            Stage::Ingest => ingest(&mut self),
            Stage::Preprocess => preprocess(&mut self),
            Stage::Embed => embed(&mut self),
            Stage::Elbow => elbow(&mut self),
            Stage::Cluster => cluster(&mut self),
            Stage::Analyze => analyze(&mut self),
            Stage::Project => project(&mut self),
            Stage::Evaluate => evaluate(&mut self),
        }
        .map_err(|e| Error::Stage {
            stage: self.stage.name(),
            source: Box::new(e),
        })?;

        let mut outputs = BTreeMap::new();
        if outcome.skipped.is_none() {
            for name in self.stage.outputs() {
                outputs.insert(name.to_string(), file_hash(&self.out(name))?);
            }
        }
        let meta = StageMeta {
            stage: self.stage,
            config_hash: lineage_hash(self.cfg, self.stage),
            run_config_hash: self.cfg.hash(),
            seed: self.cfg.seed,
            stage_seed: self.stage_seed(),
            inputs: self.inputs,
            outputs,
            skipped: outcome.skipped.clone(),
            notes: self.notes.clone(),
        };
        let meta_dir = self.output_dir.join(META_DIR);
        fs::create_dir_all(&meta_dir).map_err(|e| Error::io(&meta_dir, e))?;
        write_json(&self.output_dir.join(self.stage.meta_file()), &meta)?;
        Ok(StageReport {
            stage: self.stage,
            outputs: meta.outputs.keys().cloned().collect(),
            message: outcome.message,
            skipped: outcome.skipped,
            notes: self.notes,
        })
    }
}

#[derive(Default)]
struct Outcome {
    message: Option<String>,
    skipped: Option<String>,
}

fn ingest(ctx: &mut StageCtx) -> Result<Outcome> {
    let cfg = ctx.cfg;
    let rules = match &cfg.preprocess.heading_patterns {
        Some(p) => HeadingRules::new(p)?,
        None => HeadingRules::default(),
    };
    let label_set = cfg.eval.label_set()?;
    let mut corpora = Vec::with_capacity(cfg.corpora.len());
    for spec in &cfg.corpora {
        let path = cfg.resolve(&spec.path);
        let mut corpus = match spec.format {
            CorpusFormat::Jsonl => load_corpus(&path, &spec.id)?,
            CorpusFormat::Text => load_text_document(&path, &spec.id, &rules)?,
        };
        for p in &corpus.provisions {
            if let Some(label) = &p.label {
                label_set.check(label)?;
            }
        }
        if let Some(labels) = &spec.labels {
            corpus = attach_labels(corpus, cfg.resolve(labels), &label_set)?;
        }
        corpora.push(corpus);
    }
    check_unique_ids(&corpora)?;
    let provisions: Vec<Provision> = corpora.into_iter().flat_map(|c| c.provisions).collect();
    write_jsonl(&ctx.out(PROVISIONS), &provisions)?;
    Ok(Outcome {
        message: Some(format!("{} provisions", provisions.len())),
        ..Default::default()
    })
}

fn preprocess(ctx: &mut StageCtx) -> Result<Outcome> {
    let cfg = ctx.cfg;
    let provisions = ctx.provisions()?;
    let stop_list = match &cfg.preprocess.stop_list {
        Some(p) => StopList::from_file(cfg.resolve(p))?,
        None => StopList::default(),
    };
    let gazetteer = match &cfg.preprocess.gazetteer {
        Some(p) => Gazetteer::from_file(cfg.resolve(p))?,
        None => Gazetteer::default(),
    };
    let processed = Preprocessor::new(stop_list, gazetteer).preprocess_all(&provisions);
    let empty = processed.iter().filter(|p| p.empty).count();
    if empty > 0 {
        ctx.note(format!(
            "{empty} provisions have no tokens after preprocessing"
        ));
    }
    write_jsonl(&ctx.out(PROCESSED), &processed)?;
    Ok(Outcome::default())
}

#[derive(Debug, Serialize, Deserialize)]
struct EmbedInfo {
    backend: String,
    n: usize,
    dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    vocabulary_size: Option<usize>,
    sentinel_ids: Vec<String>,
}

fn embed(ctx: &mut StageCtx) -> Result<Outcome> {
    let cfg = ctx.cfg;
    let seed = ctx.stage_seed().expect("embed is seeded");
    let (matrix, vocabulary_size) = match cfg.embed.backend {
        Backend::Tfidf => {
            let path = ctx.input(PROCESSED, Stage::Preprocess)?;
            let processed: Vec<ProcessedProvision> = read_jsonl(&path)?;
            let vocab = build_vocabulary(&processed, cfg.embed.min_df)?;
            let m = tfidf_embed(&processed, &vocab, cfg.embed.target_dim, seed)?;
            (m, Some(vocab.len()))
        }
        Backend::External => {
            let ids: Vec<String> = ctx.provisions()?.into_iter().map(|p| p.id).collect();
            let path = cfg.resolve(cfg.embed.path.as_ref().expect("validated"));
            let data = read_emb1(&path)?;
            (matrix_from_emb1(data, &ids, "external")?, None)
        }
    };
    let sentinel_ids: Vec<String> = matrix
        .sentinel_rows()
        .iter()
        .map(|&r| matrix.ids()[r].clone())
        .collect();
    if !sentinel_ids.is_empty() {
        ctx.note(format!(
            "{} provisions had an all-zero vector and were given the sentinel direction",
            sentinel_ids.len()
        ));
    }
    write_matrix(ctx.out(EMBEDDINGS), &matrix)?;
    let info = EmbedInfo {
        backend: matrix.backend_tag().to_string(),
        n: matrix.len(),
        dim: matrix.dim(),
        vocabulary_size,
        sentinel_ids,
    };
    write_json(&ctx.out(EMBED_INFO), &info)?;
    Ok(Outcome {
        message: Some(format!("{} x {} ({})", info.n, info.dim, info.backend)),
        ..Default::default()
    })
}

fn elbow(ctx: &mut StageCtx) -> Result<Outcome> {
    let cfg = ctx.cfg;
    let x = ctx.embeddings()?;
    let c = &cfg.cluster;
    let k_max = c.k_max.min(x.len());
    if k_max < c.k_max {
        ctx.note(format!(
            "k_max lowered from {} to the provision count {k_max}",
            c.k_max
        ));
    }
    let seeds = c.params().seeds(ctx.stage_seed().expect("elbow is seeded"));
    let curve = elbow_select_k(&x, c.k_min, k_max, &seeds, c.max_iters, c.tol)?;
    write_json(&ctx.out(ELBOW), &curve)?;
    Ok(Outcome {
        message: Some(format!(
            "selected K = {}{}",
            curve.selected_k,
            if curve.degenerate {
                " (no clear elbow)"
            } else {
                ""
            }
        )),
        ..Default::default()
    })
}

fn cluster(ctx: &mut StageCtx) -> Result<Outcome> {
    let cfg = ctx.cfg;
    let x = ctx.embeddings()?;
    let k = match cfg.cluster.k {
        Some(k) => k,
        None => {
            let path = ctx.input(ELBOW, Stage::Elbow)?;
            let curve: ElbowCurve = read_json(&path)?;
            curve.selected_k
        }
    };
    let c = &cfg.cluster;
    let seeds = c
        .params()
        .seeds(ctx.stage_seed().expect("cluster is seeded"));
    let model = kmeans_restarts(&x, k, &seeds, c.max_iters, c.tol)?;
    if !model.converged {
        ctx.note(format!(
            "K-means stopped at max_iters = {} before converging",
            c.max_iters
        ));
    }
    write_json(&ctx.out(CLUSTER), &model)?;
    Ok(Outcome {
        message: Some(format!("K = {k}, WCSS = {:.4}", model.wcss)),
        ..Default::default()
    })
}

fn analyze(ctx: &mut StageCtx) -> Result<Outcome> {
    let x = ctx.embeddings()?;
    let model = ctx.cluster_model()?;
    let corpus_of = ctx.corpus_of()?;
    let report = build_report(&model, &x, &corpus_of, ctx.cfg.analyze.top_pairs)?;
    if report.corpora.len() < 2 {
        ctx.note("single corpus: no cross-corpus pairs");
    }
    for (format, name) in [
        (ReportFormat::Markdown, REPORT_MD),
        (ReportFormat::Json, REPORT_JSON),
        (ReportFormat::Csv, REPORT_CSV),
    ] {
        let path = ctx.out(name);
        fs::write(&path, render_report(&report, format)).map_err(|e| Error::io(&path, e))?;
    }
    Ok(Outcome {
        message: Some(format!(
            "{} convergent / {} divergent clusters, {} overlapping provisions",
            report.summary.convergent, report.summary.divergent, report.overlapping_provision_count
        )),
        ..Default::default()
    })
}

fn project(ctx: &mut StageCtx) -> Result<Outcome> {
    let cfg = ctx.cfg;
    let x = ctx.embeddings()?;
    let model = ctx.cluster_model()?;
    let corpus_of = ctx.corpus_of()?;
    let requested = TsneParams {
        perplexity: cfg.projection.perplexity,
        iterations: cfg.projection.iterations,
        learning_rate: cfg.projection.learning_rate,
        seed: ctx.stage_seed().expect("project is seeded"),
    };
    let params = requested.clamped_for(x.len());
    if params.perplexity != requested.perplexity {
        ctx.note(format!(
            "perplexity lowered from {} to {:.4} for {} provisions",
            requested.perplexity,
            params.perplexity,
            x.len()
        ));
    }
    let proj = tsne_project(&x, params)?;
    let cluster_of: BTreeMap<String, usize> = model
        .provision_ids
        .iter()
        .cloned()
        .zip(model.assignments.iter().copied())
        .collect();
    let comment = format!(
        "config {} seed {}",
        lineage_hash(cfg, Stage::Project),
        params.seed
    );
    let scatter = emit_scatter(&proj, &cluster_of, &corpus_of, Some(&comment))?;
    write_json(&ctx.out(PROJECTION), &proj)?;
    for (name, body) in [(SCATTER_SVG, &scatter.svg), (SCATTER_CSV, &scatter.csv)] {
        let path = ctx.out(name);
        fs::write(&path, body).map_err(|e| Error::io(&path, e))?;
    }
    Ok(Outcome {
        message: Some(format!("KL {:.4} -> {:.4}", proj.kl_initial, proj.kl_final)),
        ..Default::default()
    })
}

fn evaluate(ctx: &mut StageCtx) -> Result<Outcome> {
    let cfg = ctx.cfg;
    let provisions = ctx.provisions()?;
    let labels: BTreeMap<String, String> = provisions
        .iter()
        .filter_map(|p| p.label.clone().map(|l| (p.id.clone(), l)))
        .collect();
    if labels.is_empty() {
        return Ok(Outcome {
            message: None,
            skipped: Some("no labeled provisions".into()),
        });
    }
    let x = ctx.embeddings()?;
    let label_set = cfg.eval.label_set()?;
    let train = cfg
        .eval
        .train_config(ctx.stage_seed().expect("evaluate is seeded"))?;
    let cv = cross_validate(&x, &labels, &label_set, cfg.eval.folds, &train)?;
    for w in &cv.warnings {
        ctx.note(w.clone());
    }
    let metrics = json!({
        "label_set": label_set,
        "labeled": labels.len(),
        "folds": cfg.eval.folds,
        "preset": cfg.eval.preset,
        "train_config": train,
        "cross_validation": cv,
    });
    write_json(&ctx.out(METRICS_JSON), &metrics)?;

    let mut rows: Vec<ModelScores> = cv
        .folds
        .iter()
        .enumerate()
        .map(|(i, m)| ModelScores::from_report(format!("linear head, fold {}", i + 1), m))
        .collect();
    rows.push(ModelScores {
        model: format!("linear head, {}-fold mean", cfg.eval.folds),
        accuracy: cv.summary.accuracy.mean,
        precision: cv.summary.precision.mean,
        recall: cv.summary.recall.mean,
        f1: cv.summary.f1.mean,
    });
    let mut md = String::from("# Classifier metrics\n\n");
    md.push_str(&render_metrics_table(&rows));
    md.push_str(&format!(
        "\nStandard deviation over folds: accuracy {:.4}, precision {:.4}, recall {:.4}, F1 {:.4}\n",
        cv.summary.accuracy.std, cv.summary.precision.std, cv.summary.recall.std, cv.summary.f1.std
    ));
    let path = ctx.out(METRICS_MD);
    fs::write(&path, md).map_err(|e| Error::io(&path, e))?;
    Ok(Outcome {
        message: Some(format!(
            "{}-fold accuracy {:.4} ± {:.4}",
            cfg.eval.folds, cv.summary.accuracy.mean, cv.summary.accuracy.std
        )),
        skipped: None,
    })
}
