//! End-to-end orchestration. Each stage reads its prerequisites from the
//! output directory, writes its own artifacts plus a metadata record
//! (`meta/<stage>.json`) carrying the configuration hash, and refreshes
//! `manifest.json`. [`run_pipeline`] runs every stage in a staging
//! directory and only moves the results into place when all succeed.

mod config;
mod stages;

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

pub use config::{
    seed_offset, AnalyzeConfig, Backend, ClusterConfig, CorpusFormat, CorpusSpec, EmbedConfig,
    EvalConfig, PreprocessConfig, ProjectionConfig, RunConfig,
};
pub use stages::{lineage_hash, Stage, StageMeta, StageReport, META_DIR};
pub use stages::{
    CLUSTER, ELBOW, EMBEDDINGS, EMBED_INFO, METRICS_JSON, METRICS_MD, PROCESSED, PROJECTION,
    PROVISIONS, REPORT_CSV, REPORT_JSON, REPORT_MD, SCATTER_CSV, SCATTER_SVG,
};

use crate::error::{Error, Result};
use stages::{file_hash, write_json, StageCtx};

pub const MANIFEST: &str = "manifest.json";

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RunOptions {
    /// Accept upstream artifacts produced under a different configuration.
    pub force: bool,
    /// Worker threads; `None` uses the global pool. Outputs do not depend
    /// on this value.
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestStage {
    pub stage: Stage,
    pub config_hash: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub skipped: Option<String>,
}

/// Paths and SHA-256 hashes of every artifact in an output directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub config_hash: String,
    pub seed: u64,
    pub stages: Vec<ManifestStage>,
    pub artifacts: BTreeMap<String, String>,
}

/// Runs `f` on a dedicated pool of `threads` workers.
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        None => Ok(f()),
        Some(0) => Err(Error::Config("--threads must be at least 1".into())),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::Config(format!("cannot start {n} threads: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

/// Scratch directory next to the output directory, removed on drop unless
/// committed.
struct Staging {
    path: PathBuf,
    committed: bool,
}

impl Staging {
    fn create(out_dir: &Path, tag: &str) -> Result<Self> {
        let name = out_dir
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_else(|| "out".into());
        let parent = match out_dir.parent() {
            Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
            _ => PathBuf::from("."),
        };
        fs::create_dir_all(&parent).map_err(|e| Error::io(&parent, e))?;
        let path = parent.join(format!(".{name}.{tag}.partial"));
        if path.exists() {
            fs::remove_dir_all(&path).map_err(|e| Error::io(&path, e))?;
        }
        fs::create_dir_all(path.join(META_DIR)).map_err(|e| Error::io(&path, e))?;
        Ok(Self {
            path,
            committed: false,
        })
    }

    /// Moves every staged file into `out_dir`, replacing existing files.
    fn commit(mut self, out_dir: &Path) -> Result<()> {
        move_tree(&self.path, out_dir)?;
        fs::remove_dir_all(&self.path).map_err(|e| Error::io(&self.path, e))?;
        self.committed = true;
        Ok(())
    }
}

impl Drop for Staging {
    fn drop(&mut self) {
        if !self.committed {
            let _ = fs::remove_dir_all(&self.path);
        }
    }
}

fn move_tree(from: &Path, to: &Path) -> Result<()> {
    fs::create_dir_all(to).map_err(|e| Error::io(to, e))?;
    let mut entries: Vec<_> = fs::read_dir(from)
        .map_err(|e| Error::io(from, e))?
        .collect::<std::io::Result<_>>()
        .map_err(|e| Error::io(from, e))?;
    entries.sort_by_key(|e| e.file_name());
    for entry in entries {
        let src = entry.path();
        let dst = to.join(entry.file_name());
        if src.is_dir() {
            move_tree(&src, &dst)?;
        } else {
            fs::rename(&src, &dst).map_err(|e| Error::io(&dst, e))?;
        }
    }
    Ok(())
}

/// Collects the metadata records present in `dir` into a manifest.
pub fn build_manifest(cfg: &RunConfig, dir: &Path) -> Result<RunManifest> {
    let mut stages = Vec::new();
    let mut artifacts = BTreeMap::new();
    for stage in Stage::ALL {
        let meta_path = dir.join(stage.meta_file());
        if !meta_path.is_file() {
            continue;
        }
        let raw = fs::read_to_string(&meta_path).map_err(|e| Error::io(&meta_path, e))?;
        let meta: StageMeta = serde_json::from_str(&raw).map_err(|e| Error::Malformed {
            path: meta_path.clone(),
            line: e.line(),
            message: e.to_string(),
        })?;
        for name in meta.outputs.keys() {
            artifacts.insert(name.clone(), file_hash(&dir.join(name))?);
        }
        artifacts.insert(stage.meta_file(), file_hash(&meta_path)?);
        stages.push(ManifestStage {
            stage,
            config_hash: meta.config_hash,
            skipped: meta.skipped,
        });
    }
    Ok(RunManifest {
        config_hash: cfg.hash(),
        seed: cfg.seed,
        stages,
        artifacts,
    })
}

/// Stages executed by [`run_pipeline`] for this configuration.
pub fn planned_stages(cfg: &RunConfig) -> Vec<Stage> {
    Stage::ALL
        .into_iter()
        .filter(|&s| s != Stage::Elbow || cfg.cluster.k.is_none())
        .collect()
}

/// Runs one stage against the artifacts already in the output directory.
pub fn run_stage(cfg: &RunConfig, stage: Stage, opts: &RunOptions) -> Result<StageReport> {
    cfg.validate()?;
    let out_dir = cfg.output_dir();
    with_threads(opts.threads, || {
        let staging = Staging::create(&out_dir, stage.name())?;
        let report = StageCtx::new(cfg, stage, &out_dir, &staging.path, opts.force).execute()?;
        for stale in stage.outputs() {
            let path = out_dir.join(stale);
            if path.is_file() && !staging.path.join(stale).exists() {
                fs::remove_file(&path).map_err(|e| Error::io(&path, e))?;
            }
        }
        staging.commit(&out_dir)?;
        let manifest = build_manifest(cfg, &out_dir)?;
        write_json(&out_dir.join(MANIFEST), &manifest)?;
        Ok(report)
    })?
}

/// All stages in order: ingest, preprocess, embed, elbow (when K is not
/// fixed), cluster, analyze, project, evaluate (skipped without labels).
/// Nothing in the output directory changes unless every stage succeeds.
pub fn run_pipeline(cfg: &RunConfig, opts: &RunOptions) -> Result<(RunManifest, Vec<StageReport>)> {
    cfg.validate()?;
    let out_dir = cfg.output_dir();
    with_threads(opts.threads, || {
        let staging = Staging::create(&out_dir, "run")?;
        let mut reports = Vec::new();
        for stage in planned_stages(cfg) {
            reports.push(StageCtx::new(cfg, stage, &staging.path, &staging.path, false).execute()?);
        }
        let manifest = build_manifest(cfg, &staging.path)?;
        write_json(&staging.path.join(MANIFEST), &manifest)?;
        clear_artifacts(&out_dir)?;
        staging.commit(&out_dir)?;
        Ok((manifest, reports))
    })?
}

/// Removes every file a previous run may have left in `dir`.
fn clear_artifacts(dir: &Path) -> Result<()> {
    let mut names: Vec<String> = Stage::ALL
        .iter()
        .flat_map(|s| {
            s.outputs()
                .iter()
                .map(|o| o.to_string())
                .chain([s.meta_file()])
        })
        .collect();
    names.push(MANIFEST.to_string());
    for name in names {
        let path = dir.join(name);
        if path.is_file() {
            fs::remove_file(&path).map_err(|e| Error::io(&path, e))?;
        }
    }
    Ok(())
}
