//! Convergence analysis: which clusters mix provisions from several corpora,
//! how balanced they are, and which cross-corpus provision pairs are most
//! similar.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cluster::ClusterModel;
use crate::embed::{dot, EmbeddingMatrix};
use crate::error::{Error, Result};
use crate::eval::{render_metrics_table, ModelScores};

/// Explains the overlap count in every rendered report.
pub const OVERLAP_DEFINITION: &str =
    "Overlapping provisions are the members of convergent clusters, \
i.e. clusters that contain at least one provision from every analyzed corpus.";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Convergent,
    Divergent,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Convergent => "CONVERGENT",
            Verdict::Divergent => "DIVERGENT",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterProfile {
    pub cluster_id: usize,
    pub member_ids: Vec<String>,
    /// Count for every analyzed corpus, zeros included.
    pub corpus_counts: BTreeMap<String, usize>,
    pub verdict: Verdict,
    /// Entropy of the corpus mix divided by ln(#corpora), in `[0, 1]`.
    pub balance_entropy: f64,
    pub mean_pairwise_similarity: f64,
    /// Single-member cluster; its similarity is 1.0 by convention.
    pub singleton: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredPair {
    pub id_a: String,
    pub id_b: String,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportSummary {
    pub clusters: usize,
    pub convergent: usize,
    pub divergent: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub corpora: Vec<String>,
    pub n_provisions: usize,
    pub profiles: Vec<ClusterProfile>,
    pub overlapping_provision_count: usize,
    pub top_pairs: Vec<ScoredPair>,
    pub summary: ReportSummary,
    /// Optional classifier scores appended to the report.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub metrics: Vec<ModelScores>,
}

impl ConvergenceReport {
    /// Overlap recounted by scanning members for a corpus mix, independent
    /// of the stored verdicts.
    pub fn overlap_by_membership(&self, corpus_of: &BTreeMap<String, String>) -> usize {
        let all: BTreeSet<&str> = self.corpora.iter().map(String::as_str).collect();
        self.profiles
            .iter()
            .filter(|p| {
                let seen: BTreeSet<&str> = p
                    .member_ids
                    .iter()
                    .filter_map(|id| corpus_of.get(id).map(String::as_str))
                    .collect();
                seen == all
            })
            .map(|p| p.member_ids.len())
            .sum()
    }
}

/// Checks that `corpus_of` covers exactly the ids of `x` and returns the
/// sorted corpus list.
fn corpora_of(x: &EmbeddingMatrix, corpus_of: &BTreeMap<String, String>) -> Result<Vec<String>> {
    for id in x.ids() {
        if !corpus_of.contains_key(id) {
            return Err(Error::MissingId(id.clone()));
        }
    }
    if corpus_of.len() != x.len() {
        let extra = corpus_of.keys().find(|id| x.index_of(id).is_none());
        return Err(Error::ExtraId(extra.cloned().unwrap_or_default()));
    }
    Ok(corpus_of
        .values()
        .cloned()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect())
}

fn normalized_entropy(counts: &BTreeMap<String, usize>) -> f64 {
    let c = counts.len();
    let total: usize = counts.values().sum();
    if c < 2 || total == 0 {
        return 0.0;
    }
    let h: f64 = counts
        .values()
        .filter(|&&k| k > 0)
        .map(|&k| {
            let p = k as f64 / total as f64;
            -p * p.ln()
        })
        .sum();
    (h / (c as f64).ln()).clamp(0.0, 1.0)
}

/// Corpus composition, verdict, balance entropy and mean within-cluster
/// cosine for every cluster of `model`.
pub fn profile_clusters(
    model: &ClusterModel,
    x: &EmbeddingMatrix,
    corpus_of: &BTreeMap<String, String>,
) -> Result<Vec<ClusterProfile>> {
    if model.provision_ids != x.ids() {
        return Err(
            match x.ids().iter().find(|id| !model.provision_ids.contains(id)) {
                Some(id) => Error::MissingId(id.clone()),
                None => Error::InvalidInput(
                    "cluster model and embeddings list ids in different orders".into(),
                ),
            },
        );
    }
    let corpora = corpora_of(x, corpus_of)?;
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); model.k];
    for (i, &a) in model.assignments.iter().enumerate() {
        members[a].push(i);
    }
    Ok(members
        .par_iter()
        .enumerate()
        .map(|(cluster_id, rows)| {
            let mut corpus_counts: BTreeMap<String, usize> =
                corpora.iter().map(|c| (c.clone(), 0)).collect();
            for &i in rows {
                *corpus_counts.get_mut(&corpus_of[&x.ids()[i]]).unwrap() += 1;
            }
            let verdict = if corpus_counts.values().all(|&k| k > 0) && corpora.len() > 1 {
                Verdict::Convergent
            } else {
                Verdict::Divergent
            };
            let mut sim = 0.0;
            let mut pairs = 0usize;
            for (a, &i) in rows.iter().enumerate() {
                for &j in &rows[a + 1..] {
                    sim += dot(x.row(i), x.row(j)).clamp(-1.0, 1.0);
                    pairs += 1;
                }
            }
            ClusterProfile {
                cluster_id,
                member_ids: rows.iter().map(|&i| x.ids()[i].clone()).collect(),
                balance_entropy: normalized_entropy(&corpus_counts),
                corpus_counts,
                verdict,
                mean_pairwise_similarity: if pairs == 0 { 1.0 } else { sim / pairs as f64 },
                singleton: rows.len() == 1,
            }
        })
        .collect())
}

/// The `k` most similar cross-corpus pairs. Each pair is oriented so that
/// `id_a` belongs to the corpus that sorts first; ties in score are broken
/// by `(id_a, id_b)`.
pub fn top_pairs(
    x: &EmbeddingMatrix,
    corpus_of: &BTreeMap<String, String>,
    k: usize,
) -> Result<Vec<ScoredPair>> {
    let corpora = corpora_of(x, corpus_of)?;
    if corpora.len() < 2 {
        return Err(Error::InvalidInput(format!(
            "cross-corpus pairs need at least two corpora, found {corpora:?}"
        )));
    }
    let ids = x.ids();
    let corpus: Vec<&str> = ids.iter().map(|id| corpus_of[id].as_str()).collect();
    let mut pairs: Vec<ScoredPair> = (0..x.len())
        .into_par_iter()
        .flat_map_iter(|i| {
            let corpus = &corpus;
            (i + 1..x.len())
                .filter(move |&j| corpus[i] != corpus[j])
                .map(move |j| {
                    let (a, b) = if corpus[i] < corpus[j] {
                        (i, j)
                    } else {
                        (j, i)
                    };
                    ScoredPair {
                        id_a: ids[a].clone(),
                        id_b: ids[b].clone(),
                        score: dot(x.row(a), x.row(b)).clamp(-1.0, 1.0),
                    }
                })
        })
        .collect();
    pairs.sort_by(|p, q| {
        q.score
            .total_cmp(&p.score)
            .then_with(|| p.id_a.cmp(&q.id_a))
            .then_with(|| p.id_b.cmp(&q.id_b))
    });
    pairs.truncate(k);
    Ok(pairs)
}

/// Profiles, overlap count, summary and (with two or more corpora) the top
/// `k_pairs` cross-corpus pairs.
pub fn build_report(
    model: &ClusterModel,
    x: &EmbeddingMatrix,
    corpus_of: &BTreeMap<String, String>,
    k_pairs: usize,
) -> Result<ConvergenceReport> {
    let profiles = profile_clusters(model, x, corpus_of)?;
    let corpora = corpora_of(x, corpus_of)?;
    let top = if corpora.len() >= 2 {
        top_pairs(x, corpus_of, k_pairs)?
    } else {
        Vec::new()
    };
    let convergent = profiles
        .iter()
        .filter(|p| p.verdict == Verdict::Convergent)
        .count();
    let overlapping = profiles
        .iter()
        .filter(|p| p.verdict == Verdict::Convergent)
        .map(|p| p.member_ids.len())
        .sum();
    Ok(ConvergenceReport {
        corpora,
        n_provisions: x.len(),
        summary: ReportSummary {
            clusters: profiles.len(),
            convergent,
            divergent: profiles.len() - convergent,
        },
        profiles,
        overlapping_provision_count: overlapping,
        top_pairs: top,
        metrics: Vec::new(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    Markdown,
    Csv,
    Json,
}

impl ReportFormat {
    pub fn extension(self) -> &'static str {
        match self {
            ReportFormat::Markdown => "md",
            ReportFormat::Csv => "csv",
            ReportFormat::Json => "json",
        }
    }
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "markdown" | "md" => Ok(ReportFormat::Markdown),
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            other => Err(Error::InvalidParameter(format!(
                "unknown report format `{other}`"
            ))),
        }
    }
}

fn dec4(v: f64) -> String {
    format!("{v:.4}")
}

/// Rounds to four decimals for the JSON rendering.
fn round4(v: f64) -> f64 {
    let r = (v * 1e4).round() / 1e4;
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

fn render_markdown(r: &ConvergenceReport) -> String {
    let mut out = String::new();
    let w = &mut out;
    writeln!(w, "# Convergence report\n").unwrap();
    writeln!(w, "{OVERLAP_DEFINITION}\n").unwrap();
    writeln!(w, "## Summary\n").unwrap();
    writeln!(w, "| Item | Value |\n|---|---|").unwrap();
    writeln!(w, "| Corpora | {} |", r.corpora.join(", ")).unwrap();
    writeln!(w, "| Provisions | {} |", r.n_provisions).unwrap();
    writeln!(w, "| Clusters | {} |", r.summary.clusters).unwrap();
    writeln!(w, "| Convergent clusters | {} |", r.summary.convergent).unwrap();
    writeln!(w, "| Divergent clusters | {} |", r.summary.divergent).unwrap();
    writeln!(
        w,
        "| Overlapping provisions | {} |\n",
        r.overlapping_provision_count
    )
    .unwrap();

    writeln!(w, "## Clusters\n").unwrap();
    write!(w, "| Cluster | Size |").unwrap();
    for c in &r.corpora {
        write!(w, " {c} |").unwrap();
    }
    writeln!(w, " Verdict | Balance entropy | Mean cosine |").unwrap();
    writeln!(w, "|{}", "---|".repeat(r.corpora.len() + 5)).unwrap();
    for p in &r.profiles {
        write!(w, "| {} | {} |", p.cluster_id, p.member_ids.len()).unwrap();
        for c in &r.corpora {
            write!(w, " {} |", p.corpus_counts.get(c).copied().unwrap_or(0)).unwrap();
        }
        let sim = dec4(p.mean_pairwise_similarity) + if p.singleton { " (singleton)" } else { "" };
        writeln!(
            w,
            " {} | {} | {sim} |",
            p.verdict.as_str(),
            dec4(p.balance_entropy)
        )
        .unwrap();
    }
    for p in &r.profiles {
        writeln!(
            w,
            "\n### Cluster {} ({})\n",
            p.cluster_id,
            p.verdict.as_str()
        )
        .unwrap();
        if p.member_ids.is_empty() {
            writeln!(w, "none").unwrap();
            continue;
        }
        writeln!(w, "| Provision |\n|---|").unwrap();
        for id in &p.member_ids {
            writeln!(w, "| {id} |").unwrap();
        }
    }

    writeln!(w, "\n## Top cross-corpus pairs\n").unwrap();
    if r.top_pairs.is_empty() {
        writeln!(w, "none").unwrap();
    } else {
        writeln!(
            w,
            "| Rank | Provision A | Provision B | Cosine |\n|---|---|---|---|"
        )
        .unwrap();
        for (rank, p) in r.top_pairs.iter().enumerate() {
            writeln!(
                w,
                "| {} | {} | {} | {} |",
                rank + 1,
                p.id_a,
                p.id_b,
                dec4(p.score)
            )
            .unwrap();
        }
    }
    if !r.metrics.is_empty() {
        writeln!(w, "\n## Classifier metrics\n").unwrap();
        w.push_str(&render_metrics_table(&r.metrics));
    }
    out
}

fn render_csv(r: &ConvergenceReport) -> String {
    let mut writer = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    let mut header = vec!["cluster_id".to_string(), "size".to_string()];
    header.extend(r.corpora.iter().map(|c| format!("count_{c}")));
    header.extend(
        [
            "verdict",
            "balance_entropy",
            "mean_pairwise_similarity",
            "singleton",
        ]
        .map(String::from),
    );
    writer.write_record(&header).expect("in-memory write");
    for p in &r.profiles {
        let mut row = vec![p.cluster_id.to_string(), p.member_ids.len().to_string()];
        row.extend(
            r.corpora
                .iter()
                .map(|c| p.corpus_counts.get(c).copied().unwrap_or(0).to_string()),
        );
        row.push(p.verdict.as_str().to_string());
        row.push(dec4(p.balance_entropy));
        row.push(dec4(p.mean_pairwise_similarity));
        row.push(p.singleton.to_string());
        writer.write_record(&row).expect("in-memory write");
    }
    String::from_utf8(writer.into_inner().expect("in-memory flush")).expect("UTF-8")
}

fn render_json(r: &ConvergenceReport) -> String {
    let mut rounded = r.clone();
    for p in &mut rounded.profiles {
        p.balance_entropy = round4(p.balance_entropy);
        p.mean_pairwise_similarity = round4(p.mean_pairwise_similarity);
    }
    for p in &mut rounded.top_pairs {
        p.score = round4(p.score);
    }
    let mut value = serde_json::to_value(&rounded).expect("report serializes");
    value["overlap_definition"] = OVERLAP_DEFINITION.into();
    let mut s = serde_json::to_string_pretty(&value).expect("report serializes");
    s.push('\n');
    s
}

/// Deterministic rendering with four-decimal numbers. The CSV form holds
/// the per-cluster table only.
pub fn render_report(report: &ConvergenceReport, format: ReportFormat) -> String {
    match format {
        ReportFormat::Markdown => render_markdown(report),
        ReportFormat::Csv => render_csv(report),
        ReportFormat::Json => render_json(report),
    }
}
