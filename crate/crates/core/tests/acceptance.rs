//! Acceptance suite: one line per criterion, non-zero exit if any fails.
//! Run with `cargo test -p regconv-core --test acceptance`.

mod common;

use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::time::{Duration, Instant};

use rand::Rng;
use regconv::analysis::build_report;
use regconv::cluster::{elbow_select_k, kmeans_restarts, select_knee};
use regconv::eval::{cross_entropy_loss, predict, train_head, MetricsReport, ModelScores};
use regconv::pipeline::{run_pipeline, RunConfig, RunOptions};
use regconv::projection::{
    joint_probabilities, kl_divergence, kl_gradient, tsne_project, TsneParams,
};
use regconv::{cosine_similarity, LabelSet, LinearHead, TrainConfig, Verdict};

use common::*;

// Pinned tolerances and thresholds.
const ORACLE_INSTANCES: usize = 100;
const ORACLE_MIN_HITS: usize = 95;
const ORACLE_RESTARTS: u64 = 50;
const ORACLE_WCSS_TOL: f64 = 1e-9;
const ORACLE_TIME: Duration = Duration::from_secs(10);
const ELBOW_RUNS: u64 = 20;
const ELBOW_MIN_HITS: usize = 18;
const EXACT_TOL: f64 = 1e-6;
const GRADIENT_REL_TOL: f64 = 1e-4;
const FD_STEP: f64 = 1e-5;
const SILHOUETTE_MIN: f64 = 0.5;
const SEPARABLE_EPOCHS: usize = 50;
const METRIC_MATRICES: u64 = 100;
const METRIC_TOL: f64 = 1e-12;
const TABLE_ROW: &str = "92.5% | 91.2% | 90.8% | 91.0%";
const END_TO_END_TIME: Duration = Duration::from_secs(60);

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn clustering_oracle() -> Check {
    let start = Instant::now();
    let mut hits = 0;
    for inst in 0..ORACLE_INSTANCES as u64 {
        let mut rng = rng(1000 + inst);
        let n = rng.random_range(5..=10);
        let dim = rng.random_range(2..=5);
        let k = rng.random_range(2..=3);
        let rows = random_unit_rows(&mut rng, n, dim);
        let x = matrix(&rows);
        let seeds: Vec<u64> = (0..ORACLE_RESTARTS).collect();
        let model = kmeans_restarts(&x, k, &seeds, 300, 1e-12).map_err(|e| e.to_string())?;
        let optimum = exhaustive_min_wcss(&rows, k);
        ensure(
            model.wcss >= optimum - ORACLE_WCSS_TOL,
            format!("instance {inst}: WCSS below the exhaustive minimum"),
        )?;
        if model.wcss - optimum <= ORACLE_WCSS_TOL {
            hits += 1;
        }
    }
    let elapsed = start.elapsed();
    let detail = format!(
        "{hits}/{ORACLE_INSTANCES} at optimum in {:.2}s",
        elapsed.as_secs_f64()
    );
    ensure(
        hits >= ORACLE_MIN_HITS && elapsed < ORACLE_TIME,
        detail.clone(),
    )?;
    Ok(detail)
}

fn elbow() -> Check {
    let mut hits = 0;
    for run in 0..ELBOW_RUNS {
        let mut rng = rng(2000 + run);
        let dim = 8;
        let centers: Vec<Vec<f64>> = (0..3).map(|i| basis(dim, i)).collect();
        let rows = blobs(&mut rng, &centers, 10, 0.1);
        let seeds: Vec<u64> = (0..10).collect();
        let curve =
            elbow_select_k(&matrix(&rows), 1, 8, &seeds, 300, 1e-9).map_err(|e| e.to_string())?;
        ensure(
            chord_knee(&curve.k_values, &curve.wcss_values) == curve.selected_k,
            format!("run {run}: selected K disagrees with the reference chord rule"),
        )?;
        if curve.selected_k == 3 {
            hits += 1;
        }
    }
    let hand = select_knee(&[1, 2, 3, 4], &[100.0, 20.0, 18.0, 17.0]).map_err(|e| e.to_string())?;
    let detail = format!(
        "{hits}/{ELBOW_RUNS} runs select 3; hand curve selects {}",
        hand.selected_k
    );
    ensure(
        hits >= ELBOW_MIN_HITS && hand.selected_k == 2,
        detail.clone(),
    )?;
    Ok(detail)
}

#[allow(clippy::approx_constant)]
fn exact_values() -> Check {
    let cos = |u: &[f64], v: &[f64]| cosine_similarity(u, v).map_err(|e| e.to_string());
    let ce = |p: &[f64], y: &[f64]| cross_entropy_loss(p, y).map_err(|e| e.to_string());
    let cases = [
        ("cos identical", cos(&[1.0, 0.0], &[1.0, 0.0])?, 1.0),
        ("cos orthogonal", cos(&[1.0, 0.0], &[0.0, 1.0])?, 0.0),
        ("cos 45deg", cos(&[1.0, 0.0], &[1.0, 1.0])?, 0.7071068),
        ("ce uniform", ce(&[0.5, 0.5], &[1.0, 0.0])?, 2f64.ln()),
        ("ce perfect", ce(&[1.0, 0.0], &[1.0, 0.0])?, 0.0),
        ("ce 0.75", ce(&[0.25, 0.75], &[0.0, 1.0])?, 0.287682),
    ];
    let worst = cases
        .iter()
        .map(|(_, got, want)| (got - want).abs())
        .fold(0.0, f64::max);
    for (name, got, want) in &cases {
        ensure(
            (got - want).abs() <= EXACT_TOL,
            format!("{name}: {got} vs {want}"),
        )?;
    }
    Ok(format!("{} values, max error {worst:.1e}", cases.len()))
}

fn relative_error(analytic: &[f64], numeric: &[f64]) -> f64 {
    let diff = analytic
        .iter()
        .zip(numeric)
        .map(|(a, b)| (a - b).powi(2))
        .sum::<f64>()
        .sqrt();
    let scale = numeric.iter().map(|b| b * b).sum::<f64>().sqrt().max(1e-12);
    diff / scale
}

fn gradient_checks() -> Check {
    // linear head: 5 samples, 3 classes, 4 dims
    let mut rng = rng(3000);
    let labels = LabelSet::new(["a", "b", "c"]).map_err(|e| e.to_string())?;
    let mut head = LinearHead::zeros(4, labels);
    head.weights
        .iter_mut()
        .for_each(|w| *w = rng.random_range(-1.0..1.0));
    head.bias
        .iter_mut()
        .for_each(|b| *b = rng.random_range(-1.0..1.0));
    let rows = random_unit_rows(&mut rng, 5, 4);
    let rows: Vec<&[f64]> = rows.iter().map(Vec::as_slice).collect();
    let classes = [0, 1, 2, 1, 0];
    let (_, gw, gb) = head.loss_gradient(&rows, &classes);
    let mut numeric = Vec::new();
    for i in 0..head.weights.len() + head.bias.len() {
        let at = |delta: f64| {
            let mut h = head.clone();
            match i.checked_sub(h.weights.len()) {
                None => h.weights[i] += delta,
                Some(j) => h.bias[j] += delta,
            }
            h.mean_loss(&rows, &classes)
        };
        numeric.push((at(FD_STEP) - at(-FD_STEP)) / (2.0 * FD_STEP));
    }
    let head_err = relative_error(&[gw, gb].concat(), &numeric);

    // t-SNE KL: 6 points
    let x = matrix(&random_unit_rows(&mut rng, 6, 5));
    let p = joint_probabilities(&x, 1.5);
    let y: Vec<f64> = (0..12).map(|_| rng.random_range(-1.0..1.0)).collect();
    let analytic = kl_gradient(&p, &y, 6, 1.0);
    let numeric: Vec<f64> = (0..y.len())
        .map(|i| {
            let at = |delta: f64| {
                let mut y = y.clone();
                y[i] += delta;
                kl_divergence(&p, &y, 6)
            };
            (at(FD_STEP) - at(-FD_STEP)) / (2.0 * FD_STEP)
        })
        .collect();
    let kl_err = relative_error(&analytic, &numeric);
    let detail = format!("linear head {head_err:.1e}, KL {kl_err:.1e}");
    ensure(
        head_err <= GRADIENT_REL_TOL && kl_err <= GRADIENT_REL_TOL,
        detail.clone(),
    )?;
    Ok(detail)
}

fn two_cluster_rows() -> (Vec<Vec<f64>>, Vec<usize>) {
    let mut rng = rng(4000);
    let rows = blobs(&mut rng, &[basis(10, 0), basis(10, 1)], 15, 0.15);
    let labels = (0..30).map(|i| i / 15).collect();
    (rows, labels)
}

fn tsne() -> Check {
    let (rows, labels) = two_cluster_rows();
    let x = matrix(&rows);
    let params = TsneParams {
        perplexity: 5.0,
        seed: 11,
        ..TsneParams::default()
    };
    let a = tsne_project(&x, params).map_err(|e| e.to_string())?;
    let b = tsne_project(&x, params).map_err(|e| e.to_string())?;
    let finite = a.coords.iter().flatten().all(|v| v.is_finite());
    let identical = serde_json::to_vec(&a).unwrap() == serde_json::to_vec(&b).unwrap()
        && a.coords
            .iter()
            .flatten()
            .zip(b.coords.iter().flatten())
            .all(|(u, v)| u.to_bits() == v.to_bits());
    let s = silhouette(&a.coords, &labels);
    let detail = format!(
        "KL {:.4} -> {:.4}, silhouette {s:.3}, finite {finite}, deterministic {identical}",
        a.kl_initial, a.kl_final
    );
    ensure(
        a.kl_final <= a.kl_initial && s >= SILHOUETTE_MIN && finite && identical,
        detail.clone(),
    )?;
    Ok(detail)
}

fn convergence_semantics() -> Check {
    // every provision appears once in each corpus
    let mut rng = rng(5000);
    let topics: Vec<Vec<f64>> = (0..3).map(|i| basis(6, i)).collect();
    let base = blobs(&mut rng, &topics, 4, 0.1);
    let rows = [base.clone(), base.clone()].concat();
    let ids: Vec<String> = (0..rows.len())
        .map(|i| {
            format!(
                "{}-{:02}",
                if i < base.len() { "A" } else { "B" },
                i % base.len()
            )
        })
        .collect();
    let corpus_of: BTreeMap<String, String> = ids
        .iter()
        .map(|id| (id.clone(), id[..1].to_string()))
        .collect();
    let x = matrix_with_ids(&rows, ids);
    let seeds: Vec<u64> = (0..10).collect();
    let model = kmeans_restarts(&x, 3, &seeds, 300, 1e-9).map_err(|e| e.to_string())?;
    let dup = build_report(&model, &x, &corpus_of, 5).map_err(|e| e.to_string())?;
    let all_convergent = dup
        .profiles
        .iter()
        .all(|p| p.verdict == Verdict::Convergent);
    ensure(
        all_convergent && dup.overlapping_provision_count == rows.len(),
        format!(
            "duplicated: {} convergent of {}, overlap {}",
            dup.summary.convergent, dup.summary.clusters, dup.overlapping_provision_count
        ),
    )?;

    // each corpus covers its own topic only
    let rows = blobs(&mut rng, &[basis(6, 0), basis(6, 3)], 8, 0.1);
    let ids: Vec<String> = (0..16)
        .map(|i| format!("{}-{:02}", if i < 8 { "A" } else { "B" }, i))
        .collect();
    let corpus_of: BTreeMap<String, String> = ids
        .iter()
        .map(|id| (id.clone(), id[..1].to_string()))
        .collect();
    let x = matrix_with_ids(&rows, ids);
    let model = kmeans_restarts(&x, 2, &seeds, 300, 1e-9).map_err(|e| e.to_string())?;
    let disjoint = build_report(&model, &x, &corpus_of, 5).map_err(|e| e.to_string())?;
    ensure(
        disjoint.summary.divergent == 2 && disjoint.summary.clusters == 2,
        format!(
            "disjoint: {} divergent of {}",
            disjoint.summary.divergent, disjoint.summary.clusters
        ),
    )?;
    Ok(format!(
        "duplicated: {}/{} convergent, overlap {}/{}; disjoint: 2/2 divergent",
        dup.summary.convergent,
        dup.summary.clusters,
        dup.overlapping_provision_count,
        dup.n_provisions
    ))
}

fn separable_set() -> (regconv::EmbeddingMatrix, BTreeMap<String, String>, LabelSet) {
    let mut rng = rng(6000);
    let rows = blobs(
        &mut rng,
        &[vec![1.0, 0.3, 0.0], vec![-1.0, 0.3, 0.0]],
        10,
        0.2,
    );
    let x = matrix(&rows);
    let labels = x
        .ids()
        .iter()
        .zip(x.rows())
        .map(|(id, r)| {
            (
                id.clone(),
                if r[0] > 0.0 { "pos" } else { "neg" }.to_string(),
            )
        })
        .collect();
    (x, labels, LabelSet::new(["neg", "pos"]).unwrap())
}

fn trainer() -> Check {
    let (x, labels, set) = separable_set();
    let cfg = TrainConfig {
        learning_rate: 0.5,
        batch_size: 4,
        epochs: SEPARABLE_EPOCHS,
        seed: 1,
    };
    let head = train_head(&x, &labels, &set, &cfg).map_err(|e| e.to_string())?;
    let preds = predict(&head, &x).map_err(|e| e.to_string())?;
    let correct = preds.iter().filter(|p| labels[&p.id] == p.class).count();
    ensure(
        correct == x.len(),
        format!("training accuracy {correct}/{}", x.len()),
    )?;

    let slow = TrainConfig {
        learning_rate: 0.01,
        ..cfg
    };
    let head = train_head(&x, &labels, &set, &slow).map_err(|e| e.to_string())?;
    let monotone = head.loss_trace.windows(2).all(|w| w[1] <= w[0]);
    ensure(monotone, "loss increased at learning rate 0.01")?;

    let preset = TrainConfig::preset("bert-base").map_err(|e| e.to_string())?;
    let row = format!(
        "{} | {} | {}",
        preset.learning_rate, preset.batch_size, preset.epochs
    );
    ensure(row == "0.00002 | 16 | 4", format!("preset {row}"))?;
    let head = train_head(&x, &labels, &set, &preset).map_err(|e| e.to_string())?;
    ensure(head.loss_trace.len() == 4, "preset did not run 4 epochs")?;
    Ok(format!("accuracy {correct}/{} in {SEPARABLE_EPOCHS} epochs; monotone loss; preset 2e-5 | 16 | 4 runs", x.len()))
}

fn metrics() -> Check {
    let mut rng = rng(7000);
    let classes = ["a", "b", "c", "d"];
    let set = LabelSet::new(classes).unwrap();
    for m in 0..METRIC_MATRICES {
        let confusion: Vec<Vec<usize>> = (0..4)
            .map(|_| (0..4).map(|_| rng.random_range(0..20)).collect())
            .collect();
        let r = MetricsReport::from_confusion(confusion, &set).map_err(|e| e.to_string())?;
        ensure(
            (r.micro_precision - r.accuracy).abs() <= METRIC_TOL
                && (r.micro_recall - r.accuracy).abs() <= METRIC_TOL,
            format!(
                "matrix {m}: micro P {} R {} accuracy {}",
                r.micro_precision, r.micro_recall, r.accuracy
            ),
        )?;
    }
    let two = LabelSet::new(["x", "y"]).unwrap();
    let r = MetricsReport::from_confusion(vec![vec![9, 1], vec![1, 9]], &two)
        .map_err(|e| e.to_string())?;
    for c in &r.classes {
        ensure(
            c.precision == 0.9 && c.recall == 0.9 && (c.f1 - 0.9).abs() <= METRIC_TOL,
            format!("hand example class {}", c.class),
        )?;
    }
    ensure(r.accuracy == 0.9, "hand example accuracy")?;
    let perfect = MetricsReport::from_confusion(vec![vec![5, 0], vec![0, 7]], &two)
        .map_err(|e| e.to_string())?;
    ensure(
        perfect.accuracy == 1.0 && perfect.macro_f1 == 1.0,
        "perfect example",
    )?;
    let row = ModelScores {
        model: "BERT".into(),
        accuracy: 0.925,
        precision: 0.912,
        recall: 0.908,
        f1: 0.910,
    }
    .cells();
    ensure(row == TABLE_ROW, format!("table row `{row}`"))?;
    Ok(format!(
        "micro identity on {METRIC_MATRICES} matrices; hand examples exact; row `{row}`"
    ))
}

fn end_to_end() -> Check {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let config = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/sample/sample.toml");
    let run = |dir: &str, threads: usize| {
        let mut cfg = RunConfig::load(&config).map_err(|e| e.to_string())?;
        cfg.output_dir = tmp.path().join(dir);
        let start = Instant::now();
        let (manifest, _) = run_pipeline(
            &cfg,
            &RunOptions {
                force: false,
                threads: Some(threads),
            },
        )
        .map_err(|e| e.to_string())?;
        Ok::<_, String>((manifest, start.elapsed()))
    };
    let (first, t1) = run("one", 1)?;
    let (second, t2) = run("one", 1)?;
    let (parallel, t3) = run("eight", 8)?;
    ensure(first == second, "repeated runs differ")?;
    ensure(
        first.artifacts == parallel.artifacts,
        "1 and 8 threads differ",
    )?;
    let slowest = t1.max(t2).max(t3);
    ensure(
        slowest < END_TO_END_TIME,
        format!("slowest run {:.1}s", slowest.as_secs_f64()),
    )?;
    Ok(format!(
        "{} artifacts identical across repeats and 1/8 threads; slowest run {:.2}s",
        first.artifacts.len(),
        slowest.as_secs_f64()
    ))
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("clustering oracle", clustering_oracle),
        ("elbow selection", elbow),
        ("cosine and loss values", exact_values),
        ("gradient checks", gradient_checks),
        ("t-SNE projection", tsne),
        ("convergence semantics", convergence_semantics),
        ("trainer", trainer),
        ("metrics identities", metrics),
        ("end-to-end determinism", end_to_end),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let result =
            catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|_| Err("panicked".into()));
        match result {
            Ok(detail) => println!("PASS {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL {name}: {detail}");
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
