use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn sample_config() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/sample/sample.toml")
}

fn regconv(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_regconv"))
        .arg("--config")
        .arg(sample_config())
        .arg("--out")
        .arg(out)
        .args(args)
        .env_remove("REGCONV_CONFIG")
        .env_remove("REGCONV_OUT_DIR")
        .output()
        .unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn cluster_without_embeddings_names_embed() {
    let tmp = tempfile::tempdir().unwrap();
    let o = regconv(&["cluster", "--k", "3"], tmp.path());
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    assert!(stderr(&o).contains("`embed`"), "{}", stderr(&o));
}

#[test]
fn elbow_prints_curve_and_records_seed() {
    let tmp = tempfile::tempdir().unwrap();
    for stage in ["ingest", "preprocess", "embed"] {
        let o = regconv(&[stage, "--seed", "7"], tmp.path());
        assert!(o.status.success(), "{stage}: {}", stderr(&o));
    }
    let o = regconv(
        &["elbow", "--k-min", "2", "--k-max", "10", "--seed", "7"],
        tmp.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let curve: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let k = curve["selected_k"].as_u64().unwrap();
    assert!((2..=10).contains(&k));
    assert_eq!(curve["k_values"].as_array().unwrap().len(), 9);
    assert!(stderr(&o).contains(&format!("selected K = {k}")));

    let meta: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(tmp.path().join("meta/elbow.json")).unwrap())
            .unwrap();
    assert_eq!(meta["seed"], 7);

    // cluster picks up the elbow result
    let o = regconv(&["cluster", "--seed", "7"], tmp.path());
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stderr(&o).contains(&format!("K = {k}")));
}

#[test]
fn exit_codes_follow_error_kind() {
    let tmp = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_regconv"))
        .args(["--config", "/nonexistent/run.toml", "run"])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));

    let bad = tmp.path().join("bad.jsonl");
    std::fs::write(&bad, "{\"id\": \"a\", \"text\": \"x\"}\nnot json\n").unwrap();
    let cfg = tmp.path().join("bad.toml");
    std::fs::write(&cfg, "[[corpora]]\nid = 'A'\npath = 'bad.jsonl'\n").unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_regconv"))
        .arg("--config")
        .arg(&cfg)
        .arg("ingest")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert!(stderr(&o).contains("ingest"), "{}", stderr(&o));
}

#[test]
fn output_dir_comes_from_the_environment() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("from-env");
    let o = Command::new(env!("CARGO_BIN_EXE_regconv"))
        .arg("ingest")
        .env("REGCONV_CONFIG", sample_config())
        .env("REGCONV_OUT_DIR", &out)
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(out.join("provisions.jsonl").is_file());
    assert!(out.join("manifest.json").is_file());
}

#[test]
fn run_writes_every_artifact() {
    let tmp = tempfile::tempdir().unwrap();
    let o = regconv(&["run", "--threads", "2"], tmp.path());
    assert!(o.status.success(), "{}", stderr(&o));
    for name in [
        "report.md",
        "scatter.svg",
        "scatter.csv",
        "metrics.md",
        "cluster.json",
        "manifest.json",
    ] {
        assert!(tmp.path().join(name).is_file(), "{name}");
    }
}
