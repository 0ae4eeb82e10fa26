use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn vaxstance(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vaxstance"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> Output {
    let out = vaxstance(args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    out
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// synth -> filter -> aggregate into `dir`, returning the dataset directory.
fn prepare(dir: &Path, kept: &str) -> std::path::PathBuf {
    let raw = dir.join("raw");
    ok(&["synth", "--out-dir", s(&raw), "--kept", kept]);
    let kept_file = dir.join("kept.jsonl");
    ok(&["filter", "--in", s(&raw.join("tweets.jsonl")), "--out", s(&kept_file)]);
    let ds = dir.join("ds");
    ok(&[
        "aggregate",
        "--tweets",
        s(&kept_file),
        "--annotations",
        s(&raw.join("annotations.csv")),
        "--out-dir",
        s(&ds),
    ]);
    ds
}

#[test]
fn exit_codes() {
    assert_eq!(vaxstance(&["--help"]).status.code(), Some(0));
    assert_eq!(vaxstance(&["--version"]).status.code(), Some(0));
    let unknown = vaxstance(&["frobnicate"]);
    assert_eq!(unknown.status.code(), Some(1));
    assert!(!unknown.stderr.is_empty());
    assert_eq!(vaxstance(&["eval", "--no-such-flag"]).status.code(), Some(1));
    assert_eq!(vaxstance(&["predict", "--model", "m.bin"]).status.code(), Some(1));
}

#[test]
fn missing_model_is_a_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("absent.bin");
    let out = vaxstance(&["predict", "--model", s(&missing), "--text", "vaccins zijn gif"]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("cannot load model") && stderr.contains("absent.bin"), "{stderr}");
}

#[test]
fn filter_reports_each_stage() {
    let dir = tempfile::tempdir().unwrap();
    ok(&["synth", "--out-dir", s(dir.path()), "--kept", "200"]);
    let out = ok(&[
        "--format",
        "json",
        "filter",
        "--in",
        s(&dir.path().join("tweets.jsonl")),
        "--out",
        s(&dir.path().join("kept.jsonl")),
        "--blacklist",
        "dier,landbouw,teek",
    ]);
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["after_blacklist"], 200);
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("kept.jsonl.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["command"], "filter");
    assert_eq!(manifest["seed"], 42);
    assert_eq!(manifest["args"]["blacklist"], serde_json::json!(["dier", "landbouw", "teek"]));
}

#[test]
fn identical_seeds_give_identical_reports() {
    let dir = tempfile::tempdir().unwrap();
    let ds = prepare(dir.path(), "500");
    let lexicon = dir.path().join("raw/lexicon.tsv");
    let run = |name: &str, seed: &str| {
        let out = dir.path().join(name);
        ok(&[
            "--seed",
            seed,
            "--format",
            "json",
            "eval",
            "--data-dir",
            s(&ds),
            "--folds",
            "5",
            "--lexicon",
            s(&lexicon),
            "--out",
            s(&out),
        ]);
        (fs::read(&out).unwrap(), fs::read(dir.path().join(format!("{name}.manifest.json"))).unwrap())
    };
    let (a, manifest_a) = run("a.json", "7");
    let (b, manifest_b) = run("b.json", "7");
    assert_eq!(a, b);
    let strip = |m: Vec<u8>| String::from_utf8(m).unwrap().replace("a.json", "").replace("b.json", "");
    assert_eq!(strip(manifest_a), strip(manifest_b));
    let (c, _) = run("c.json", "8");
    assert_ne!(a, c);

    for cmd in ["curve", "sweep"] {
        let args = |out: &str| {
            vec![cmd.to_string(), "--data-dir".into(), s(&ds).into(), "--folds".into(), "4".into(), "--steps".into(), "3".into(), "--out".into(), out.into()]
        };
        let x = dir.path().join(format!("{cmd}1.csv"));
        let y = dir.path().join(format!("{cmd}2.csv"));
        ok(&args(s(&x)).iter().map(String::as_str).collect::<Vec<_>>());
        ok(&args(s(&y)).iter().map(String::as_str).collect::<Vec<_>>());
        let text = fs::read_to_string(&x).unwrap();
        assert!(text.starts_with("x,precision,recall,f1\n"));
        assert_eq!(text, fs::read_to_string(&y).unwrap());
    }
}

#[test]
fn grid_has_thirty_two_cells() {
    let dir = tempfile::tempdir().unwrap();
    let ds = prepare(dir.path(), "300");
    let out = ok(&["--format", "json", "eval", "--grid", "--data-dir", s(&ds), "--folds", "3"]);
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["cells"].as_array().unwrap().len(), 32);
    let table = ok(&["eval", "--grid", "--data-dir", s(&ds), "--folds", "3"]);
    assert_eq!(String::from_utf8(table.stdout).unwrap().lines().count(), 33);
}

#[test]
fn train_predict_and_ensemble() {
    let dir = tempfile::tempdir().unwrap();
    let ds = prepare(dir.path(), "400");
    let model = dir.path().join("model.bin");
    ok(&["train", "--data-dir", s(&ds), "--scheme", "binary", "--algorithm", "mnb", "--variant", "strict", "--out", s(&model)]);
    assert!(dir.path().join("model.bin.manifest.json").exists());
    let out = ok(&["--format", "json", "predict", "--model", s(&model), "--text", "nepvaccin gif", "--text", "prik gehaald"]);
    let rows: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(rows.as_array().unwrap().len(), 2);
    assert_eq!(rows[0]["label"], "Negative");

    let ens = ok(&["ensemble", "--data-dir", s(&ds), "--folds", "4", "--lexicon", s(&dir.path().join("raw/lexicon.tsv"))]);
    let text = String::from_utf8(ens.stdout).unwrap();
    assert!(text.contains("Ensemble") && text.contains("Lexicon \\ SVM"), "{text}");

    let agreement = ok(&["agreement", "--annotations", s(&dir.path().join("raw/annotations.csv"))]);
    assert!(String::from_utf8(agreement.stdout).unwrap().contains("Krippendorff"));
}
