use std::path::Path;
use std::process::{Command, Output};

fn wikistream(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wikistream"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = wikistream(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn sim(dir: &Path, name: &str, toml: &str) -> String {
    let cfg = dir.join(format!("{name}.toml"));
    std::fs::write(&cfg, toml).unwrap();
    let out = dir.join(name);
    ok(&["simulate", "--sim", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    out.join("events.csv").to_str().unwrap().to_string()
}

const SMALL: &str = "human_benign = 12\nhuman_malign = 12\nbot_benign = 3\nbot_malign = 3\nspan_days = 20\nactive_days = 4\nnoise = 0.1\n";

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn simulate_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let a = sim(dir.path(), "a", SMALL);
    let b = sim(dir.path(), "b", SMALL);
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let labels = std::fs::read_to_string(dir.path().join("a/labels.csv")).unwrap();
    assert_eq!(labels.lines().count(), 31);
    assert_eq!(json(&dir.path().join("a/simulate.json"))["schema_version"], 1);
}

#[test]
fn analyze_writes_reports() {
    let dir = tempfile::tempdir().unwrap();
    let events = sim(dir.path(), "s", SMALL);
    let out = dir.path().join("an");
    ok(&["analyze", "-i", &events, "-o", out.to_str().unwrap()]);
    let report = json(&out.join("report.json"));
    assert_eq!(report["schema_version"], 1);
    assert_eq!(report["report"]["threshold"], 0.15);
    let csv = std::fs::read_to_string(out.join("report.csv")).unwrap();
    assert_eq!(csv.lines().count(), 32);
}

#[test]
fn bad_path_is_a_validation_error() {
    let out = wikistream(&["analyze", "-i", "/no/such/events.csv", "-o", "/tmp/unused"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("/no/such/events.csv"));
    let out = wikistream(&["evaluate", "-i", "x.csv", "-o", "y", "--classifier", "svm"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn synthesize_needs_bots_and_warns_when_balanced() {
    let dir = tempfile::tempdir().unwrap();
    let humans = sim(dir.path(), "h", "bot_benign = 0\nbot_malign = 0\n");
    let out = wikistream(&["synthesize", "-i", &humans, "-o", dir.path().join("x").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));

    let even = sim(dir.path(), "e", "");
    let out = wikistream(&["synthesize", "-i", &even, "-o", dir.path().join("y").to_str().unwrap()]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("warning"));
    assert_eq!(json(&dir.path().join("y/synthesize.json"))["generated"], 0);
}

#[test]
fn synthesize_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let events = sim(dir.path(), "s", SMALL);
    let run = |name: &str| {
        let out = dir.path().join(name);
        ok(&["synthesize", "-i", &events, "--seed", "5", "-o", out.to_str().unwrap()]);
        std::fs::read(out.join("synthetic.csv")).unwrap()
    };
    let a = run("a");
    assert_eq!(a, run("b"));
    // 48 human and 12 bot contributors: gap 18 rounds down to 16
    assert_eq!(String::from_utf8(a).unwrap().lines().count(), 17);
}

#[test]
fn evaluate_grid_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let events = sim(dir.path(), "s", SMALL);
    let out = dir.path().join("ev");
    let table = ok(&[
        "evaluate",
        "-i",
        &events,
        "--classifier",
        "rf,nb,stacking",
        "--features",
        "set1,set3",
        "--balance",
        "-o",
        out.to_str().unwrap(),
    ]);
    let header: Vec<&str> = table.lines().next().unwrap().split_whitespace().collect();
    assert_eq!(header, ["Model", "Accuracy", "Macro-F", "F#0", "F#1", "Time", "(s)"]);
    assert_eq!(table.lines().count(), 6);
    let report = json(&out.join("report.json"));
    assert_eq!(report["cells"].as_array().unwrap().len(), 5);
    let log = std::fs::read_to_string(out.join("predictions-rf-set1.csv")).unwrap();
    assert!(log.lines().next().unwrap().ends_with("latency_us"));

    let rendered = ok(&["report", "-i", out.join("report.json").to_str().unwrap()]);
    assert_eq!(rendered, table);
}

#[test]
fn config_file_values_yield_to_flags() {
    let dir = tempfile::tempdir().unwrap();
    let events = sim(dir.path(), "s", SMALL);
    let conf = dir.path().join("run.conf");
    std::fs::write(&conf, "# defaults\nseed = 3\nclassifier = nb\nfeatures = set1\n").unwrap();
    let out = dir.path().join("ev");
    ok(&[
        "--config",
        conf.to_str().unwrap(),
        "evaluate",
        "-i",
        &events,
        "--seed",
        "8",
        "-o",
        out.to_str().unwrap(),
    ]);
    let report = json(&out.join("report.json"));
    assert_eq!(report["seed"], 8);
    assert_eq!(report["cells"][0]["name"], "nb-set1");
}

#[test]
fn balance_and_profile() {
    let dir = tempfile::tempdir().unwrap();
    let events = sim(dir.path(), "s", SMALL);
    let bal = dir.path().join("bal");
    ok(&["balance", "-i", &events, "--rule", "exact", "-o", bal.to_str().unwrap()]);
    let summary = json(&bal.join("balance.json"));
    assert_eq!(summary["n_synthetic"], 18);
    let prof = dir.path().join("prof");
    ok(&["profile", "-i", bal.join("balanced.csv").to_str().unwrap(), "-o", prof.to_str().unwrap()]);
    let profiles = std::fs::read_to_string(prof.join("profiles.jsonl")).unwrap();
    assert_eq!(profiles.lines().count(), 30 + 18);
}

#[test]
fn select_defaults_to_preset_size() {
    let dir = tempfile::tempdir().unwrap();
    let events = sim(dir.path(), "s", SMALL);
    let out = dir.path().join("sel");
    let picked = ok(&["select", "-i", &events, "--target", "contribution", "-o", out.to_str().unwrap()]);
    assert_eq!(picked.trim().split(',').count(), 5);
    assert_eq!(json(&out.join("selection.json"))["schema_version"], 1);
}
