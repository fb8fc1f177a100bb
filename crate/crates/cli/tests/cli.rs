use serde_json::Value;
use std::path::Path;
use std::process::{Command, Output};

fn parlab(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_parlab")).args(args).current_dir(cwd).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn annulus_capacity_matches_closed_form() {
    let dir = tempfile::tempdir().unwrap();
    let o = parlab(&["capacity", "--gen", "annulus:a=1,b=2,h=0.03", "--out", "run"], dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v = json(&dir.path().join("run/capacity.json"))["value"].as_f64().unwrap();
    let exact = 2.0 * std::f64::consts::PI / 2f64.ln();
    assert!((v - exact).abs() / exact < 0.01, "{v}");
    let csv = std::fs::read_to_string(dir.path().join("run/potential.csv")).unwrap();
    assert!(csv.starts_with("vertex,value\n"));
    let echo = json(&dir.path().join("run/config.json"));
    assert_eq!(echo["gen"], "annulus:a=1,b=2,h=0.03");
}

#[test]
fn capacity_error_paths() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&parlab(&["capacity", "--mesh", "missing.json", "--out", "a"], dir.path())), 3);
    let o = parlab(&["capacity", "--gen", "annulus:a=1,b=2,h=0.2", "--plate", "radius:5", "--out", "b"], dir.path());
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("invariant violated"));
    assert_eq!(code(&parlab(&["capacity", "--gen", "annulus:a=1,b=2,h=0.2", "--tol", "0", "--out", "c"], dir.path())), 3);
    assert_eq!(code(&parlab(&["capacity", "--no-such-flag"], dir.path())), 3);
    // nothing is written on failure
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0);
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("cfg.json"), r#"{"gen": "annulus:a=1,b=2,h=0.5", "out": "from_file"}"#).unwrap();
    let o = parlab(&["capacity", "--config", "cfg.json", "--gen", "annulus:a=1,b=3,h=0.2"], dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(json(&dir.path().join("from_file/config.json"))["gen"], "annulus:a=1,b=3,h=0.2");
    std::fs::write(dir.path().join("bad.json"), r#"{"colour": 1}"#).unwrap();
    assert_eq!(code(&parlab(&["capacity", "--config", "bad.json"], dir.path())), 3);
}

#[test]
fn classify_examples() {
    let dir = tempfile::tempdir().unwrap();
    let o = parlab(&["classify", "--model", "euclidean", "--sector", "0.5", "--method", "volume", "--out", "half"], dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let doc = json(&dir.path().join("half/classification.json"));
    assert_eq!(doc["classifications"][0]["verdict"], "Parabolic");
    assert!(dir.path().join("half/evidence_volume.csv").exists());

    let o = parlab(&["classify", "--model", "hyperbolic", "--method", "capacity", "--out", "hyp"], dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(json(&dir.path().join("hyp/classification.json"))["classifications"][0]["verdict"], "NonParabolic");

    assert_eq!(code(&parlab(&["classify", "--method", "walk", "--out", "w"], dir.path())), 3);
    assert_eq!(code(&parlab(&["classify", "--method", "dtest", "--out", "d"], dir.path())), 3);
    assert_eq!(code(&parlab(&["classify", "--method", "guess", "--out", "g"], dir.path())), 3);
}

#[test]
fn walk_classification_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let args = |out: &'static str| ["classify", "--method", "walk", "--seed", "11", "--trials", "1000", "--n-theta", "16", "--out", out];
    assert_eq!(code(&parlab(&args("a"), dir.path())), 0);
    assert_eq!(code(&parlab(&args("b"), dir.path())), 0);
    let read = |p: &str| std::fs::read(dir.path().join(p)).unwrap();
    assert_eq!(read("a/classification.json"), read("b/classification.json"));
    assert_eq!(read("a/evidence_walk.csv"), read("b/evidence_walk.csv"));
}

#[test]
fn reproduce_stokes_witness() {
    let dir = tempfile::tempdir().unwrap();
    let o = parlab(&["reproduce", "--theorem", "stokes", "--out", "s"], dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let rep = json(&dir.path().join("s/report.json"));
    assert_eq!(rep["summary"], "global Stokes fails as predicted");
    assert_eq!(rep["passed"], true);
    assert!(dir.path().join("s/stokes_study.csv").exists());
}

#[test]
fn reproduce_height_has_nonnegative_slack() {
    let dir = tempfile::tempdir().unwrap();
    let o = parlab(&["reproduce", "--theorem", "height", "--out", "h"], dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(dir.path().join("h/height_caps.csv")).unwrap();
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let slack = header.iter().position(|h| *h == "slack").unwrap();
    let status = header.iter().position(|h| *h == "status").unwrap();
    for line in lines {
        let cells: Vec<&str> = line.split(',').collect();
        if cells[status] == "Converged" {
            assert!(cells[slack].parse::<f64>().unwrap() >= 0.0, "{line}");
        }
    }
}

#[test]
fn reproduce_failures_and_unknown_theorem() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&parlab(&["reproduce", "--theorem", "fermat", "--out", "x"], dir.path())), 3);
    assert_eq!(code(&parlab(&["reproduce", "--out", "x"], dir.path())), 3);
    // a single member cannot show decay of the maximum-principle gap
    let o = parlab(&["reproduce", "--theorem", "ahlfors", "--exhaustion", "1,2,1", "--out", "x"], dir.path());
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("final gap small"));
    assert!(!dir.path().join("x").exists());
}

#[test]
fn thread_cap_is_validated() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_parlab"))
        .args(["capacity", "--gen", "annulus:a=1,b=2,h=0.3", "--out", "t"])
        .env("PARLAB_THREADS", "zero")
        .current_dir(dir.path())
        .output()
        .unwrap();
    assert_eq!(code(&o), 3);
    let o = Command::new(env!("CARGO_BIN_EXE_parlab"))
        .args(["capacity", "--gen", "annulus:a=1,b=2,h=0.3", "--out", "t"])
        .env("PARLAB_THREADS", "1")
        .current_dir(dir.path())
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
}
