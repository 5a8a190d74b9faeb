use std::process::{Command, Output};

use serde_json::Value;

fn webhol(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_webhol")).args(args).env_remove("WEBHOL_CAP_STATES").output().unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

/// Three paths alternating `{12|3}` and `{1|23}`, each held three steps.
fn web_json(cycles: usize) -> String {
    let patterns = [[0, 0, 1], [0, 1, 1]];
    let rows: Vec<Vec<String>> = (0..3)
        .map(|i| (0..cycles * 6).map(|t| format!("s{t}_{}", patterns[(t / 3) % 2][i])).collect())
        .collect();
    serde_json::json!({ "paths": rows }).to_string()
}

#[test]
fn typeset_reports_richness() {
    let out = webhol(&["typeset", "--typeset", "1100,1010,0101,0011"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["rich"], true);
    assert_eq!(v["deficit"], 0);
    assert_eq!(v["version"], env!("CARGO_PKG_VERSION"));
    assert!(v["caps"]["cap_states"].is_u64());
}

#[test]
fn closure_on_z3() {
    let out = webhol(&["closure", "--group", r#"{"kind":"cyclic","m":3}"#, "--typeset", "1100 1010 0101 0011"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!((v["count"].clone(), v["full"].clone()), (27.into(), false.into()));
}

#[test]
fn qbound_on_a5_pairs() {
    let out = webhol(&["qbound", "--group", r#"{"kind":"alternating","k":5}"#, "--typeset", "10 01"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!((v["q_min"].clone(), v["bound"].clone(), v["ok"].clone()), (1.into(), 1.into(), true.into()));
}

#[test]
fn inputs_from_files() {
    let dir = tempfile::tempdir().unwrap();
    let group = dir.path().join("g.json");
    let set = dir.path().join("v.txt");
    std::fs::write(&group, r#"{"kind":"product","factors":[{"kind":"cyclic","m":2},{"kind":"cyclic","m":3}]}"#).unwrap();
    std::fs::write(&set, "110\n011\n").unwrap();
    let out = webhol(&["closure", "--group", group.to_str().unwrap(), "--typeset", set.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    // span_Z{110, 011} has rank 2, so the image in Z6³ has 6² elements.
    assert_eq!(json(&out)["count"], 36);
}

#[test]
fn web_reports_and_suffix_window() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("w.json");
    std::fs::write(&path, web_json(4)).unwrap();
    let p = path.to_str().unwrap();

    let out = webhol(&["web", "--web", p, "--group", "Z2"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["validity"]["valid"], true);
    assert_eq!(v["prediction"]["achievable_order"], 8);
    assert_eq!(v["prediction"]["verdict"], "equal");

    // Four repetitions fall short of the recurrence A5 needs on three paths.
    let out = webhol(&["web", "--web", p, "--group", "A5", "--tau", "7"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json(&out)["prediction"]["achievable_order"], 216_000);
}

#[test]
fn exit_codes() {
    assert_eq!(webhol(&["bogus"]).status.code(), Some(2));
    assert_eq!(webhol(&["typeset", "--typeset", "{bad"]).status.code(), Some(2));
    assert_eq!(webhol(&["closure", "--group", "A5"]).status.code(), Some(2));
    assert_eq!(webhol(&["--help"]).status.code(), Some(0));
    // S3 is not perfect, so it has no commutator decomposition.
    let out = webhol(&["decompose", "--group", "S3", "--typeset", "10 01", "--samples", "3"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn cap_from_environment_and_flag() {
    let args = ["closure", "--group", "Z3", "--typeset", "1100 1010 0101 0011"];
    let out = Command::new(env!("CARGO_BIN_EXE_webhol")).args(args).env("WEBHOL_CAP_STATES", "10").output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("cap"));
    let out = Command::new(env!("CARGO_BIN_EXE_webhol"))
        .args(args)
        .arg("--cap-states")
        .arg("1000")
        .env("WEBHOL_CAP_STATES", "10")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["caps"]["cap_states"], 1000);
}

#[test]
fn repeated_runs_are_byte_identical() {
    let args = ["--seed", "9", "decompose", "--group", "A5", "--typeset", "110 011 100", "--samples", "20"];
    let a = webhol(&args);
    let b = webhol(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let text = webhol(&["--format", "text", "typeset", "--typeset", "110 001"]);
    assert_eq!(text.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&text.stdout).contains("deficit"));
}
