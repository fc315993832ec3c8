//! Black-box tests of the binary: config validation, gates, exit codes.

use std::process::Command;

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_speclab")
}

#[test]
fn unknown_config_key_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(
        &cfg,
        "[potential]\nkind = \"zero\"\nlambdaa = 0.5\n\n[k]\nvalues = [[1.0, 0.0]]\n",
    )
    .unwrap();
    let out = Command::new(bin())
        .args(["solve", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path().join("out"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("lambdaa") || err.contains("unknown field"), "stderr: {err}");
}

#[test]
fn sampling_gate_surfaces_as_diagnostic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("coarse.toml");
    std::fs::write(
        &cfg,
        "[potential]\nkind = \"zero\"\n\n[grid]\nstep = 0.2\n\n[k]\nvalues = [[10.0, 0.0]]\n",
    )
    .unwrap();
    let out = Command::new(bin())
        .args(["solve", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path().join("out"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("grid too coarse"), "stderr: {err}");
}

#[test]
fn verify_free_case_passes_and_writes_verdicts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("free.toml");
    std::fs::write(
        &cfg,
        r#"
[potential]
kind = "power-law"
lambda = 0.1
gamma = 0.8
T = 16.0

[grid]
step = 0.005

[verify]
k = [1.0, 1.0]
"#,
    )
    .unwrap();
    let out_dir = dir.path().join("out");
    let out = Command::new(bin())
        .args(["verify", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out_dir)
        .output()
        .unwrap();
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let verdicts = std::fs::read_to_string(out_dir.join("verdicts.jsonl")).unwrap();
    let lines: Vec<&str> = verdicts.lines().collect();
    assert_eq!(lines.len(), 5, "expected five checks, got: {verdicts}");
    for line in lines {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        assert_eq!(v["verdict"], "pass", "check {} did not pass", v["check"]);
    }
    // manifest lists the outputs and echoes resolved defaults
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("manifest.json")).unwrap())
            .unwrap();
    assert_eq!(manifest["command"], "verify");
    assert_eq!(manifest["outputs"][0], "verdicts.jsonl");
    assert_eq!(manifest["config"]["potential"]["gamma"], 0.8);
}

#[test]
fn single_check_selector_runs_one_check() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("free.toml");
    std::fs::write(
        &cfg,
        "[potential]\nkind = \"zero\"\n\n[grid]\nstep = 0.005\n\n[verify]\nk = [1.0, 0.1]\n",
    )
    .unwrap();
    let out_dir = dir.path().join("out");
    let out = Command::new(bin())
        .args(["verify", "energy-identity", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out_dir)
        .output()
        .unwrap();
    assert!(out.status.success());
    let verdicts = std::fs::read_to_string(out_dir.join("verdicts.jsonl")).unwrap();
    assert_eq!(verdicts.lines().count(), 1);
    assert!(verdicts.contains("energy-identity"));
}

#[test]
fn entropy_flags_unresolvable_zero() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("zero.toml");
    // interval centred on 2π with an odd node count: the middle node hits
    // the exact zero of the free density
    let two_pi = 2.0 * std::f64::consts::PI;
    std::fs::write(
        &cfg,
        format!(
            "[potential]\nkind = \"zero\"\n\n[grid]\nstep = 0.001\n\n[entropy]\ninterval = [{}, {}]\nnodes = 5\n",
            two_pi - 0.25,
            two_pi + 0.25
        ),
    )
    .unwrap();
    let out_dir = dir.path().join("out");
    let out = Command::new(bin())
        .args(["entropy", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out_dir)
        .output()
        .unwrap();
    assert!(out.status.success());
    let rec: serde_json::Value = serde_json::from_str(
        std::fs::read_to_string(out_dir.join("entropy.jsonl")).unwrap().lines().next().unwrap(),
    )
    .unwrap();
    assert_eq!(rec["value"], "-inf");
    assert_eq!(rec["offending_nodes"].as_array().unwrap().len(), 1);
}
