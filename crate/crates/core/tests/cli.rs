use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use sha2::{Digest, Sha256};

fn dispersio(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dispersio")).args(args).output().expect("binary runs")
}

fn json_file(p: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

fn json_stdout(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap()
}

#[test]
fn help_lists_solve_flags() {
    let o = dispersio(&["solve", "--help"]);
    assert!(o.status.success());
    let text = String::from_utf8_lossy(&o.stdout);
    for flag in ["--config", "--tmax", "--dt", "--eps", "--scheme", "--mode", "--trace"] {
        assert!(text.contains(flag), "missing {flag}");
    }
    let o = dispersio(&["--help"]);
    let text = String::from_utf8_lossy(&o.stdout);
    for sub in ["analyze", "stability-scan", "solve", "paracheck"] {
        assert!(text.contains(sub));
    }
}

#[test]
fn analyze_model_system_passes_and_embeds_spec_hash() {
    let o = dispersio(&["analyze", "--config", "example_1_1"]);
    assert_eq!(o.status.code(), Some(0));
    let r = json_stdout(&o);
    assert_eq!(r["conclusion"], "Theorem 2.5 hypotheses satisfied");
    let want = hex::encode(Sha256::digest(dispersio::bundled::EXAMPLE_1_1.as_bytes()));
    assert_eq!(r["run"]["spec"]["sha256"], want.as_str());
    assert_eq!(r["run"]["flags"]["analyze"]["samples"], 64);
    // λ = ∓ξ² on the unit sphere
    let ev = &r["eigenstructure"][0]["eigenvalues"];
    assert_eq!(ev[0].as_f64().unwrap(), -1.0);
    assert_eq!(ev[1].as_f64().unwrap(), 1.0);
    assert!(!r["conjugator_samples"].as_array().unwrap().is_empty());
}

#[test]
fn analyze_flags_coincident_eigenvalues_with_nonsymmetric_coupling() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("degenerate.json");
    std::fs::write(
        &spec,
        r#"{ "dimension": 1, "components": 2,
             "A": [[ [[[1,0],[0,0]],[[0,0],[1,0]]] ]],
             "B": [ { "const": [[[0,0],[1,0]],[[-1,0],[0,0]]] } ],
             "period": 6.283185307179586, "grid_points": 32, "sobolev_s": 2 }"#,
    )
    .unwrap();
    let out = dir.path().join("r.json");
    let o = dispersio(&["analyze", "--config", spec.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let r = json_file(&out);
    assert!(r["conclusion"].as_str().unwrap().starts_with("FAIL"));
    assert!(r["coupling_check"]["witness"].is_object());
}

#[test]
fn analyze_without_coupling_trivially_passes() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("free.json");
    std::fs::write(
        &spec,
        r#"{ "dimension": 1, "components": 2,
             "A": [[ [[[1,0],[0,0]],[[0,0],[2,0]]] ]],
             "B": [ { "const": [[[0,0],[0,0]],[[0,0],[0,0]]] } ],
             "period": 6.283185307179586, "grid_points": 32, "sobolev_s": 2 }"#,
    )
    .unwrap();
    let o = dispersio(&["analyze", "--config", spec.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn malformed_spec_reports_pointer_and_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("bad.json");
    std::fs::write(&spec, r#"{ "dimension": 1, "components": 2, "A": 3 }"#).unwrap();
    let o = dispersio(&["analyze", "--config", spec.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("`/A`"));
    let o = dispersio(&["analyze", "--config", "no_such_spec"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn stability_scan_writes_csv_and_verdict() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("scan.csv");
    let verdict = dir.path().join("verdict.json");
    let o = dispersio(&[
        "stability-scan",
        "--config",
        "example_1_1",
        "--csv",
        csv.to_str().unwrap(),
        "--verdict",
        verdict.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("xi_1,t,op_norm,max_re_spec,cond_eigvec\n"));
    assert!(!text.contains("\r\n"));
    let v = json_file(&verdict);
    assert_eq!(v["verdicts"][0]["verdict"], "uniformly-bounded-in-xi");

    let o = dispersio(&["stability-scan", "--config", "example_1_1_firstorder_only", "--csv", csv.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn stability_scan_detects_ode_pair() {
    let o = dispersio(&["stability-scan", "--config", "turing_pair"]);
    assert_eq!(o.status.code(), Some(0));
    let r = json_stdout(&o);
    assert_eq!(r["ode_pair"]["turing"], true);
    assert!(r["ode_pair"]["max_re_sum"].as_f64().unwrap() > 0.0);
}

#[test]
fn solve_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("trace.csv");
    let report = dir.path().join("report.json");
    let args = [
        "solve",
        "--config",
        "example_1_1",
        "--tmax",
        "0.5",
        "--dt",
        "0.01",
        "--trace",
        trace.to_str().unwrap(),
        "--report",
        report.to_str().unwrap(),
    ];
    assert_eq!(dispersio(&args).status.code(), Some(0));
    let (t1, r1) = (std::fs::read(&trace).unwrap(), std::fs::read(&report).unwrap());
    let o = Command::new(env!("CARGO_BIN_EXE_dispersio"))
        .args(args)
        .env("DISPERSIO_THREADS", "1")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(t1, std::fs::read(&trace).unwrap());
    assert_eq!(r1, std::fs::read(&report).unwrap());
    let text = String::from_utf8(t1).unwrap();
    assert!(text.starts_with("t,l2,hs,sigma_energy,k0,k1\n"));
    assert_eq!(text.lines().count(), 52);
}

#[test]
fn solve_picard_on_quasilinear_demo() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("trace.csv");
    let report = dir.path().join("report.json");
    let o = dispersio(&[
        "solve",
        "--config",
        "quasilinear_demo",
        "--mode",
        "picard",
        "--grid",
        "64",
        "--tmax",
        "0.2",
        "--dt",
        "0.01",
        "--sample-every",
        "5",
        "--trace",
        trace.to_str().unwrap(),
        "--report",
        report.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let r = json_file(&report);
    assert_eq!(r["status"], "converged");
    assert!(r["contraction"].as_f64().unwrap() <= 0.5);
    let text = std::fs::read_to_string(&trace).unwrap();
    assert_eq!(text.lines().count(), 1 + 5);
}

#[test]
fn solve_flags_ill_posed_system() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("trace.csv");
    let o = dispersio(&[
        "solve",
        "--config",
        "imaginary_diagonal",
        "--tmax",
        "10",
        "--dt",
        "1e-3",
        "--sample-every",
        "100",
        "--trace",
        trace.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("ILL_POSED_SUSPECTED"));
    assert!(std::fs::read_to_string(&trace).unwrap().lines().count() > 2);
}

#[test]
fn solve_rejects_cfl_violation() {
    let o = dispersio(&["solve", "--config", "imaginary_diagonal", "--dt", "0.5"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("CFL"));
}

#[test]
fn paracheck_report_is_thread_independent() {
    let args = ["paracheck", "--grid", "256", "--trials", "10", "--seed", "3"];
    let a = dispersio(&args);
    let b = Command::new(env!("CARGO_BIN_EXE_dispersio"))
        .args(args)
        .env("DISPERSIO_THREADS", "1")
        .output()
        .unwrap();
    assert_eq!(a.stdout, b.stdout);
    let r = json_stdout(&a);
    assert_eq!(r["report"]["k_max"], 7);
    assert_eq!(r["run"]["flags"]["paracheck"]["trials"], 10);
    assert_eq!(a.status.code(), Some(if r["report"]["pass"] == true { 0 } else { 2 }));
}
