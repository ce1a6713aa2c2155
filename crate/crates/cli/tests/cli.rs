use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn zeq(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_zeq"))
        .current_dir(dir)
        .args(args)
        .env_remove("ZEQ_MAX_AMBIENT")
        .output()
        .expect("binary runs")
}

fn json(dir: &Path, name: &str) -> Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join(name)).unwrap()).unwrap()
}

#[test]
fn tiles_report_has_certified_a() {
    let dir = tempfile::tempdir().unwrap();
    assert!(zeq(dir.path(), &["upb-build", "tiles", "-o", "u.json"])
        .status
        .success());
    let out = zeq(dir.path(), &["subspace-check", "--kmax", "1", "u.json", "-o", "r.json"]);
    assert_eq!(out.status.code(), Some(1));
    let r = json(dir.path(), "r.json");
    assert_eq!(r["conditions"]["a"]["verdict"], "certified");
    assert_eq!(r["pass"], false);
    assert!(String::from_utf8_lossy(&out.stdout).contains("(a)"));
}

#[test]
fn inadmissible_index_is_invalid_input() {
    let dir = tempfile::tempdir().unwrap();
    let out = zeq(
        dir.path(),
        &[
            "sample", "--da", "4", "--d", "6", "--r", "3", "--k1", "1", "--k2", "2", "--seed", "7", "-o", "s.json",
        ],
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("inadmissible"));
    assert!(!dir.path().join("s.json").exists());
}

#[test]
fn sampled_subspace_json() {
    let dir = tempfile::tempdir().unwrap();
    let out = zeq(
        dir.path(),
        &["sample", "--da", "4", "--d", "6", "--seed", "7", "-o", "s.json"],
    );
    assert!(out.status.success());
    let s = json(dir.path(), "s.json");
    assert_eq!(s["provenance"], "sampled");
    assert_eq!(s["index"]["d"], 6);
    assert_eq!(s["basis"]["cols"], 6);
}

#[test]
fn dimension_guard() {
    let dir = tempfile::tempdir().unwrap();
    let out = zeq(dir.path(), &["search", "--da", "48", "--d", "1200"]);
    assert_eq!(out.status.code(), Some(3));
    let out = Command::new(env!("CARGO_BIN_EXE_zeq"))
        .current_dir(dir.path())
        .args(["sample", "--da", "4", "--d", "6"])
        .env("ZEQ_MAX_AMBIENT", "16")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
    let out = Command::new(env!("CARGO_BIN_EXE_zeq"))
        .args(["sample", "--da", "4", "--d", "6"])
        .env("ZEQ_MAX_AMBIENT", "lots")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn malformed_json_reports_location() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.json"), "{\"d_a\": 2,\n  \"d_b\": }").unwrap();
    let out = zeq(dir.path(), &["subspace-check", "bad.json"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 2"), "{err}");
    let out = zeq(dir.path(), &["subspace-check", "missing.json"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn invalid_channel_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let not_tp = r#"{"d_in":1,"d_out":1,"kraus":[{"rows":1,"cols":1,"data":[[2.0,0.0]]}]}"#;
    std::fs::write(dir.path().join("c.json"), not_tp).unwrap();
    let out = zeq(dir.path(), &["channel-recover", "c.json"]);
    assert_eq!(out.status.code(), Some(2));
    // A CP map is fine for the Choi matrix.
    let out = zeq(dir.path(), &["channel-choi", "c.json", "-q"]);
    assert!(out.status.success());
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["matrix"]["data"][0][0], 4.0);
}

#[test]
fn identity_channel_transmits_a_qubit() {
    let dir = tempfile::tempdir().unwrap();
    let id = r#"{"d_in":2,"d_out":2,"kraus":[{"rows":2,"cols":2,"data":[[1,0],[0,0],[0,0],[1,0]]}]}"#;
    std::fs::write(dir.path().join("id.json"), id).unwrap();
    let out = zeq(dir.path(), &["q0-witness", "id.json", "-o", "w.json"]);
    assert!(out.status.success());
    let w = json(dir.path(), "w.json");
    assert_eq!(w["witness"]["holds"], true);
    assert!(w["pauli"]["p_i"].as_f64().unwrap() > 1.0 - 1e-10);
}

#[test]
fn tampered_report_fails_verification() {
    let dir = tempfile::tempdir().unwrap();
    assert!(zeq(
        dir.path(),
        &["sample", "--da", "4", "--d", "6", "--positivity-seed", "-o", "s.json"]
    )
    .status
    .success());
    zeq(dir.path(), &["subspace-check", "s.json", "-o", "r.json"]);
    assert!(zeq(dir.path(), &["verify-report", "r.json"]).status.success());
    let mut r = json(dir.path(), "r.json");
    r["conditions"]["g"]["residual"] = Value::from(0.5);
    std::fs::write(dir.path().join("t.json"), r.to_string()).unwrap();
    let out = zeq(dir.path(), &["verify-report", "t.json"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("MISMATCH"));
}

#[test]
fn search_stream_is_ordered_ndjson() {
    let dir = tempfile::tempdir().unwrap();
    let out = zeq(
        dir.path(),
        &[
            "search",
            "--da",
            "4",
            "--d",
            "6",
            "--trials",
            "10",
            "--positivity-seed",
            "--restarts",
            "10",
            "-q",
        ],
    );
    assert!(out.status.success());
    let lines: Vec<Value> = String::from_utf8(out.stdout)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(lines.len(), 10);
    for (t, rec) in lines.iter().enumerate() {
        assert_eq!(rec["trial"], t);
        let c = &rec["report"]["conditions"];
        for k in ["c", "d", "g"] {
            assert!(c[k]["residual"].as_f64().unwrap() <= 1e-10);
        }
        for k in ["e", "f"] {
            assert_eq!(c[k]["witness"]["kind"], "positive_element");
        }
    }
}

#[test]
fn product_search_on_upb_span() {
    let dir = tempfile::tempdir().unwrap();
    assert!(zeq(dir.path(), &["upb-build", "tiles", "--span", "-o", "t.json"])
        .status
        .success());
    let out = zeq(
        dir.path(),
        &[
            "subspace-product-state",
            "t.json",
            "--mode",
            "orthogonal-to",
            "--restarts",
            "50",
            "-o",
            "p.json",
        ],
    );
    assert!(out.status.success());
    assert_eq!(json(dir.path(), "p.json")["found"], false);
}
