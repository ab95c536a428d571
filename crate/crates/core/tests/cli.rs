//! End-to-end checks of the gradedval binary: exit codes, report shape,
//! and byte-deterministic output.

use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_gradedval"))
}

#[test]
fn eval_normalizes() {
    let out = bin()
        .args(["--no-timestamp", "eval", "(1+2*i)*u^(-1) + 3"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("\"normalized\""));
    assert!(text.contains("(1 + 2*i)*u^(-1)"));
}

#[test]
fn eval_parse_error_exits_2() {
    let out = bin().args(["eval", "u^("]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("column 4"), "stderr: {err}");
}

#[test]
fn unknown_suite_exits_2() {
    let out = bin().args(["suite", "bogus"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8(out.stderr).unwrap().contains("unknown suite"));
}

#[test]
fn artin_suite_passes_three_groups() {
    let out = bin()
        .args(["--no-timestamp", "suite", "artin"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["result"], "PASS");
    assert_eq!(v["checks"].as_array().unwrap().len(), 3);
}

#[test]
fn neighborhood_suite_prints_f() {
    let out = bin()
        .args(["--no-timestamp", "suite", "neighborhood"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["result"], "PASS");
    let five = &v["checks"][0];
    assert!(five["actual"]
        .as_str()
        .unwrap()
        .contains("u^(1), u^(-1)"));
}

#[test]
fn reports_are_byte_deterministic() {
    let run = || {
        bin()
            .args(["--no-timestamp", "suite", "torsor"])
            .output()
            .unwrap()
            .stdout
    };
    assert_eq!(run(), run());
}

#[test]
fn timestamp_present_by_default() {
    let out = bin().args(["suite", "efn"]).output().unwrap();
    assert!(String::from_utf8(out.stdout).unwrap().contains("\"timestamp\""));
}

#[test]
fn config_entities_resolve() {
    let dir = std::env::temp_dir().join("gradedval-cli-test");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("ws.toml");
    std::fs::write(
        &path,
        r#"
[fields.H]
base = "rationals"

[valuations.V]
field = "H"
v1 = { kind = "padic", p = 5 }
psi = [["1/2"]]
"#,
    )
    .unwrap();
    let out = bin()
        .args(["--no-timestamp", "--config"])
        .arg(&path)
        .args(["eval", "10*u^(1)", "--valuation", "V"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["gvalue"][0], "3/2");
    assert_eq!(v["ring_member"], true);
}

#[test]
fn bad_config_exits_2() {
    let dir = std::env::temp_dir().join("gradedval-cli-test");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("bad.toml");
    std::fs::write(&path, "[valuations.V]\nfield = \"nosuch\"\nv1 = { kind = \"trivial\" }\npsi = [[0]]\n").unwrap();
    let out = bin()
        .args(["--config"])
        .arg(&path)
        .args(["suite", "efn"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn out_flag_writes_file() {
    let dir = std::env::temp_dir().join("gradedval-cli-test");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("report.json");
    let out = bin()
        .args(["--no-timestamp", "--out"])
        .arg(&path)
        .args(["suite", "pairing"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["result"], "PASS");
}
