use serde_json::Value;
use std::path::PathBuf;
use std::process::{Command, Output};

fn gdnn(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gdnn")).args(args).output().expect("binary runs")
}

fn scratch(name: &str, contents: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("gdnn-cli-test-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, contents).unwrap();
    path
}

fn stdout_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("json on stdout")
}

#[test]
fn gen_is_deterministic() {
    let a = gdnn(&["gen", "--n", "6", "--seed", "11"]);
    let b = gdnn(&["gen", "--n", "6", "--seed", "11"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let inst = stdout_json(&a);
    assert_eq!(inst["binary"].as_array().unwrap().len(), 2);
    assert_eq!(gdnn(&["gen", "--n", "2"]).status.code(), Some(2));
}

#[test]
fn membership_exit_codes() {
    let zvp_not_bd = scratch("a.json", "[[2,0,1,1],[0,2,0,0],[1,0,1,0],[1,0,0,1]]");
    let p = zvp_not_bd.to_str().unwrap();
    assert_eq!(gdnn(&["membership", "--cone", "nonneg:1,soc:3", "--matrix", p, "--kind", "zvp"]).status.code(), Some(0));
    let bd = gdnn(&["membership", "--cone", "nonneg:1,soc:3", "--matrix", p, "--kind", "bd"]);
    assert_eq!(bd.status.code(), Some(1));
    assert_eq!(stdout_json(&bd)["evidence"]["kind"], "cut");

    let sep = gdnn(&["separate", "--cone", "r:1,l:3", "--matrix", p]);
    assert_eq!(sep.status.code(), Some(1));
    assert_eq!(stdout_json(&sep)["inside"], false);

    let eye = scratch("eye.json", "[[1,0,0,0],[0,1,0,0],[0,0,1,0],[0,0,0,1]]");
    let sep = gdnn(&["separate", "--cone", "nonneg:4", "--matrix", eye.to_str().unwrap()]);
    assert_eq!(sep.status.code(), Some(0));

    assert_eq!(gdnn(&["membership", "--cone", "cube:3", "--matrix", p, "--kind", "zvp"]).status.code(), Some(2));
    assert_eq!(gdnn(&["membership", "--cone", "soc:3", "--matrix", "/nonexistent.json", "--kind", "zvp"]).status.code(), Some(2));
}

#[test]
fn solve_relaxations() {
    let inst = scratch("inst.json", r#"{"n": 2, "c": [-1.0, -1.0], "binary": [1]}"#);
    let p = inst.to_str().unwrap();
    let exact = stdout_json(&gdnn(&["solve", "--instance", p, "--variant", "misocp"]));
    assert_eq!(exact["status"], "optimal");
    let m = exact["value"].as_f64().unwrap();
    assert!((m + 3.0).abs() < 1e-6, "{m}");
    for v in ["sdp", "zvp", "bd"] {
        let o = gdnn(&["solve", "--instance", p, "--variant", v]);
        assert!(o.status.success(), "{v}: {}", String::from_utf8_lossy(&o.stderr));
        let value = stdout_json(&o)["value"].as_f64().unwrap();
        assert!(value <= m + 1e-5, "{v}: {value} > {m}");
    }
}

#[test]
fn tables_csv_output() {
    let o = gdnn(&["tables", "--n", "5", "--instances", "1", "--variants", "zvp,sdp"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("n,no,misocp_value,misocp_time,nn_value"));
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(row.len(), 12);
    assert_eq!(row[4], "-");
    let summary: Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(summary["failed_cells"], 0);
}

#[test]
fn m44_reports_acceptance() {
    let o = gdnn(&["m44", "--seed", "1", "--rate", "1000"]);
    assert!(matches!(o.status.code(), Some(0 | 1)));
    let v = stdout_json(&o);
    assert_eq!(v["acceptance"]["draws"], 1000);
    assert_eq!(v["accepted"], o.status.code() == Some(0));
}
