use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_frobthresh")).args(args).output().unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn fpt_of_cubic() {
    let out = run(&["fpt", "--p", "2", "--vars", "x,y", "--ideal", "x*y*(x+y)"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["fpt"], "1/2");
    assert_eq!(v["uncertified"], false);
    assert_eq!(v["target"], serde_json::json!(["x", "y"]));
}

#[test]
fn digits_match_truncations() {
    let v = json(&run(&["digits", "--t", "5/6", "--q", "2", "--n", "0..4"]));
    assert_eq!(v["digits"], serde_json::json!(["0", "1", "1", "0", "1"]));
    assert_eq!(v["truncations"], serde_json::json!(["0/1", "1/2", "3/4", "3/4", "13/16"]));
}

#[test]
fn acc_probe_powers_of_m() {
    let out = run(&["acc-probe", "--family", "powers((x,y),5)", "--p", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["report"]["thresholds"], serde_json::json!(["2/1", "1/1", "2/3", "1/2", "2/5"]));
}

#[test]
fn reports_are_byte_identical() {
    let args = ["test-ideal", "--p", "7", "--ideal", "x^2+y^3", "--t", "5/6"];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(a.stdout, b.stdout);
    let v = json(&a);
    assert_eq!(v["tau"], serde_json::json!(["x", "y"]));
    assert_eq!(v["certificate"]["mode"], "fixed-operator");
}

#[test]
fn input_errors_name_the_field() {
    let out = run(&["fpt", "--p", "6", "--ideal", "x"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json(&out)["error"]["field"], "p");
    let out = run(&["test-ideal", "--p", "3", "--ideal", "x", "--t", "-1/2"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json(&out)["error"]["field"], "t");
    let out = run(&["digits", "--t", "1/3", "--q", "2", "--n", "4..1"]);
    assert_eq!(json(&out)["error"]["field"], "n");
    let out = run(&["fpt", "--p", "3"]);
    assert_eq!(json(&out)["error"]["field"], "ideal");
}

#[test]
fn job_file_with_override_and_output() {
    let dir = tempfile::tempdir().unwrap();
    let job = dir.path().join("job.txt");
    let out_path = dir.path().join("report.json");
    std::fs::write(&job, "# cusp\np = 5\nvars = x,y\nideal = x^2 + y^3\n").unwrap();
    let out = run(&["fpt", "--job", job.to_str().unwrap(), "--p", "7", "--out", out_path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    assert_eq!(v["ring"], "F_7[x,y]");
    assert_eq!(v["fpt"], "5/6");
}

#[test]
fn b_to_a_report() {
    let out = run(&["b-to-a", "--p", "5", "--ideal", "x", "--t", "1/4", "--n", "0..4"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["report"]["verdict"], "holds-on-range");
    assert_eq!(v["report"]["hypotheses"]["all_hold"], true);
}
