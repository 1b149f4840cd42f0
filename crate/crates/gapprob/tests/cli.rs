use std::process::Command;

use gapprob::cli::{parse_grid, RunConfig};
use serde_json::Value;

fn run(args: &[&str], env: &[(&str, &str)]) -> (i32, String) {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_gapprob"));
    cmd.args(args).env_remove("GAPPROB_DIGITS").env_remove("GAPPROB_THREADS");
    for (k, v) in env {
        cmd.env(k, v);
    }
    let out = cmd.output().unwrap();
    (out.status.code().unwrap(), String::from_utf8(out.stdout).unwrap())
}

fn json(text: &str) -> Value {
    serde_json::from_str(text).unwrap()
}

fn tmp(name: &str, body: &str) -> std::path::PathBuf {
    let p = std::env::temp_dir().join(format!("gapprob-{}-{name}", std::process::id()));
    std::fs::write(&p, body).unwrap();
    p
}

#[test]
fn prob_envelope() {
    let (code, out) = run(&["prob", "--a", "1", "--k1", "1", "--k2", "1", "--E=-2,2"], &[]);
    assert_eq!(code, 0);
    let v = json(&out);
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["command"], "prob");
    assert_eq!(v["config"]["digits"], 40);
    assert!((v["result"]["probability"].as_f64().unwrap() - 0.5060599125900254).abs() < 1e-14);
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["prob", "--a", "1", "--k1", "1", "--k2", "1", "--E", "2,1"], &[]).0, 2);
    assert_eq!(run(&["prob", "--a", "0", "--k1", "1", "--k2", "1", "--E=-1,1"], &[]).0, 2);
    assert_eq!(run(&["prob", "--a", "1"], &[]).0, 2);
    assert_eq!(run(&["frobnicate"], &[]).0, 2);
    let (code, out) = run(&["check-identity", "--id", "eq14", "--a", "1", "--k1", "1", "--k2", "1", "--E=-1.5,1.5"], &[]);
    assert_eq!(code, 1);
    assert_eq!(json(&out)["passed"], false);
    let (code, _) = run(&["check-identity", "--id", "eq12", "--a", "1", "--k1", "1", "--k2", "1", "--E=-1.5,1.5"], &[]);
    assert_eq!(code, 0);
}

#[test]
fn flags_beat_environment_beat_file() {
    let file = tmp("prec.conf", "# settings\ndigits = 35\nsamples = 7\n");
    let f = file.to_str().unwrap();
    let base = ["--config", f, "prob", "--a", "1", "--k1", "1", "--k2", "1", "--E=-1,1"];
    let digits = |args: &[&str], env: &[(&str, &str)]| json(&run(args, env).1)["config"]["digits"].as_u64().unwrap();
    assert_eq!(digits(&base, &[]), 35);
    assert_eq!(digits(&base, &[("GAPPROB_DIGITS", "45")]), 45);
    let mut flagged = base.to_vec();
    flagged.extend(["--digits", "50"]);
    assert_eq!(digits(&flagged, &[("GAPPROB_DIGITS", "45")]), 50);
    std::fs::remove_file(file).unwrap();
}

#[test]
fn json_config_and_output_file() {
    let file = tmp("run.json", r#"{"a": 0.5, "k1": 1, "k2": 2, "E": "-1,2"}"#);
    let out = std::env::temp_dir().join(format!("gapprob-{}-out.json", std::process::id()));
    let (code, stdout) =
        run(&["--config", file.to_str().unwrap(), "--output", out.to_str().unwrap(), "prob"], &[]);
    assert_eq!(code, 0);
    assert!(stdout.is_empty());
    let v = json(&std::fs::read_to_string(&out).unwrap());
    assert_eq!(v["config"]["k2"], 2);
    assert!(tmp("bad.json", r#"{"colour": 1}"#).to_str().map(|p| run(&["--config", p, "prob"], &[]).0 == 2).unwrap());
    for p in [file, out] {
        std::fs::remove_file(p).unwrap();
    }
}

#[test]
fn config_round_trip() {
    let c = RunConfig {
        command: Some("pearcey-pde".into()),
        t: Some(-0.5),
        e: Some("-1.5,-0.5;0.5,1.5".into()),
        digits: Some(30),
        double: Some(false),
        h_t: Some(0.125),
        chart: Some("orbit".into()),
        n: Some("8,32".into()),
        ..Default::default()
    };
    assert_eq!(RunConfig::parse(&c.to_kv()).unwrap(), c);
    let json = serde_json::to_string(&c).unwrap();
    assert_eq!(RunConfig::parse(&json).unwrap(), c);
    assert!(RunConfig::parse("nonsense").is_err());
}

#[test]
fn grids() {
    assert_eq!(parse_grid("a=0:1:3").unwrap(), ("a".into(), vec![0.0, 0.5, 1.0]));
    assert_eq!(parse_grid("t=0.5,-0.5,0.5").unwrap(), ("t".into(), vec![-0.5, 0.5]));
    assert!(parse_grid("a=1:0").is_err());
    let (code, out) = run(&["--grid", "a=0.5,1,2", "prob", "--k1", "1", "--k2", "1", "--E=-2,2"], &[]);
    assert_eq!(code, 0);
    let lines: Vec<&str> = out.lines().filter(|l| !l.starts_with('#')).collect();
    assert!(out.contains("# command=prob"));
    assert_eq!(lines[0], "a,probability");
    assert_eq!(lines.len(), 4);
    assert!(lines[2].starts_with("1.0,0.50605991259"));
}

#[test]
fn pearcey_prob_and_scaling_csv() {
    let (code, out) = run(&["pearcey-prob", "--t", "0", "--E=-1,1", "--double"], &[]);
    assert_eq!(code, 0);
    assert!((json(&out)["result"]["q"].as_f64().unwrap() + 0.452697561969135).abs() < 1e-12);
    let (code, out) = run(&["--format", "csv", "scaling", "--s", "0", "--G=-1,1", "--n", "2,4"], &[]);
    assert!(code == 0 || code == 1);
    let header = out.lines().find(|l| !l.starts_with('#')).unwrap();
    assert_eq!(header, "abs_diff,n,q,q_z,z");
}
