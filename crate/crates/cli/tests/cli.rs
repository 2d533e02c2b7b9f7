use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use matmart_cli::commands::merge;
use matmart_cli::config::ExperimentConfig;
use matmart_cli::table::{Document, Table};
use serde_json::Value;

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("matmart-cli-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn run(args: &[&str], dir: &Path, config: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_matmart"));
    cmd.args(args).arg("--out").arg(dir.join("out"));
    if let Some(text) = config {
        let path = dir.join("in.json");
        std::fs::write(&path, text).unwrap();
        cmd.arg("--config").arg(path);
    }
    cmd.output().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn exit_codes() {
    let dir = scratch("exit");
    let small = r#"{"paths": 500}"#;
    assert_eq!(run(&["verify"], &dir, Some(small)).status.code(), Some(0));
    let o = run(&["verify"], &dir, Some(r#"{"paths": 500, "beta_scale": 1e-4}"#));
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
    let o = run(&["bounds"], &dir, Some(r#"{"pathz": 3}"#));
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("in.json:1:"), "{}", stderr(&o));
    let o = run(&["bounds"], &dir, Some(r#"{"model": {"d": 2, "n": 4, "entry_law": {"law": "pareto_sym", "b": 3, "gamma": 0}}}"#));
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("no p > max(κ,4) with finite ρ"));
    assert_eq!(run(&["bogus"], &dir, None).status.code(), Some(2));
    assert_eq!(run(&["bounds", "--threads", "0"], &dir, None).status.code(), Some(2));
    let o = run(&["report"], &scratch("empty"), None);
    assert_eq!(o.status.code(), Some(2));
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn config_echo_has_defaults_and_reparses() {
    let dir = scratch("echo");
    let o = run(&["simulate", "--seed", "5"], &dir, Some(r#"{"paths": 200, "kappa_mode": {"mode": "estimated"}}"#));
    assert!(o.status.success(), "{}", stderr(&o));
    let echo = std::fs::read_to_string(dir.join("out/config.json")).unwrap();
    let c = ExperimentConfig::parse(&echo, "echo").unwrap();
    assert_eq!(c.seed, 5);
    assert_eq!(c.paths, 200);
    assert!(c.t_grid.is_some() && c.moment_profile.is_some() && c.entropy.eps_grid.is_some());
    // estimated κ is filled in by commands that need it
    let o = run(&["bounds"], &dir, Some(r#"{"kappa_mode": {"mode": "estimated"}}"#));
    assert!(o.status.success(), "{}", stderr(&o));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(dir.join("out/config.json")).unwrap()).unwrap();
    let k = v["kappa_mode"]["value"].as_f64().unwrap();
    assert!((k - 2.0).abs() < 0.3, "κ̂ = {k}");
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn csv_and_json_outputs_agree() {
    let dir = scratch("formats");
    assert!(run(&["bounds"], &dir, None).status.success());
    let csv = std::fs::read_to_string(dir.join("out/bounds_bounds.csv")).unwrap();
    let from_csv = Table::from_csv("bounds", &csv).unwrap();
    assert!(run(&["bounds"], &dir, Some(r#"{"output": {"format": "json"}}"#)).status.success());
    let text = std::fs::read_to_string(dir.join("out/bounds.json")).unwrap();
    let doc: Document = serde_json::from_str(&text).unwrap();
    let again: Document = serde_json::from_str(&serde_json::to_string(&doc).unwrap()).unwrap();
    assert_eq!(again, doc);
    assert_eq!(doc.tables[0], from_csv);
    assert_eq!(doc.tables[0].columns, ["p", "nu", "rho", "beta", "moment_bound"]);
    let meta = &doc.metadata;
    assert_eq!(meta["c_z"].as_f64(), Some(2.0));
    assert_eq!(meta["kappa"].as_f64(), Some(2.0));
    assert!((meta["k_os"].as_f64().unwrap() - 15.7858).abs() < 1e-3);
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn report_merges_every_table() {
    let dir = scratch("report");
    for cmd in ["entropy", "simulate"] {
        assert!(run(&[cmd], &dir, Some(r#"{"paths": 300}"#)).status.success());
    }
    assert!(run(&["report"], &dir, None).status.success());
    let text = std::fs::read_to_string(dir.join("out/report.csv")).unwrap();
    let report = Table::from_csv("report", &text).unwrap();
    let sources: std::collections::BTreeSet<_> = report.rows.iter().map(|r| r[0].as_str().unwrap().to_string()).collect();
    assert_eq!(sources.into_iter().collect::<Vec<_>>(), ["entropy", "simulate"]);
    // one row per non-key cell
    let t = Table { name: "x".into(), columns: vec!["a".into(), "b".into(), "c".into()], rows: vec![vec![1.into(), 2.into(), 3.into()]] };
    assert_eq!(merge(&[("s".into(), t)]).rows.len(), 2);
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn dumped_paths_are_martingale_sums() {
    let dir = scratch("dump");
    let o = run(&["simulate"], &dir, Some(r#"{"paths": 10, "dump_paths": 2, "model": {"d": 1, "n": 4, "entry_law": {"law": "gaussian", "sigma": 2.0}}}"#));
    assert!(o.status.success(), "{}", stderr(&o));
    let text = std::fs::read_to_string(dir.join("out/path_1.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("step,i,j,difference,partial_sum"));
    let mut sum = 0.0;
    for line in lines {
        let f: Vec<f64> = line.split(',').map(|x| x.parse().unwrap()).collect();
        sum += f[3];
        assert!((sum - f[4]).abs() < 1e-12);
    }
    let _ = std::fs::remove_dir_all(&dir);
}
