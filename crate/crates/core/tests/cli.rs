use std::path::Path;
use std::process::{Command, Output};

fn qmcq(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qmcq")).current_dir(dir).args(args).output().unwrap()
}

#[test]
fn gen_writes_header_and_points() {
    let dir = tempfile::tempdir().unwrap();
    let out = qmcq(dir.path(), &["gen", "fibonacci", "--n", "10", "-o", "F.pts"]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(dir.path().join("F.pts")).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# qmcpoints v1 dim=2 count=89"));
    assert_eq!(lines.count(), 89);
}

#[test]
fn randomized_command_without_seed_is_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = qmcq(dir.path(), &["gen", "random", "--m", "5", "--d", "2"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("seed"));
}

#[test]
fn malformed_config_exits_2_without_report() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.cfg"), "experiment = rate\nfamily fibonacci\n").unwrap();
    let out = qmcq(dir.path(), &["experiment", "bad.cfg", "-o", "bad.jsonl"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));
    assert!(!dir.path().join("bad.jsonl").exists());
}

#[test]
fn invalid_parameter_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let out = qmcq(dir.path(), &["gen", "grid", "--k", "0", "--d", "2"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn fibonacci_rate_experiment_csv() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("rate.cfg"), "experiment = rate\nfamily = fibonacci\nr = 1\nsizes = 8..14\n").unwrap();
    let out = qmcq(dir.path(), &["experiment", "rate.cfg", "-o", "rate.jsonl", "--csv", "rate.csv"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("rate.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "family,size,metric,value,slope");
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 7);
    let slope: f64 = rows.last().unwrap()[4].parse().unwrap();
    assert!((slope + 1.0).abs() < 0.15, "slope {slope}");
    let report = std::fs::read_to_string(dir.path().join("rate.jsonl")).unwrap();
    for line in report.lines() {
        let row: serde_json::Value = serde_json::from_str(line).unwrap();
        for key in ["metric", "params", "value", "exact", "witness", "budget", "seed"] {
            assert!(row.get(key).is_some(), "missing {key} in {line}");
        }
    }
}

#[test]
fn dispersion_metric_prints_value_and_scaled() {
    let dir = tempfile::tempdir().unwrap();
    assert!(qmcq(dir.path(), &["gen", "fibonacci", "--n", "10", "-o", "F.pts"]).status.success());
    let out = qmcq(dir.path(), &["metric", "dispersion", "-i", "F.pts"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let fields: Vec<f64> = text.split_whitespace().map(|t| t.parse().unwrap()).collect();
    assert_eq!(fields.len(), 2);
    assert!((fields[1] - fields[0] * 89.0).abs() < 1e-12);
}

#[test]
fn seeded_reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["gen", "random", "--m", "64", "--d", "2", "--seed", "11", "-o", "R.pts"];
    assert!(qmcq(dir.path(), &args).status.success());
    let first = std::fs::read(dir.path().join("R.pts")).unwrap();
    let lq = ["metric", "lq", "-i", "R.pts", "--q", "3", "--samples", "20000", "--seed", "4"];
    let a = qmcq(dir.path(), &lq);
    assert!(qmcq(dir.path(), &args).status.success());
    assert_eq!(first, std::fs::read(dir.path().join("R.pts")).unwrap());
    let b = qmcq(dir.path(), &[&lq[..], &["--threads", "3"]].concat());
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}
