use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tsam-lopf")).args(args).output().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn solve_writes_dispatch() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("res");
    let o = run(&["solve", fixture("two_bus").to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let json: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(json["status"], "optimal");
    assert!(json["objective"].as_f64().unwrap() > 0.0);
    for f in ["generators_dispatch.csv", "capacities.csv"] {
        assert!(out.join(f).is_file(), "{f}");
    }
}

#[test]
fn csv_format_prints_a_header() {
    let o = run(&["--format", "csv", "aggregate", fixture("two_bus").to_str().unwrap(), "--method", "chronological", "--k", "4"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = String::from_utf8(o.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("representative,weight"));
    let total: u32 = lines.map(|l| l.split(',').nth(1).unwrap().parse::<u32>().unwrap()).sum();
    assert_eq!(total, 24);
}

#[test]
fn coupling_with_too_many_days_is_a_domain_error() {
    let o = run(&["aggregate", fixture("two_bus").to_str().unwrap(), "--method", "coupling_days", "--k", "2"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("k exceeds number of days"), "{}", stderr(&o));
}

#[test]
fn invalid_network_is_a_domain_error() {
    let o = run(&["solve", fixture("bad_ref").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("generators.csv"), "{}", stderr(&o));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(run(&["bench", "/nonexistent/sweep.toml"]).status.code(), Some(2));
    assert_eq!(run(&["solve", "--no-such-flag"]).status.code(), Some(2));
    assert_eq!(run(&[]).status.code(), Some(2));
}

#[test]
fn synth_then_export_mps() {
    let dir = tempfile::tempdir().unwrap();
    let net = dir.path().join("net");
    let o = run(&["synth", "--buses", "2", "--hours", "24", "--seed", "3", "--out", net.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(net.join("buses.csv").is_file());

    let mps = dir.path().join("model.mps");
    let o = run(&["export-mps", net.to_str().unwrap(), "--out", mps.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = std::fs::read_to_string(&mps).unwrap();
    assert!(text.starts_with("NAME"));
    assert!(text.trim_end().ends_with("ENDATA"));
    let names = std::fs::read_to_string(dir.path().join("model.mps.names.csv")).unwrap();
    assert!(names.starts_with("kind,mangled,original\n"));
    assert!(names.contains("column,C0000000,"));
}

#[test]
fn bench_runs_a_small_sweep() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("sweep.toml");
    std::fs::write(
        &config,
        "output_dir = \"out\"\nmethods = [\"chronological\"]\nrepetitions = 1\n[network]\nsynth = { buses = 2, hours = 48, seed = 3 }\n[k]\nchronological = [48, 4]\n",
    )
    .unwrap();
    let o = run(&["--format", "csv", "bench", config.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(String::from_utf8(o.stdout).unwrap().lines().count(), 3);
    for f in ["reports.csv", "aoe_vs_k.csv", "runs/chronological_48.json"] {
        assert!(dir.path().join("out").join(f).is_file(), "{f}");
    }
}
