//! End-to-end checks of the command-line tool.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use mimo_dca::output::{parse_frames_csv, parse_queues_csv, FRAMES_HEADER};

const SMALL: &str = r#"
[system]
antennas = 4
horizon_slots = 2000
seed = 3

[policy]
kind = "qqs"

[[users]]
count = 2
coherence = 40

[[users]]
count = 1
coherence = 5
"#;

fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mimo-dca"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("run.toml");
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_owned()
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn simulate_writes_all_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let out_dir = dir.path().join("out");
    let out = cli(&["simulate", "--config", &cfg, "--out", out_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));

    let frames = fs::read_to_string(out_dir.join("frames.csv")).unwrap();
    assert_eq!(frames.lines().next().unwrap(), FRAMES_HEADER);
    assert!(!parse_frames_csv(&frames).unwrap().is_empty());

    let queues = fs::read_to_string(out_dir.join("queues.csv")).unwrap();
    assert_eq!(queues.lines().next().unwrap(), "slot,q_1,q_2,q_3,hol_1,hol_2,hol_3");
    let trace = parse_queues_csv(&queues).unwrap();
    assert!(trace.len() >= 2000);

    let summary = fs::read_to_string(out_dir.join("summary.txt")).unwrap();
    assert!(summary.starts_with("policy=qqs\n"));
    assert!(summary.lines().any(|l| l.starts_with("sum_rate=")));
    assert_eq!(stdout(&out), summary);
}

#[test]
fn same_seed_same_bytes_and_seed_flag_matters() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let read = |sub: &str, seed: &str| {
        let d = dir.path().join(sub);
        let out = cli(&[
            "simulate",
            "--config",
            &cfg,
            "--seed",
            seed,
            "--out",
            d.to_str().unwrap(),
        ]);
        assert!(out.status.success());
        (
            fs::read(d.join("frames.csv")).unwrap(),
            fs::read(d.join("queues.csv")).unwrap(),
        )
    };
    let a = read("a", "11");
    assert_eq!(a, read("b", "11"));
    assert_ne!(a, read("c", "12"));
}

#[test]
fn set_override_changes_policy() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let d = dir.path().join("o");
    let out = cli(&[
        "simulate",
        "--config",
        &cfg,
        "--out",
        d.to_str().unwrap(),
        "--set",
        "policy.kind=tdma",
    ]);
    assert!(out.status.success());
    assert!(stdout(&out).starts_with("policy=tdma\n"));
}

#[test]
fn capacity_prints_admitted_rate() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let d = dir.path().join("cap");
    let out = cli(&[
        "capacity",
        "--config",
        &cfg,
        "--out",
        d.to_str().unwrap(),
        "--threshold",
        "300",
        "--grant",
        "0",
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).lines().any(|l| l == "A_avg=0"), "{}", stdout(&out));

    let out = cli(&[
        "capacity",
        "--config",
        &cfg,
        "--out",
        d.to_str().unwrap(),
        "--threshold",
        "300",
    ]);
    let line = stdout(&out)
        .lines()
        .find(|l| l.starts_with("A_avg="))
        .unwrap()
        .to_owned();
    let rate: f64 = line["A_avg=".len()..].parse().unwrap();
    assert!(rate > 1.0, "{rate}");
}

#[test]
fn analytic_subcommands() {
    let out = cli(&["analytic", "timeshare", "--mode", "0.8:50x39", "--mode", "0.2:5"]);
    assert_eq!(out.status.code(), Some(0));
    let rate: f64 = stdout(&out).trim().parse().unwrap();
    assert!((rate - 7.064).abs() < 1e-9);

    let out = cli(&["analytic", "dof", "--tc", "20", "--ns", "10", "--unbounded-m"]);
    assert_eq!(stdout(&out).trim(), "5");
    let out = cli(&["analytic", "dof", "--tc", "20", "--ns", "10", "--antennas", "4"]);
    assert_eq!(stdout(&out).trim(), "2");
}

#[test]
fn sweep_writes_sorted_rows() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let d = dir.path().join("sw");
    let out = cli(&[
        "sweep",
        "--config",
        &cfg,
        "--out",
        d.to_str().unwrap(),
        "--axis",
        "snr_db",
        "--values",
        "20,0,10",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(d.join("sweep.csv")).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("value,seed,sum_rate"));
    let values: Vec<&str> = lines.map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(values, ["0", "10", "20"]);
}

#[test]
fn configuration_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();

    // Exhaustive search over 20 users is refused up front.
    let big = SMALL
        .replace("count = 2\ncoherence = 40", "count = 19\ncoherence = 40")
        .replace("\"qqs\"", "\"gap\"");
    let cfg = write_config(dir.path(), &big);
    let out = cli(&["simulate", "--config", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("subset search limit"));

    let cfg = write_config(dir.path(), &SMALL.replace("[policy]", "[policy]\ntheta = 2"));
    assert_eq!(cli(&["simulate", "--config", &cfg]).status.code(), Some(1));

    let cfg = write_config(dir.path(), &format!("{SMALL}\n[bogus]\nx = 1\n"));
    assert_eq!(cli(&["simulate", "--config", &cfg]).status.code(), Some(1));

    assert_eq!(
        cli(&["simulate", "--config", "/nonexistent/run.toml"]).status.code(),
        Some(1)
    );
    assert_eq!(cli(&["no-such-command"]).status.code(), Some(1));
}

#[test]
fn unwritable_output_is_a_runtime_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let blocker = dir.path().join("file");
    fs::write(&blocker, "").unwrap();
    let out = cli(&[
        "simulate",
        "--config",
        &cfg,
        "--out",
        blocker.join("sub").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
}
