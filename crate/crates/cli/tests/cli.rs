use std::path::Path;
use std::process::{Command, Output};

fn qlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qlab"))
        .args(args)
        .env_remove("QLAB_SEED")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn np_scan_csv() {
    let out = qlab(&["np-scan", "--rule", "born", "--trials", "10", "--seed", "5"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "experiment,rule,dim,trial,metric,value,seed,witness");
    assert_eq!(lines.len(), 11);
    for line in &lines[1..] {
        let value: f64 = line.split(',').nth(5).unwrap().parse().unwrap();
        assert!(value < 1e-12);
    }
}

#[test]
fn violations_are_findings_not_failures() {
    let out = qlab(&["np-scan", "--rule", "power:1", "--trials", "20", "--format", "json"]);
    assert!(out.status.success());
    assert!(stdout(&out).trim_start().starts_with('['));
}

#[test]
fn seed_from_environment_and_flag_override() {
    let run = |env: Option<&str>, args: &[&str]| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_qlab"));
        cmd.args(["phase", "--trials", "3"]).args(args).env_remove("QLAB_SEED");
        if let Some(seed) = env {
            cmd.env("QLAB_SEED", seed);
        }
        String::from_utf8(cmd.output().unwrap().stdout).unwrap()
    };
    assert_eq!(run(Some("77"), &[]), run(None, &["--seed", "77"]));
    assert_eq!(run(Some("1"), &["--seed", "77"]), run(None, &["--seed", "77"]));
    assert_ne!(run(None, &["--seed", "1"]), run(None, &["--seed", "77"]));
    assert!(run(None, &[]).contains("master=0"));
}

#[test]
fn workers_do_not_change_bytes() {
    let base = [
        "signalling",
        "--rule",
        "power:3",
        "--dim",
        "3,4",
        "--trials",
        "40",
        "--format",
        "json",
    ];
    let one = qlab(&[&base[..], &["--workers", "1"]].concat());
    let many = qlab(&[&base[..], &["--workers", "8"]].concat());
    assert_eq!(one.stdout, many.stdout);
}

#[test]
fn exact_finegrain_renders_fraction() {
    let out = qlab(&["finegrain", "7", "16", "--exact"]);
    assert!(out.status.success());
    assert!(stdout(&out).contains(",rational_born,7/16,"));
}

#[test]
fn sandwich_target_forms() {
    for target in ["0.7071067811865476", "1/3"] {
        let out = qlab(&["sandwich", target, "--epsilon", "1e-6"]);
        assert!(out.status.success(), "{target}");
        assert!(stdout(&out).contains("sandwich_width"));
    }
}

#[test]
fn sweep_reports_cells() {
    let out = qlab(&["sweep", "--alpha", "1,2,3", "--dim", "3", "--trials", "30"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("sweep:np-scan,born,3,30,np_violation:max,"));
    assert!(text.contains("power:2,3,30,np_violation:mean"));
}

#[test]
fn configuration_errors_exit_one() {
    for args in [
        &["np-scan", "--format", "xml"][..],
        &["np-scan", "--rule", "power:abc"],
        &["np-scan", "--trials", "0"],
        &["sweep", "--dim", "3"],
        &["sandwich", "banana"],
        &["np-scan", "--no-such-flag"],
    ] {
        assert_eq!(qlab(args).status.code(), Some(1), "{args:?}");
    }
}

#[test]
fn io_errors_exit_two() {
    let out = qlab(&["np-scan", "--state", "/nonexistent/state.json"]);
    assert_eq!(out.status.code(), Some(2));
    let out = qlab(&["np-scan", "--trials", "1", "--out", "/nonexistent/dir/report.csv"]);
    assert_eq!(out.status.code(), Some(2));
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_owned()
}

#[test]
fn state_files() {
    let dir = tempfile::tempdir().unwrap();
    let good = write(
        dir.path(),
        "triple.json",
        r#"{"dim": 3, "amplitudes": [[0.7071067811865476, 0], [0.5477225575051661, 0], [0.4472135954999579, 0]]}"#,
    );
    let out = qlab(&["np-scan", "--rule", "power:1", "--trials", "1", "--state", &good]);
    assert!(out.status.success());
    let value: f64 = stdout(&out)
        .lines()
        .nth(1)
        .unwrap()
        .split(',')
        .nth(5)
        .unwrap()
        .parse()
        .unwrap();
    assert!(value > 0.084);

    let unnormalized = write(dir.path(), "plus.json", r#"{"dim": 2, "amplitudes": [[1, 0], [1, 0]]}"#);
    assert_eq!(qlab(&["phase", "--state", &unnormalized]).status.code(), Some(1));
    assert!(
        qlab(&["phase", "--trials", "2", "--state", &unnormalized, "--normalize"])
            .status
            .success()
    );

    let broken = write(dir.path(), "broken.json", "{\"dim\": 2,\n \"amplitudes\": [[1, 0]");
    let out = qlab(&["phase", "--state", &broken]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));
}

#[test]
fn report_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let out = qlab(&[
        "postulates",
        "--trials",
        "5",
        "--format",
        "json",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(path).unwrap();
    let records = qlab_core::harness::parse_json_report(&text).unwrap();
    assert_eq!(records.len(), 10);
}
