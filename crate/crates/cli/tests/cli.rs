use std::path::Path;
use std::process::{Command, Output};

fn rydberg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rydberg"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

/// Data rows of a CSV artifact, skipping `#` comments and the header.
fn data_rows(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(str::to_owned).collect())
        .collect()
}

fn header(text: &str) -> &str {
    text.lines().find(|l| !l.starts_with('#')).unwrap()
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap()
}

#[test]
fn field_free_trajectory_keeps_its_energy() {
    let out = rydberg(&[
        "trajectory",
        "--set",
        "pulse.duration=1e-3",
        "--set",
        "trajectory.t_end=6.283185307179586",
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = stdout(&out);
    assert_eq!(header(&text), "t,x,p,E,field");
    let rows = data_rows(&text);
    assert!(rows.len() > 10);
    let last = rows.last().unwrap();
    let t: f64 = last[0].parse().unwrap();
    let x: f64 = last[1].parse().unwrap();
    let e: f64 = last[3].parse().unwrap();
    assert!((t - 2.0 * std::f64::consts::PI).abs() < 1e-12);
    assert!((e + 0.5).abs() <= 1e-8);
    assert!((x - 2.0).abs() <= 1e-8);
}

#[test]
fn negative_count_is_a_config_error_naming_the_field() {
    let out = rydberg(&["scan", "--set", "ensemble.count=-5"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("ensemble.count"), "{}", stderr(&out));
}

#[test]
fn config_file_errors_are_reported_with_their_path() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(&cfg, r#"{"ensemble": {"count": 10, "target_P": 1.5}}"#).unwrap();
    let out = rydberg(&["scan", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("ensemble.target_P"), "{}", stderr(&out));

    std::fs::write(&cfg, "{\n  \"ensemble\": {\"count\": 10,,}\n}").unwrap();
    let out = rydberg(&["scan", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("line 2"), "{}", stderr(&out));

    std::fs::write(&cfg, r#"{"scan": {"kind": "half_cycle", "setings": {}}}"#).unwrap();
    let out = rydberg(&["scan", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("setings"), "{}", stderr(&out));
}

#[test]
fn mismatched_command_in_config_is_rejected() {
    let out = rydberg(&["compare", "--set", "command=scan"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn compare_emits_the_analytic_table() {
    let out = rydberg(&["compare", "--set", "s0_grid=[1, 8]"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert_eq!(header(&text), "s0,static,chaos_mw,hcp_exp,photonic,multiphoton");
    let rows: Vec<Vec<f64>> = data_rows(&text)
        .iter()
        .map(|r| r.iter().map(|v| v.parse().unwrap()).collect())
        .collect();
    let expected = [0.130, 1.0 / 49.0, 0.14, 2.0 / (std::f64::consts::E * std::f64::consts::PI), 1.0 / 7.05];
    for (got, want) in rows[0][1..].iter().zip(expected) {
        assert!((got / want - 1.0).abs() <= 1e-12, "{got} vs {want}");
    }
    for col in [3, 5] {
        assert!((rows[0][col] / rows[1][col] - 4.0).abs() < 1e-12);
    }
}

#[test]
fn compare_rejects_an_empty_grid() {
    assert_eq!(code(&rydberg(&["compare", "--set", "s0_grid=[]"])), 2);
    assert_eq!(code(&rydberg(&["compare", "--set", "s0_grid=[1, -2]"])), 2);
}

#[test]
fn scan_writes_rows_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("scan.csv");
    let out = rydberg(&[
        "scan",
        "--set",
        "ensemble.count=200",
        "--set",
        "s0_grid=[1, 2, 4]",
        "--output",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = read(&out_path);
    assert_eq!(header(&text), "s0,Fs_th,mechanism,target_P,count,seed,stderr,status");
    let rows = data_rows(&text);
    assert_eq!(rows.len(), 3);
    for r in &rows {
        assert!(r[1].parse::<f64>().unwrap() > 0.0);
        assert_eq!(r[2], "simulated_classical");
        assert_eq!(r[4], "200");
        assert_eq!(r[7], "ok");
    }
    let summary: serde_json::Value = serde_json::from_str(&read(&dir.path().join("scan.csv.summary.json"))).unwrap();
    assert!(summary["fit"]["exponent"].as_f64().unwrap() < 0.0);
    assert_eq!(summary["config"]["ensemble"]["count"], 200);
    assert_eq!(summary["points"].as_array().unwrap().len(), 3);
}

#[test]
fn single_point_scan_has_no_fit() {
    let out = rydberg(&["scan", "--set", "ensemble.count=100", "--set", "s0_grid=[2]", "--format", "json"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert!(doc.get("fit").is_none());
    assert!(doc["points"][0]["Fs_th"].as_f64().unwrap() > 0.0);
}

#[test]
fn bracket_failure_is_recorded_in_row() {
    let out = rydberg(&[
        "scan",
        "--set",
        "ensemble.count=100",
        "--set",
        "s0_grid=[1, 2]",
        "--set",
        "scan.settings.bracket_factor=1.01",
        "--set",
        "scan.settings.max_expansions=0",
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let rows = data_rows(&stdout(&out));
    assert_eq!(rows.len(), 2);
    for r in rows {
        assert_eq!(r[1], "");
        assert_eq!(r[7], "bracket_failure");
    }
}

#[test]
fn scan_logs_one_line_per_point() {
    let out = Command::new(env!("CARGO_BIN_EXE_rydberg"))
        .args(["scan", "--set", "ensemble.count=100", "--set", "s0_grid=[1, 2]"])
        .env("RUST_LOG", "info")
        .output()
        .unwrap();
    let log = stderr(&out);
    assert_eq!(log.lines().filter(|l| l.contains("s0 = ")).count(), 2, "{log}");
}

#[test]
fn starved_integrator_exits_with_numerical_failure() {
    let out = rydberg(&["trajectory", "--set", "trajectory.t_end=1e4", "--set", "trajectory.max_steps=100"]);
    assert_eq!(code(&out), 3, "{}", stderr(&out));
    assert!(stderr(&out).contains("step budget"), "{}", stderr(&out));
}

#[test]
fn scaling_check_report_and_negative_control() {
    let out = rydberg(&["scaling-check", "--set", "scaling_check.pairs=3"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert!(doc["max_deviation"].as_f64().unwrap() <= 1e-6);
    assert_eq!(doc["passed"], true);

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let out = rydberg(&[
        "scaling-check",
        "--set",
        "scaling_check.pairs=3",
        "--set",
        "scaling_check.fs_mismatch=0.01",
        "--output",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 1);
    let doc: serde_json::Value = serde_json::from_str(&read(&path)).unwrap();
    assert_eq!(doc["passed"], false);

    assert_eq!(code(&rydberg(&["scaling-check", "--set", "scaling_check.pairs=0"])), 2);
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let args = |p: &Path, jobs: &'static str| {
        vec![
            "scan".to_owned(),
            "--set".into(),
            "ensemble.count=150".into(),
            "--set".into(),
            "s0_grid=[1, 4]".into(),
            "--seed".into(),
            "42".into(),
            "--jobs".into(),
            jobs.into(),
            "--output".into(),
            p.to_str().unwrap().into(),
        ]
    };
    let run = |v: Vec<String>| Command::new(env!("CARGO_BIN_EXE_rydberg")).args(v).output().unwrap();
    assert_eq!(code(&run(args(&a, "1"))), 0);
    assert_eq!(code(&run(args(&b, "3"))), 0);
    assert_eq!(read(&a), read(&b));
    assert_eq!(
        read(&dir.path().join("a.csv.summary.json")),
        read(&dir.path().join("b.csv.summary.json"))
    );
    assert!(read(&a).contains("\"seed\":42"));
}
