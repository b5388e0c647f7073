//! Command-line behavior: exit codes and output plumbing.

use std::process::Command;

fn binary() -> &'static str {
    env!("CARGO_BIN_EXE_twr-tdoa")
}

fn write_scenario(dir: &tempfile::TempDir, text: &str) -> std::path::PathBuf {
    let path = dir.path().join("scenario.json");
    std::fs::write(&path, text).unwrap();
    path
}

const GOOD: &str = r#"{
    "variant": "SS",
    "tofs_ns": {"ab_ns": 100.0, "listeners": [{"id": "T1", "at_ns": 50.0, "bt_ns": 80.0}]},
    "clocks": {"a": {"drift_ppm": 10.0}, "b": {"drift_ppm": -5.0},
               "listeners": [{"drift_ppm": 20.0}]},
    "timing": {"delay_b_ns": 1000000.0}
}"#;

#[test]
fn run_writes_rows_to_stdout_and_summary_to_stderr() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_scenario(&dir, GOOD);
    let output = Command::new(binary()).arg("run").arg(&path).output().unwrap();
    assert!(output.status.success());
    let stdout = String::from_utf8(output.stdout).unwrap();
    let stderr = String::from_utf8(output.stderr).unwrap();
    assert!(stdout.starts_with("listener_id,true_tof_ab_fs"), "{stdout}");
    assert!(stderr.contains("overall: PASS"), "{stderr}");
}

#[test]
fn jsonl_format_and_plot_data() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_scenario(
        &dir,
        &GOOD.replace(
            "\"timing\"",
            r#""sweep": [{"path": "clocks.a.drift_ppm", "values": [0.0, 10.0]}], "timing""#,
        ),
    );
    let plots = dir.path().join("plots");
    let output = Command::new(binary())
        .args(["run"])
        .arg(&path)
        .args(["--format", "jsonl", "--emit-plot-data"])
        .arg(&plots)
        .output()
        .unwrap();
    assert!(output.status.success());
    let stdout = String::from_utf8(output.stdout).unwrap();
    assert_eq!(stdout.lines().count(), 2);
    serde_json::from_str::<serde_json::Value>(stdout.lines().next().unwrap()).unwrap();
    assert!(plots.join("clocks_a_drift_ppm.csv").exists());
}

#[test]
fn config_errors_exit_one_and_name_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_scenario(&dir, &GOOD.replace("\"SS\"", "\"DS\""));
    let output = Command::new(binary()).arg("run").arg(&path).output().unwrap();
    assert_eq!(output.status.code(), Some(1));
    let stderr = String::from_utf8(output.stderr).unwrap();
    assert!(stderr.contains("timing.delay_a"), "{stderr}");
}

#[test]
fn missing_file_exits_one() {
    let output = Command::new(binary())
        .args(["run", "/nonexistent/scenario.json"])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(1));
}

#[test]
fn usage_errors_exit_one() {
    let output = Command::new(binary()).arg("frobnicate").output().unwrap();
    assert_eq!(output.status.code(), Some(1));
}

#[test]
fn seed_override_changes_noisy_output() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_scenario(
        &dir,
        &GOOD.replace("\"timing\"", r#""noise": {"cfo_sigma": 1e-8}, "timing""#),
    );
    let run = |seed: &str| {
        let output = Command::new(binary())
            .arg("run")
            .arg(&path)
            .args(["--seed", seed])
            .output()
            .unwrap();
        assert!(output.status.success());
        output.stdout
    };
    assert_eq!(run("7"), run("7"));
    assert_ne!(run("7"), run("8"));
}
