//! End-to-end CLI checks: subcommands, exit codes, file-driven configs, flag
//! overrides, and byte-identical reruns.

use std::path::PathBuf;
use std::process::{Command, Output};

fn aqs() -> Command {
    Command::new(env!("CARGO_BIN_EXE_aqs"))
}

fn tempdir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("aqs-cli-test-{tag}-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn list_shows_catalog_alphabetically() {
    let out = aqs().args(["list"]).output().unwrap();
    assert!(out.status.success());
    let lines: Vec<String> = stdout(&out).lines().map(str::to_string).collect();
    assert_eq!(lines.len(), 5);
    let names: Vec<&str> = lines.iter().map(|l| l.split(" - ").next().unwrap()).collect();
    let mut sorted = names.clone();
    sorted.sort();
    assert_eq!(names, sorted);
    for expected in ["honest", "key-extraction", "total-break", "gao-disturbance", "dispute"] {
        assert!(names.contains(&expected), "missing {expected}");
    }
}

#[test]
fn list_filter_narrows_and_unknown_is_empty_success() {
    let out = aqs().args(["list", "break"]).output().unwrap();
    assert!(out.status.success());
    assert_eq!(stdout(&out).trim(), "total-break - full pad recovery and a forged message accepted end to end");

    let out = aqs().args(["list", "no-such-scenario"]).output().unwrap();
    assert!(out.status.success());
    assert!(stdout(&out).trim().is_empty());
}

#[test]
fn honest_run_exits_zero_with_summary_and_report() {
    let dir = tempdir("honest");
    let report = dir.join("honest.txt");
    let out = aqs()
        .args([
            "run",
            "--scenario",
            "honest",
            "--protocol",
            "zou",
            "--n",
            "4",
            "--seed",
            "7",
            "--out",
        ])
        .arg(&report)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let summary = stdout(&out);
    assert!(summary.contains("outcome=accepted"), "{summary}");
    assert!(summary.contains("V_T=1"));
    assert!(summary.contains("V_B=1"));
    assert!(summary.contains("fidelity=1.000000000"), "{summary}");
    let text = std::fs::read_to_string(&report).unwrap();
    assert!(text.starts_with("aqs-report v1\n"));
    assert!(text.contains("aqs-transcript v1\n"));
}

#[test]
fn key_extraction_summary_reports_recovery() {
    let dir = tempdir("keyext");
    let report = dir.join("ke.txt");
    let out = aqs()
        .args([
            "run", "--scenario", "key-extraction", "--protocol", "zou", "--n", "4", "--seed", "3",
            "--out",
        ])
        .arg(&report)
        .output()
        .unwrap();
    assert!(out.status.success());
    let summary = stdout(&out);
    assert!(summary.contains("recovered=8/8"), "{summary}");
    assert!(summary.contains("key_exact=1"));
    assert!(summary.contains("disavowal_upheld=1"));
    assert!(summary.contains("dispute=signature_invalid"));
}

#[test]
fn key_extraction_against_improved_reports_detection() {
    let dir = tempdir("keyext-improved");
    let report = dir.join("kei.txt");
    let out = aqs()
        .args([
            "run", "--scenario", "key-extraction", "--protocol", "improved", "--n", "4", "--seed",
            "3", "--out",
        ])
        .arg(&report)
        .output()
        .unwrap();
    assert!(out.status.success(), "detection is the expected outcome");
    let summary = stdout(&out);
    assert!(summary.contains("detected_at=V1"), "{summary}");
    assert!(summary.contains("outcome=aborted"));
}

#[test]
fn total_break_against_zou_is_config_error() {
    let out = aqs()
        .args(["run", "--scenario", "total-break", "--protocol", "zou"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unknown_scenario_is_config_error() {
    let out = aqs()
        .args(["run", "--scenario", "bogus"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn reports_are_byte_identical_across_reruns() {
    let dir = tempdir("determinism");
    let a_path = dir.join("a.txt");
    let b_path = dir.join("b.txt");
    for path in [&a_path, &b_path] {
        let out = aqs()
            .args([
                "run", "--scenario", "total-break", "--protocol", "li_bell", "--n", "2", "--seed",
                "11", "--out",
            ])
            .arg(path)
            .output()
            .unwrap();
        assert!(out.status.success());
    }
    let a = std::fs::read(&a_path).unwrap();
    let b = std::fs::read(&b_path).unwrap();
    assert_eq!(a, b);
}

#[test]
fn config_file_drives_run_and_flags_override() {
    let dir = tempdir("config");
    let cfg_path = dir.join("run.cfg");
    let report = dir.join("out.txt");
    std::fs::write(
        &cfg_path,
        format!(
            "# golden config\nscenario = honest\nprotocol = li_bell\nn = 2\nseed = 5\nout = {}\n",
            report.display()
        ),
    )
    .unwrap();
    let out = aqs().args(["run", "--config"]).arg(&cfg_path).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(stdout(&out).contains("protocol=li_bell"));
    assert!(report.exists());

    // Override the protocol from the command line, same config file.
    let out = aqs()
        .args(["run", "--config"])
        .arg(&cfg_path)
        .args(["--protocol", "improved"])
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(stdout(&out).contains("protocol=improved"));
}

#[test]
fn config_file_explicit_message_amplitudes() {
    let dir = tempdir("explicit-msg");
    let cfg_path = dir.join("run.cfg");
    let report = dir.join("out.txt");
    std::fs::write(
        &cfg_path,
        format!(
            "scenario = honest\nprotocol = zou\nn = 2\nseed = 3\n\
             message = 0.6,0,0,0.8;1,0,0,0\nout = {}\n",
            report.display()
        ),
    )
    .unwrap();
    let out = aqs().args(["run", "--config"]).arg(&cfg_path).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&report).unwrap();
    assert!(text.contains("message-qubit[0]: (+6.000000000000e-1+0.000000000000e0i)"));
    assert!(text.contains("message-qubit[1]: (+1.000000000000e0+0.000000000000e0i)"));

    // A mismatched qubit count is a config error.
    std::fs::write(
        &cfg_path,
        "scenario = honest\nprotocol = zou\nn = 3\nseed = 3\nmessage = 1,0,0,0\n",
    )
    .unwrap();
    let out = aqs().args(["run", "--config"]).arg(&cfg_path).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn report_dir_env_sets_default_output() {
    let dir = tempdir("envdir");
    let out = aqs()
        .env("AQS_REPORT_DIR", &dir)
        .args(["run", "--scenario", "honest", "--protocol", "zou", "--n", "2", "--seed", "9"])
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(dir.join("honest_zou_n2_seed9.report.txt").exists());
}
