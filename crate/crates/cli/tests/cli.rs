//! CLI behavior: exit codes, diagnostics on stderr, file handling.

use std::process::{Command, Output};

fn run_cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qis"))
        .args(args)
        .output()
        .expect("binary runs")
}

#[test]
fn validation_errors_exit_2_with_stderr_diagnostics() {
    let unknown_channel = run_cli(&["search", "--channel", "w5", "--blocks", "1,1,1", "--n", "1"]);
    assert_eq!(unknown_channel.status.code(), Some(2));
    assert!(unknown_channel.stdout.is_empty());
    assert!(String::from_utf8_lossy(&unknown_channel.stderr).contains("unknown built-in channel"));

    let bad_domain = run_cli(&["count", "--N", "3", "--n", "4", "--k", "3"]);
    assert_eq!(bad_domain.status.code(), Some(2));

    let missing_file = run_cli(&[
        "simulate",
        "--channel",
        "ghz3",
        "--protocol",
        "/nonexistent/protocol.json",
    ]);
    assert_eq!(missing_file.status.code(), Some(2));
    assert!(!missing_file.stderr.is_empty());
}

#[test]
fn malformed_protocol_file_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("broken.json");
    std::fs::write(&path, "{\"assignment\": {}}").unwrap();
    let out = run_cli(&[
        "audit",
        "--channel",
        "ghz3",
        "--protocol",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn channel_file_round_trips_through_the_cli() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("ghz3.json");
    qis::channels::save(&qis::channels::ghz(3).unwrap(), &path).unwrap();
    let out = run_cli(&[
        "search",
        "--channel-file",
        path.to_str().unwrap(),
        "--blocks",
        "1,1,1",
        "--n",
        "1",
    ]);
    assert!(out.status.success());
    let json: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(json["result"]["status"], "feasible");
}

#[test]
fn failing_protocol_simulates_with_failed_branches() {
    let path = std::path::PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../data/protocols/cluster4-attempt.json");
    let out = run_cli(&[
        "simulate",
        "--channel",
        "cluster4",
        "--protocol",
        path.to_str().unwrap(),
        "--secrets",
        "3",
        "--seed",
        "5",
    ]);
    assert!(
        out.status.success(),
        "failing branches are a result, not an error"
    );
    let json: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(json["result"]["all_branches_perfect"], false);
    assert_eq!(json["result"]["min_fidelity"], 0.0);
    let first = &json["result"]["runs"][0]["branches"][0];
    assert_eq!(first["corrected"], false);
    assert!(first["fidelity"].is_null());
}

#[test]
fn pretty_flag_only_changes_formatting() {
    let compact = run_cli(&["count", "--N", "6", "--n", "2", "--k", "3"]);
    let pretty = run_cli(&["count", "--N", "6", "--n", "2", "--k", "3", "--pretty"]);
    let a: serde_json::Value = serde_json::from_slice(&compact.stdout).unwrap();
    let b: serde_json::Value = serde_json::from_slice(&pretty.stdout).unwrap();
    assert_eq!(a, b);
    assert!(pretty.stdout.len() > compact.stdout.len());
}
