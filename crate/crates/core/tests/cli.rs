use std::process::Command;

fn periodcert() -> Command {
    Command::new(env!("CARGO_BIN_EXE_periodcert"))
}

#[test]
fn oracle_prints_the_six_cycle() {
    let out = periodcert()
        .args(["oracle", "-71/48", "--field-disc", "33"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let points = v["points"].as_array().unwrap();
    assert_eq!(points.len(), 6);
    assert!(points.iter().all(|p| p["period"] == 6));
}

#[test]
fn oracle_preperiodic_count() {
    let out = periodcert()
        .args(["oracle", "-29/16", "--preperiodic"])
        .output()
        .unwrap();
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["preperiodic"].as_array().unwrap().len(), 8);
}

#[test]
fn run_writes_report_and_exits_cleanly() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("r.jsonl");
    let status = periodcert()
        .args([
            "--field-disc",
            "-3",
            "--height-bound",
            "12",
            "--threads",
            "2",
            "--report",
        ])
        .arg(&report)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let text = std::fs::read_to_string(&report).unwrap();
    let last: serde_json::Value = serde_json::from_str(text.lines().last().unwrap()).unwrap();
    assert_eq!(last["summary"]["counts"]["counterexample"], 0);
    assert_eq!(last["summary"]["config"]["field_disc"], -3);
}

#[test]
fn manual_mode_flags_instead_of_confirming() {
    let out = periodcert()
        .args(["--field-disc", "33", "--height-bound", "71", "--manual"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text
        .lines()
        .any(|l| l.contains("\"c\":\"-71/48\"") && l.contains("Flagged")));
}

#[test]
fn interrupted_run_resumes_from_checkpoint() {
    let dir = tempfile::tempdir().unwrap();
    let ck = dir.path().join("ck.jsonl");
    let first = periodcert()
        .args(["--height-bound", "50", "--max-blocks", "10", "--checkpoint"])
        .arg(&ck)
        .output()
        .unwrap();
    assert_eq!(first.status.code(), Some(2));
    assert_eq!(std::fs::read_to_string(&ck).unwrap().lines().count(), 10);
    let resumed = periodcert()
        .args(["--height-bound", "50", "--checkpoint"])
        .arg(&ck)
        .output()
        .unwrap();
    let fresh = periodcert()
        .args(["--height-bound", "50"])
        .output()
        .unwrap();
    assert_eq!(resumed.status.code(), Some(0));
    assert_eq!(resumed.stdout, fresh.stdout);
}

#[test]
fn stats_table_and_bad_input() {
    let out = periodcert().args(["--stats-table", "3"]).output().unwrap();
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 4);
    assert!(text.lines().nth(3).unwrap().starts_with("3\t5\t72\t"));
    let bad = periodcert().args(["--field-disc", "9"]).output().unwrap();
    assert!(!bad.status.success());
}
