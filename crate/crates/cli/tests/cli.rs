use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn orbitfed(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_orbitfed"))
        .args(args)
        .env_remove("ORBITFED_OUT")
        .current_dir(cwd)
        .output()
        .unwrap()
}

#[test]
fn unknown_command_is_a_usage_error() {
    let tmp = tempfile::tempdir().unwrap();
    let out = orbitfed(&["launch"], tmp.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));
}

#[test]
fn invalid_scenario_exits_with_one() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(tmp.path().join("bad.toml"), "[constellation]\nnum_orbits = 2\nsats_per_orbit = 0\n").unwrap();
    let out = orbitfed(&["windows", "--scenario", "bad.toml"], tmp.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(!tmp.path().join("out").exists());
}

#[test]
fn windows_writes_table() {
    let tmp = tempfile::tempdir().unwrap();
    let out = orbitfed(&["windows", "--scenario", "fig3", "--horizon", "64800", "--out", "w"], tmp.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(tmp.path().join("w/windows.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("orbit,slot,visit_index,t_start_s,t_end_s,duration_s"));
    assert!(lines.count() > 10);
}

#[test]
fn environment_overrides_out_flag() {
    let tmp = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_orbitfed"))
        .args(["partition-report", "--scenario", "fig3", "--out", "ignored"])
        .env("ORBITFED_OUT", tmp.path().join("env"))
        .current_dir(tmp.path())
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(tmp.path().join("env/partition.csv").exists());
    assert!(!tmp.path().join("ignored").exists());
}

#[test]
fn partition_report_lists_every_satellite() {
    let tmp = tempfile::tempdir().unwrap();
    let out = orbitfed(&["partition-report", "--scenario", "fig3"], tmp.path());
    assert!(out.status.success());
    let csv = fs::read_to_string(tmp.path().join("out/partition.csv")).unwrap();
    // header plus 16 satellites
    assert_eq!(csv.lines().count(), 17);
}

#[test]
fn single_protocol_runs_write_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    for (cmd, dir) in [("run-fedleo", "f"), ("run-star", "s")] {
        let out = orbitfed(&[cmd, "--scenario", "fig3", "--seed", "3", "--out", dir], tmp.path());
        assert!(out.status.success(), "{cmd}: {}", String::from_utf8_lossy(&out.stderr));
        for file in ["windows.csv", "events.csv", "metrics.csv", "orbits.csv"] {
            assert!(tmp.path().join(dir).join(file).exists(), "{cmd} missing {file}");
        }
    }
}
