//! End-to-end tests of the command-line binary: exit codes, reproducible
//! output, and the contract that every CSV is self-describing.

use std::fs;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spiral-acq"))
        .args(args)
        .output()
        .expect("binary should spawn")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn sweep_stdout_is_reproducible() {
    let args = [
        "sweep",
        "--variable",
        "scan-speed",
        "--values",
        "10 mrad/s,40 mrad/s",
    ];
    let first = run(&args);
    let second = run(&args);
    assert!(first.status.success(), "stderr: {}", stderr(&first));
    assert_eq!(first.stdout, second.stdout);
    let text = stdout(&first);
    assert!(text.contains("scan_speed,correlated-exact,uncorrelated"));
}

#[test]
fn sweep_output_file_is_byte_identical_across_reruns() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sweep.csv");
    let path_str = path.to_str().unwrap();
    let args = [
        "sweep",
        "--variable",
        "track-width",
        "--values",
        "50 urad,62.8 urad",
        "--out",
        path_str,
    ];
    assert!(run(&args).status.success());
    let first = fs::read(&path).unwrap();
    assert!(run(&args).status.success());
    let second = fs::read(&path).unwrap();
    assert_eq!(first, second);

    let text = String::from_utf8(first).unwrap();
    assert!(text.contains("# seed = "));
    assert!(text.contains("# params_fingerprint = 0x"));
    assert!(text.contains("# track_width = "));
}

#[test]
fn invalid_geometry_exits_with_validation_code() {
    let out = run(&["analytic", "--set", "track_width=90urad"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("d_t < 2·r_d"));
}

#[test]
fn unknown_sweep_method_exits_with_validation_code() {
    let out = run(&[
        "sweep",
        "--variable",
        "scan-speed",
        "--values",
        "10 mrad/s",
        "--methods",
        "magic",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("unknown sweep method"));
}

#[test]
fn malformed_override_exits_with_validation_code() {
    let out = run(&["analytic", "--set", "nonsense"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("KEY=VALUE"));

    let out = run(&["analytic", "--set", "track_width=12parsecs"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn validate_jitter_rejects_short_runs() {
    let out = run(&["validate-jitter", "--trials", "1000"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("at least 100000 samples"));
}

#[test]
fn unreachable_spacecraft_fails_search_time_at_runtime() {
    // Gapped tracks with near-zero jitter leave ~13% of spacecraft
    // positions permanently undetectable, so some trial must exhaust its
    // repeat budget.
    let out = run(&[
        "simulate",
        "--mode",
        "search-time",
        "--trials",
        "100",
        "--set",
        "uncertainty_sigma=80urad",
        "--set",
        "max_scan_radius=300urad",
        "--set",
        "track_width=100urad",
        "--set",
        "rms_jitter=1urad",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("full spirals without detection"));
}

#[test]
fn config_file_matches_inline_override() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("mission.toml");
    fs::write(&path, "scan_speed = \"40 mrad/s\"\n").unwrap();

    let from_file = run(&["analytic", "--config", path.to_str().unwrap()]);
    let from_flag = run(&["analytic", "--set", "scan_speed=40mrad/s"]);
    assert!(from_file.status.success());
    assert_eq!(from_file.stdout, from_flag.stdout);
}

#[test]
fn zero_jitter_optimum_reports_range_boundary() {
    let out = run(&["optimize", "--set", "rms_jitter=0rad"]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("minimum sits on the range boundary"));
}

#[test]
fn trial_dump_is_complete_and_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("trials.csv");
    let path_str = path.to_str().unwrap();
    let args = ["simulate", "--trials", "200", "--out", path_str];

    assert!(run(&args).status.success());
    let first = fs::read(&path).unwrap();
    assert!(run(&args).status.success());
    assert_eq!(first, fs::read(&path).unwrap());

    let text = String::from_utf8(first).unwrap();
    let mut lines = text.lines().skip_while(|l| l.starts_with('#'));
    assert_eq!(
        lines.next(),
        Some("trial_idx,sc_x,sc_y,detected,detection_time,detection_track")
    );
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 200);
    for row in rows {
        let fields: Vec<&str> = row.split(',').collect();
        assert_eq!(fields.len(), 6);
        match fields[3] {
            "1" => {
                assert!(!fields[4].is_empty());
                assert!(!fields[5].is_empty());
            }
            "0" => {
                assert!(fields[4].is_empty());
                assert!(fields[5].is_empty());
            }
            other => panic!("unexpected detected flag {other:?}"),
        }
    }
}
