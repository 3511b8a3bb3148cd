//! End-to-end command tests against the built binary.

use std::path::Path;
use std::process::{Command, Output};

fn ltcn(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ltcn"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn approximate_then_eval_round_trips_the_shift() {
    let dir = tempfile::tempdir().unwrap();
    let out = ltcn(
        dir.path(),
        &[
            "approximate",
            "--target",
            "shift:3",
            "-l",
            "2",
            "-K",
            "2",
            "-M",
            "1",
            "--out-net",
            "net.json",
            "--out-point",
            "point.json",
        ],
    );
    assert!(out.status.success(), "{}", stderr(&out));

    std::fs::write(
        dir.path().join("input.json"),
        r#"{"d": 1, "start": 0, "values": [[1.5], [-2.0], [3.25]]}"#,
    )
    .unwrap();
    let out = ltcn(
        dir.path(),
        &["eval", "--net", "net.json", "--input", "input.json", "-t", "0..6"],
    );
    assert!(out.status.success(), "{}", stderr(&out));
    let lines: Vec<String> = stdout(&out).lines().map(str::to_owned).collect();
    assert_eq!(lines[0], "0,0.0000000000000000e0");
    assert_eq!(lines[3], "3,1.5000000000000000e0");
    assert_eq!(lines[4], "4,-2.0000000000000000e0");
    assert_eq!(lines[5], "5,3.2500000000000000e0");
}

#[test]
fn identity_network_echoes_through_eval() {
    let dir = tempfile::tempdir().unwrap();
    let out = ltcn(
        dir.path(),
        &[
            "approximate",
            "--target",
            "shift:0",
            "-l",
            "2",
            "-K",
            "1",
            "-M",
            "1",
            "--out-net",
            "id.json",
            "--out-point",
            "idp.json",
            "--quiet",
        ],
    );
    assert!(out.status.success(), "{}", stderr(&out));
    std::fs::write(
        dir.path().join("input.json"),
        r#"{"d": 1, "start": -1, "values": [[7.0], [0.5]]}"#,
    )
    .unwrap();
    let out = ltcn(
        dir.path(),
        &["eval", "--net", "id.json", "--input", "input.json", "-t", "-1,0"],
    );
    assert!(out.status.success());
    assert_eq!(
        stdout(&out),
        "-1,7.0000000000000000e0\n0,5.0000000000000000e-1\n"
    );
}

#[test]
fn verify_jackson_sweep_writes_the_grid() {
    let dir = tempfile::tempdir().unwrap();
    let out = ltcn(
        dir.path(),
        &[
            "verify",
            "--target",
            "exp:0.7:128",
            "--mode",
            "jackson",
            "--g",
            "fit",
            "--f",
            "fit",
            "-l",
            "2",
            "--grid",
            "1..4x2..5",
            "--out-csv",
            "sweep.csv",
            "--threads",
            "2",
        ],
    );
    assert!(out.status.success(), "{}", stderr(&out));
    let csv = std::fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "M,K,error_sq,bound,spectral_tail,memory_tail,ratio"
    );
    assert_eq!(lines.count(), 16);
}

#[test]
fn verify_bernstein_passes_on_fitted_envelopes() {
    let dir = tempfile::tempdir().unwrap();
    let out = ltcn(
        dir.path(),
        &[
            "verify",
            "--target",
            "exp:0.7:128",
            "--mode",
            "bernstein",
            "--g",
            "fit",
            "--f",
            "fit",
            "-l",
            "2",
            "--grid",
            "1..3x2..5",
            "--out-csv",
            "bern.csv",
        ],
    );
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stdout(&out).contains("verified against self-fitted envelopes"));
}

#[test]
fn infinite_complexity_is_a_diagnostic_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    // exp:1000 underflows to an exact zero at every probed window while the
    // shift target's tail is still 1 there.
    let out = ltcn(
        dir.path(),
        &[
            "verify",
            "--target",
            "shift:3",
            "--mode",
            "jackson",
            "--g",
            "fit",
            "--f",
            "exp:1000",
            "-l",
            "2",
            "--grid",
            "1..2x1..2",
            "--out-csv",
            "x.csv",
        ],
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("memory constant diverges"));
    assert!(!dir.path().join("x.csv").exists(), "no partial artifacts");
}

#[test]
fn usage_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    // Malformed envelope.
    let out = ltcn(
        dir.path(),
        &[
            "analyze", "--target", "exp:0.5:32", "--g", "exp:", "--f", "exp:1", "-l", "2",
            "--Kmax", "3", "--out", "r.json",
        ],
    );
    assert_eq!(out.status.code(), Some(2));

    // M beyond the spectrum size.
    let out = ltcn(
        dir.path(),
        &[
            "approximate",
            "--target",
            "shift:1",
            "-l",
            "2",
            "-K",
            "2",
            "-M",
            "5",
            "--out-net",
            "n.json",
            "--out-point",
            "p.json",
        ],
    );
    assert_eq!(out.status.code(), Some(2));

    // Missing input file.
    let out = ltcn(
        dir.path(),
        &["eval", "--net", "nope.json", "--input", "nope.json", "-t", "0"],
    );
    assert_eq!(out.status.code(), Some(2));

    // Bad target kind.
    let out = ltcn(
        dir.path(),
        &[
            "spectrum", "--target", "sine:3", "-l", "2", "-K", "2", "--out-csv", "s.csv",
        ],
    );
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn analyze_report_round_trips_as_json() {
    let dir = tempfile::tempdir().unwrap();
    let out = ltcn(
        dir.path(),
        &[
            "analyze",
            "--target",
            "lowrank:2:3:2",
            "--seed",
            "42",
            "--g",
            "fit",
            "--f",
            "fit",
            "-l",
            "2",
            "--Kmax",
            "4",
            "--out",
            "report.json",
        ],
    );
    assert!(out.status.success(), "{}", stderr(&out));
    let text = std::fs::read_to_string(dir.path().join("report.json")).unwrap();
    let value: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(value["c1"], serde_json::json!(1.0));
    assert_eq!(value["c2"], serde_json::json!(1.0));
    assert!(value["spectral_tails"].is_array());
}

#[test]
fn spectrum_csv_carries_the_parseval_footer() {
    let dir = tempfile::tempdir().unwrap();
    let out = ltcn(
        dir.path(),
        &[
            "spectrum",
            "--target",
            "exp:0.5:64",
            "--d",
            "2",
            "-l",
            "2",
            "-K",
            "3",
            "--out-csv",
            "spec.csv",
        ],
    );
    assert!(out.status.success(), "{}", stderr(&out));
    let csv = std::fs::read_to_string(dir.path().join("spec.csv")).unwrap();
    assert_eq!(csv.matches("# dim ").count(), 2);
    assert_eq!(csv.matches("# parseval,").count(), 2);
    assert_eq!(
        csv.matches("rank,magnitude,signed_value,multi_index").count(),
        2
    );
    // Parseval: the two footer numbers agree.
    for line in csv.lines().filter(|l| l.starts_with("# parseval,")) {
        let nums: Vec<f64> = line
            .trim_start_matches("# parseval,")
            .split(',')
            .map(|v| v.parse().unwrap())
            .collect();
        assert!((nums[0] - nums[1]).abs() <= 1e-10 * nums[1].max(1.0));
    }
}

#[test]
fn seed_flag_drives_random_targets() {
    let dir = tempfile::tempdir().unwrap();
    for (name, seed) in [("a.csv", "7"), ("b.csv", "7"), ("c.csv", "8")] {
        let out = ltcn(
            dir.path(),
            &[
                "spectrum",
                "--target",
                "lowrank:2:3:2",
                "--seed",
                seed,
                "-l",
                "2",
                "-K",
                "3",
                "--out-csv",
                name,
            ],
        );
        assert!(out.status.success(), "{}", stderr(&out));
    }
    let a = std::fs::read(dir.path().join("a.csv")).unwrap();
    let b = std::fs::read(dir.path().join("b.csv")).unwrap();
    let c = std::fs::read(dir.path().join("c.csv")).unwrap();
    assert_eq!(a, b);
    assert_ne!(a, c);
}

#[test]
fn kernel_files_feed_back_in_as_targets() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("kernel.json"),
        r#"{"d": 1, "channels": [[0.0, 0.0, 1.0]]}"#,
    )
    .unwrap();
    let out = ltcn(
        dir.path(),
        &[
            "spectrum",
            "--target",
            "file:kernel.json",
            "-l",
            "2",
            "-K",
            "2",
            "--out-csv",
            "spec.csv",
        ],
    );
    assert!(out.status.success(), "{}", stderr(&out));
    let csv = std::fs::read_to_string(dir.path().join("spec.csv")).unwrap();
    // A delayed delta has a single unit spectrum entry.
    assert!(csv.contains("1,1.0000000000000000e0,1.0000000000000000e0,"));
}
