use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn kdee(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kdee")).args(args).output().unwrap()
}

fn ok(args: &[&str]) -> Output {
    let out = kdee(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn kdee_prints_a_profile() {
    let dir = tempfile::tempdir().unwrap();
    let rec = dir.path().join("s.csv");
    ok(&[
        "simulate-sine",
        "--seed",
        "1",
        "--out",
        p(&rec),
        "--len",
        "600",
        "--no-insert",
    ]);
    let out = ok(&["kdee", "--in", p(&rec), "--tau-max", "20"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "tau,ke_bits");
    assert_eq!(lines.len(), 22);
    let dke: f64 = lines[21].strip_prefix("delta_ke,").unwrap().parse().unwrap();
    assert!(dke > 0.5, "{dke}");
}

#[test]
fn argument_errors_exit_with_one() {
    assert_eq!(kdee(&["kdee", "--bogus"]).status.code(), Some(1));
    assert_eq!(kdee(&["detect"]).status.code(), Some(1));
    assert_eq!(
        kdee(&["--threads", "0", "kdee", "--in", "x.csv"]).status.code(),
        Some(1)
    );
    assert_eq!(
        kdee(&["kdee", "--in", "/nonexistent/x.csv", "--rate", "1"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(kdee(&["--help"]).status.code(), Some(0));
}

#[test]
fn detect_finds_the_rectified_segment() {
    let dir = tempfile::tempdir().unwrap();
    let rec = dir.path().join("fig.csv");
    let det = dir.path().join("det.json");
    let score = dir.path().join("score.json");
    ok(&[
        "simulate-sine",
        "--seed",
        "3",
        "--out",
        p(&rec),
        "--insert-len",
        "128",
        "--insert-start",
        "2600",
    ]);
    ok(&["detect", "--in", p(&rec), "--tau", "32", "--intervals", p(&det)]);
    let saved: Value = serde_json::from_str(&fs::read_to_string(&det).unwrap()).unwrap();
    let intervals = saved["report"]["intervals"].as_array().unwrap();
    assert!(intervals.iter().any(|iv| {
        let (s, e) = (iv["start"].as_u64().unwrap(), iv["end"].as_u64().unwrap());
        s < 2728 && e > 2600
    }));
    ok(&["score", "--detections", p(&det), "--truth", p(&rec), "--out", p(&score)]);
    let s: Value = serde_json::from_str(&fs::read_to_string(&score).unwrap()).unwrap();
    assert!(s["f1"]["tp"].as_u64().unwrap() >= 1);
}

#[test]
fn identical_arguments_give_identical_files() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for out in [&a, &b] {
        ok(&[
            "simulate-rf",
            "--seed",
            "11",
            "--out",
            p(out),
            "--modulation",
            "16QAM",
            "--snr",
            "-3",
        ]);
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());

    let d1 = dir.path().join("d1.csv");
    let d2 = dir.path().join("d2.csv");
    ok(&[
        "--threads",
        "1",
        "detect",
        "--in",
        p(&a),
        "--representation",
        "delta-ke",
        "--out",
        p(&d1),
    ]);
    ok(&[
        "--threads",
        "3",
        "detect",
        "--in",
        p(&a),
        "--representation",
        "delta-ke",
        "--out",
        p(&d2),
    ]);
    assert_eq!(fs::read(&d1).unwrap(), fs::read(&d2).unwrap());
    assert!(Path::new(&format!("{}.meta.json", p(&d1))).exists());
}

#[test]
fn small_sweep_writes_every_curve() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sw.csv");
    ok(&[
        "sweep",
        "--experiment",
        "delta-ke",
        "--seed",
        "2",
        "--out",
        p(&out),
        "--trials",
        "1",
        "--formats",
        "BPSK",
        "--grid",
        "-10:0:5",
        "--decimate",
        "1,2",
        "--length",
        "300",
        "--tau-max",
        "6",
    ]);
    let text = fs::read_to_string(&out).unwrap();
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(
        rows[0],
        "curve,snr_db,mean,std,trials,pooled_precision,pooled_recall,pooled_f1"
    );
    assert_eq!(rows.len(), 1 + 2 * 3);
    assert!(rows[1].starts_with("decimation=1,-10.0,"));
}
