//! End-to-end runs of the binary: exit codes, column layout, determinism,
//! and the figure anchors.

use std::path::Path;
use std::process::{Command, Output};

fn qep(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qep"))
        .args(args)
        .env_remove("QEP_THREADS")
        .output()
        .expect("binary runs")
}

fn stdout_of(args: &[&str]) -> String {
    let out = qep(args);
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn parse_csv(text: &str) -> (Vec<String>, Vec<Vec<f64>>) {
    let mut lines = text.lines();
    let header: Vec<String> = lines
        .next()
        .expect("header")
        .split(',')
        .map(|s| s.to_string())
        .collect();
    let rows = lines
        .map(|l| {
            l.split(',')
                .map(|v| if v == "nan" { f64::NAN } else { v.parse().unwrap() })
                .collect()
        })
        .collect();
    (header, rows)
}

#[test]
fn evolve_exit_code_2_on_constraint_violation() {
    let out = qep(&[
        "evolve", "--init", "10", "--gamma", "0.5", "--kappa", "0.8", "--tau-max", "1",
    ]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert_eq!(err.lines().count(), 1, "one-line diagnostic, got: {err}");
}

#[test]
fn evolve_emits_expected_columns_and_peak() {
    let text = stdout_of(&[
        "evolve",
        "--init",
        "11",
        "--gamma",
        "1.02",
        "--kappa",
        "1.02",
        "--tau-max",
        "6",
        "--dt-sample",
        "0.02",
    ]);
    let (header, rows) = parse_csv(&text);
    assert_eq!(
        header,
        ["tau", "a", "b", "c", "d", "re_m", "im_m", "re_h", "im_h", "C", "corr_xy"]
    );
    let c_idx = 9;
    let peak = rows
        .iter()
        .max_by(|x, y| x[c_idx].partial_cmp(&y[c_idx]).unwrap())
        .unwrap();
    assert!((peak[c_idx] - 0.425).abs() < 5e-3, "peak C {}", peak[c_idx]);
    assert!((peak[0] - 2.24).abs() < 0.1, "peak at tau {}", peak[0]);
}

#[test]
fn evolve_oracle_check_bounded() {
    let text = stdout_of(&[
        "evolve",
        "--init",
        "mix",
        "--alpha",
        "0.5",
        "--gamma",
        "1.5",
        "--kappa",
        "-0.7",
        "--tau-max",
        "4",
        "--dt-sample",
        "0.25",
        "--oracle-check",
    ]);
    let (header, rows) = parse_csv(&text);
    assert_eq!(header.last().unwrap(), "max_dev");
    for row in &rows {
        assert!(row.last().unwrap() <= &1e-7);
    }
}

#[test]
fn byte_identical_reruns() {
    let args = [
        "sweep-max", "--init", "11", "--grid", "0.2:5:60",
    ];
    let first = stdout_of(&args);
    let second = stdout_of(&args);
    assert_eq!(first, second);
    // determinism must also hold when the thread count changes
    let out = Command::new(env!("CARGO_BIN_EXE_qep"))
        .args(args)
        .env("QEP_THREADS", "1")
        .output()
        .unwrap();
    assert_eq!(first, String::from_utf8(out.stdout).unwrap());
}

#[test]
fn sweep_max_finds_interior_extremum() {
    let text = stdout_of(&["sweep-max", "--init", "11", "--grid", "0.2:5:200"]);
    let (header, rows) = parse_csv(&text);
    assert_eq!(header, ["gamma", "kappa", "alpha", "tau_star", "c_max"]);
    let best = rows
        .iter()
        .max_by(|x, y| x[4].partial_cmp(&y[4]).unwrap())
        .unwrap();
    assert!((best[4] - 0.425).abs() < 5e-3);
    assert!((best[0] - 1.02).abs() < 0.05);
    // alpha column is the double-excitation endpoint
    assert_eq!(rows[0][2], 0.0);
}

#[test]
fn sweep_max_single_excitation_monotone_below_pi_half() {
    let text = stdout_of(&["sweep-max", "--init", "10", "--grid", "0.1:10:80"]);
    let (_, rows) = parse_csv(&text);
    let mut prev = f64::INFINITY;
    for row in &rows {
        assert!(row[3] < std::f64::consts::FRAC_PI_2);
        assert!(row[3] < prev, "tau_star must decrease");
        prev = row[3];
    }
}

#[test]
fn spectrum_at_ep_reports_order_3() {
    let text = stdout_of(&["spectrum", "--gamma", "1", "--kappa", "1"]);
    let (header, rows) = parse_csv(&text);
    let order_idx = header.iter().position(|h| h == "ep_order").unwrap();
    let phase_idx = header.iter().position(|h| h == "phase_code").unwrap();
    assert_eq!(rows[0][order_idx], 3.0);
    assert_eq!(rows[0][phase_idx], 2.0);
    // three eigenvalues at -1
    let eigs: Vec<f64> = (0..5).map(|i| rows[0][1 + 2 * i]).collect();
    let near = eigs.iter().filter(|&&re| (re + 1.0).abs() < 1e-9).count();
    assert_eq!(near, 3);
}

#[test]
fn pt_phase_scan_flips_at_the_crossing() {
    let text = stdout_of(&["pt-phase", "--grid", "0:2:21"]);
    let (_, rows) = parse_csv(&text);
    for row in &rows {
        let expect = if row[0] < 1.0 {
            0.0
        } else if row[0] > 1.0 {
            1.0
        } else {
            2.0
        };
        assert_eq!(row[1], expect, "kappa={}", row[0]);
    }
}

#[test]
fn fig_writes_csv_and_plot_script() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("fig5a.csv");
    let out = qep(&["fig", "--fig", "5a", "--out", csv.to_str().unwrap()]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(&csv).unwrap();
    let (header, rows) = parse_csv(&text);
    assert_eq!(header, ["gamma", "c_max"]);
    assert!(rows.len() >= 200);
    assert!(Path::new(&dir.path().join("fig5a.gp")).exists());
}

#[test]
fn fig_2a_curves_enveloped_by_smallest_gamma() {
    let text = stdout_of(&["fig", "--fig", "2a"]);
    let (header, rows) = parse_csv(&text);
    assert_eq!(header[0], "tau");
    assert_eq!(header.len(), 6);
    // the gamma = 0.1 curve dominates the others at its own peak
    let peak = |col: usize| -> f64 {
        rows.iter().map(|r| r[col]).fold(0.0f64, f64::max)
    };
    let first = peak(1);
    for col in 2..6 {
        assert!(first > peak(col));
    }
}

#[test]
fn config_file_supplies_defaults_and_flags_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.conf");
    std::fs::write(&cfg, "init=10\ngamma=1.0\nkappa=0.5\ntau-max=2\ndt-sample=0.5\n").unwrap();
    let base = stdout_of(&["evolve", "--config", cfg.to_str().unwrap()]);
    let (_, rows) = parse_csv(&base);
    assert_eq!(rows.len(), 5);
    // overriding tau-max on the command line wins
    let longer = stdout_of(&[
        "evolve",
        "--config",
        cfg.to_str().unwrap(),
        "--tau-max",
        "4",
    ]);
    let (_, rows) = parse_csv(&longer);
    assert_eq!(rows.len(), 9);
}

#[test]
fn unknown_fig_id_is_invalid_usage() {
    let out = qep(&["fig", "--fig", "9z"]);
    assert_eq!(out.status.code(), Some(2));
}
