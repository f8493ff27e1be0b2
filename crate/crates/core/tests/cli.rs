//! End-to-end tests of the command-line surface: flag parsing, CSV and JSON
//! outputs, file formats, units, config files, and exit codes.

use bottleneck_lab::cli::{parse_args, run};
use bottleneck_lab::curve::RateCurve;
use std::path::Path;
use std::process::Command;

fn args(parts: &[&str]) -> Vec<String> {
    let mut v = vec!["bottleneck-lab".to_string()];
    v.extend(parts.iter().map(|s| s.to_string()));
    v
}

fn run_ok(parts: &[&str]) -> i32 {
    let cfg = parse_args(args(parts)).expect("args should parse");
    run(&cfg)
}

fn read_curve(path: &Path) -> RateCurve {
    RateCurve::parse_csv(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn hamming_curve_has_closed_form_rows() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("curve.csv");
    let code = run_ok(&[
        "ib-curve",
        "--hamming",
        "3",
        "0.5",
        "--grid",
        "0:1.585:25",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("C,R,method,beta\n"));
    let curve = read_curve(&out);
    assert_eq!(curve.records.len(), 25);
    assert!(curve.records[0].r.abs() < 1e-12);
    assert!(curve.r_is_nondecreasing(1e-10));
    assert!(curve.records.iter().all(|r| r.method == "closed_form"));
    assert!(curve.records.iter().all(|r| r.aux[0].is_some()));
    // round trip is byte identical
    assert_eq!(curve.render_csv(), text);
}

#[test]
fn circulant_curve_uses_the_reduced_path() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("curve.csv");
    let code = run_ok(&[
        "ib-curve",
        "--circulant",
        "0.8,0.15,0.05",
        "--grid",
        "0.2:1.2:3",
        "--restarts",
        "6",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let curve = read_curve(&out);
    assert_eq!(curve.records.len(), 3);
    assert!(curve.records.iter().all(|r| r.method == "reduced"));
    assert!(curve.records.iter().all(|r| r.aux[0].is_none()));
}

#[test]
fn matrix_file_runs_through_the_envelope_path() {
    let dir = tempfile::tempdir().unwrap();
    let mat = dir.path().join("chan.txt");
    std::fs::write(&mat, "2 2\n0.9 0.2\n0.1 0.8\n").unwrap();
    let out = dir.path().join("point.csv");
    let code = run_ok(&[
        "ib",
        "--matrix",
        mat.to_str().unwrap(),
        "--constraint",
        "0.5",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let curve = read_curve(&out);
    assert_eq!(curve.records.len(), 1);
    assert_eq!(curve.records[0].method, "envelope");
    assert!(curve.records[0].r > 0.0 && curve.records[0].r <= 0.5);
}

#[test]
fn bad_matrix_column_is_reported_with_its_index() {
    let dir = tempfile::tempdir().unwrap();
    let mat = dir.path().join("bad.txt");
    std::fs::write(&mat, "2 2\n0.9 0.6\n0.1 0.3\n").unwrap();
    let parsed = parse_args(args(&[
        "ib",
        "--matrix",
        mat.to_str().unwrap(),
        "--constraint",
        "0.5",
    ]));
    match parsed {
        Err(e) => assert!(e.to_string().contains("column 1"), "error: {e}"),
        Ok(_) => panic!("invalid matrix should be rejected"),
    }

    // the binary surfaces the offending column on stderr and exits 1
    let output = Command::new(env!("CARGO_BIN_EXE_bottleneck-lab"))
        .args([
            "ib",
            "--matrix",
            mat.to_str().unwrap(),
            "--constraint",
            "0.5",
        ])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("column 1"), "stderr: {stderr}");
}

#[test]
fn pf_curve_with_oracle_mixes_methods_and_reports_the_touch_point() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("pf.csv");
    let json = dir.path().join("pf.json");
    let code = run_ok(&[
        "pf-curve",
        "--tito",
        "0.1",
        "0.05",
        "--grid",
        "0:1.5:6",
        "--with-oracle",
        "--restarts",
        "8",
        "--seed",
        "5",
        "--out",
        out.to_str().unwrap(),
        "--json",
        json.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let curve = read_curve(&out);
    assert!(curve.records.iter().any(|r| r.method == "linear"));
    assert!(curve.records.iter().any(|r| r.method == "oracle"));
    // linear rows stop at the threshold
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    let c_star = report["c_star"].as_f64().unwrap();
    assert!((c_star - 0.596).abs() < 0.02);
    assert!(report["lambda_star"].as_f64().unwrap() > 0.0);
    assert_eq!(report["p_star"]["values"].as_array().unwrap().len(), 3);
    assert_eq!(report["w_weights"]["values"].as_array().unwrap().len(), 4);
    for rec in &curve.records {
        if rec.method == "linear" {
            assert!(rec.c <= c_star + 1e-9);
            assert!(rec.aux[0].is_some());
        }
    }
}

#[test]
fn symmetry_report_for_the_ternary_circulant() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.txt");
    let json = dir.path().join("report.json");
    let code = run_ok(&[
        "symmetry",
        "--tito",
        "0.1",
        "0.05",
        "--out",
        out.to_str().unwrap(),
        "--json",
        json.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.contains("input group order: 3 (transitive: true)"));
    assert!(text.contains("circulant: yes"));
    assert!(text.contains("0.85"));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(report["group_order"].as_u64(), Some(3));
    assert_eq!(report["input_transitive"].as_bool(), Some(true));
}

#[test]
fn nats_scale_the_rate_columns() {
    let dir = tempfile::tempdir().unwrap();
    let bits = dir.path().join("bits.csv");
    let nats = dir.path().join("nats.csv");
    let ln2 = std::f64::consts::LN_2;
    run_ok(&[
        "ib-curve",
        "--hamming",
        "3",
        "0.5",
        "--grid",
        "0.2:1.4:3",
        "--out",
        bits.to_str().unwrap(),
    ]);
    let nats_grid = format!("{}:{}:3", 0.2 * ln2, 1.4 * ln2);
    run_ok(&[
        "ib-curve",
        "--hamming",
        "3",
        "0.5",
        "--grid",
        &nats_grid,
        "--units",
        "nats",
        "--out",
        nats.to_str().unwrap(),
    ]);
    let b = read_curve(&bits);
    let n = read_curve(&nats);
    for (rb, rn) in b.records.iter().zip(&n.records) {
        assert!((rn.c - rb.c * ln2).abs() < 1e-9);
        assert!((rn.r - rb.r * ln2).abs() < 1e-9);
        // beta is dimensionless
        assert!((rn.aux[0].unwrap() - rb.aux[0].unwrap()).abs() < 1e-9);
    }
}

#[test]
fn config_file_supplies_flags_and_the_command_line_wins() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("run.toml");
    let out = dir.path().join("from_config.csv");
    std::fs::write(
        &conf,
        format!(
            "hamming = [3, 0.5]\ngrid = \"0:1.5:4\"\nseed = 11\nout = {:?}\n",
            out.to_str().unwrap()
        ),
    )
    .unwrap();
    let cfg = parse_args(args(&["ib-curve", "--config", conf.to_str().unwrap()])).unwrap();
    assert_eq!(cfg.solver.seed, 11);
    assert_eq!(cfg.c_grid.len(), 4);
    assert_eq!(run(&cfg), 0);
    assert!(out.exists());

    // command line overrides the file
    let cfg = parse_args(args(&[
        "ib-curve",
        "--config",
        conf.to_str().unwrap(),
        "--seed",
        "99",
        "--grid",
        "0:1.5:2",
    ]))
    .unwrap();
    assert_eq!(cfg.solver.seed, 99);
    assert_eq!(cfg.c_grid.len(), 2);
}

#[test]
fn oracle_subcommand_appends_curve_rows() {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("oracle.json");
    let curve_path = dir.path().join("curve.csv");
    for c in ["0.3", "0.6"] {
        let code = run_ok(&[
            "oracle",
            "--hamming",
            "3",
            "0.5",
            "--problem",
            "ib",
            "--constraint",
            c,
            "--restarts",
            "8",
            "--json",
            json.to_str().unwrap(),
            "--curve",
            curve_path.to_str().unwrap(),
        ]);
        assert_eq!(code, 0);
    }
    let curve = read_curve(&curve_path);
    assert_eq!(curve.records.len(), 2);
    assert!(curve.records.iter().all(|r| r.method == "oracle"));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    assert!(report["value"].as_f64().unwrap() > 0.0);
    assert!(report["converged"].as_bool().unwrap());
}

#[test]
fn infeasible_oracle_run_exits_with_two() {
    // one test-channel symbol cannot carry 0.4 bits about X
    let code = run_ok(&[
        "oracle",
        "--tito",
        "0.1",
        "0.05",
        "--problem",
        "pf",
        "--cardinality",
        "1",
        "--constraint",
        "0.4",
        "--restarts",
        "4",
    ]);
    assert_eq!(code, 2);
}

#[test]
fn binary_smoke_test() {
    let output = Command::new(env!("CARGO_BIN_EXE_bottleneck-lab"))
        .args(["symmetry", "--bsc", "0.1"])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(0));
    let stdout = String::from_utf8_lossy(&output.stdout);
    assert!(stdout.contains("input group order: 2"));

    let output = Command::new(env!("CARGO_BIN_EXE_bottleneck-lab"))
        .args(["ib", "--no-such-flag"])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(1));
}
