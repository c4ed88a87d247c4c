use std::f64::consts::SQRT_2;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs").join(name)
}

fn qcausal(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qcausal"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn run(command: &str, cfg: &Path, extra: &[&str]) -> Output {
    let mut args = vec![command, "--config", cfg.to_str().unwrap()];
    args.extend_from_slice(extra);
    qcausal(&args)
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

/// Rows of the first CSV table in `--format csv` output, header included.
fn csv_rows(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .skip(1)
        .take_while(|l| !l.is_empty())
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn column(rows: &[Vec<String>], name: &str) -> Vec<f64> {
    let k = rows[0].iter().position(|c| c == name).unwrap();
    rows[1..].iter().map(|r| r[k].parse().unwrap()).collect()
}

fn json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stdout).unwrap()
}

fn table_value(report: &serde_json::Value, table: &str, key: &str) -> f64 {
    let t = report["tables"]
        .as_array()
        .unwrap()
        .iter()
        .find(|t| t["name"] == table)
        .unwrap();
    let row = t["rows"].as_array().unwrap().iter().find(|r| r[0] == key).unwrap();
    row[1].as_f64().unwrap()
}

fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path
}

#[test]
fn epr_perfect_correlation_row() {
    let out = run("epr", &config("phi_plus.json"), &["--format", "csv"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let rows = csv_rows(&stdout(&out));
    let a = column(&rows, "a");
    let b = column(&rows, "b");
    let same: Vec<f64> = column(&rows, "P_par_par")
        .iter()
        .zip(column(&rows, "P_perp_perp"))
        .map(|(x, y)| x + y)
        .collect();
    let k = (0..a.len()).find(|&k| a[k] == 0.0 && b[k] == 0.0).unwrap();
    assert!((same[k] - 1.0).abs() < 1e-15);
    assert_eq!(rows[0].len(), 12);
}

#[test]
fn epr_scan_has_36_rows_and_no_pi_gap() {
    let out = run("epr", &config("epr_scan.json"), &["--format", "csv"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let rows = csv_rows(&stdout(&out));
    assert_eq!(rows.len(), 37);
    assert!(column(&rows, "pi_gap").iter().all(|g| *g <= 1e-12));
}

#[test]
fn malformed_angle_is_a_config_error_with_path() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "bad.json",
        r#"{"preparation": {"state": "phi_plus"},
            "analysis": {"bob_angles": {"values": ["zero"]}}}"#,
    );
    let out = run("epr", &cfg, &[]);
    assert_eq!(out.status.code(), Some(2));
    let err = stderr(&out);
    assert!(err.contains("analysis.bob_angles.values[0]"), "{err}");
    assert!(err.contains("line 2"), "{err}");
}

#[test]
fn usage_and_io_errors_exit_2() {
    assert_eq!(run("epr", Path::new("/nonexistent/x.json"), &[]).status.code(), Some(2));
    assert_eq!(run("epr", &config("phi_plus.json"), &["--format", "xml"]).status.code(), Some(2));
    assert_eq!(run("epr", &config("phi_plus.json"), &["--tol", "0"]).status.code(), Some(2));
    assert_eq!(qcausal(&["teleport"]).status.code(), Some(2));
    // A two-photon command on a single-photon config.
    assert_eq!(run("chsh", &config("noncommuting.json"), &[]).status.code(), Some(2));
}

#[test]
fn chsh_values() {
    let phi = run("chsh", &config("phi_plus.json"), &["--format", "json"]);
    assert_eq!(phi.status.code(), Some(0));
    let report = json(&phi);
    assert!((table_value(&report, "chsh", "quantum_optimum") - 2.0 * SQRT_2).abs() < 1e-6);
    assert_eq!(table_value(&report, "chsh", "lhv_bound"), 2.0);
    assert_eq!(report["provenance"]["seed"], 7);

    let product = run("chsh", &config("product.json"), &["--format", "json"]);
    assert_eq!(product.status.code(), Some(0));
    assert!(table_value(&json(&product), "chsh", "quantum_optimum") <= 2.0 + 1e-6);
}

#[test]
fn seed_flag_overrides_config() {
    let a = json(&run("chsh", &config("phi_plus.json"), &["--format", "json", "--seed", "1"]));
    let b = json(&run("chsh", &config("phi_plus.json"), &["--format", "json", "--seed", "2"]));
    assert_eq!(a["provenance"]["seed"], 1);
    assert_ne!(
        table_value(&a, "chsh", "random_scan_max"),
        table_value(&b, "chsh", "random_scan_max")
    );
}

#[test]
fn consistency_verdicts() {
    let fig4 = run("consistency", &config("fig4.json"), &[]);
    assert_eq!(fig4.status.code(), Some(0), "{}", stdout(&fig4));

    let nc = run("consistency", &config("noncommuting.json"), &[]);
    assert_eq!(nc.status.code(), Some(1));
    let text = stdout(&nc);
    assert!(text.contains("FAIL consistency"), "{text}");
    assert!(text.contains("pair A/B"), "{text}");

    let ac = run("consistency", &config("anticommuting.json"), &[]);
    assert_eq!(ac.status.code(), Some(0));
    let text = stdout(&ac);
    assert!(text.contains("flag: anticommuting"), "{text}");
    assert!(text.contains("PASS consistency"), "{text}");
}

#[test]
fn impossible_recorded_outcome_names_the_event() {
    let dir = tempfile::tempdir().unwrap();
    let text = fs::read_to_string(config("fig4.json"))
        .unwrap()
        .replace(r#""setting_angle": 0.39269908169872414"#, r#""setting_angle": 1.5707963267948966"#);
    let cfg = write_config(dir.path(), "impossible.json", &text);
    let out = run("consistency", &cfg, &[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("event B"), "{}", stderr(&out));
}

#[test]
fn intervene_report() {
    let out = run("intervene", &config("phi_plus.json"), &[]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("(Same): P(Y|X)=1, P(Y|do X)=0.5 → NOT CAUSAL-STABLE"), "{text}");
    assert!(text.contains("(Same*): P(X|Y)=1, P(X|do Y)=0.5 → NOT CAUSAL-STABLE"), "{text}");

    let report = json(&run("intervene", &config("phi_plus.json"), &["--format", "json"]));
    let sweep = report["tables"]
        .as_array()
        .unwrap()
        .iter()
        .find(|t| t["name"] == "setting_sweep")
        .unwrap();
    let column: Vec<f64> = sweep["rows"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r[1].as_f64().unwrap())
        .collect();
    assert!(column.len() > 1);
    assert!(column.iter().all(|p| (p - column[0]).abs() < 1e-12));

    let prep = report["tables"]
        .as_array()
        .unwrap()
        .iter()
        .find(|t| t["name"] == "preparation")
        .unwrap();
    let corr: Vec<f64> = prep["rows"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r[5].as_f64().unwrap())
        .collect();
    assert!((corr[0] - corr[1]).abs() > 0.5);
}

#[test]
fn net_checks_and_mislabeled_net() {
    let out = run("net", &config("net4.json"), &[]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));

    let dir = tempfile::tempdir().unwrap();
    let text = fs::read_to_string(config("net4.json")).unwrap().replace(
        r#""state": "bell_pairs(2)","#,
        r#""support_overrides": [ { "region": "s0", "sites": [0, 1] } ],
           "state": "bell_pairs(2)","#,
    );
    let cfg = write_config(dir.path(), "mislabeled.json", &text);
    let out = run("net", &cfg, &[]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("FAIL microcausality: violated for s0/s1"), "{}", stdout(&out));
}

#[test]
fn out_dir_receives_report_and_tables() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("artifacts");
    let out = run("epr", &config("phi_plus.json"), &["--out", out_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    for f in ["epr.txt", "epr.json", "epr_epr.csv"] {
        assert!(out_dir.join(f).is_file(), "{f}");
    }
    assert_eq!(fs::read_to_string(out_dir.join("epr.txt")).unwrap(), stdout(&out));
}

#[test]
fn check_selection() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "subset.json",
        r#"{"preparation": {"state": "phi_plus"}, "analysis": {"checks": ["parameter_independence"]}}"#,
    );
    let report = json(&run("epr", &cfg, &["--format", "json"]));
    assert_eq!(report["checks"].as_array().unwrap().len(), 1);

    let cfg = write_config(
        dir.path(),
        "unknown.json",
        r#"{"preparation": {"state": "phi_plus"}, "analysis": {"checks": ["telepathy"]}}"#,
    );
    let out = run("epr", &cfg, &[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("analysis.checks[0]"));
}

#[test]
fn reports_are_byte_identical_across_runs() {
    for (cmd, file) in [("epr", "epr_scan.json"), ("chsh", "phi_plus.json"), ("net", "net4.json")] {
        for format in ["text", "csv", "json"] {
            let a = run(cmd, &config(file), &["--format", format]);
            let b = run(cmd, &config(file), &["--format", format]);
            assert_eq!(a.stdout, b.stdout, "{cmd} {format}");
        }
    }
}
