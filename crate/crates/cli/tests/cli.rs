//! The `noisydk` binary: exit codes, configuration precedence and output files.

use std::fs;
use std::process::{Command, Output};

use noisydk_cli::RunConfig;
use serde_json::Value;

fn noisydk(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_noisydk"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

/// Data rows of a single-table CSV as (first column, column `name`).
fn csv_column(text: &str, name: &str) -> Vec<(f64, f64)> {
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let i = header.iter().position(|h| *h == name).unwrap();
    lines
        .filter(|l| !l.is_empty())
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f[0].parse().unwrap(), f[i].parse().unwrap())
        })
        .collect()
}

#[test]
fn verify_succeeds_on_defaults() {
    let out = noisydk(&["verify"]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = stdout(&out);
    assert!(text.starts_with("formula,variant,points,max_abs_dev"));
    assert!(text.contains("\nformula,forcing_limit,"));
}

#[test]
fn verify_failure_exits_with_2() {
    // truncating the integration at 10 T leaves errors far above 1e-6
    let out = noisydk(&["verify", "--t-max", "10", "--tol", "1e-5"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stdout(&out).contains(",fail\n"));
}

#[test]
fn invalid_input_exits_with_1() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    fs::write(&cfg, "delta0 = 1\ncolour = blue\n").unwrap();
    let cases: Vec<Vec<String>> = vec![
        vec!["sweep".into(), "--points".into(), "1".into()],
        vec!["sweep".into(), "--delta1".into(), "abc".into()],
        vec!["sweep".into(), "--config".into(), cfg.display().to_string()],
        vec!["sweep".into(), "--set".into(), "nonsense".into()],
        vec!["fig2".into(), "a".into(), "--axis".into(), "delta1".into()],
        vec![
            "sweep".into(),
            "--operation".into(),
            "rz".into(),
            "--axis".into(),
            "tau-c".into(),
        ],
        vec!["fig9".into()],
    ];
    for args in cases {
        let args: Vec<&str> = args.iter().map(String::as_str).collect();
        let out = noisydk(&args);
        assert_eq!(out.status.code(), Some(1), "{args:?}");
        assert!(!out.stderr.is_empty());
    }
    let out = noisydk(&["sweep", "--config", cfg.to_str().unwrap()]);
    assert!(String::from_utf8_lossy(&out.stderr).contains("colour"));
}

#[test]
fn flags_override_set_which_overrides_the_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(
        &cfg,
        "# fig parameters\ndelta0 = 1.5\ndelta1 = 3\nj = 0.25\n",
    )
    .unwrap();
    let out = noisydk(&[
        "sweep",
        "--config",
        cfg.to_str().unwrap(),
        "--set",
        "delta1=7",
        "--set",
        "j=2",
        "--j",
        "0.75",
        "--dump-config",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let pairs = RunConfig::parse_kv(&stdout(&out)).unwrap();
    let get = |k: &str| pairs.iter().find(|(key, _)| key == k).unwrap().1.clone();
    assert_eq!(get("delta0"), "1.5");
    assert_eq!(get("delta1"), "7");
    assert_eq!(get("j"), "0.75");
    assert_eq!(get("command"), "sweep");
}

#[test]
fn json_meta_reparses_to_the_same_config() {
    let args = [
        "sweep", "--axis", "j", "--lo", "0", "--hi", "1", "--points", "5", "--format", "json",
        "--seed", "9",
    ];
    let out = noisydk(&args);
    assert_eq!(out.status.code(), Some(0));
    let doc: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(doc["meta"]["seed"], 9);
    assert_eq!(doc["meta"]["command"], "sweep");
    let pairs: Vec<(String, String)> = doc["meta"]["config"]
        .as_object()
        .unwrap()
        .iter()
        .map(|(k, v)| (k.clone(), v.as_str().unwrap().to_string()))
        .collect();
    let back =
        RunConfig::from_pairs(None, pairs.iter().map(|(k, v)| (k.as_str(), v.as_str()))).unwrap();
    let dumped = noisydk(&[&args[..], &["--dump-config"]].concat());
    let direct = RunConfig::from_pairs(
        None,
        RunConfig::parse_kv(&stdout(&dumped))
            .unwrap()
            .iter()
            .map(|(k, v)| (k.as_str(), v.as_str())),
    )
    .unwrap();
    assert_eq!(back, direct);
    assert_eq!(doc["tables"]["main"]["rows"].as_array().unwrap().len(), 5);
}

#[test]
fn every_row_carries_provenance() {
    let out = noisydk(&[
        "sweep", "--axis", "delta1", "--lo", "1", "--hi", "6", "--points", "6",
    ]);
    let text = stdout(&out);
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 6);
    assert!(rows.iter().all(|r| r.ends_with(",analytic-validated")));
}

#[test]
fn rosen_zener_pi_pulse_zero() {
    let out = noisydk(&[
        "sweep",
        "--operation",
        "rz",
        "--axis",
        "j",
        "--delta0",
        "0",
        "--delta1",
        "0",
        "--lo",
        "0",
        "--hi",
        "1",
        "--points",
        "21",
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let rows = csv_column(&stdout(&out), "q");
    let (j, q) = rows[10];
    assert_eq!(j, 0.5);
    assert!(q < 1e-12, "{q}");
    assert!((rows[0].1 - 1.0).abs() < 1e-12);
}

#[test]
fn switch_time_sweep_is_symmetric_without_static_detuning() {
    let out = noisydk(&[
        "sweep",
        "--operation",
        "telegraph",
        "--axis",
        "t0",
        "--delta0",
        "0",
        "--lo",
        "-3",
        "--hi",
        "3",
        "--points",
        "13",
    ]);
    let q: Vec<f64> = csv_column(&stdout(&out), "q")
        .into_iter()
        .map(|r| r.1)
        .collect();
    let asym = (0..q.len())
        .map(|k| (q[k] - q[q.len() - 1 - k]).abs())
        .fold(0.0, f64::max);
    assert!(asym < 1e-8, "{asym}");
}

#[test]
fn output_files_land_in_created_directories() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("nested/deeper/report.csv");
    let out = noisydk(&["verify", "--out", out_path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    assert!(fs::read_to_string(&out_path)
        .unwrap()
        .starts_with("formula,variant"));
    let ledger = fs::read_to_string(dir.path().join("nested/deeper/report_ledger.csv")).unwrap();
    assert_eq!(ledger.lines().count(), 5);
}

#[test]
fn help_and_version_exit_cleanly() {
    assert_eq!(noisydk(&["--help"]).status.code(), Some(0));
    assert_eq!(noisydk(&["--version"]).status.code(), Some(0));
}
