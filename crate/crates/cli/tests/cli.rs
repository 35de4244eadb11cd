use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;
use wishart_core::{sample_standard_gaussian_matrix, DenseMatrix, RngSeed};

const BIN: &str = env!("CARGO_BIN_EXE_wishart");

fn wishart(dir: &Path, args: &[&str]) -> Output {
    Command::new(BIN)
        .args(args)
        .current_dir(dir)
        .env_remove("WISHART_THREADS")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_str(stdout(out).trim()).unwrap_or_else(|e| panic!("{e}: {}", stdout(out)))
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path
}

fn model_json(p: usize, n: usize, theta_diag: &[f64], shape: &str) -> String {
    let mut theta = vec![0.0; p * p];
    for (i, d) in theta_diag.iter().enumerate() {
        theta[i * p + i] = *d;
    }
    let theta = DenseMatrix::new(p, p, theta).unwrap().to_json();
    format!(r#"{{"p":{p},"n":{n},"theta":{theta},"shape":{shape}}}"#)
}

const IDENTITY: &str = r#"{"variant":"identity"}"#;
const SKEW: &str = r#"{"variant":"skew_block"}"#;

#[test]
fn sample_writes_numbered_files() {
    let dir = TempDir::new().unwrap();
    write(dir.path(), "m.json", &model_json(2, 4, &[1.0, 2.0], IDENTITY));
    let out = wishart(dir.path(), &["sample", "--model", "m.json", "--trials", "3", "--out", "w", "--decoupled"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let mut names: Vec<String> = fs::read_dir(dir.path().join("w"))
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    assert_eq!(
        names,
        ["W.000", "W.001", "W.002", "W_decoupled.000", "W_decoupled.001", "W_decoupled.002"]
    );
    let w = DenseMatrix::from_json(&fs::read_to_string(dir.path().join("w/W.001")).unwrap()).unwrap();
    assert_eq!((w.rows(), w.cols()), (2, 2));
}

#[test]
fn sample_is_reproducible_and_zero_shape_gives_zeros() {
    let dir = TempDir::new().unwrap();
    write(
        dir.path(),
        "zero.json",
        &model_json(3, 4, &[1.0; 3], r#"{"variant":"diagonal","entries":[0.0,0.0,0.0,0.0]}"#),
    );
    write(dir.path(), "m.json", &model_json(3, 5, &[1.0, 2.0, 3.0], IDENTITY));
    for out_dir in ["a", "b"] {
        let out = wishart(dir.path(), &["sample", "--model", "m.json", "--seed", "42", "--out", out_dir]);
        assert_eq!(code(&out), 0);
    }
    let a = fs::read(dir.path().join("a/W.000")).unwrap();
    let b = fs::read(dir.path().join("b/W.000")).unwrap();
    assert_eq!(a, b);

    let out = wishart(dir.path(), &["sample", "--model", "zero.json", "--out", "z"]);
    assert_eq!(code(&out), 0);
    let z = DenseMatrix::from_json(&fs::read_to_string(dir.path().join("z/W.000")).unwrap()).unwrap();
    assert!(z.as_slice().iter().all(|v| *v == 0.0));
}

#[test]
fn bound_scalar_case_and_conventions() {
    let dir = TempDir::new().unwrap();
    write(dir.path(), "one.json", &model_json(1, 1, &[1.0], IDENTITY));
    let r = json(&wishart(dir.path(), &["bound", "--model", "one.json"]));
    assert!((r["bound_value"].as_f64().unwrap() - 138.543).abs() < 1e-2, "{r}");

    write(dir.path(), "id.json", &model_json(2, 9, &[1.0, 1.0], IDENTITY));
    let f = json(&wishart(dir.path(), &["bound", "--model", "id.json", "--convention", "frobenius"]));
    let q = json(&wishart(dir.path(), &["bound", "--model", "id.json", "--convention", "ratio"]));
    assert_eq!(f["bound_value"], q["bound_value"]);
    assert_eq!(q["convention"], "ratio");

    let spike = r#"{"variant":"diagonal","entries":[2.0,0.0,0.0]}"#;
    write(dir.path(), "spike.json", &model_json(2, 3, &[1.0, 1.0], spike));
    let f = json(&wishart(dir.path(), &["bound", "--model", "spike.json"]));
    let q = json(&wishart(dir.path(), &["bound", "--model", "spike.json", "--convention", "ratio"]));
    assert_eq!(f["kappa"].as_f64(), Some(2.0));
    assert_eq!(q["kappa"].as_f64(), Some(1.0));
    assert_ne!(f["bound_value"], q["bound_value"]);
}

#[test]
fn missing_model_file_is_a_config_error() {
    let dir = TempDir::new().unwrap();
    let out = wishart(dir.path(), &["bound", "--model", "absent.json"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("absent.json"));
}

#[test]
fn verify_expectation_and_dominance_hold() {
    let dir = TempDir::new().unwrap();
    write(dir.path(), "id.json", &model_json(2, 6, &[1.0, 2.0], IDENTITY));
    let out = wishart(dir.path(), &["verify", "expectation", "--model", "id.json", "--trials", "5000"]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    assert_eq!(json(&out)["holds"], true);

    write(dir.path(), "skew.json", &model_json(2, 8, &[1.0, 3.0], SKEW));
    let out = wishart(dir.path(), &["verify", "dominance", "--model", "skew.json", "--seed", "5"]);
    assert_eq!(code(&out), 0);
    let r = json(&out);
    assert_eq!(r["check_name"], "dominance");
    assert!(r["ratio"].as_f64().unwrap() < 1.0);
}

#[test]
fn failing_check_exits_with_one() {
    let dir = TempDir::new().unwrap();
    write(dir.path(), "id.json", &model_json(2, 4, &[1.0, 1.0], IDENTITY));
    // With two trials the standard error is itself a crude estimate, so this seed fails.
    let out = wishart(
        dir.path(),
        &["verify", "expectation", "--model", "id.json", "--trials", "2", "--seed", "0"],
    );
    assert_eq!(code(&out), 1);
    assert_eq!(json(&out)["holds"], false);
}

#[test]
fn unknown_check_lists_valid_names() {
    let dir = TempDir::new().unwrap();
    let out = wishart(dir.path(), &["verify", "bogus"]);
    assert_eq!(code(&out), 2);
    let err = stderr(&out);
    for name in ["expectation", "dominance", "decoupling", "chaos", "stddev", "concentration"] {
        assert!(err.contains(name), "{err}");
    }
}

#[test]
fn verify_scalar_checks() {
    let dir = TempDir::new().unwrap();
    let out = wishart(dir.path(), &["verify", "stddev", "--theta-diag", "4,1", "--vector", "1,1"]);
    assert_eq!(code(&out), 0);
    assert!((json(&out)["target"].as_f64().unwrap() - 5f64.sqrt()).abs() < 1e-12);

    write(dir.path(), "i3.json", &DenseMatrix::identity(3).to_json());
    let out = wishart(dir.path(), &["verify", "chaos", "--matrix", "i3.json", "--trials", "20000"]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    assert_eq!(json(&out)["family_size"], 1);

    write(dir.path(), "id.json", &model_json(3, 16, &[1.0; 3], IDENTITY));
    let out = wishart(
        dir.path(),
        &["verify", "concentration", "--model", "id.json", "--trials", "20000", "--pairs", "200"],
    );
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    let r = json(&out);
    assert_eq!(r["tails"]["theoretical_tails"].as_array().unwrap().len(), 5);
    assert_eq!(r["lipschitz"]["violations"], 0);

    write(dir.path(), "theta.json", &model_json(2, 4, &[1.0, 2.0], IDENTITY));
    let out = wishart(dir.path(), &["verify", "concentration", "--model", "theta.json"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("whitened"));
}

#[test]
fn netcert_emits_one_line_per_matrix() {
    let dir = TempDir::new().unwrap();
    let mut args = vec!["netcert".to_string()];
    for k in 0..100 {
        let name = format!("g{k:03}.json");
        let a = sample_standard_gaussian_matrix(6, 6, RngSeed(k));
        write(dir.path(), &name, &a.to_json());
        args.push(name);
    }
    write(dir.path(), "id.json", &DenseMatrix::identity(4).to_json());
    args.push("id.json".into());
    let args: Vec<&str> = args.iter().map(String::as_str).collect();
    let out = wishart(dir.path(), &args);
    assert_eq!(code(&out), 0);
    let lines: Vec<Value> = stdout(&out)
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(lines.len(), 101);
    assert!(lines.iter().all(|c| c["holds"] == true));
    assert_eq!(lines[0]["matrix_id"], "g000.json");
    assert_eq!(lines[100]["exact_norm"].as_f64(), Some(1.0));
}

#[test]
fn netcert_beyond_cap_exits_with_three() {
    let dir = TempDir::new().unwrap();
    write(dir.path(), "big.json", &DenseMatrix::identity(15).to_json());
    let out = wishart(dir.path(), &["netcert", "big.json"]);
    assert_eq!(code(&out), 3, "{}", stderr(&out));
}

#[test]
fn sweep_scaling_writes_csv_and_summary() {
    let dir = TempDir::new().unwrap();
    let cfg = r#"{"command":"sweep","mode":"scaling","p":4,"n_grid":[16,64,256,1024],"trials":300,"seed":3}"#;
    write(dir.path(), "sweep.json", cfg);
    for out_dir in ["a", "b"] {
        let out = wishart(dir.path(), &["--config", "sweep.json", "--out", out_dir]);
        assert_eq!(code(&out), 0, "{}", stderr(&out));
    }
    let a = fs::read_to_string(dir.path().join("a/scaling.csv")).unwrap();
    let b = fs::read_to_string(dir.path().join("b/scaling.csv")).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.lines().count(), 5);
    assert!(a.starts_with("p,n,mean,stderr,bound,ratio\n"));
    let summary: Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("a/scaling_summary.json")).unwrap())
            .unwrap();
    let slope = summary["slope"].as_f64().unwrap();
    assert!((-0.6..=-0.4).contains(&slope), "{slope}");
}

#[test]
fn sweep_empty_grid_is_a_config_error() {
    let dir = TempDir::new().unwrap();
    write(dir.path(), "bad.json", r#"{"command":"sweep","mode":"scaling","p":2,"n_grid":[]}"#);
    let out = wishart(dir.path(), &["--config", "bad.json"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn sweep_complexity_to_stdout_as_csv() {
    let dir = TempDir::new().unwrap();
    let out = wishart(
        dir.path(),
        &["sweep", "complexity", "--p-grid", "2,4", "--tolerance", "1e6", "--trials", "20", "--format", "csv"],
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = stdout(&out);
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows[0], "p,empirical_n,mean,stderr,theoretical_n");
    assert!(rows[1].starts_with("2,1,") && rows[2].starts_with("4,1,"), "{text}");
}

#[test]
fn flags_override_config_file() {
    let dir = TempDir::new().unwrap();
    write(dir.path(), "m.json", &model_json(2, 4, &[1.0, 1.0], IDENTITY));
    write(
        dir.path(),
        "cfg.json",
        r#"{"command":"verify","check":"decoupling","model_file":"m.json","seed":1,"trials":50}"#,
    );
    let from_file = json(&wishart(dir.path(), &["--config", "cfg.json"]));
    let overridden = json(&wishart(dir.path(), &["--config", "cfg.json", "--seed", "2"]));
    assert_eq!(from_file["master_seed"], 1);
    assert_eq!(overridden["master_seed"], 2);
    assert_eq!(overridden["lhs"]["trials"], 50);
}

#[test]
fn worker_count_does_not_change_output() {
    let dir = TempDir::new().unwrap();
    write(dir.path(), "m.json", &model_json(3, 12, &[1.0, 2.0, 3.0], SKEW));
    let run = |threads: &str| {
        Command::new(BIN)
            .args(["verify", "decoupling", "--model", "m.json", "--trials", "400", "--seed", "11"])
            .current_dir(dir.path())
            .env("WISHART_THREADS", threads)
            .output()
            .unwrap()
    };
    let one = run("1");
    let three = run("3");
    assert_eq!(code(&one), 0);
    assert_eq!(one.stdout, three.stdout);
    assert_eq!(code(&run("zero")), 2);
}

#[test]
fn csv_format_outside_sweep_is_rejected() {
    let dir = TempDir::new().unwrap();
    write(dir.path(), "m.json", &model_json(1, 1, &[1.0], IDENTITY));
    let out = wishart(dir.path(), &["bound", "--model", "m.json", "--format", "csv"]);
    assert_eq!(code(&out), 2);
}
