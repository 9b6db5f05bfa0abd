use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use cheapci::ci::{calibrate_ob_critical, ci_standard_batching};
use cheapci::harness::{run_experiment, ExperimentConfig, Precision};
use cheapci::schemes::BatchScheme;
use cheapci::stats::{t_quantile, Probability, RngStream};

fn cheapci(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cheapci"))
        .args(args)
        .env_remove("CHEAPCI_WORKERS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn bundled(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../configs")
        .join(name)
}

fn write(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p
}

const SMALL: &str = r#"{
  "experiment": "lognormal_quantile",
  "n": 500,
  "k": 6,
  "alpha": 0.1,
  "methods": ["B", "CB", "OB_new", "OB_su"],
  "gamma": 0.3,
  "replications": 200,
  "master_seed": 8,
  "ob_mc_reps": 100000
}"#;

#[test]
fn bundled_table1_config_gives_five_rows() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("t1.csv");
    let cfg = bundled("table1_k6.json");
    let o = cheapci(&[
        "experiment",
        "run",
        "--config",
        cfg.to_str().unwrap(),
        "--output",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(
        lines[0],
        "method,coverage,coverage_se,half_width,half_width_se,R,n,K,alpha,seed"
    );
    let methods: Vec<&str> = lines[1..].iter().map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(methods, ["B", "B_gamma", "CB", "OB_new", "OB_su"]);
}

#[test]
fn experiment_output_is_reproducible_and_matches_library() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "small.json", SMALL);
    let run = |workers: &str| {
        let o = Command::new(env!("CARGO_BIN_EXE_cheapci"))
            .args(["experiment", "run", "--config", cfg.to_str().unwrap()])
            .env("CHEAPCI_WORKERS", workers)
            .output()
            .unwrap();
        assert!(o.status.success(), "{}", stderr(&o));
        o.stdout
    };
    let a = run("1");
    assert_eq!(a, run("1"));
    assert_eq!(a, run("3"));
    let lib: ExperimentConfig = serde_json::from_str(SMALL).unwrap();
    let report = run_experiment(&lib).unwrap();
    assert_eq!(String::from_utf8(a).unwrap(), report.to_csv(Precision::default()));
}

#[test]
fn markdown_and_full_precision() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "small.json", SMALL);
    let o = cheapci(&[
        "experiment",
        "run",
        "--config",
        cfg.to_str().unwrap(),
        "--format",
        "markdown",
    ]);
    assert!(o.status.success());
    let md = stdout(&o);
    assert!(md.contains("| Method | Coverage | Half-width |"));
    assert!(md.contains("| OB_su |"));
    let o = cheapci(&[
        "experiment",
        "run",
        "--config",
        cfg.to_str().unwrap(),
        "--precision",
        "full",
    ]);
    let lib: ExperimentConfig = serde_json::from_str(SMALL).unwrap();
    assert_eq!(stdout(&o), run_experiment(&lib).unwrap().to_csv(Precision::Full));
}

#[test]
fn config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let k1 = write(dir.path(), "k1.json", &SMALL.replace("\"k\": 6", "\"k\": 1"));
    let o = cheapci(&["experiment", "run", "--config", k1.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("K must be ≥ 2"), "{}", stderr(&o));

    let unknown = write(dir.path(), "u.json", &SMALL.replace("\"k\": 6", "\"K\": 6"));
    let o = cheapci(&["experiment", "run", "--config", unknown.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains("unknown field `K`") && err.contains("line 4 column 5"), "{err}");

    let o = cheapci(&["experiment", "run", "--config", "/nonexistent/cfg.json"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn ci_compute_standard_batching() {
    let dir = tempfile::tempdir().unwrap();
    let est = write(dir.path(), "y.csv", "0\n2\n");
    let o = cheapci(&[
        "ci", "compute", "--method", "b", "--estimates", est.to_str().unwrap(), "--alpha", "0.05",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(
        stdout(&o),
        "center,half_width,lower,upper\n1.00000,12.7062,-11.7062,13.7062\n"
    );
}

#[test]
fn ci_compute_cheap_bootstrap_constant_has_zero_width() {
    let dir = tempfile::tempdir().unwrap();
    let est = write(dir.path(), "y.csv", "estimate\n1.5\n1.5\n1.5\n");
    let o = cheapci(&["ci", "compute", "--method", "cb", "--estimates", est.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(stdout(&o).lines().nth(1).unwrap(), "1.50000,0,1.50000,1.50000");
}

#[test]
fn ci_compute_gs_errors() {
    let dir = tempfile::tempdir().unwrap();
    let est = write(dir.path(), "y.csv", "0.1\n0.3\n");
    let bad = write(dir.path(), "s.csv", "1,2\n2,1\n");
    let o = cheapci(&[
        "ci", "compute", "--method", "gs", "--estimates", est.to_str().unwrap(), "--sigma",
        bad.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("covariance shape not positive definite"));

    let o = cheapci(&["ci", "compute", "--method", "gs", "--estimates", est.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--sigma"));

    let three = write(dir.path(), "s3.csv", "1,0,0\n0,1,0\n0,0,1\n");
    let o = cheapci(&[
        "ci", "compute", "--method", "gs", "--estimates", est.to_str().unwrap(), "--sigma",
        three.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("dimension mismatch"));

    let good = write(dir.path(), "s2.csv", "2,0\n0,2\n");
    let o = cheapci(&[
        "ci", "compute", "--method", "gs", "--estimates", est.to_str().unwrap(), "--sigma",
        good.to_str().unwrap(), "--precision", "full",
    ]);
    let lib = ci_standard_batching(&[0.1, 0.3], Probability::new(0.05).unwrap()).unwrap();
    let line = stdout(&o);
    let fields: Vec<f64> = line
        .lines()
        .nth(1)
        .unwrap()
        .split(',')
        .map(|f| f.parse().unwrap())
        .collect();
    assert!((fields[1] - lib.half_width).abs() < 1e-12);
}

#[test]
fn ci_compute_from_raw_data() {
    let dir = tempfile::tempdir().unwrap();
    let values: Vec<f64> = (0..40).map(|i| ((i * 37) % 11) as f64).collect();
    let body: String = values.iter().map(|v| format!("{v}\n")).collect();
    let data = write(dir.path(), "x.csv", &body);
    let o = cheapci(&[
        "ci", "compute", "--method", "b", "--data", data.to_str().unwrap(), "--k", "4",
        "--precision", "full", "--alpha", "0.1",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let means: Vec<f64> = values
        .chunks(10)
        .map(|c| c.iter().sum::<f64>() / 10.0)
        .collect();
    let lib = ci_standard_batching(&means, Probability::new(0.1).unwrap()).unwrap();
    let fields: Vec<f64> = stdout(&o)
        .lines()
        .nth(1)
        .unwrap()
        .split(',')
        .map(|f| f.parse().unwrap())
        .collect();
    assert!((fields[0] - lib.center).abs() < 1e-12);
    assert!((fields[1] - lib.half_width).abs() < 1e-12);

    let o = cheapci(&["ci", "compute", "--method", "b", "--data", data.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    for method in ["cb", "bj", "ob_new"] {
        let o = cheapci(&[
            "ci", "compute", "--method", method, "--data", data.to_str().unwrap(), "--k", "4",
            "--gamma", "0.3", "--functional", "quantile:0.5",
        ]);
        assert!(o.status.success(), "{method}: {}", stderr(&o));
    }
}

#[test]
fn calibrate_ob() {
    let args = [
        "calibrate", "ob", "--gamma", "0.3", "--k", "6", "--alpha", "0.1", "--reps", "1000000",
        "--seed", "5", "--precision", "full",
    ];
    let o = cheapci(&args);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    let value: f64 = out.lines().nth(1).unwrap().split(',').next().unwrap().parse().unwrap();
    let t = t_quantile(5, Probability::new(0.95).unwrap()).unwrap();
    assert!(value > t, "{value} vs {t}");
    assert_eq!(out, stdout(&cheapci(&args)));

    let shape = BatchScheme::su_overlapping(6, 0.3)
        .unwrap()
        .covariance_shape()
        .unwrap();
    let lib = calibrate_ob_critical(
        &shape,
        0.3,
        Probability::new(0.1).unwrap(),
        1_000_000,
        &RngStream::new(5, 0),
    )
    .unwrap();
    assert_eq!(value, lib.value);

    let o = cheapci(&[
        "calibrate", "ob", "--gamma", "0.3", "--k", "6", "--alpha", "0.1", "--reps", "10",
        "--seed", "5",
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("mc_reps too small"));

    let o = cheapci(&["calibrate", "ob", "--gamma", "1.5", "--k", "6"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn clap_usage_errors_exit_2() {
    let o = cheapci(&["ci", "compute", "--method", "nope", "--estimates", "x.csv"]);
    assert_eq!(o.status.code(), Some(2));
    let o = cheapci(&["ci", "compute", "--method", "b"]);
    assert_eq!(o.status.code(), Some(2));
}
