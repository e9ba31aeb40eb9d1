use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use stochstab::RunManifest;

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

fn stochstab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_stochstab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Data rows of a CSV file, skipping comments and the header.
fn csv_rows(file: &Path) -> Vec<Vec<String>> {
    std::fs::read_to_string(file)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn moments_scalar_reports_rate() {
    let dir = tempfile::tempdir().unwrap();
    let spec = data("scalar.json");
    let o = stochstab(&["moments", "--spec", path(&spec), "--degree", "2", "--out", path(dir.path())]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("lambda_2 = abscissa / 2 = -0.875"), "{}", stdout(&o));
    let rows = csv_rows(&dir.path().join("spectrum.csv"));
    assert_eq!(rows[0][1].parse::<f64>().unwrap(), -1.75);
    let op = std::fs::read_to_string(dir.path().join("operator.txt")).unwrap();
    assert!(op.contains("# 0: (0,0)"));
    assert!(dir.path().join("manifest.json").exists());
}

#[test]
fn moments_degree_one_is_drift_spectrum() {
    let dir = tempfile::tempdir().unwrap();
    let spec = data("rotation.json");
    let o = stochstab(&["moments", "--spec", path(&spec), "--degree", "1", "--out", path(dir.path())]);
    assert_eq!(o.status.code(), Some(0));
    let rows = csv_rows(&dir.path().join("spectrum.csv"));
    let got: Vec<(f64, f64)> = rows
        .iter()
        .map(|r| (r[1].parse().unwrap(), r[2].parse().unwrap()))
        .collect();
    assert_eq!(got.len(), 2);
    for ((re, im), want_im) in got.iter().zip([1.0, -1.0]) {
        assert!((re + 0.5).abs() < 1e-12 && (im - want_im).abs() < 1e-12, "{got:?}");
    }
}

#[test]
fn malformed_spec_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\n  \"dim\": 1,\n  \"noise_count\": 1,\n  \"drift\": [[-1]],\n  \"noise\": [[[\"x\"]]]\n}").unwrap();
    let o = stochstab(&["moments", "--spec", path(&bad), "--degree", "2", "--out", path(&dir.path().join("o"))]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains(":5:") && err.contains("noise[0][0][0]"), "{err}");
}

#[test]
fn basis_over_cap_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let spec = data("rotation.json");
    let o = stochstab(&[
        "moments", "--spec", path(&spec), "--degree", "30", "--max-basis", "8", "--out", path(dir.path()),
    ]);
    assert_eq!(o.status.code(), Some(3));
    assert!(!o.stderr.is_empty());
}

#[test]
fn simulate_is_reproducible_and_marks_odd_orders() {
    let dir = tempfile::tempdir().unwrap();
    let spec = data("scalar.json");
    let run = |out: &Path| {
        stochstab(&[
            "simulate", "--spec", path(&spec), "--degree", "2,7", "--paths", "600", "--dt", "1e-2",
            "--horizon", "2", "--seed", "11", "--out", path(out),
        ])
    };
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    let oa = run(&a);
    assert_eq!(oa.status.code(), Some(0), "{}", String::from_utf8_lossy(&oa.stderr));
    run(&b);
    let ta = std::fs::read(a.join("trace.csv")).unwrap();
    assert_eq!(ta, std::fs::read(b.join("trace.csv")).unwrap());
    let text = String::from_utf8(ta).unwrap();
    assert_eq!(text.lines().next(), Some("t,p,estimate,stderr"));
    let summary = stdout(&oa);
    let row7 = summary.lines().find(|l| l.starts_with("7 ")).unwrap();
    assert!(row7.contains("n/a"), "{summary}");
    let row2 = summary.lines().find(|l| l.starts_with("2 ")).unwrap();
    assert!(row2.contains("-1.75"), "{summary}");
}

#[test]
fn overflow_exits_4_with_partial_trace() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("blowup.json");
    std::fs::write(&spec, r#"{"dim": 1, "noise_count": 0, "drift": [[800.0]], "noise": []}"#).unwrap();
    let out = dir.path().join("o");
    let o = stochstab(&[
        "simulate", "--spec", path(&spec), "--paths", "4", "--dt", "1e-3", "--horizon", "2", "--out", path(&out),
    ]);
    assert_eq!(o.status.code(), Some(4));
    let rows = csv_rows(&out.join("trace.csv"));
    assert!(!rows.is_empty());
    let last_t: f64 = rows.last().unwrap()[0].parse().unwrap();
    assert!(last_t < 1.0);
    assert!(out.join("manifest.json").exists());
}

#[test]
fn whitenoise_at_threshold_is_marginal() {
    let dir = tempfile::tempdir().unwrap();
    let o = stochstab(&[
        "langmuir", "whitenoise", "--mass", "1", "--grid", "k=0.5:2:4", "--at-threshold", "--out", path(dir.path()),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let rows = csv_rows(&dir.path().join("stability_map.csv"));
    assert_eq!(rows.len(), 4);
    assert!(rows.iter().all(|r| r[3] == "marginal"), "{rows:?}");
    let text = std::fs::read_to_string(dir.path().join("stability_map.csv")).unwrap();
    assert!(text.starts_with("# units:"));
}

#[test]
fn appendix_zero_noise_residual() {
    let dir = tempfile::tempdir().unwrap();
    let o = stochstab(&[
        "langmuir", "appendix", "--eps1", "1", "--eps2", "2", "--sigma2", "0", "--out", path(dir.path()),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("residual = "));
    let rows = csv_rows(&dir.path().join("appendix.csv"));
    let residual: f64 = rows[0][3].parse().unwrap();
    assert!(residual <= 1e-10, "{residual}");
}

#[test]
fn boundstate_gaussian_growth_rate() {
    let dir = tempfile::tempdir().unwrap();
    let o = stochstab(&[
        "langmuir", "boundstate", "--profile", "gaussian", "--amplitude", "1", "--width", "1", "--mass", "1",
        "--out", path(dir.path()),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let file = dir.path().join("boundstate.csv");
    let text = std::fs::read_to_string(&file).unwrap();
    assert!(text.contains("# reduction:"));
    let star: f64 = text
        .lines()
        .find_map(|l| l.strip_prefix("# growth rate lambda* = "))
        .unwrap()
        .parse()
        .unwrap();
    assert!(star > 0.0);
    let row = csv_rows(&file)
        .into_iter()
        .find(|r| r[0].parse::<f64>().unwrap() == star)
        .unwrap();
    assert!(row[2].parse::<f64>().unwrap().abs() <= 1e-8);
}

#[test]
fn missing_bound_state_exits_5() {
    let dir = tempfile::tempdir().unwrap();
    let o = stochstab(&[
        "langmuir", "boundstate", "--amplitude", "1e-9", "--points", "512", "--out", path(dir.path()),
    ]);
    assert_eq!(o.status.code(), Some(5), "{}", stdout(&o));
    assert!(!o.stderr.is_empty());
}

#[test]
fn threshold_small_grid() {
    let dir = tempfile::tempdir().unwrap();
    let o = stochstab(&[
        "langmuir", "threshold", "--amplitude", "0.2", "--points", "1024", "--grid", "k=0.5:1:2", "--out",
        path(dir.path()),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = csv_rows(&dir.path().join("threshold.csv"));
    let c: Vec<f64> = rows.iter().map(|r| r[1].parse().unwrap()).collect();
    assert_eq!(c.len(), 2);
    assert!(c[0] > 0.0 && c[1] >= c[0], "{c:?}");
}

#[test]
fn unknown_grid_axis_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let o = stochstab(&["langmuir", "dispersion", "--grid", "q=0:1:3", "--out", path(dir.path())]);
    assert_eq!(o.status.code(), Some(2));
    let o = stochstab(&["langmuir", "dispersion", "--grid", "k=0:1", "--out", path(dir.path())]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn rerun_reproduces_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let spec = data("rotation.json");
    let first = dir.path().join("first");
    let o = stochstab(&[
        "simulate", "--spec", path(&spec), "--degree", "2", "--paths", "300", "--dt", "1e-2", "--horizon", "1",
        "--seed", "5", "--out", path(&first),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let manifest_path = first.join("manifest.json");
    let manifest = RunManifest::read(&manifest_path).unwrap();
    assert_eq!(manifest.seeds, vec![5]);
    assert_eq!(manifest.command, "simulate");

    let second = dir.path().join("second");
    let o = stochstab(&["rerun", "--manifest", path(&manifest_path), "--out", path(&second)]);
    assert_eq!(o.status.code(), Some(0));
    for name in &manifest.outputs {
        assert_eq!(
            std::fs::read(first.join(name)).unwrap(),
            std::fs::read(second.join(name)).unwrap(),
            "{name}"
        );
    }
    let again = RunManifest::read(&second.join("manifest.json")).unwrap();
    assert_eq!(again.config, manifest.config);
}
