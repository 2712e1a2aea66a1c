//! End-to-end checks of the CLI pipelines: determinism, composability,
//! exit codes and artifact shapes.

use std::fs;
use std::path::Path;
use std::process::Command;

fn corrsim() -> Command {
    Command::new(env!("CARGO_BIN_EXE_corrsim"))
}

fn write_config(dir: &Path, text: &str) -> std::path::PathBuf {
    let path = dir.join("exp.cfg");
    fs::write(&path, text).unwrap();
    path
}

const SMALL: &str = "j = 30\nk = 4\nn = 6\nr = 50\nsigma_l2 = 2e-3\nsigma_s2 = 5e-4\n\
                     m_n = full\nfamily = primitive\nseed = 99\nreorderings = 50\n";

#[test]
fn simulate_is_byte_identical_across_reruns() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    for out in ["a", "b"] {
        let status = corrsim()
            .args(["simulate", "--config"])
            .arg(&cfg)
            .args(["--out"])
            .arg(dir.path().join(out))
            .status()
            .unwrap();
        assert!(status.success());
    }
    let a = fs::read(dir.path().join("a/records.csv")).unwrap();
    let b = fs::read(dir.path().join("b/records.csv")).unwrap();
    assert_eq!(a, b, "records.csv differs between reruns");
    let a = fs::read(dir.path().join("a/circuits.csv")).unwrap();
    let b = fs::read(dir.path().join("b/circuits.csv")).unwrap();
    assert_eq!(a, b, "circuits.csv differs between reruns");
}

#[test]
fn thread_count_does_not_change_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    for (out, threads) in [("t1", "1"), ("t8", "8")] {
        let status = corrsim()
            .args(["simulate", "--config"])
            .arg(&cfg)
            .args(["--threads", threads, "--out"])
            .arg(dir.path().join(out))
            .status()
            .unwrap();
        assert!(status.success());
    }
    let a = fs::read(dir.path().join("t1/records.csv")).unwrap();
    let b = fs::read(dir.path().join("t8/records.csv")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn variance_then_fit_compose() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let out = dir.path().join("run");
    for cmd in ["simulate", "variance", "fit", "scan"] {
        let status = corrsim()
            .args([cmd, "--config"])
            .arg(&cfg)
            .args(["--out"])
            .arg(&out)
            .status()
            .unwrap();
        assert!(status.success(), "{cmd} failed");
    }
    for artifact in ["records.csv", "variance.csv", "fit.csv", "scan.csv"] {
        assert!(out.join(artifact).exists(), "{artifact} missing");
    }
    let fit = fs::read_to_string(out.join("fit.csv")).unwrap();
    assert!(fit.lines().count() >= 2, "fit.csv has no data rows");
    assert!(fit.starts_with("family,m_n,sigma_s2,sigma_l2,rss,aic,bic"));
    // every pipeline leaves a manifest with the config echo
    for m in ["manifest_simulate.txt", "manifest_variance.txt", "manifest_fit.txt"] {
        let text = fs::read_to_string(out.join(m)).unwrap();
        assert!(text.contains("seed=99"));
        assert!(text.contains("version="));
    }
}

#[test]
fn fit_without_variance_is_a_runtime_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let output = corrsim()
        .args(["fit", "--config"])
        .arg(&cfg)
        .args(["--out"])
        .arg(dir.path().join("empty"))
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&output.stderr).contains("variance"));
}

#[test]
fn bad_config_exits_with_code_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "j = 10\nm_n = 99\n");
    let output = corrsim()
        .args(["simulate", "--config"])
        .arg(&cfg)
        .args(["--out"])
        .arg(dir.path().join("x"))
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));

    let cfg = write_config(dir.path(), "sigma = 1\n");
    let output = corrsim()
        .args(["simulate", "--config"])
        .arg(&cfg)
        .args(["--out"])
        .arg(dir.path().join("y"))
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&output.stderr).contains("unknown key"));
}

#[test]
fn predict_emits_gamma_parameters() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "j = 100\nk = 50\nn = 200\nr = 220\nsigma_l2 = 2e-3\nsigma_s2 = 0\n\
         m_n = full\nfamily = primitive\nbandwidth = single\nseed = 12\n",
    );
    let out = dir.path().join("pred");
    let status = corrsim()
        .args(["predict", "--config"])
        .arg(&cfg)
        .args(["--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let gamma = fs::read_to_string(out.join("predict_gamma.csv")).unwrap();
    let row = gamma.lines().nth(1).expect("one gamma row");
    let cols: Vec<&str> = row.split(',').collect();
    assert_eq!(cols[1], "correlated");
    let alpha: f64 = cols[2].parse().unwrap();
    let beta: f64 = cols[3].parse().unwrap();
    assert!((alpha - 1.0).abs() < 1e-12);
    assert!((beta - 0.0804).abs() < 1e-4, "beta {beta}");
    let curve = fs::read_to_string(out.join("predict.csv")).unwrap();
    assert_eq!(curve.lines().count(), 201);
}

#[test]
fn walk_check_and_gate_dumps() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "j = 50\nk = 3\nn = 1\nr = 10\nsigma_l2 = 0\nsigma_s2 = 0\nm_n = full\n\
         family = primitive\nseed = 5\ndelta_static = 0.001\n",
    );
    let out = dir.path().join("wc");
    let status = corrsim()
        .args(["walk-check", "--config"])
        .arg(&cfg)
        .args(["--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let csv = fs::read_to_string(out.join("walkcheck.csv")).unwrap();
    assert_eq!(csv.lines().count(), 4);
    for line in csv.lines().skip(1) {
        let diff: f64 = line.split(',').nth(3).unwrap().parse().unwrap();
        assert!(diff < 1e-6, "walk-check diff {diff} at delta 1e-3");
    }

    let status = corrsim()
        .args(["dump-gates", "--config"])
        .arg(&cfg)
        .args(["--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let table = fs::read_to_string(out.join("clifford_table.csv")).unwrap();
    assert_eq!(table.lines().count(), 25);
    let schedules = fs::read_to_string(out.join("schedules.csv")).unwrap();
    // 24 elements x 3 families, at least one segment each
    assert!(schedules.lines().count() > 3 * 24);
}

#[test]
fn ff_artifact_shows_corpse_whitening() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "j = 10\nk = 1\nn = 1\nr = 10\nsigma_l2 = 0\nsigma_s2 = 0\nm_n = full\n\
         family = primitive\nseed = 5\nomega_min = 1e-3\nomega_max = 1e-2\nomega_points = 10\n",
    );
    let out = dir.path().join("ff");
    let status =
        corrsim().args(["ff", "--config"]).arg(&cfg).args(["--out"]).arg(&out).status().unwrap();
    assert!(status.success());
    let csv = fs::read_to_string(out.join("ff.csv")).unwrap();
    let rows: Vec<Vec<f64>> = csv
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 10);
    // primitive roughly flat at low omega, corpse rising ~ omega^2
    let slope = |col: usize| {
        let a = rows.first().unwrap();
        let b = rows.last().unwrap();
        (b[col].ln() - a[col].ln()) / (b[0].ln() - a[0].ln())
    };
    assert!(slope(1).abs() < 0.3, "primitive slope {}", slope(1));
    assert!(slope(2) > 1.7, "corpse slope {}", slope(2));
}

#[test]
fn preset_configs_parse_and_validate() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut seen = 0;
    for entry in fs::read_dir(root).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().and_then(|e| e.to_str()) == Some("cfg") {
            let output = corrsim()
                .args(["predict", "--config"])
                .arg(&path)
                .args(["--out"])
                .arg(tempfile::tempdir().unwrap().path().join("p"))
                .output()
                .unwrap();
            assert!(output.status.success(), "preset {path:?} failed");
            seen += 1;
        }
    }
    assert!(seen >= 8, "expected the shipped presets, found {seen}");
}
