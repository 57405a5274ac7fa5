use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

fn strata(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_strata"))
        .args(args)
        .env("SOURCE_DATE_EPOCH", "1700000000")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn bifurcate(dir: &Path, cfg: &str) -> PathBuf {
    let out = dir.join("points.json");
    let run = strata(&["bifurcate", "-c", p(&config(cfg)), "--grid", "256", "--out", p(&out)]);
    assert_eq!(code(&run), 0, "{}", String::from_utf8_lossy(&run.stderr));
    out
}

#[test]
fn validate_accepts_good_config() {
    let run = strata(&["validate", "-c", p(&config("three_layer.json"))]);
    assert_eq!(code(&run), 0);
    let report: serde_json::Value = serde_json::from_slice(&run.stdout).unwrap();
    assert_eq!(report["ok"], true);
}

#[test]
fn validate_rejects_bad_configs() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(
        &bad,
        r#"{"n": 2, "g": 1, "rho": [1, 2, 0], "alpha": [0, 0, 0], "d": [1, 2, 3], "sigma": [1, 1],
            "lattice": {"lambda1": [1, 0], "lambda2": [0, 1]}}"#,
    )
    .unwrap();
    let run = strata(&["validate", "-c", p(&bad)]);
    assert_eq!(code(&run), 1);
    assert!(String::from_utf8_lossy(&run.stdout).contains("rho not strictly decreasing"));
    assert_eq!(code(&strata(&["validate", "-c", p(&config("resonant.json"))])), 1);
    assert_eq!(code(&strata(&["validate", "-c", p(&dir.path().join("missing.json"))])), 3);
    assert_eq!(code(&strata(&["frobnicate"])), 1);
}

#[test]
fn scan_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    for out in [&a, &b] {
        let run = strata(&["scan", "-c", p(&config("three_layer.json")), "--grid", "64", "--out", p(out)]);
        assert_eq!(code(&run), 0);
    }
    let text = fs::read_to_string(&a).unwrap();
    assert_eq!(text.lines().next().unwrap(), "theta,mu_1_k1,mu_2_k1,mu_1_k2,mu_2_k2");
    assert_eq!(text.lines().count(), 65);
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    let ma = fs::read(dir.path().join("a.csv.manifest.json")).unwrap();
    let mb = fs::read_to_string(dir.path().join("b.csv.manifest.json")).unwrap();
    assert_eq!(String::from_utf8(ma).unwrap().replace("a.csv", "b.csv"), mb);
}

#[test]
fn outputs_are_not_overwritten_without_force() {
    let dir = tempfile::tempdir().unwrap();
    let out = bifurcate(dir.path(), "three_layer.json");
    let first = fs::read(&out).unwrap();
    let again = strata(&["bifurcate", "-c", p(&config("three_layer.json")), "--grid", "256", "--out", p(&out)]);
    assert_eq!(code(&again), 3);
    assert_eq!(fs::read(&out).unwrap(), first);
    let forced =
        strata(&["bifurcate", "-c", p(&config("three_layer.json")), "--grid", "256", "--out", p(&out), "--force"]);
    assert_eq!(code(&forced), 0);
    assert_eq!(fs::read(&out).unwrap(), first);
}

#[test]
fn bifurcate_writes_points_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = bifurcate(dir.path(), "three_layer.json");
    let points: serde_json::Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(points["accepted"].as_array().unwrap().len(), 8);
    assert_eq!(points["manifest"], "points.json.manifest.json");
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("points.json.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["command"], "bifurcate");
    assert_eq!(manifest["config_hash"], points["config_hash"]);
    assert_eq!(manifest["outputs"][0], "points.json");
}

#[test]
fn wavefield_at_zero_amplitude_is_flat() {
    let dir = tempfile::tempdir().unwrap();
    let points = bifurcate(dir.path(), "three_layer.json");
    let field = dir.path().join("field");
    let run = strata(&[
        "wavefield", "-c", p(&config("three_layer.json")), "--points", p(&points), "--point", "3", "--na", "4", "--nb",
        "4", "--nz", "3", "--out", p(&field),
    ]);
    assert_eq!(code(&run), 0, "{}", String::from_utf8_lossy(&run.stderr));
    let eta = fs::read_to_string(field.join("eta.csv")).unwrap();
    assert_eq!(eta.lines().next().unwrap(), "x,y,eta_1,eta_2");
    for line in eta.lines().skip(1) {
        for v in line.split(',').skip(2) {
            assert_eq!(v.parse::<f64>().unwrap(), 0.0);
        }
    }
    for name in ["volume.csv", "metadata.json", "manifest.json"] {
        assert!(field.join(name).exists());
    }
    let rerun = strata(&[
        "wavefield", "-c", p(&config("three_layer.json")), "--points", p(&points), "--out", p(&field),
    ]);
    assert_eq!(code(&rerun), 3);
}

#[test]
fn wavefield_refuses_points_of_another_config() {
    let dir = tempfile::tempdir().unwrap();
    let points = bifurcate(dir.path(), "three_layer.json");
    let run = strata(&[
        "wavefield", "-c", p(&config("sheared_interface.json")), "--points", p(&points), "--out",
        p(&dir.path().join("f")),
    ]);
    assert_eq!(code(&run), 1);
    let out_of_range = strata(&[
        "wavefield", "-c", p(&config("three_layer.json")), "--points", p(&points), "--point", "99", "--out",
        p(&dir.path().join("g")),
    ]);
    assert_eq!(code(&out_of_range), 1);
}

#[test]
fn continuation_to_the_same_vorticity_is_the_identity() {
    let dir = tempfile::tempdir().unwrap();
    let points = bifurcate(dir.path(), "three_layer.json");
    let out = dir.path().join("cont.json");
    let run = strata(&[
        "continue-alpha", "-c", p(&config("three_layer.json")), "--points", p(&points), "--point", "2", "--target",
        "0,0,0", "--steps", "2", "--out", p(&out),
    ]);
    assert_eq!(code(&run), 0, "{}", String::from_utf8_lossy(&run.stderr));
    let before: serde_json::Value = serde_json::from_str(&fs::read_to_string(&points).unwrap()).unwrap();
    let after: serde_json::Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    let (t0, t1) = (&before["accepted"][2]["tau"], &after["point"]["tau"]);
    for key in ["r", "theta"] {
        let (a, b) = (t0[key].as_f64().unwrap(), t1[key].as_f64().unwrap());
        assert!((a - b).abs() < 1e-12, "{key}: {a} vs {b}");
    }

    let moved = dir.path().join("moved.json");
    let run = strata(&[
        "continue-alpha", "-c", p(&config("three_layer.json")), "--points", p(&points), "--target", "0.01,-0.01,0",
        "--out", p(&moved),
    ]);
    assert_eq!(code(&run), 0, "{}", String::from_utf8_lossy(&run.stderr));
    let bad = strata(&[
        "continue-alpha", "-c", p(&config("three_layer.json")), "--points", p(&points), "--target", "0.01",
        "--out", p(&dir.path().join("bad.json")),
    ]);
    assert_eq!(code(&bad), 1);
}

#[test]
fn lsdemo_passes() {
    let run = strata(&["lsdemo"]);
    assert_eq!(code(&run), 0);
    let text = String::from_utf8_lossy(&run.stdout);
    assert_eq!(text.lines().filter(|l| l.starts_with("PASS")).count(), 4);
}

#[test]
fn help_exits_zero() {
    assert_eq!(code(&strata(&["--help"])), 0);
    assert_eq!(code(&strata(&["--version"])), 0);
}
