use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn erestab(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_erestab"))
        .args(args)
        .arg("--out-dir")
        .arg(dir)
        .output()
        .expect("binary runs")
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

const TINY: [&str; 8] = ["scan-theta", "--beta", "0.5,2,9", "--e", "0,0.1", "--no-curves", "--svg", "theta.svg"];

#[test]
fn tiny_theta_scan_matches_golden_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = erestab(dir.path(), &TINY);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let golden = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden");
    assert_eq!(
        fs::read_to_string(dir.path().join("theta.csv")).unwrap(),
        fs::read_to_string(golden.join("theta_tiny.csv")).unwrap()
    );
    assert_eq!(
        fs::read_to_string(dir.path().join("theta.svg")).unwrap(),
        fs::read_to_string(golden.join("theta_tiny.svg")).unwrap()
    );
    let m = read_json(&dir.path().join("manifest.json"));
    assert_eq!(m["command"], "scan-theta");
    assert_eq!(m["parameters"]["beta"], "0.5,2,9");
    for key in ["tolerances", "version", "started_at", "duration_s", "settings_hash"] {
        assert!(!m[key].is_null(), "manifest lacks {key}");
    }
}

#[test]
fn reruns_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    assert!(erestab(a.path(), &TINY).status.success());
    // same run driven by a config file instead of flags
    let cfg = b.path().join("run.json");
    fs::write(
        &cfg,
        r#"{"command": "scan-theta",
            "parameters": {"beta": [0.5, 2, 9], "e": "0,0.1", "no_curves": true},
            "output": {"svg": "theta.svg"}}"#,
    )
    .unwrap();
    let out = erestab(b.path(), &["scan-theta", "--beta", "1", "--config", cfg.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for f in ["theta.csv", "theta.svg"] {
        assert_eq!(fs::read(a.path().join(f)).unwrap(), fs::read(b.path().join(f)).unwrap(), "{f}");
    }
    let ha = read_json(&a.path().join("manifest.json"))["settings_hash"].clone();
    let hb = read_json(&b.path().join("manifest.json"))["settings_hash"].clone();
    assert_eq!(ha, hb);
}

#[test]
fn stability_of_symmetric_chain() {
    let dir = tempfile::tempdir().unwrap();
    let out = erestab(dir.path(), &["stability", "--family", "collinear", "--m", "0.25,0.5,0.25", "--e", "0.0"]);
    assert!(out.status.success());
    let v = read_json(&dir.path().join("stability.json"));
    // β(m₂ = 0.5) exceeds 1, so the circular orbit is unstable
    assert!(v["beta_hls"].as_f64().unwrap() > 1.0);
    assert_eq!(v["verdict"], "hyperbolic");
    assert_eq!(v["eigenvalues"].as_array().unwrap().len(), 4);
    let l3 = v["lambda3"].as_f64().unwrap();
    let l4 = v["lambda4"].as_f64().unwrap();
    assert!((l3 + l4 - 3.0).abs() < 1e-9);
}

#[test]
fn find_mstar_writes_result() {
    let dir = tempfile::tempdir().unwrap();
    let out = erestab(dir.path(), &["find-mstar", "--tol", "1e-6"]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("m* = 8.54"));
    let v = read_json(&dir.path().join("mstar.json"));
    let m = v["m_star"].as_f64().unwrap();
    assert!((0.84..0.87).contains(&m));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let code = |args: &[&str]| erestab(dir.path(), args).status.code();
    assert_eq!(code(&["stability", "--family", "hls", "--beta", "10"]), Some(2));
    assert_eq!(code(&["scan-theta", "--beta", "0:9", "--e", "0"]), Some(2));
    assert_eq!(code(&["find-mstar", "--tol", "1e-12"]), Some(2));
    let cfg = dir.path().join("bad.json");
    fs::write(&cfg, r#"{"parameters": {"tol": 1e-6, "colour": "red"}}"#).unwrap();
    assert_eq!(code(&["find-mstar", "--config", cfg.to_str().unwrap()]), Some(2));
    fs::write(&cfg, r#"{"command": "cc"}"#).unwrap();
    assert_eq!(code(&["find-mstar", "--config", cfg.to_str().unwrap()]), Some(2));
    // a collinear guess on the line of the primaries is rejected up front
    assert_eq!(code(&["cc", "--m", "1,1,1", "--guess", "0.3,0"]), Some(2));
}

#[test]
fn polygon_and_mass_commands() {
    let dir = tempfile::tempdir().unwrap();
    let out = erestab(dir.path(), &["polygon", "--n", "8", "--m0-over-m", "1e6", "--site", "S3"]);
    assert!(out.status.success());
    let csv = fs::read_to_string(dir.path().join("polygon.csv")).unwrap();
    assert_eq!(csv.lines().count(), 2);

    let out = erestab(dir.path(), &["scan-mass", "--m1", "0.05,0.25", "--m3", "0.05,0.25", "--svg", "mass.svg"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.path().join("mass.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().skip(1).collect();
    assert_eq!(rows.len(), 4);
    assert!(rows[0].contains(",true,"));
    assert!(rows[3].contains(",false,"));
    assert!(fs::read_to_string(dir.path().join("mass.svg")).unwrap().contains(r#"class="stable""#));

    let out = erestab(
        dir.path(),
        &["polygon-verdicts", "--n", "8", "--m0-over-m", "1000", "--e", "0", "--sites", "S1,S2"],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let ext = read_json(&dir.path().join("polygon_extents.json"));
    assert_eq!(ext.as_array().unwrap().len(), 2);
    for e in ext.as_array().unwrap() {
        assert_eq!(e["e_max"], 0.0);
    }
}

#[test]
fn index_command() {
    let dir = tempfile::tempdir().unwrap();
    let out = erestab(dir.path(), &["index", "--family", "alpha-beta", "--alpha", "0.5", "--beta", "1.5", "--e", "0.2", "--rho", "0.5"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v = read_json(&dir.path().join("index.json"));
    assert_eq!(v["indices"][0]["phi"], 2);
}
