use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use cavray_core::spectra::SpectrumTrace;

fn cavray(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cavray"))
        .args(args)
        .env_remove("CAVRAY_SPECIES_DB")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn repo_file(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..").join(rel)
}

#[test]
fn cavity_table_shows_geometry_chain() {
    let o = cavray(&["cavity"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    for needle in ["free_spectral_range                24.98", "waist                              43.59", "4.153574  GHz"] {
        assert!(text.contains(needle), "missing {needle:?} in\n{text}");
    }
}

#[test]
fn shipped_config_matches_builtin_reference() {
    let path = repo_file("configs/reference.cfg");
    let path = path.to_str().unwrap();
    for cmd in ["cavity", "enhance", "forecast"] {
        let with = cavray(&[cmd, "--config", path]);
        assert!(with.status.success(), "{}", stderr(&with));
        assert_eq!(stdout(&with), stdout(&cavray(&[cmd])), "{cmd}");
    }
}

#[test]
fn validate_is_byte_identical_under_seed() {
    let a = cavray(&["validate", "--seed", "42"]);
    let b = cavray(&["validate", "--seed", "42"]);
    assert!(a.status.success(), "{}", stdout(&a));
    assert_eq!(a.stdout, b.stdout);
    assert!(stdout(&a).contains("12/12 checks passed"));
    let json = cavray(&["validate", "--seed", "7", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_slice(&json.stdout).unwrap();
    assert_eq!(v["seed"], 7);
    assert_eq!(v["checks"].as_array().unwrap().len(), 12);
}

#[test]
fn enhance_reports_factor_and_backout() {
    let o = cavray(&["enhance"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("measured enhancement factor 38.5"), "{text}");
    assert!(text.contains("free-space back-out         1.87 fW"), "{text}");
    let json = cavray(&["enhance", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_slice(&json.stdout).unwrap();
    assert_eq!(v["schema"], "cavray.enhancement_report/1");
    assert_eq!(v["finesse_dependence"].as_array().unwrap().len(), 3);
}

#[test]
fn purcell_and_forecast_agree() {
    let p = stdout(&cavray(&["purcell", "--format", "json"]));
    let v: serde_json::Value = serde_json::from_str(&p).unwrap();
    assert!(v["relative_difference"].as_f64().unwrap().abs() < 1e-12);
    assert!((v["purcell_2c"].as_f64().unwrap() - 0.02705).abs() < 1e-4);
    let f = stdout(&cavray(&["forecast", "--format", "csv"]));
    assert!(f.starts_with("quantity,value,unit\n"));
    assert!(f.contains("cavity_to_free_space,2.7045802"), "{f}");
}

#[test]
fn scan_writes_parseable_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("artifacts");
    let o = cavray(&["scan", "--format", "csv", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let path = out.join("scan.csv");
    let trace = SpectrumTrace::from_csv(fs::File::open(&path).unwrap(), "scan.csv").unwrap();
    assert_eq!(trace.detunings.len(), 3701);
    // two resonance orders inside -6..31 GHz, each normalized to Xe plus the admixtures
    let peaks = trace.signals.iter().filter(|&&s| s > 1.4).count();
    assert!(peaks >= 2, "{peaks}");
}

#[test]
fn malformed_config_reports_line() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    fs::write(&cfg, "# comment\npump.wavelength_nm = 532\npump.wavelength = 1064\n").unwrap();
    let o = cavray(&["cavity", "--config", cfg.to_str().unwrap()]);
    assert!(!o.status.success());
    let err = stderr(&o);
    assert!(err.contains("bad.cfg:3:"), "{err}");
    assert!(err.contains("pump.wavelength_nm"), "{err}");
}

#[test]
fn missing_anchor_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("plain.cfg");
    fs::write(&cfg, "gas.pressure_mbar = 50\n").unwrap();
    let o = cavray(&["forecast", "--config", cfg.to_str().unwrap()]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("anchor"), "{}", stderr(&o));
    assert!(cavray(&["cavity", "--config", cfg.to_str().unwrap()]).status.success());
}

#[test]
fn species_database_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let db = dir.path().join("species.csv");
    fs::write(&db, "name,molar_mass_g_per_mol,polarizability_A3\nXe,131.29,4.04\nN2,28.01,1.74\nCF3H,70.01,4.04\n").unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_cavray"))
        .arg("enhance")
        .env("CAVRAY_SPECIES_DB", &db)
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    // equal polarizability: the ratio reduces to the spectral-overlap ratio, above 0.5
    let line = text.lines().find(|l| l.starts_with("species ratio")).unwrap();
    let cf3h: f64 = line.split(':').nth(3).unwrap().trim().parse().unwrap();
    assert!(cf3h > 0.5 && cf3h < 1.0, "{line}");

    let broken = dir.path().join("broken.csv");
    fs::write(&broken, "name,molar_mass_g_per_mol,polarizability_A3\nXe,heavy,4.04\n").unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_cavray"))
        .arg("cavity")
        .env("CAVRAY_SPECIES_DB", &broken)
        .output()
        .unwrap();
    assert!(!o.status.success());
    assert!(stderr(&o).contains("broken.csv:2:"), "{}", stderr(&o));
}

#[test]
fn out_directory_receives_named_artifact() {
    let dir = tempfile::tempdir().unwrap();
    let o = cavray(&["overlap", "--format", "json", "--out", dir.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(o.stdout.is_empty());
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("overlap.json")).unwrap()).unwrap();
    let rel = (v["eta_numeric"].as_f64().unwrap() / v["eta_analytic"].as_f64().unwrap() - 1.0).abs();
    assert!(rel < 1e-3);
}
