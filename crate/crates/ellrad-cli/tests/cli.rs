//! End-to-end runs of the installed binary: pipeline chaining, sidecar
//! metadata, determinism, override precedence, and the exit-code contract.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn ellrad(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ellrad"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn assert_ok(out: &Output) {
    assert!(
        out.status.success(),
        "exit {:?}\nstdout: {}\nstderr: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path
}

/// Small data window over the default Gaussian: enough for the numeric
/// pipeline commands without real accuracy demands.
const SMALL: &str = r#"{
  "field_grid": { "dims": [16, 16], "spacing": [0.2, 0.2] },
  "data_grid": { "u_dims": [41], "u_spacing": [0.25], "dt": 0.2, "nt": 12 },
  "method": { "order": 16 }
}"#;

#[test]
fn pipeline_chains_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "run.json", SMALL);
    let cfg = cfg.to_str().unwrap();
    let volume = dir.path().join("volume.f64");
    let derived = dir.path().join("derived.f64");
    let back = dir.path().join("back.f64");

    assert_ok(&ellrad(&["--config", cfg, "forward", "--out", volume.to_str().unwrap()]));
    assert_ok(&ellrad(&[
        "--config",
        cfg,
        "derive",
        "--in",
        volume.to_str().unwrap(),
        "--out",
        derived.to_str().unwrap(),
    ]));
    assert_ok(&ellrad(&[
        "--config",
        cfg,
        "backproject",
        "--in",
        derived.to_str().unwrap(),
        "--out",
        back.to_str().unwrap(),
    ]));

    for payload in [&volume, &derived, &back] {
        assert!(payload.exists(), "{payload:?} missing");
        let sidecar = payload.with_extension("f64.json");
        assert!(sidecar.exists(), "{sidecar:?} missing");
    }
    let s = ellrad::io::read_sinogram(&derived).unwrap();
    assert_eq!(s.kind, ellrad::transform::DataKind::Derived);
    let (field, _) = ellrad::io::read_scalar_field(&back).unwrap();
    assert_eq!(field.grid.dims, vec![16, 16]);
    assert!(field.max_abs() > 0.0);
}

#[test]
fn identical_runs_write_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.f64");
    let b = dir.path().join("b.f64");
    assert_ok(&ellrad(&["phantom", "--out", a.to_str().unwrap()]));
    assert_ok(&ellrad(&["phantom", "--out", b.to_str().unwrap()]));
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    assert_eq!(
        fs::read(dir.path().join("a.f64.json")).unwrap(),
        fs::read(dir.path().join("b.f64.json")).unwrap()
    );
}

#[test]
fn model_mismatch_refuses_to_write() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "run.json", SMALL);
    let volume = dir.path().join("volume.f64");
    assert_ok(&ellrad(&[
        "--config",
        cfg.to_str().unwrap(),
        "forward",
        "--out",
        volume.to_str().unwrap(),
    ]));
    let out = dir.path().join("derived.f64");
    let res = ellrad(&[
        "--config",
        cfg.to_str().unwrap(),
        "--lambda",
        "1.9",
        "derive",
        "--in",
        volume.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(res.status.code(), Some(2));
    assert!(!out.exists(), "output must not be written on mismatch");
    assert!(String::from_utf8_lossy(&res.stderr).contains("does not match"));
}

#[test]
fn missing_input_is_an_io_failure() {
    let dir = tempfile::tempdir().unwrap();
    let res = ellrad(&[
        "backproject",
        "--in",
        dir.path().join("absent.f64").to_str().unwrap(),
        "--out",
        dir.path().join("out.f64").to_str().unwrap(),
    ]);
    assert_eq!(res.status.code(), Some(4));
}

#[test]
fn invalid_configuration_is_a_validation_failure() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "bad.json", r#"{"modle": {"lambda": 2.0}}"#);
    let res = ellrad(&[
        "--config",
        cfg.to_str().unwrap(),
        "phantom",
        "--out",
        dir.path().join("f.f64").to_str().unwrap(),
    ]);
    assert_eq!(res.status.code(), Some(2));
}

#[test]
fn spectral_inversion_writes_field_and_spectrum() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "run.json",
        r#"{
          "field_grid": { "dims": [16, 16], "spacing": [0.2, 0.2] },
          "data_grid": { "u_dims": [121], "u_spacing": [0.2], "dt": 0.1, "nt": 60 },
          "method": { "order": 24 }
        }"#,
    );
    let rec = dir.path().join("rec.f64");
    let spec = dir.path().join("rec_spectrum.c64");
    assert_ok(&ellrad(&[
        "--config",
        cfg.to_str().unwrap(),
        "invert",
        "--out",
        rec.to_str().unwrap(),
        "--dump-spectrum",
        spec.to_str().unwrap(),
    ]));
    let (field, _) = ellrad::io::read_scalar_field(&rec).unwrap();
    assert!(field.max_abs() > 0.0);
    let (spectrum, _) = ellrad::io::read_spectral_field(&spec).unwrap();
    assert_eq!(spectrum.grid.dims, field.grid.dims);
}

#[test]
fn chirp_inversion_honors_flags_and_dumps_panel() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "run.json",
        r#"{
          "field_grid": { "dims": [8, 8], "spacing": [0.2, 0.2] },
          "data_grid": { "u_dims": [401], "u_spacing": [0.05], "dt": 0.1, "nt": 60 },
          "method": { "order": 16, "scale_step": 0.25, "scale_count": 60 }
        }"#,
    );
    let rec = dir.path().join("rec.f64");
    let panel = dir.path().join("panel.c64");
    assert_ok(&ellrad(&[
        "--config",
        cfg.to_str().unwrap(),
        "invert",
        "--method",
        "chirp",
        "--gamma-min",
        "0.5",
        "--richardson",
        "--dump-chirp",
        panel.to_str().unwrap(),
        "--out",
        rec.to_str().unwrap(),
    ]));
    let gd = ellrad::io::read_chirp_data(&panel).unwrap();
    assert_eq!(gd.ws.len(), 60);
    assert_eq!(gd.ugrid.dims, vec![401]);
    let (field, _) = ellrad::io::read_scalar_field(&rec).unwrap();
    assert_eq!(field.grid.dims, vec![8, 8]);
}

#[test]
fn probe_report_feeds_csv_export() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "run.json",
        r#"{ "probe": { "field_res": 2, "data_res": [3, 5] } }"#,
    );
    let report = dir.path().join("probe.json");
    let direct = dir.path().join("direct.csv");
    let exported = dir.path().join("exported.csv");
    assert_ok(&ellrad(&[
        "--config",
        cfg.to_str().unwrap(),
        "probe-local",
        "--out",
        report.to_str().unwrap(),
        "--csv",
        direct.to_str().unwrap(),
    ]));
    assert_ok(&ellrad(&[
        "export-csv",
        "--in",
        report.to_str().unwrap(),
        "--out",
        exported.to_str().unwrap(),
    ]));
    let direct = fs::read_to_string(&direct).unwrap();
    assert_eq!(direct, fs::read_to_string(&exported).unwrap());
    assert!(direct.starts_with("index,singular_value\n"));
    assert_eq!(direct.lines().count(), 1 + 4);

    let res = ellrad(&[
        "export-csv",
        "--in",
        cfg.to_str().unwrap(),
        "--out",
        dir.path().join("nope.csv").to_str().unwrap(),
    ]);
    assert_eq!(res.status.code(), Some(2));
}

#[test]
fn analyze_reports_a_finite_ratio() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("stability.json");
    assert_ok(&ellrad(&[
        "analyze",
        "--sobolev-order",
        "0.5",
        "--out",
        report.to_str().unwrap(),
    ]));
    let doc: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(doc["sobolev"]["gamma"].as_f64(), Some(0.5));
    let ratio = doc["sobolev"]["ratio"].as_f64().unwrap();
    assert!(ratio.is_finite() && ratio > 0.0);
    assert!(doc["provenance"]["config_sha256"].is_string());
}
