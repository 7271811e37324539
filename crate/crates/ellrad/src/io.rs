//! File pairs for every array type: a raw little-endian 64-bit float payload
//! next to a JSON sidecar carrying the metadata needed to re-derive the run.
//!
//! The payload at `path` holds the values row-major (last axis fastest, the
//! in-memory layout); complex arrays interleave re, im.  The sidecar lives at
//! `path + ".json"` and records the grid descriptors, the model, the data
//! kind, and a provenance block (tool, version, optional config hash).
//! Readers cross-check payload length against the declared grid and refuse
//! mismatched pairs, so a stale or foreign sidecar fails loudly instead of
//! misinterpreting bytes.

use crate::chirp::ChirpData;
use crate::error::{Error, Result};
use crate::grid::{Grid, ScalarField};
use crate::model::EccentricityModel;
use crate::spectral::fft::SpectralField;
use crate::transform::{DataKind, SinoGrid, Sinogram};
use rustfft::num_complex::Complex;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

/// Who wrote a file and from what configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub tool: String,
    pub version: String,
    /// SHA-256 of the run configuration, when the writer had one.
    pub config_sha256: Option<String>,
}

impl Provenance {
    pub fn here(config_sha256: Option<String>) -> Self {
        Self {
            tool: "ellrad".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            config_sha256,
        }
    }
}

/// Sidecar metadata, tagged by payload format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "format", rename_all = "kebab-case")]
pub enum Sidecar {
    ScalarField {
        grid: Grid,
        model: Option<EccentricityModel>,
        /// Whether the field is even in the last coordinate.
        even: bool,
        provenance: Provenance,
    },
    Sinogram {
        model: EccentricityModel,
        grid: SinoGrid,
        kind: DataKind,
        provenance: Provenance,
    },
    SpectralField {
        grid: Grid,
        model: Option<EccentricityModel>,
        provenance: Provenance,
    },
    ChirpData {
        model: EccentricityModel,
        ugrid: Grid,
        ws: Vec<f64>,
        t_max: f64,
        ridge_cut: f64,
        provenance: Provenance,
    },
}

/// Sidecar path convention: the payload path with `.json` appended.
pub fn sidecar_path(payload: &Path) -> PathBuf {
    let mut os = payload.as_os_str().to_owned();
    os.push(".json");
    PathBuf::from(os)
}

/// Hex SHA-256 of arbitrary bytes (config hashing for provenance).
pub fn sha256_hex(bytes: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(bytes);
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

fn write_payload_f64(path: &Path, values: &[f64]) -> Result<()> {
    let mut buf = Vec::with_capacity(values.len() * 8);
    for v in values {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    fs::write(path, buf)?;
    Ok(())
}

fn read_payload_f64(path: &Path) -> Result<Vec<f64>> {
    let bytes = fs::read(path)?;
    if bytes.len() % 8 != 0 {
        return Err(Error::MetadataMismatch(format!(
            "payload {} has {} bytes, not a multiple of 8",
            path.display(),
            bytes.len()
        )));
    }
    Ok(bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect())
}

fn write_payload_complex(path: &Path, values: &[Complex<f64>]) -> Result<()> {
    let mut buf = Vec::with_capacity(values.len() * 16);
    for v in values {
        buf.extend_from_slice(&v.re.to_le_bytes());
        buf.extend_from_slice(&v.im.to_le_bytes());
    }
    fs::write(path, buf)?;
    Ok(())
}

fn read_payload_complex(path: &Path) -> Result<Vec<Complex<f64>>> {
    let raw = read_payload_f64(path)?;
    if raw.len() % 2 != 0 {
        return Err(Error::MetadataMismatch(format!(
            "complex payload {} has an odd float count {}",
            path.display(),
            raw.len()
        )));
    }
    Ok(raw.chunks_exact(2).map(|c| Complex::new(c[0], c[1])).collect())
}

fn write_sidecar(payload: &Path, sc: &Sidecar) -> Result<()> {
    let mut f = fs::File::create(sidecar_path(payload))?;
    serde_json::to_writer_pretty(&mut f, sc)?;
    f.write_all(b"\n")?;
    Ok(())
}

fn read_sidecar(payload: &Path) -> Result<Sidecar> {
    let text = fs::read_to_string(sidecar_path(payload))?;
    Ok(serde_json::from_str(&text)?)
}

/// Fail with a metadata mismatch when two models disagree.
pub fn ensure_model_match(expected: &EccentricityModel, found: &EccentricityModel) -> Result<()> {
    let lambda_gap = (expected.lambda - found.lambda).abs();
    if expected.n != found.n || lambda_gap > 1e-12 * expected.lambda {
        return Err(Error::MetadataMismatch(format!(
            "model (n={}, λ={}) does not match file metadata (n={}, λ={})",
            expected.n, expected.lambda, found.n, found.lambda
        )));
    }
    Ok(())
}

pub fn write_scalar_field(
    path: &Path,
    f: &ScalarField,
    model: Option<&EccentricityModel>,
    even: bool,
    config_sha256: Option<String>,
) -> Result<()> {
    write_payload_f64(path, &f.values)?;
    write_sidecar(
        path,
        &Sidecar::ScalarField {
            grid: f.grid.clone(),
            model: model.copied(),
            even,
            provenance: Provenance::here(config_sha256),
        },
    )
}

/// Read a field pair; returns the field plus its full sidecar (model,
/// evenness, provenance) for caller-side validation.
pub fn read_scalar_field(path: &Path) -> Result<(ScalarField, Sidecar)> {
    let sc = read_sidecar(path)?;
    let grid = match &sc {
        Sidecar::ScalarField { grid, .. } => grid.clone(),
        other => {
            return Err(Error::MetadataMismatch(format!(
                "expected a scalar-field sidecar, found {other:?}"
            )))
        }
    };
    let values = read_payload_f64(path)?;
    if values.len() != grid.len() {
        return Err(Error::MetadataMismatch(format!(
            "payload has {} values but the sidecar grid holds {}",
            values.len(),
            grid.len()
        )));
    }
    Ok((ScalarField::from_values(grid, values)?, sc))
}

pub fn write_sinogram(path: &Path, s: &Sinogram, config_sha256: Option<String>) -> Result<()> {
    write_payload_f64(path, &s.values)?;
    write_sidecar(
        path,
        &Sidecar::Sinogram {
            model: s.model,
            grid: s.grid.clone(),
            kind: s.kind,
            provenance: Provenance::here(config_sha256),
        },
    )
}

pub fn read_sinogram(path: &Path) -> Result<Sinogram> {
    let sc = read_sidecar(path)?;
    let (model, grid, kind) = match sc {
        Sidecar::Sinogram { model, grid, kind, .. } => (model, grid, kind),
        other => {
            return Err(Error::MetadataMismatch(format!(
                "expected a sinogram sidecar, found {other:?}"
            )))
        }
    };
    let values = read_payload_f64(path)?;
    if values.len() != grid.len() {
        return Err(Error::MetadataMismatch(format!(
            "payload has {} values but the sidecar grid holds {}",
            values.len(),
            grid.len()
        )));
    }
    Ok(Sinogram { model, grid, kind, values })
}

pub fn write_spectral_field(
    path: &Path,
    s: &SpectralField,
    model: Option<&EccentricityModel>,
    config_sha256: Option<String>,
) -> Result<()> {
    write_payload_complex(path, &s.values)?;
    write_sidecar(
        path,
        &Sidecar::SpectralField {
            grid: s.grid.clone(),
            model: model.copied(),
            provenance: Provenance::here(config_sha256),
        },
    )
}

pub fn read_spectral_field(path: &Path) -> Result<(SpectralField, Sidecar)> {
    let sc = read_sidecar(path)?;
    let grid = match &sc {
        Sidecar::SpectralField { grid, .. } => grid.clone(),
        other => {
            return Err(Error::MetadataMismatch(format!(
                "expected a spectral-field sidecar, found {other:?}"
            )))
        }
    };
    let values = read_payload_complex(path)?;
    if values.len() != grid.len() {
        return Err(Error::MetadataMismatch(format!(
            "payload has {} complex values but the sidecar grid holds {}",
            values.len(),
            grid.len()
        )));
    }
    Ok((SpectralField { grid, values }, sc))
}

pub fn write_chirp_data(path: &Path, c: &ChirpData, config_sha256: Option<String>) -> Result<()> {
    write_payload_complex(path, &c.values)?;
    write_sidecar(
        path,
        &Sidecar::ChirpData {
            model: c.model,
            ugrid: c.ugrid.clone(),
            ws: c.ws.clone(),
            t_max: c.t_max,
            ridge_cut: c.ridge_cut,
            provenance: Provenance::here(config_sha256),
        },
    )
}

pub fn read_chirp_data(path: &Path) -> Result<ChirpData> {
    let sc = read_sidecar(path)?;
    let (model, ugrid, ws, t_max, ridge_cut) = match sc {
        Sidecar::ChirpData { model, ugrid, ws, t_max, ridge_cut, .. } => {
            (model, ugrid, ws, t_max, ridge_cut)
        }
        other => {
            return Err(Error::MetadataMismatch(format!(
                "expected a chirp-data sidecar, found {other:?}"
            )))
        }
    };
    let values = read_payload_complex(path)?;
    if values.len() != ugrid.len() * ws.len() {
        return Err(Error::MetadataMismatch(format!(
            "payload has {} complex values but the sidecar grids hold {}×{}",
            values.len(),
            ugrid.len(),
            ws.len()
        )));
    }
    Ok(ChirpData { model, ugrid, ws, values, t_max, ridge_cut })
}

/// Pretty-printed JSON for reports and configurations.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut f = fs::File::create(path)?;
    serde_json::to_writer_pretty(&mut f, value)?;
    f.write_all(b"\n")?;
    Ok(())
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

/// Singular-value spectrum as two-column CSV (rank index, value).
pub fn write_singular_values_csv(path: &Path, values: &[f64]) -> Result<()> {
    let mut out = String::from("index,singular_value\n");
    for (i, v) in values.iter().enumerate() {
        out.push_str(&format!("{i},{v:.17e}\n"));
    }
    fs::write(path, out)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phantom::{sample_phantom, Phantom, PhantomSet};

    fn model2() -> EccentricityModel {
        EccentricityModel::new(std::f64::consts::SQRT_2, 2).unwrap()
    }

    #[test]
    fn scalar_field_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("field.f64");
        let grid = Grid::centered(vec![12, 8], vec![0.25, 0.25]).unwrap();
        let set = PhantomSet(vec![Phantom::gaussian(1.0, vec![0.2, 0.0], vec![0.5, 0.5]).unwrap()]);
        let f = sample_phantom(&set, grid);
        write_scalar_field(&path, &f, Some(&model2()), true, Some("cafe".into())).unwrap();

        let (back, sc) = read_scalar_field(&path).unwrap();
        assert_eq!(back.values, f.values);
        assert_eq!(back.grid, f.grid);
        match sc {
            Sidecar::ScalarField { model, even, provenance, .. } => {
                assert_eq!(model, Some(model2()));
                assert!(even);
                assert_eq!(provenance.config_sha256.as_deref(), Some("cafe"));
                assert_eq!(provenance.tool, "ellrad");
            }
            other => panic!("wrong sidecar {other:?}"),
        }
    }

    #[test]
    fn truncated_payload_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("field.f64");
        let grid = Grid::centered(vec![6, 6], vec![0.5, 0.5]).unwrap();
        let f = ScalarField::zeros(grid);
        write_scalar_field(&path, &f, None, true, None).unwrap();
        let bytes = fs::read(&path).unwrap();
        fs::write(&path, &bytes[..bytes.len() - 8]).unwrap();
        match read_scalar_field(&path) {
            Err(Error::MetadataMismatch(_)) => {}
            other => panic!("expected mismatch, got {other:?}"),
        }
    }

    #[test]
    fn sinogram_round_trips_with_kind() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("data.f64");
        let ug = Grid::centered(vec![9], vec![0.5]).unwrap();
        let sg = SinoGrid::new(ug, 0.2, 11).unwrap();
        let s = Sinogram {
            model: model2(),
            grid: sg.clone(),
            kind: DataKind::Derived,
            values: (0..sg.len()).map(|i| i as f64 * 0.1).collect(),
        };
        write_sinogram(&path, &s, None).unwrap();
        let back = read_sinogram(&path).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn wrong_sidecar_kind_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("data.f64");
        let grid = Grid::centered(vec![4, 4], vec![0.5, 0.5]).unwrap();
        write_scalar_field(&path, &ScalarField::zeros(grid), None, true, None).unwrap();
        match read_sinogram(&path) {
            Err(Error::MetadataMismatch(_)) => {}
            other => panic!("expected mismatch, got {other:?}"),
        }
    }

    #[test]
    fn spectral_field_round_trips_interleaved() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("spectrum.c64");
        let grid = Grid::centered(vec![8, 8], vec![0.3, 0.3]).unwrap();
        let set = PhantomSet(vec![Phantom::gaussian(1.0, vec![0.0, 0.0], vec![0.6, 0.6]).unwrap()]);
        let spec = crate::spectral::fft::fourier_nd(&sample_phantom(&set, grid));
        write_spectral_field(&path, &spec, Some(&model2()), None).unwrap();
        let (back, _) = read_spectral_field(&path).unwrap();
        assert_eq!(back.values, spec.values);
        assert_eq!(back.grid, spec.grid);
    }

    #[test]
    fn chirp_data_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("chirp.c64");
        let ug = Grid::centered(vec![5], vec![0.5]).unwrap();
        let ws = vec![0.5, 1.0, 1.5];
        let values: Vec<Complex<f64>> = (0..15)
            .map(|i| Complex::new(i as f64, -0.5 * i as f64))
            .collect();
        let cd = ChirpData {
            model: model2(),
            ugrid: ug,
            ws,
            values,
            t_max: 6.0,
            ridge_cut: 0.25,
        };
        write_chirp_data(&path, &cd, None).unwrap();
        let back = read_chirp_data(&path).unwrap();
        assert_eq!(back, cd);
    }

    #[test]
    fn model_mismatch_is_detected() {
        let other = EccentricityModel::new(1.7, 2).unwrap();
        assert!(ensure_model_match(&model2(), &model2()).is_ok());
        match ensure_model_match(&model2(), &other) {
            Err(Error::MetadataMismatch(_)) => {}
            res => panic!("expected mismatch, got {res:?}"),
        }
    }

    #[test]
    fn singular_value_csv_layout() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sv.csv");
        write_singular_values_csv(&path, &[0.5, 0.25]).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "index,singular_value");
        assert!(lines[1].starts_with("0,5."));
        assert_eq!(lines.len(), 3);
    }

    #[test]
    fn sha256_matches_reference_vector() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }
}
