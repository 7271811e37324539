//! Run configuration: one JSON document holding the model, the grids, the
//! phantom, and the method knobs.  Flags override individual fields after
//! the file loads, and the fully resolved document is hashed into every
//! output sidecar, so a run can be reproduced from its files alone.
//!
//! Every field has a default and unknown keys are rejected, so an empty
//! document `{}` is a complete configuration and a typo fails loudly
//! instead of silently falling back.

use clap::ValueEnum;
use ellrad::error::{Error, Result};
use ellrad::grid::Grid;
use ellrad::io::sha256_hex;
use ellrad::model::EccentricityModel;
use ellrad::phantom::{Phantom, PhantomSet};
use ellrad::quad::{unit_ball3, unit_disk, Rule};
use ellrad::transform::SinoGrid;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelConfig,
    pub field_grid: FieldGridConfig,
    pub data_grid: DataGridConfig,
    pub phantoms: Vec<Phantom>,
    pub method: MethodConfig,
    pub probe: ProbeConfig,
    /// Sobolev order γ used by `analyze`.
    pub sobolev_order: f64,
    /// Seed for any randomized step; fixed default keeps runs reproducible.
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            model: ModelConfig::default(),
            field_grid: FieldGridConfig::default(),
            data_grid: DataGridConfig::default(),
            phantoms: vec![
                Phantom::gaussian(1.0, vec![0.0, 0.0], vec![0.5, 0.5])
                    .expect("default phantom is valid"),
            ],
            method: MethodConfig::default(),
            probe: ProbeConfig::default(),
            sobolev_order: 0.0,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelConfig {
    pub lambda: f64,
    pub n: usize,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig { lambda: std::f64::consts::SQRT_2, n: 2 }
    }
}

/// Field-space grid; omitted origin means centered on the origin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FieldGridConfig {
    pub dims: Vec<usize>,
    pub spacing: Vec<f64>,
    pub origin: Option<Vec<f64>>,
}

impl Default for FieldGridConfig {
    fn default() -> Self {
        FieldGridConfig { dims: vec![64, 64], spacing: vec![0.05, 0.05], origin: None }
    }
}

impl FieldGridConfig {
    pub fn resolve(&self, n: usize) -> Result<Grid> {
        if self.dims.len() != n {
            return Err(Error::InvalidGrid(format!(
                "field grid has {} axes, model needs {n}",
                self.dims.len()
            )));
        }
        match &self.origin {
            Some(o) => Grid::new(self.dims.clone(), o.clone(), self.spacing.clone()),
            None => Grid::centered(self.dims.clone(), self.spacing.clone()),
        }
    }
}

/// Data grid: hyperplane window times the uniform focal-scale axis
/// t = dt, 2·dt, …, nt·dt.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataGridConfig {
    pub u_dims: Vec<usize>,
    pub u_spacing: Vec<f64>,
    pub u_origin: Option<Vec<f64>>,
    pub dt: f64,
    pub nt: usize,
}

impl Default for DataGridConfig {
    fn default() -> Self {
        DataGridConfig {
            u_dims: vec![159],
            u_spacing: vec![0.15],
            u_origin: None,
            dt: 0.025,
            nt: 240,
        }
    }
}

impl DataGridConfig {
    pub fn resolve(&self, n: usize) -> Result<SinoGrid> {
        if self.u_dims.len() != n - 1 {
            return Err(Error::InvalidGrid(format!(
                "data grid has {} hyperplane axes, model needs {}",
                self.u_dims.len(),
                n - 1
            )));
        }
        let ugrid = match &self.u_origin {
            Some(o) => Grid::new(self.u_dims.clone(), o.clone(), self.u_spacing.clone())?,
            None => Grid::centered(self.u_dims.clone(), self.u_spacing.clone())?,
        };
        SinoGrid::new(ugrid, self.dt, self.nt)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum MethodKind {
    /// Back-projection, Fourier filter, inverse transform.
    Spectral,
    /// Quadratic-phase data panel and fold-completed scale integral.
    Chirp,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MethodConfig {
    pub kind: MethodKind,
    /// Surface/volume quadrature order for forward and derived data.
    pub order: usize,
    /// Padding factor of the spectral back-projection grid.
    pub pad: usize,
    /// Chirp scale grid: w = scale_step, …, scale_count·scale_step.
    pub scale_step: f64,
    pub scale_count: usize,
    /// Lower spectral-box edge for the chirp route (None: keep all rows).
    pub gamma_min: Option<f64>,
    /// Upper spectral-box edge (None: largest scale on the grid).
    pub gamma_max: Option<f64>,
    /// Data-window truncation |u| ≤ trunc_box·λ/2γ per scale row.
    pub trunc_box: Option<f64>,
    /// Richardson-extrapolate the scale integral from every-other row.
    pub richardson: bool,
}

impl Default for MethodConfig {
    fn default() -> Self {
        MethodConfig {
            kind: MethodKind::Spectral,
            order: 64,
            pad: 2,
            scale_step: 0.1,
            scale_count: 500,
            gamma_min: None,
            gamma_max: None,
            trunc_box: None,
            richardson: false,
        }
    }
}

/// Geometry of the local visibility probe.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProbeConfig {
    pub u0: Vec<f64>,
    pub epsilon: f64,
    pub t_cap: f64,
    pub field_res: usize,
    pub data_res: (usize, usize),
}

impl Default for ProbeConfig {
    fn default() -> Self {
        ProbeConfig {
            u0: vec![0.0],
            epsilon: ellrad::calibrate::PROBE_EPSILON,
            t_cap: ellrad::calibrate::PROBE_T_CAP,
            field_res: ellrad::calibrate::PROBE_FIELD_RES,
            data_res: ellrad::calibrate::PROBE_DATA_RES,
        }
    }
}

impl RunConfig {
    pub fn model(&self) -> Result<EccentricityModel> {
        EccentricityModel::new(self.model.lambda, self.model.n)
    }

    pub fn field_grid(&self) -> Result<Grid> {
        self.field_grid.resolve(self.model.n)
    }

    pub fn data_grid(&self) -> Result<SinoGrid> {
        self.data_grid.resolve(self.model.n)
    }

    pub fn phantom_set(&self) -> Result<PhantomSet> {
        if self.phantoms.is_empty() {
            return Err(Error::InvalidModel("configuration declares no phantom".into()));
        }
        let set = PhantomSet(self.phantoms.clone());
        if set.dim() != self.model.n {
            return Err(Error::InvalidModel(format!(
                "phantom dimension {} does not match the model dimension {}",
                set.dim(),
                self.model.n
            )));
        }
        Ok(set)
    }

    /// Quadrature rule over the solid unit ball at the configured order.
    pub fn volume_rule(&self) -> Result<Rule> {
        match self.model.n {
            2 => Ok(unit_disk(self.method.order, 2 * self.method.order)),
            3 => Ok(unit_ball3(self.method.order, self.method.order, 2 * self.method.order)),
            n => Err(Error::Unsupported(format!("no volume rule for dimension {n}"))),
        }
    }

    /// The chirp scale grid declared by the method section.
    pub fn scales(&self) -> Vec<f64> {
        (1..=self.method.scale_count)
            .map(|i| i as f64 * self.method.scale_step)
            .collect()
    }

    /// Canonical serialized form; its hash goes into every output sidecar.
    pub fn canonical_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn sha256(&self) -> String {
        sha256_hex(self.canonical_json().as_bytes())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_is_the_default_config() {
        let cfg: RunConfig = serde_json::from_str("{}").unwrap();
        assert_eq!(cfg, RunConfig::default());
    }

    #[test]
    fn round_trip_is_lossless() {
        let mut cfg = RunConfig::default();
        cfg.model.lambda = 1.75;
        cfg.model.n = 3;
        cfg.field_grid.dims = vec![24, 24, 24];
        cfg.field_grid.spacing = vec![0.1; 3];
        cfg.data_grid.u_dims = vec![96, 96];
        cfg.data_grid.u_spacing = vec![0.2, 0.2];
        cfg.data_grid.u_origin = Some(vec![-9.5, -9.5]);
        cfg.phantoms =
            vec![Phantom::gaussian(2.0, vec![0.1, -0.2, 0.0], vec![0.3; 3]).unwrap()];
        cfg.method.kind = MethodKind::Chirp;
        cfg.method.gamma_min = Some(0.5);
        cfg.method.trunc_box = Some(40.0);
        cfg.method.richardson = true;
        cfg.probe.data_res = (5, 9);
        cfg.sobolev_order = 0.5;
        cfg.seed = 7;
        let back: RunConfig = serde_json::from_str(&cfg.canonical_json()).unwrap();
        assert_eq!(back, cfg);
        assert_eq!(back.sha256(), cfg.sha256());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(serde_json::from_str::<RunConfig>(r#"{"modell": {}}"#).is_err());
        assert!(
            serde_json::from_str::<RunConfig>(r#"{"method": {"richardsen": true}}"#).is_err()
        );
    }

    #[test]
    fn resolution_checks_dimensions() {
        let mut cfg = RunConfig::default();
        cfg.model.n = 3;
        assert!(cfg.field_grid().is_err());
        assert!(cfg.data_grid().is_err());
        assert!(cfg.phantom_set().is_err());

        let cfg = RunConfig::default();
        assert!(cfg.field_grid().is_ok());
        let sg = cfg.data_grid().unwrap();
        assert_eq!(sg.nt, 240);
        assert!(cfg.phantom_set().is_ok());
        assert_eq!(cfg.volume_rule().unwrap().dim, 2);
    }
}
