//! Node-centered uniform grids and the scalar fields sampled on them.
//!
//! A [`Grid`] in d dimensions stores per-axis sizes, origin, and spacing;
//! node k = (k₀, …, k_{d−1}) sits at origin + k·spacing.  Values are stored
//! row-major with the *last* axis varying fastest.
//!
//! Fields that represent quantities even in the last coordinate live on
//! grids that are reflection-symmetric about xₙ = 0, meaning the node set
//! along the last axis maps onto itself under negation; that requires
//! originₙ = −(mₙ−1)·hₙ/2.  [`ScalarField::symmetrize`] projects a field
//! onto its even part under that reflection.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub dims: Vec<usize>,
    pub origin: Vec<f64>,
    pub spacing: Vec<f64>,
}

impl Grid {
    pub fn new(dims: Vec<usize>, origin: Vec<f64>, spacing: Vec<f64>) -> Result<Self> {
        if dims.is_empty() || dims.len() != origin.len() || dims.len() != spacing.len() {
            return Err(Error::InvalidGrid(format!(
                "inconsistent grid ranks: dims {}, origin {}, spacing {}",
                dims.len(),
                origin.len(),
                spacing.len()
            )));
        }
        if dims.iter().any(|&m| m == 0) {
            return Err(Error::InvalidGrid("grid with an empty axis".into()));
        }
        if spacing.iter().any(|&h| !(h > 0.0) || !h.is_finite()) {
            return Err(Error::InvalidGrid("grid spacing must be finite and > 0".into()));
        }
        Ok(Self {
            dims,
            origin,
            spacing,
        })
    }

    /// Centered grid: m nodes per axis with the node set symmetric about 0.
    pub fn centered(dims: Vec<usize>, spacing: Vec<f64>) -> Result<Self> {
        let origin = dims
            .iter()
            .zip(&spacing)
            .map(|(&m, &h)| -0.5 * (m as f64 - 1.0) * h)
            .collect();
        Self::new(dims, origin, spacing)
    }

    pub fn rank(&self) -> usize {
        self.dims.len()
    }

    pub fn len(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Physical coordinate of one node along one axis.
    pub fn coord(&self, axis: usize, k: usize) -> f64 {
        self.origin[axis] + k as f64 * self.spacing[axis]
    }

    /// All node coordinates along one axis.
    pub fn axis_coords(&self, axis: usize) -> Vec<f64> {
        (0..self.dims[axis]).map(|k| self.coord(axis, k)).collect()
    }

    /// Flat index of a multi-index (row-major, last axis fastest).
    pub fn flat(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.rank());
        let mut f = 0;
        for (axis, &k) in idx.iter().enumerate() {
            debug_assert!(k < self.dims[axis]);
            f = f * self.dims[axis] + k;
        }
        f
    }

    /// Multi-index of a flat index.
    pub fn unflat(&self, mut f: usize) -> Vec<usize> {
        let mut idx = vec![0; self.rank()];
        for axis in (0..self.rank()).rev() {
            idx[axis] = f % self.dims[axis];
            f /= self.dims[axis];
        }
        idx
    }

    /// Physical coordinates of the node with the given flat index.
    pub fn point(&self, f: usize) -> Vec<f64> {
        self.unflat(f)
            .iter()
            .enumerate()
            .map(|(axis, &k)| self.coord(axis, k))
            .collect()
    }

    /// Product of spacings — the volume of one cell.
    pub fn cell_volume(&self) -> f64 {
        self.spacing.iter().product()
    }

    /// Whether the node set of the last axis is symmetric under negation.
    pub fn last_axis_symmetric(&self) -> bool {
        let axis = self.rank() - 1;
        let m = self.dims[axis] as f64;
        let h = self.spacing[axis];
        (self.origin[axis] + 0.5 * (m - 1.0) * h).abs() <= 1e-9 * h
    }
}

/// Real scalar samples on a grid, row-major with the last axis fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    pub grid: Grid,
    pub values: Vec<f64>,
}

impl ScalarField {
    pub fn zeros(grid: Grid) -> Self {
        let n = grid.len();
        Self {
            grid,
            values: vec![0.0; n],
        }
    }

    pub fn from_values(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidGrid(format!(
                "value buffer has {} entries, grid has {} nodes",
                values.len(),
                grid.len()
            )));
        }
        Ok(Self { grid, values })
    }

    /// Fill by evaluating a function of the node coordinates.
    pub fn tabulate<F: Fn(&[f64]) -> f64 + Sync>(grid: Grid, f: F) -> Self {
        let mut field = Self::zeros(grid);
        let grid = field.grid.clone();
        crate::exec::fill_cells(&mut field.values, |i| f(&grid.point(i)));
        field
    }

    pub fn at(&self, idx: &[usize]) -> f64 {
        self.values[self.grid.flat(idx)]
    }

    /// Largest absolute value.
    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Discrete L² norm: √(Σ v² · cell volume).
    pub fn l2_norm(&self) -> f64 {
        (self.values.iter().map(|v| v * v).sum::<f64>() * self.grid.cell_volume()).sqrt()
    }

    /// Relative L² distance to another field on the same grid.
    pub fn rel_l2_error(&self, reference: &ScalarField) -> f64 {
        assert_eq!(self.grid, reference.grid, "fields live on different grids");
        let num: f64 = self
            .values
            .iter()
            .zip(&reference.values)
            .map(|(a, b)| (a - b) * (a - b))
            .sum();
        let den: f64 = reference.values.iter().map(|v| v * v).sum();
        (num / den).sqrt()
    }

    /// Replace the field by its even part under reflection of the last
    /// coordinate: v(x′, xₙ) ← (v(x′, xₙ) + v(x′, −xₙ)) / 2.
    ///
    /// Requires a reflection-symmetric last axis so that every node has a
    /// mirror node on the grid.
    pub fn symmetrize(&mut self) -> Result<()> {
        if !self.grid.last_axis_symmetric() {
            return Err(Error::InvalidGrid(
                "last axis is not symmetric about 0; cannot symmetrize".into(),
            ));
        }
        let axis = self.grid.rank() - 1;
        let m = self.grid.dims[axis];
        let rows = self.grid.len() / m;
        for r in 0..rows {
            let base = r * m;
            for k in 0..m / 2 {
                let a = self.values[base + k];
                let b = self.values[base + (m - 1 - k)];
                let avg = 0.5 * (a + b);
                self.values[base + k] = avg;
                self.values[base + (m - 1 - k)] = avg;
            }
        }
        Ok(())
    }
}
