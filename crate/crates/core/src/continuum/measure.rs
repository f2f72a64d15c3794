//! Finite measures as atoms plus piecewise-constant grid densities.

use serde::{Deserialize, Serialize};

use super::ContinuumError;
use crate::jsonfmt;

/// A point mass.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub position: Vec<f64>,
    pub mass: f64,
}

/// Piecewise-constant density on a uniform cell decomposition of a box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridDensity {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub cells: Vec<usize>,
    /// Density value per cell, row-major over the cell indices.
    pub values: Vec<f64>,
}

impl GridDensity {
    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn cell_count(&self) -> usize {
        self.cells.iter().product()
    }

    pub fn cell_widths(&self) -> Vec<f64> {
        self.lo
            .iter()
            .zip(&self.hi)
            .zip(&self.cells)
            .map(|((l, h), n)| (h - l) / *n as f64)
            .collect()
    }

    pub fn cell_volume(&self) -> f64 {
        self.cell_widths().iter().product()
    }

    /// Multi-index of a linear cell index.
    fn unravel(&self, mut idx: usize) -> Vec<usize> {
        let mut multi = vec![0; self.dim()];
        for axis in (0..self.dim()).rev() {
            multi[axis] = idx % self.cells[axis];
            idx /= self.cells[axis];
        }
        multi
    }

    pub fn cell_center(&self, idx: usize) -> Vec<f64> {
        let widths = self.cell_widths();
        self.unravel(idx)
            .iter()
            .enumerate()
            .map(|(axis, &i)| self.lo[axis] + (i as f64 + 0.5) * widths[axis])
            .collect()
    }

    /// Cell bounds `(lo, hi)` along each axis.
    pub fn cell_bounds(&self, idx: usize) -> (Vec<f64>, Vec<f64>) {
        let widths = self.cell_widths();
        let multi = self.unravel(idx);
        let lo: Vec<f64> = multi
            .iter()
            .enumerate()
            .map(|(axis, &i)| self.lo[axis] + i as f64 * widths[axis])
            .collect();
        let hi: Vec<f64> =
            lo.iter().enumerate().map(|(axis, l)| l + widths[axis]).collect();
        (lo, hi)
    }

    pub fn cell_mass(&self, idx: usize) -> f64 {
        self.values[idx] * self.cell_volume()
    }

    pub fn total_mass(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.cell_volume()
    }

    /// Coarsen by merging pairs of cells along every axis (mass preserving).
    /// Used by the divergence-detection refinement ladder.
    pub fn coarsened(&self) -> Option<GridDensity> {
        if self.cells.iter().any(|&n| n < 2) {
            return None;
        }
        let new_cells: Vec<usize> = self.cells.iter().map(|&n| n / 2).collect();
        // drop trailing cells on odd axes so the merged grid stays uniform
        let hi: Vec<f64> = self
            .lo
            .iter()
            .zip(self.cell_widths())
            .zip(&new_cells)
            .map(|((l, w), n)| l + w * 2.0 * *n as f64)
            .collect();
        let mut coarse = GridDensity {
            lo: self.lo.clone(),
            hi,
            cells: new_cells.clone(),
            values: vec![0.0; new_cells.iter().product()],
        };
        let children_per_cell = 1usize << self.dim();
        for idx in 0..coarse.cell_count() {
            let multi = coarse.unravel(idx);
            let mut acc = 0.0;
            for combo in 0..children_per_cell {
                let child: Vec<usize> = multi
                    .iter()
                    .enumerate()
                    .map(|(axis, &i)| 2 * i + ((combo >> axis) & 1))
                    .collect();
                let mut lin = 0usize;
                for (axis, &c) in child.iter().enumerate() {
                    lin = lin * self.cells[axis] + c;
                }
                acc += self.values[lin];
            }
            coarse.values[idx] = acc / children_per_cell as f64;
        }
        Some(coarse)
    }

    fn validate(&self) -> Result<(), ContinuumError> {
        let d = self.dim();
        if self.hi.len() != d || self.cells.len() != d {
            return Err(ContinuumError::BadDocument(
                "density box and cell counts must share the dimension".into(),
            ));
        }
        if self.cells.iter().any(|&n| n == 0) {
            return Err(ContinuumError::BadDocument("density needs at least one cell".into()));
        }
        if self.lo.iter().zip(&self.hi).any(|(l, h)| h <= l) {
            return Err(ContinuumError::BadDocument("density box is empty".into()));
        }
        if self.values.len() != self.cell_count() {
            return Err(ContinuumError::BadDocument(format!(
                "expected {} cell values, got {}",
                self.cell_count(),
                self.values.len()
            )));
        }
        if self.values.iter().any(|v| *v < 0.0 || !v.is_finite()) {
            return Err(ContinuumError::BadDocument("density values must be >= 0".into()));
        }
        Ok(())
    }
}

/// A finite measure: atoms plus an optional grid density.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureRep {
    pub dim: usize,
    pub atoms: Vec<Atom>,
    pub density: Option<GridDensity>,
}

impl MeasureRep {
    pub fn empty(dim: usize) -> Self {
        Self { dim, atoms: Vec::new(), density: None }
    }

    /// Unit point mass.
    pub fn dirac(position: Vec<f64>) -> Self {
        let dim = position.len();
        Self { dim, atoms: vec![Atom { position, mass: 1.0 }], density: None }
    }

    pub fn with_atom(mut self, position: Vec<f64>, mass: f64) -> Self {
        self.atoms.push(Atom { position, mass });
        self
    }

    pub fn with_density(mut self, density: GridDensity) -> Self {
        self.density = Some(density);
        self
    }

    /// Uniform probability measure on a one-dimensional interval, as a
    /// single-cell density.
    pub fn uniform_1d(lo: f64, hi: f64, mass: f64, cells: usize) -> Self {
        let value = mass / (hi - lo);
        Self {
            dim: 1,
            atoms: Vec::new(),
            density: Some(GridDensity {
                lo: vec![lo],
                hi: vec![hi],
                cells: vec![cells],
                values: vec![value; cells],
            }),
        }
    }

    pub fn validate(&self) -> Result<(), ContinuumError> {
        for atom in &self.atoms {
            if atom.position.len() != self.dim {
                return Err(ContinuumError::DimensionMismatch {
                    expected: self.dim,
                    got: atom.position.len(),
                });
            }
            if atom.mass < 0.0 || !atom.mass.is_finite() {
                return Err(ContinuumError::BadDocument("atom masses must be >= 0".into()));
            }
        }
        if let Some(density) = &self.density {
            if density.dim() != self.dim {
                return Err(ContinuumError::DimensionMismatch {
                    expected: self.dim,
                    got: density.dim(),
                });
            }
            density.validate()?;
        }
        Ok(())
    }

    pub fn total_mass(&self) -> f64 {
        let atom_mass: f64 = self.atoms.iter().map(|a| a.mass).sum();
        atom_mass + self.density.as_ref().map_or(0.0, |d| d.total_mass())
    }

    /// Restriction `1_F mu` to a box, at the representation's resolution:
    /// atoms are kept or dropped, cell values are scaled by the fraction of
    /// the cell inside the box.
    pub fn restricted_to_box(&self, lo: &[f64], hi: &[f64]) -> MeasureRep {
        let inside = |p: &[f64]| p.iter().zip(lo).zip(hi).all(|((x, l), h)| *x >= *l && *x <= *h);
        let atoms: Vec<Atom> =
            self.atoms.iter().filter(|a| inside(&a.position)).cloned().collect();
        let density = self.density.as_ref().map(|density| {
            let mut restricted = density.clone();
            for idx in 0..density.cell_count() {
                let (clo, chi) = density.cell_bounds(idx);
                let mut fraction = 1.0;
                for axis in 0..density.dim() {
                    let overlap =
                        (chi[axis].min(hi[axis]) - clo[axis].max(lo[axis])).max(0.0);
                    fraction *= overlap / (chi[axis] - clo[axis]);
                }
                restricted.values[idx] *= fraction;
            }
            restricted
        });
        MeasureRep { dim: self.dim, atoms, density }
    }

    /// Serialize to
    /// `{"atoms": [[x..., mass], ...], "density": {"box": [lo..., hi...],
    /// "cells": [n...], "values": [...]}}` with 17 significant digits.
    pub fn to_json(&self) -> String {
        let mut out = String::from("{\"atoms\": [");
        for (i, atom) in self.atoms.iter().enumerate() {
            if i > 0 {
                out.push_str(", ");
            }
            out.push('[');
            for x in &atom.position {
                jsonfmt::push_f64(&mut out, *x);
                out.push_str(", ");
            }
            jsonfmt::push_f64(&mut out, atom.mass);
            out.push(']');
        }
        out.push(']');
        if let Some(density) = &self.density {
            out.push_str(", \"density\": {\"box\": ");
            let mut boxes = density.lo.clone();
            boxes.extend_from_slice(&density.hi);
            jsonfmt::push_f64_array(&mut out, &boxes);
            out.push_str(", \"cells\": [");
            for (i, n) in density.cells.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                out.push_str(&n.to_string());
            }
            out.push_str("], \"values\": ");
            jsonfmt::push_f64_array(&mut out, &density.values);
            out.push('}');
        }
        out.push('}');
        out
    }

    pub fn from_json(dim: usize, doc: &str) -> Result<Self, ContinuumError> {
        let v: serde_json::Value =
            serde_json::from_str(doc).map_err(|e| ContinuumError::BadDocument(e.to_string()))?;
        Self::from_json_value(dim, &v)
    }

    pub fn from_json_value(dim: usize, v: &serde_json::Value) -> Result<Self, ContinuumError> {
        let mut atoms = Vec::new();
        if let Some(arr) = v["atoms"].as_array() {
            for entry in arr {
                let nums = jsonfmt::f64_array(entry).ok_or_else(|| {
                    ContinuumError::BadDocument("atom must be [x..., mass]".into())
                })?;
                if nums.len() != dim + 1 {
                    return Err(ContinuumError::BadDocument(format!(
                        "atom needs {} coordinates plus a mass",
                        dim
                    )));
                }
                atoms.push(Atom { position: nums[..dim].to_vec(), mass: nums[dim] });
            }
        }
        let density = if v["density"].is_object() {
            let spec = &v["density"];
            let boxes = jsonfmt::f64_array(&spec["box"])
                .ok_or_else(|| ContinuumError::BadDocument("density needs \"box\"".into()))?;
            if boxes.len() != 2 * dim {
                return Err(ContinuumError::BadDocument(
                    "density box must hold lo and hi per axis".into(),
                ));
            }
            let cells: Vec<usize> = spec["cells"]
                .as_array()
                .ok_or_else(|| ContinuumError::BadDocument("density needs \"cells\"".into()))?
                .iter()
                .map(|n| n.as_u64().map(|n| n as usize))
                .collect::<Option<Vec<_>>>()
                .ok_or_else(|| ContinuumError::BadDocument("cell counts must be integers".into()))?;
            let values = jsonfmt::f64_array(&spec["values"])
                .ok_or_else(|| ContinuumError::BadDocument("density needs \"values\"".into()))?;
            Some(GridDensity { lo: boxes[..dim].to_vec(), hi: boxes[dim..].to_vec(), cells, values })
        } else {
            None
        };
        let measure = MeasureRep { dim, atoms, density };
        measure.validate()?;
        Ok(measure)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn grid_1d() -> GridDensity {
        GridDensity {
            lo: vec![-1.0],
            hi: vec![1.0],
            cells: vec![4],
            values: vec![0.5, 1.0, 2.0, 0.25],
        }
    }

    #[test]
    fn grid_geometry() {
        let g = grid_1d();
        assert_eq!(g.cell_volume(), 0.5);
        assert_eq!(g.cell_center(0), vec![-0.75]);
        assert_eq!(g.cell_center(3), vec![0.75]);
        assert_relative_eq!(g.total_mass(), 0.5 * 3.75, epsilon = 1e-14);
    }

    #[test]
    fn coarsening_preserves_mass() {
        let g = grid_1d();
        let c = g.coarsened().unwrap();
        assert_eq!(c.cells, vec![2]);
        assert_relative_eq!(c.total_mass(), g.total_mass(), epsilon = 1e-14);
    }

    #[test]
    fn restriction_scales_partial_cells() {
        let mu = MeasureRep { dim: 1, atoms: vec![], density: Some(grid_1d()) };
        let restricted = mu.restricted_to_box(&[0.0], &[1.0]);
        // left half vanishes, right half survives in full
        assert_relative_eq!(restricted.total_mass(), 0.5 * 2.25, epsilon = 1e-14);
        assert!(restricted.total_mass() <= mu.total_mass());
    }

    #[test]
    fn json_round_trip() {
        let mu = MeasureRep::dirac(vec![0.25]).with_atom(vec![-1.5], 2.0);
        let mu = MeasureRep { density: Some(grid_1d()), ..mu };
        let doc = mu.to_json();
        let back = MeasureRep::from_json(1, &doc).unwrap();
        assert_eq!(mu, back);
    }

    #[test]
    fn validation_rejects_bad_dimension() {
        let mu = MeasureRep { dim: 3, atoms: vec![Atom { position: vec![0.0], mass: 1.0 }], density: None };
        assert!(mu.validate().is_err());
    }
}
