//! Discretized local-time fields.
//!
//! The field stores, per time step, the bin the path occupied; levels
//! `l(t, bin) = occupation(bin, t) / width` are reconstructed on demand and
//! measure-integrated functionals stream over the steps. Binning
//! conservation is exact by construction: every in-window step contributes
//! its full duration to exactly one bin.

use serde::{Deserialize, Serialize};

use super::path::PathSample;
use super::pcaf::PcafTrajectory;
use super::SimError;
use crate::continuum::MeasureRep;

const OUTSIDE: u32 = u32::MAX;

/// Uniform partition `[lo + j w, lo + (j+1) w)`, `j = 0..count`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BinGrid {
    pub lo: f64,
    pub width: f64,
    pub count: usize,
}

impl BinGrid {
    /// Grid of the given width centered so that one bin is centered at 0.
    pub fn centered_at_zero(half_extent: f64, width: f64) -> Self {
        let half_bins = (half_extent / width).ceil() as usize;
        Self { lo: -(half_bins as f64 + 0.5) * width, width, count: 2 * half_bins + 1 }
    }

    pub fn hi(&self) -> f64 {
        self.lo + self.width * self.count as f64
    }

    pub fn index_of(&self, x: f64) -> Option<usize> {
        if x < self.lo || x >= self.hi() {
            return None;
        }
        let j = ((x - self.lo) / self.width) as usize;
        Some(j.min(self.count - 1))
    }

    pub fn center(&self, j: usize) -> f64 {
        self.lo + (j as f64 + 0.5) * self.width
    }

    /// Index of the bin containing zero, when the window covers it.
    pub fn zero_bin(&self) -> Option<usize> {
        self.index_of(0.0)
    }

    /// Overlap length of bin `j` with an interval.
    fn overlap(&self, j: usize, lo: f64, hi: f64) -> f64 {
        let b_lo = self.lo + j as f64 * self.width;
        let b_hi = b_lo + self.width;
        (b_hi.min(hi) - b_lo.max(lo)).max(0.0)
    }
}

/// Local-time field of one path over a bin grid.
#[derive(Debug, Clone)]
pub struct LocalTimeField {
    pub bins: BinGrid,
    pub times: Vec<f64>,
    /// Bin of the state at the left endpoint of each step (`times.len() - 1`
    /// entries), `OUTSIDE` when the path left the window.
    hits: Vec<u32>,
}

impl LocalTimeField {
    /// Bin the path (left-endpoint rule). One-dimensional models only.
    pub fn from_path(path: &PathSample, bins: BinGrid) -> Result<Self, SimError> {
        if path.dim() != 1 {
            return Err(SimError::NotOneDimensional);
        }
        if bins.count == 0 || !(bins.width > 0.0) {
            return Err(SimError::BadBins);
        }
        let steps = path.len() - 1;
        let mut hits = Vec::with_capacity(steps);
        for k in 0..steps {
            hits.push(bins.index_of(path.state_1d(k)).map_or(OUTSIDE, |j| j as u32));
        }
        Ok(Self { bins, times: path.times.clone(), hits })
    }

    /// Level `l(t_idx, bin) = occupation / width`.
    pub fn level(&self, t_idx: usize, bin: usize) -> f64 {
        let mut occ = 0.0;
        for k in 0..t_idx.min(self.hits.len()) {
            if self.hits[k] == bin as u32 {
                occ += self.times[k + 1] - self.times[k];
            }
        }
        occ / self.bins.width
    }

    /// Terminal level of one bin.
    pub fn final_level(&self, bin: usize) -> f64 {
        self.level(self.times.len() - 1, bin)
    }

    /// Occupation time of the whole window up to a grid index.
    pub fn window_occupation(&self, t_idx: usize) -> f64 {
        let mut occ = 0.0;
        for k in 0..t_idx.min(self.hits.len()) {
            if self.hits[k] != OUTSIDE {
                occ += self.times[k + 1] - self.times[k];
            }
        }
        occ
    }

    /// Dense `times x bins` matrix of levels, for small diagnostics.
    pub fn dense(&self) -> Vec<Vec<f64>> {
        let mut rows = Vec::with_capacity(self.times.len());
        let mut occ = vec![0.0f64; self.bins.count];
        rows.push(occ.iter().map(|o| o / self.bins.width).collect());
        for k in 0..self.hits.len() {
            if self.hits[k] != OUTSIDE {
                occ[self.hits[k] as usize] += self.times[k + 1] - self.times[k];
            }
            rows.push(occ.iter().map(|o| o / self.bins.width).collect());
        }
        rows
    }

    /// Mass of a one-dimensional measure per bin; errors when mass falls
    /// outside the window.
    pub fn bin_masses(&self, mu: &MeasureRep) -> Result<Vec<f64>, SimError> {
        bin_masses(&self.bins, mu)
    }

    /// Measure-integrated functional `A_t = sum_j l(t, bin_j) mu(bin_j)`.
    pub fn measure_pcaf(&self, mu: &MeasureRep) -> Result<PcafTrajectory, SimError> {
        let masses = self.bin_masses(mu)?;
        let mut values = Vec::with_capacity(self.times.len());
        values.push(0.0);
        let mut acc = 0.0;
        for k in 0..self.hits.len() {
            if self.hits[k] != OUTSIDE {
                let j = self.hits[k] as usize;
                acc += (self.times[k + 1] - self.times[k]) * masses[j] / self.bins.width;
            }
            values.push(acc);
        }
        Ok(PcafTrajectory {
            times: self.times.clone(),
            values,
            provenance: "measure-integrated local time".into(),
        })
    }

    /// Running sup distances of several measures against a reference, in one
    /// streaming pass (identical arithmetic to `measure_pcaf` plus
    /// `sup_distance`, without materializing trajectories).
    pub fn sup_distances_vs(
        &self,
        family: &[Vec<f64>],
        reference: &[f64],
        horizon: f64,
    ) -> Vec<f64> {
        let mut acc = vec![0.0f64; family.len()];
        let mut acc_ref = 0.0f64;
        let mut sups = vec![0.0f64; family.len()];
        for k in 0..self.hits.len() {
            if self.times[k + 1] > horizon {
                break;
            }
            if self.hits[k] != OUTSIDE {
                let j = self.hits[k] as usize;
                let dt = self.times[k + 1] - self.times[k];
                acc_ref += dt * reference[j] / self.bins.width;
                for (i, masses) in family.iter().enumerate() {
                    acc[i] += dt * masses[j] / self.bins.width;
                    let diff = (acc[i] - acc_ref).abs();
                    if diff > sups[i] {
                        sups[i] = diff;
                    }
                }
            }
        }
        sups
    }
}

/// Mass of `mu` per bin (exact interval overlaps for densities, containment
/// for atoms).
pub fn bin_masses(bins: &BinGrid, mu: &MeasureRep) -> Result<Vec<f64>, SimError> {
    let mut masses = vec![0.0f64; bins.count];
    let mut outside = 0.0;
    for atom in &mu.atoms {
        match bins.index_of(atom.position[0]) {
            Some(j) => masses[j] += atom.mass,
            None => outside += atom.mass,
        }
    }
    if let Some(density) = &mu.density {
        for idx in 0..density.cell_count() {
            let value = density.values[idx];
            if value == 0.0 {
                continue;
            }
            let (lo, hi) = density.cell_bounds(idx);
            let mut covered = 0.0;
            // cells are short; scan the bins they straddle
            let j_lo = bins.index_of(lo[0]).unwrap_or(0);
            let j_hi = bins.index_of(hi[0]).unwrap_or(bins.count - 1);
            for j in j_lo..=j_hi {
                let overlap = bins.overlap(j, lo[0], hi[0]);
                masses[j] += value * overlap;
                covered += overlap;
            }
            outside += value * ((hi[0] - lo[0]) - covered).max(0.0);
        }
    }
    if outside > 1e-12 * mu.total_mass().max(1e-300) {
        return Err(SimError::SupportOutsideBins { mass: outside });
    }
    Ok(masses)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulate::path::{sample_path, Coefficient, ProcessModel};
    use approx::assert_relative_eq;

    #[test]
    fn constant_path_concentrates_local_time() {
        // volatility-zero diffusion pinned at 0: level 1/h in the zero bin
        let model = ProcessModel::Diffusion1d {
            drift: Coefficient::Constant { value: 0.0 },
            volatility: Coefficient::Constant { value: 0.0 },
        };
        let path = sample_path(&model, 1.0, 1e-2, &[0.0], 3).unwrap();
        let bins = BinGrid::centered_at_zero(1.0, 0.05);
        let field = LocalTimeField::from_path(&path, bins).unwrap();
        let zero = bins.zero_bin().unwrap();
        assert_relative_eq!(field.final_level(zero), 1.0 / 0.05, epsilon = 1e-12);
        for j in 0..bins.count {
            if j != zero {
                assert_eq!(field.final_level(j), 0.0);
            }
        }
    }

    #[test]
    fn binning_conservation_exact() {
        let path = sample_path(&ProcessModel::Bm1d, 1.0, 1e-3, &[0.0], 21).unwrap();
        let bins = BinGrid::centered_at_zero(6.0, 0.05);
        let field = LocalTimeField::from_path(&path, bins).unwrap();
        // wide window: the path never leaves, so sum_j l(t,j) h = t exactly
        for t_idx in [0, 100, 500, 1000] {
            let total: f64 = (0..bins.count).map(|j| field.level(t_idx, j)).sum::<f64>()
                * bins.width;
            assert_relative_eq!(total, path.times[t_idx], epsilon = 1e-12);
            assert_relative_eq!(field.window_occupation(t_idx), path.times[t_idx], epsilon = 1e-12);
        }
    }

    #[test]
    fn measure_pcaf_of_dirac_is_bin_level() {
        let path = sample_path(&ProcessModel::Bm1d, 1.0, 1e-3, &[0.0], 5).unwrap();
        let bins = BinGrid::centered_at_zero(6.0, 0.05);
        let field = LocalTimeField::from_path(&path, bins).unwrap();
        let delta = MeasureRep::dirac(vec![0.0]);
        let a = field.measure_pcaf(&delta).unwrap();
        let zero = bins.zero_bin().unwrap();
        assert_relative_eq!(a.terminal(), field.final_level(zero), epsilon = 1e-12);
        assert!(a.values.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn lebesgue_on_window_recovers_time() {
        let path = sample_path(&ProcessModel::Bm1d, 1.0, 1e-3, &[0.0], 5).unwrap();
        let bins = BinGrid::centered_at_zero(6.0, 0.05);
        let field = LocalTimeField::from_path(&path, bins).unwrap();
        let lebesgue = MeasureRep::uniform_1d(bins.lo, bins.hi(), bins.hi() - bins.lo, 1);
        let a = field.measure_pcaf(&lebesgue).unwrap();
        assert_relative_eq!(a.terminal(), 1.0, epsilon = 1e-10);
    }

    #[test]
    fn support_outside_bins_rejected() {
        let path = sample_path(&ProcessModel::Bm1d, 0.1, 1e-2, &[0.0], 5).unwrap();
        let bins = BinGrid::centered_at_zero(1.0, 0.1);
        let field = LocalTimeField::from_path(&path, bins).unwrap();
        let far = MeasureRep::dirac(vec![10.0]);
        assert!(matches!(
            field.measure_pcaf(&far),
            Err(SimError::SupportOutsideBins { .. })
        ));
    }

    #[test]
    fn streaming_sups_match_trajectory_route() {
        let path = sample_path(&ProcessModel::Bm1d, 1.0, 1e-3, &[0.0], 77).unwrap();
        let bins = BinGrid::centered_at_zero(6.0, 0.05);
        let field = LocalTimeField::from_path(&path, bins).unwrap();
        let delta = MeasureRep::dirac(vec![0.0]);
        let wide = MeasureRep::uniform_1d(-0.25, 0.25, 1.0, 8);
        let narrow = MeasureRep::uniform_1d(-0.0625, 0.0625, 1.0, 8);

        let masses_ref = field.bin_masses(&delta).unwrap();
        let fam = vec![
            field.bin_masses(&wide).unwrap(),
            field.bin_masses(&narrow).unwrap(),
        ];
        let sups = field.sup_distances_vs(&fam, &masses_ref, 1.0);

        let a_ref = field.measure_pcaf(&delta).unwrap();
        for (i, mu) in [&wide, &narrow].iter().enumerate() {
            let a = field.measure_pcaf(mu).unwrap();
            let direct = crate::simulate::pcaf::sup_distance(&a, &a_ref, 1.0).unwrap();
            assert_relative_eq!(sups[i], direct, epsilon = 1e-12);
        }
    }

    #[test]
    fn bm3d_paths_rejected() {
        let path = sample_path(&ProcessModel::Bm3d, 0.1, 1e-2, &[0.0; 3], 5).unwrap();
        let bins = BinGrid::centered_at_zero(1.0, 0.1);
        assert!(matches!(
            LocalTimeField::from_path(&path, bins),
            Err(SimError::NotOneDimensional)
        ));
    }
}
