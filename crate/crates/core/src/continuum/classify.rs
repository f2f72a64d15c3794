//! Classification of measures into the energy classes.

use serde::{Deserialize, Serialize};

use super::energy::{mutual_energy, resolvent_potential, Extended};
use super::kernel::ResolventKernel;
use super::measure::MeasureRep;
use super::ContinuumError;

/// Verdict of [`classify_measure`].
///
/// `in_s0`: finite self-energy. `in_s00`: additionally finite total mass and
/// bounded potential (probed on a grid). `smooth`: charges no polar set —
/// automatic for densities and for every representable measure in one
/// dimension, false for charged atoms in three dimensions where points are
/// polar.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasureClass {
    pub in_s0: bool,
    pub in_s00: bool,
    pub smooth: bool,
    pub energy_integral: Extended,
    pub potential_sup: Extended,
}

/// Classify a measure: self-energy finiteness plus the potential bound
/// approximated as a max over the probe grid.
pub fn classify_measure(
    kernel: &ResolventKernel,
    mu: &MeasureRep,
    probe_grid: &[Vec<f64>],
) -> Result<MeasureClass, ContinuumError> {
    assert!(!probe_grid.is_empty(), "probe grid must be nonempty");
    let energy_integral = mutual_energy(kernel, mu, mu)?;
    let in_s0 = !energy_integral.is_infinite();

    let mut sup = 0.0f64;
    let mut sup_infinite = false;
    for probe in probe_grid {
        match resolvent_potential(kernel, mu, probe)? {
            Extended::Finite(v) => sup = sup.max(v),
            Extended::Infinite => {
                sup_infinite = true;
                break;
            }
        }
    }
    let potential_sup = if sup_infinite { Extended::Infinite } else { Extended::Finite(sup) };

    let mass_finite = mu.total_mass().is_finite();
    let in_s00 = in_s0 && mass_finite && !sup_infinite;
    let smooth = kernel.dim() == 1 || mu.atoms.iter().all(|a| a.mass == 0.0);

    Ok(MeasureClass { in_s0, in_s00, smooth, energy_integral, potential_sup })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::continuum::kernel::KernelModel;
    use crate::continuum::measure::GridDensity;
    use approx::assert_relative_eq;

    #[test]
    fn dirac_1d_is_s00() {
        let kernel = ResolventKernel::new(KernelModel::Bm1d, 1.0).unwrap();
        let mu = MeasureRep::dirac(vec![0.0]);
        let probes: Vec<Vec<f64>> = (-10..=10).map(|i| vec![i as f64 * 0.1]).collect();
        let class = classify_measure(&kernel, &mu, &probes).unwrap();
        assert!(class.in_s0 && class.in_s00 && class.smooth);
        // potential sup sits at the atom
        assert_relative_eq!(
            class.potential_sup.finite().unwrap(),
            std::f64::consts::FRAC_1_SQRT_2,
            epsilon = 1e-14
        );
    }

    #[test]
    fn dirac_3d_is_not_s0() {
        let kernel = ResolventKernel::new(KernelModel::Bm3d, 1.0).unwrap();
        let mu = MeasureRep::dirac(vec![0.0; 3]);
        let class = classify_measure(&kernel, &mu, &[vec![0.5, 0.0, 0.0]]).unwrap();
        assert!(!class.in_s0 && !class.in_s00 && !class.smooth);
        assert!(class.energy_integral.is_infinite());
    }

    #[test]
    fn ball_density_3d_is_s0() {
        let kernel = ResolventKernel::new(KernelModel::Bm3d, 1.0).unwrap();
        let n = 8;
        let density = GridDensity {
            lo: vec![-1.0; 3],
            hi: vec![1.0; 3],
            cells: vec![n; 3],
            values: vec![1.0; n * n * n],
        };
        let mu = MeasureRep { dim: 3, atoms: vec![], density: Some(density) };
        let class = classify_measure(&kernel, &mu, &[vec![0.0; 3]]).unwrap();
        assert!(class.in_s0 && class.smooth);
        assert!(class.energy_integral.finite().unwrap() > 0.0);
    }

    #[test]
    fn zero_measure_classifies_cleanly() {
        let kernel = ResolventKernel::new(KernelModel::Bm1d, 1.0).unwrap();
        let mu = MeasureRep::empty(1);
        let class = classify_measure(&kernel, &mu, &[vec![0.0]]).unwrap();
        assert!(class.in_s0 && class.in_s00);
        assert_eq!(class.energy_integral, Extended::Finite(0.0));
    }
}
