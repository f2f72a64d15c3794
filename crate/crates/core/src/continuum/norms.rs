//! `L^p` norms of densities over regions.

use serde::{Deserialize, Serialize};

use super::measure::GridDensity;
use super::ContinuumError;
use crate::radial::{Integral, RadialDensity};

/// A region that norms can be taken over.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum RegionSpec {
    /// `{lo <= |x| <= hi}`; `hi` may be infinite.
    Annulus { lo: f64, hi: f64 },
    /// Axis-aligned box.
    Box { lo: Vec<f64>, hi: Vec<f64> },
}

/// A density a norm can be taken of.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum NormDensity {
    Radial(RadialDensity),
    Grid(GridDensity),
}

/// `(int_region f^p dx)^{1/p}`.
///
/// Radial densities pair with annuli (closed forms and classified series),
/// grid densities with boxes (exact cell-overlap sums); the other pairings
/// are rejected. Divergent radial integrals surface as
/// [`ContinuumError::NonintegrableSingularity`] so callers cannot mistake
/// them for numbers.
pub fn lp_norm_region(
    f: &NormDensity,
    p: f64,
    region: &RegionSpec,
) -> Result<f64, ContinuumError> {
    assert!(p >= 1.0, "L^p norms need p >= 1");
    match (f, region) {
        (NormDensity::Radial(density), RegionSpec::Annulus { lo, hi }) => {
            match density.lp_norm(p, *lo, *hi) {
                Integral::Finite { value, .. } => Ok(value),
                Integral::Divergent => Err(ContinuumError::NonintegrableSingularity {
                    context: format!("L^{p} norm over annulus [{lo}, {hi}] diverges"),
                }),
            }
        }
        (NormDensity::Grid(density), RegionSpec::Box { lo, hi }) => {
            if lo.len() != density.dim() || hi.len() != density.dim() {
                return Err(ContinuumError::DimensionMismatch {
                    expected: density.dim(),
                    got: lo.len(),
                });
            }
            let mut acc = 0.0;
            for idx in 0..density.cell_count() {
                let value = density.values[idx];
                if value == 0.0 {
                    continue;
                }
                let (clo, chi) = density.cell_bounds(idx);
                let mut overlap = 1.0;
                for axis in 0..density.dim() {
                    overlap *= (chi[axis].min(hi[axis]) - clo[axis].max(lo[axis])).max(0.0);
                }
                acc += value.powf(p) * overlap;
            }
            Ok(acc.powf(1.0 / p))
        }
        (NormDensity::Radial(_), RegionSpec::Box { .. }) => {
            Err(ContinuumError::UnsupportedRegion {
                context: "radial densities integrate over annuli, not boxes".into(),
            })
        }
        (NormDensity::Grid(_), RegionSpec::Annulus { .. }) => {
            Err(ContinuumError::UnsupportedRegion {
                context: "grid densities integrate over boxes, not annuli".into(),
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn radial_power_norm_example() {
        // f = |x|^{-1}, d = 2, region {|x| >= n}, p = 3: norm^3 = 2 pi / n
        let f = NormDensity::Radial(RadialDensity::power(2, 1.0));
        let region = RegionSpec::Annulus { lo: 10.0, hi: f64::INFINITY };
        let norm = lp_norm_region(&f, 3.0, &region).unwrap();
        assert_relative_eq!(norm.powi(3), 2.0 * std::f64::consts::PI / 10.0, epsilon = 1e-12);
    }

    #[test]
    fn zero_density_any_region() {
        let f = NormDensity::Radial(RadialDensity::new(2));
        for region in [
            RegionSpec::Annulus { lo: 0.0, hi: 1.0 },
            RegionSpec::Annulus { lo: 5.0, hi: f64::INFINITY },
        ] {
            assert_eq!(lp_norm_region(&f, 2.0, &region).unwrap(), 0.0);
        }
    }

    #[test]
    fn quarter_power_l2_norm() {
        // f = |x|^{-1/4} on [-1, 1], d = 1, p = 2: norm = 2
        let f = NormDensity::Radial(
            RadialDensity::new(1).with_piece(crate::radial::RadialPiece {
                r_lo: 0.0,
                r_hi: 1.0,
                profile: crate::radial::RadialProfile::Pow { coeff: 1.0, exponent: -0.25 },
            }),
        );
        let region = RegionSpec::Annulus { lo: 0.0, hi: f64::INFINITY };
        assert_relative_eq!(lp_norm_region(&f, 2.0, &region).unwrap(), 2.0, epsilon = 1e-12);
    }

    #[test]
    fn grid_norm_exact_overlap() {
        let g = GridDensity {
            lo: vec![0.0],
            hi: vec![2.0],
            cells: vec![2],
            values: vec![3.0, 1.0],
        };
        let f = NormDensity::Grid(g);
        let region = RegionSpec::Box { lo: vec![0.5], hi: vec![2.0] };
        // 3^2 * 0.5 + 1^2 * 1.0 = 5.5
        let norm = lp_norm_region(&f, 2.0, &region).unwrap();
        assert_relative_eq!(norm, 5.5f64.sqrt(), epsilon = 1e-14);
    }

    #[test]
    fn mismatched_pairings_rejected() {
        let f = NormDensity::Radial(RadialDensity::power(2, 1.0));
        let region = RegionSpec::Box { lo: vec![0.0; 2], hi: vec![1.0; 2] };
        assert!(matches!(
            lp_norm_region(&f, 2.0, &region),
            Err(ContinuumError::UnsupportedRegion { .. })
        ));
    }

    #[test]
    fn divergence_is_reported_not_silent() {
        let f = NormDensity::Radial(RadialDensity::power(2, 2.0));
        let region = RegionSpec::Annulus { lo: 0.0, hi: 1.0 };
        assert!(matches!(
            lp_norm_region(&f, 1.0, &region),
            Err(ContinuumError::NonintegrableSingularity { .. })
        ));
    }
}
