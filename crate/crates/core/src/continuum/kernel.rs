//! The alpha-resolvent kernels of Brownian motion in one and three
//! dimensions.
//!
//! ```text
//! d = 1:  g_a(x, y) = (2a)^{-1/2} exp(-sqrt(2a) |x - y|)
//! d = 3:  g_a(x, y) = exp(-sqrt(2a) |x - y|) / (2 pi |x - y|)
//! ```
//!
//! These closed forms are not taken on faith: the test suites certify both
//! against the Laplace transform of the Gaussian heat kernel (see
//! `crate::oracle::heat_kernel_resolvent`).

use serde::{Deserialize, Serialize};

use super::ContinuumError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelModel {
    Bm1d,
    Bm3d,
}

impl KernelModel {
    pub fn dim(&self) -> usize {
        match self {
            KernelModel::Bm1d => 1,
            KernelModel::Bm3d => 3,
        }
    }

    pub fn from_dim(d: u32) -> Result<Self, ContinuumError> {
        match d {
            1 => Ok(KernelModel::Bm1d),
            3 => Ok(KernelModel::Bm3d),
            other => Err(ContinuumError::UnsupportedDimension(other)),
        }
    }
}

/// `g_alpha` for one of the supported models.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResolventKernel {
    model: KernelModel,
    alpha: f64,
}

impl ResolventKernel {
    pub fn new(model: KernelModel, alpha: f64) -> Result<Self, ContinuumError> {
        if alpha <= 0.0 || !alpha.is_finite() {
            return Err(ContinuumError::NonpositiveAlpha(alpha));
        }
        Ok(Self { model, alpha })
    }

    pub fn model(&self) -> KernelModel {
        self.model
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn dim(&self) -> usize {
        self.model.dim()
    }

    /// Decay rate `sqrt(2 alpha)`.
    pub fn kappa(&self) -> f64 {
        (2.0 * self.alpha).sqrt()
    }

    /// Kernel as a function of the distance `r >= 0`. Returns infinity on
    /// the diagonal of the three-dimensional model.
    pub fn eval_dist(&self, r: f64) -> f64 {
        let kappa = self.kappa();
        match self.model {
            KernelModel::Bm1d => (-kappa * r).exp() / kappa,
            KernelModel::Bm3d => {
                if r == 0.0 {
                    f64::INFINITY
                } else {
                    (-kappa * r).exp() / (2.0 * std::f64::consts::PI * r)
                }
            }
        }
    }

    /// Kernel at a pair of points.
    pub fn eval(&self, x: &[f64], y: &[f64]) -> Result<f64, ContinuumError> {
        let d = self.dim();
        if x.len() != d {
            return Err(ContinuumError::DimensionMismatch { expected: d, got: x.len() });
        }
        if y.len() != d {
            return Err(ContinuumError::DimensionMismatch { expected: d, got: y.len() });
        }
        Ok(self.eval_dist(distance(x, y)))
    }

    /// Exact integral of the kernel from a point against a 1-d interval:
    /// `int_l^r g_alpha(x, y) dy` for the one-dimensional model.
    pub fn interval_integral_1d(&self, x: f64, l: f64, r: f64) -> f64 {
        debug_assert!(matches!(self.model, KernelModel::Bm1d));
        if r <= l {
            return 0.0;
        }
        let kappa = self.kappa();
        // primitive of exp(-kappa |x - y|) dy in y, split at y = x
        let anti = |y: f64| -> f64 {
            if y <= x {
                (-kappa * (x - y)).exp() / kappa
            } else {
                (2.0 - (-kappa * (y - x)).exp()) / kappa
            }
        };
        (anti(r) - anti(l)) / kappa
    }

    /// Exact integral of the three-dimensional kernel over a centered ball:
    /// `int_{B(x, R)} g_alpha(x, y) dy = (1 - e^{-kappa R}(1 + kappa R)) / alpha`.
    pub fn ball_integral_3d(&self, radius: f64) -> f64 {
        debug_assert!(matches!(self.model, KernelModel::Bm3d));
        let kappa = self.kappa();
        let kr = kappa * radius;
        // 2/kappa^2 = 1/alpha
        (1.0 - (-kr).exp() * (1.0 + kr)) / self.alpha
    }
}

pub(crate) fn distance(x: &[f64], y: &[f64]) -> f64 {
    x.iter()
        .zip(y)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn bm1d_diagonal_value() {
        let k = ResolventKernel::new(KernelModel::Bm1d, 1.0).unwrap();
        assert_relative_eq!(k.eval_dist(0.0), std::f64::consts::FRAC_1_SQRT_2, epsilon = 1e-15);
    }

    #[test]
    fn bm1d_monotone_decay_to_zero() {
        let k = ResolventKernel::new(KernelModel::Bm1d, 1.0).unwrap();
        let mut prev = k.eval_dist(0.0);
        for i in 1..40 {
            let v = k.eval_dist(i as f64);
            assert!(v < prev);
            prev = v;
        }
        assert!(prev < 1e-20);
    }

    #[test]
    fn bm3d_diagonal_is_infinite() {
        let k = ResolventKernel::new(KernelModel::Bm3d, 1.0).unwrap();
        assert!(k.eval_dist(0.0).is_infinite());
        // frozen from the heat-kernel Laplace-transform oracle at r = 1
        assert_relative_eq!(k.eval_dist(1.0), 3.869323003356479e-2, epsilon = 1e-12);
    }

    #[test]
    fn symmetry_in_arguments() {
        let k = ResolventKernel::new(KernelModel::Bm3d, 2.5).unwrap();
        let x = [0.3, -1.0, 2.0];
        let y = [1.1, 0.4, -0.2];
        assert_eq!(k.eval(&x, &y).unwrap(), k.eval(&y, &x).unwrap());
        assert!(matches!(
            k.eval(&x[..2], &y),
            Err(ContinuumError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn interval_integral_matches_quadrature() {
        let k = ResolventKernel::new(KernelModel::Bm1d, 1.0).unwrap();
        for (x, l, r) in [(0.0, -1.0, 1.0), (0.5, -0.25, 0.3), (-2.0, 0.0, 3.0)] {
            let exact = k.interval_integral_1d(x, l, r);
            let quad = crate::radial::simpson_adaptive(&|y: f64| k.eval_dist((x - y).abs()), l, r, 1e-12);
            assert_relative_eq!(exact, quad, epsilon = 1e-10);
        }
    }

    #[test]
    fn ball_integral_matches_radial_quadrature() {
        let k = ResolventKernel::new(KernelModel::Bm3d, 1.0).unwrap();
        let radius = 0.7;
        let exact = k.ball_integral_3d(radius);
        let quad = crate::radial::simpson_adaptive(
            &|r: f64| 4.0 * std::f64::consts::PI * r * r * k.eval_dist(r),
            1e-12,
            radius,
            1e-12,
        );
        assert_relative_eq!(exact, quad, epsilon = 1e-9);
    }

    #[test]
    fn alpha_must_be_positive() {
        assert!(ResolventKernel::new(KernelModel::Bm1d, 0.0).is_err());
        assert!(ResolventKernel::new(KernelModel::Bm1d, -1.0).is_err());
    }
}
