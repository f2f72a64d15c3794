//! Independent verification routes.
//!
//! Everything here deliberately avoids the code paths it is used to check:
//! the resolvent kernels are integrated from the Gaussian heat kernel, the
//! discrete semigroup is built from an eigendecomposition instead of the
//! Pade exponential, capacity is minimized as an inequality-constrained
//! quadratic program, and the continuum metric is reproduced on a
//! birth-death discretization. The verification suites and the oracle
//! scenario lean on these.

use nalgebra::{DMatrix, DVector};

use crate::continuum::KernelModel;
use crate::discrete::{DiscreteForm, DiscreteMeasure};
use crate::radial::simpson_adaptive;

/// Resolvent kernel via the Laplace transform of the heat kernel:
/// `int_0^50 e^{-alpha t} p_t(x, y) dt` with
/// `p_t(x, y) = (2 pi t)^{-d/2} exp(-r^2 / (2t))`.
///
/// The substitution `t = u^2` removes the `t^{-1/2}` endpoint singularity of
/// the one-dimensional diagonal; the tail beyond `t = 50` is below
/// `e^{-50 alpha}` and ignored.
pub fn heat_kernel_resolvent(model: KernelModel, alpha: f64, r: f64) -> f64 {
    let d = model.dim() as f64;
    let integrand = |u: f64| -> f64 {
        if u == 0.0 {
            return 0.0;
        }
        let t = u * u;
        let p = (2.0 * std::f64::consts::PI * t).powf(-d / 2.0) * (-r * r / (2.0 * t)).exp();
        2.0 * u * (-alpha * t).exp() * p
    };
    simpson_adaptive(&integrand, 0.0, 50f64.sqrt(), 1e-10)
}

/// Semigroup action `T_t f = e^{tL} f` through the symmetric
/// eigendecomposition of `M^{1/2} L M^{-1/2}`.
pub struct SpectralSemigroup {
    sqrt_m: DVector<f64>,
    eigenvalues: DVector<f64>,
    eigenvectors: DMatrix<f64>,
}

impl SpectralSemigroup {
    pub fn new(form: &DiscreteForm) -> Self {
        let n = form.vertex_count();
        let sqrt_m = form.base_measure().map(f64::sqrt);
        let a0 = form.base_stiffness();
        let mut sym = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                sym[(i, j)] = -a0[(i, j)] / (sqrt_m[i] * sqrt_m[j]);
            }
        }
        let eig = nalgebra::SymmetricEigen::new(sym);
        Self { sqrt_m, eigenvalues: eig.eigenvalues, eigenvectors: eig.eigenvectors }
    }

    fn conjugate(&self, weights: impl Fn(f64) -> f64, f: &DVector<f64>) -> DVector<f64> {
        let scaled = f.component_mul(&self.sqrt_m);
        let coeffs = self.eigenvectors.transpose() * scaled;
        let weighted = DVector::from_iterator(
            coeffs.len(),
            coeffs.iter().zip(self.eigenvalues.iter()).map(|(c, lam)| c * weights(*lam)),
        );
        let back = &self.eigenvectors * weighted;
        back.component_div(&self.sqrt_m)
    }

    /// `e^{tL} f`.
    pub fn apply(&self, t: f64, f: &DVector<f64>) -> DVector<f64> {
        self.conjugate(|lam| (t * lam).exp(), f)
    }

    /// `int_0^t e^{sL} f ds`.
    pub fn integral(&self, t: f64, f: &DVector<f64>) -> DVector<f64> {
        self.conjugate(
            |lam| if lam.abs() < 1e-13 { t } else { ((t * lam).exp() - 1.0) / lam },
            f,
        )
    }

    /// Resolvent `R_alpha f = int_0^inf e^{-alpha s} e^{sL} f ds` in spectral
    /// form, an independent route to `A_alpha^{-1} M f`.
    pub fn resolvent(&self, alpha: f64, f: &DVector<f64>) -> DVector<f64> {
        self.conjugate(|lam| 1.0 / (alpha - lam), f)
    }

    /// Revuz rate by the spectral route (the Pade-free twin of
    /// `DiscreteForm::revuz_rate`).
    pub fn revuz_rate(
        &self,
        form: &DiscreteForm,
        f: &DVector<f64>,
        mu: &DiscreteMeasure,
        t: f64,
    ) -> f64 {
        let density = mu.masses().component_div(form.base_measure());
        let integrand = f.component_mul(&density);
        form.base_measure().dot(&self.integral(t, &integrand)) / t
    }
}

/// Capacity by projected-gradient descent on the inequality-constrained
/// quadratic program `min { E_1(u, u) : u >= 1 on B }`, the brute-force twin
/// of the harmonic-extension solve.
pub fn capacity_projected_gradient(form: &DiscreteForm, subset: &[usize], iterations: usize) -> f64 {
    let n = form.vertex_count();
    let a1 = form.stiffness(1.0).expect("alpha = 1 is positive");
    // step from the largest eigenvalue (Gershgorin bound is enough)
    let mut lipschitz = 0.0f64;
    for i in 0..n {
        let row: f64 = (0..n).map(|j| a1[(i, j)].abs()).sum();
        lipschitz = lipschitz.max(row);
    }
    let step = 1.0 / lipschitz;

    let mut u = DVector::from_element(n, 0.0);
    for &b in subset {
        u[b] = 1.0;
    }
    for _ in 0..iterations {
        let grad = &a1 * &u;
        u -= grad * step;
        for &b in subset {
            if u[b] < 1.0 {
                u[b] = 1.0;
            }
        }
    }
    (&a1 * &u).dot(&u)
}

/// Birth-death discretization of `(1 - Delta/2)` on an interval: cells of
/// width `h = (hi - lo) / cells`, conductance `1/(2h)` between neighbors and
/// base measure `h` per cell, so the stiffness matrix is the second-order
/// finite-difference operator scaled by the cell mass.
pub fn birth_death_form(lo: f64, hi: f64, cells: usize) -> (DiscreteForm, Vec<f64>) {
    assert!(cells >= 2 && hi > lo);
    let h = (hi - lo) / cells as f64;
    let mut w = DMatrix::zeros(cells, cells);
    for i in 0..cells - 1 {
        w[(i, i + 1)] = 1.0 / (2.0 * h);
        w[(i + 1, i)] = 1.0 / (2.0 * h);
    }
    let form = DiscreteForm::build(w, vec![0.0; cells], vec![h; cells])
        .expect("birth-death construction is valid");
    let centers = (0..cells).map(|i| lo + (i as f64 + 0.5) * h).collect();
    (form, centers)
}

/// Index of the cell containing `x` on the birth-death grid.
pub fn birth_death_cell(lo: f64, hi: f64, cells: usize, x: f64) -> usize {
    let h = (hi - lo) / cells as f64;
    (((x - lo) / h).floor() as usize).min(cells - 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::continuum::ResolventKernel;
    use approx::assert_relative_eq;

    #[test]
    fn heat_kernel_reproduces_1d_diagonal() {
        let v = heat_kernel_resolvent(KernelModel::Bm1d, 1.0, 0.0);
        assert_relative_eq!(v, std::f64::consts::FRAC_1_SQRT_2, epsilon = 1e-7);
    }

    #[test]
    fn spectral_resolvent_matches_direct_solve() {
        let spec = crate::discrete::RandomFormSpec::new(12, 5);
        let form = crate::discrete::random_form(&spec);
        let semigroup = SpectralSemigroup::new(&form);
        let f = DVector::from_fn(12, |i, _| (i as f64 * 0.37).sin().abs());
        let direct = form.resolvent_apply(&f, 2.5).unwrap();
        let spectral = semigroup.resolvent(2.5, &f);
        assert_relative_eq!(direct, spectral, epsilon = 1e-10);
    }

    #[test]
    fn qp_capacity_matches_linear_system() {
        let spec = crate::discrete::RandomFormSpec::new(9, 31);
        let form = crate::discrete::random_form(&spec);
        let subset = [0usize, 4];
        let exact = form.capacity(&subset).unwrap();
        let qp = capacity_projected_gradient(&form, &subset, 200_000);
        assert_relative_eq!(exact, qp, max_relative = 1e-6);
    }

    #[test]
    fn birth_death_resolvent_tracks_kernel() {
        // R_1 applied to a narrow indicator approximates the kernel column
        let (form, centers) = birth_death_form(-5.0, 5.0, 400);
        let kernel = ResolventKernel::new(KernelModel::Bm1d, 1.0).unwrap();
        let j = birth_death_cell(-5.0, 5.0, 400, 0.0);
        // potential of the dirac at cell j
        let mu = DiscreteMeasure::dirac(400, j).unwrap();
        let u = form.potential(&mu, 1.0).unwrap().values;
        // compare at distance 1
        let i = birth_death_cell(-5.0, 5.0, 400, 1.0);
        let expect = kernel.eval_dist((centers[i] - centers[j]).abs());
        assert_relative_eq!(u[i], expect, max_relative = 0.02);
    }
}
