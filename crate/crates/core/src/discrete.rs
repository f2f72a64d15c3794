//! Exact finite-state symmetric Dirichlet forms.
//!
//! A [`DiscreteForm`] is a finite weighted graph with optional killing and a
//! strictly positive base measure. The energy is
//!
//! ```text
//! E(u, v) = 1/2 * sum_{i != j} w_ij (u_i - u_j)(v_i - v_j) + sum_i k_i u_i v_i
//! ```
//!
//! and `E_alpha(u, v) = E(u, v) + alpha <u, v>_m = u^T A_alpha v` with the
//! stiffness matrix `A_alpha = A_0 + alpha diag(m)`. Everything in this module
//! reduces to solves against `A_alpha`, which is symmetric positive definite
//! for `alpha > 0`, so all stated identities hold to solver residual.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::jsonfmt;
use crate::linalg::{matrix_exp, SpdFactor, SOLVE_RESIDUAL_TOL};

#[derive(Debug, Error)]
pub enum DiscreteError {
    #[error("conductance matrix is asymmetric at ({i}, {j}): {wij} vs {wji}")]
    AsymmetricConductance { i: usize, j: usize, wij: f64, wji: f64 },
    #[error("base measure must be strictly positive, entry {index} is {value}")]
    NonpositiveBaseMeasure { index: usize, value: f64 },
    #[error("negative entry in {what} at index {index}: {value}")]
    NegativeEntry { what: &'static str, index: usize, value: f64 },
    #[error("dimension mismatch: {context}")]
    DimensionMismatch { context: String },
    #[error("alpha must be positive, got {0}")]
    NonpositiveAlpha(f64),
    #[error("time horizon must be positive, got {0}")]
    NonpositiveTime(f64),
    #[error("vertex subset must be nonempty")]
    EmptySet,
    #[error("vertex index {index} out of range for {vertices} vertices")]
    VertexOutOfRange { index: usize, vertices: usize },
    #[error("stiffness matrix numerically singular (condition estimate {cond:.3e})")]
    SolverFailure { cond: f64 },
    #[error("invalid form document: {0}")]
    BadDocument(String),
}

/// A nonnegative measure on the vertices of a [`DiscreteForm`].
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMeasure {
    masses: DVector<f64>,
}

impl DiscreteMeasure {
    pub fn new(masses: Vec<f64>) -> Result<Self, DiscreteError> {
        for (index, &value) in masses.iter().enumerate() {
            if value < 0.0 || !value.is_finite() {
                return Err(DiscreteError::NegativeEntry { what: "measure", index, value });
            }
        }
        Ok(Self { masses: DVector::from_vec(masses) })
    }

    /// Unit point mass at one vertex.
    pub fn dirac(vertices: usize, at: usize) -> Result<Self, DiscreteError> {
        if at >= vertices {
            return Err(DiscreteError::VertexOutOfRange { index: at, vertices });
        }
        let mut masses = vec![0.0; vertices];
        masses[at] = 1.0;
        Self::new(masses)
    }

    pub fn masses(&self) -> &DVector<f64> {
        &self.masses
    }

    pub fn total_mass(&self) -> f64 {
        self.masses.sum()
    }

    pub fn len(&self) -> usize {
        self.masses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masses.len() == 0
    }

    pub fn to_json(&self) -> String {
        let mut out = String::from("{\"masses\": ");
        jsonfmt::push_f64_array(&mut out, self.masses.as_slice());
        out.push('}');
        out
    }

    pub fn from_json(doc: &str) -> Result<Self, DiscreteError> {
        let v: serde_json::Value = serde_json::from_str(doc)
            .map_err(|e| DiscreteError::BadDocument(e.to_string()))?;
        let masses = jsonfmt::f64_array(&v["masses"])
            .ok_or_else(|| DiscreteError::BadDocument("missing \"masses\" array".into()))?;
        Self::new(masses)
    }
}

/// The alpha-potential `U_alpha mu`: the unique vector with
/// `E_alpha(U_alpha mu, v) = sum_i v_i mu_i` for every `v`.
#[derive(Debug, Clone)]
pub struct PotentialVector {
    pub values: DVector<f64>,
    pub alpha: f64,
}

/// Finite weighted graph carrying a symmetric Dirichlet form.
#[derive(Debug, Clone)]
pub struct DiscreteForm {
    conductances: DMatrix<f64>,
    killing: DVector<f64>,
    base_measure: DVector<f64>,
}

impl DiscreteForm {
    /// Validate and build a form. The conductance matrix must be symmetric
    /// with zero diagonal and nonnegative entries, killing nonnegative and
    /// the base measure strictly positive.
    pub fn build(
        conductances: DMatrix<f64>,
        killing: Vec<f64>,
        base_measure: Vec<f64>,
    ) -> Result<Self, DiscreteError> {
        let n = conductances.nrows();
        if conductances.ncols() != n {
            return Err(DiscreteError::DimensionMismatch {
                context: format!("conductance matrix is {}x{}", n, conductances.ncols()),
            });
        }
        if killing.len() != n || base_measure.len() != n {
            return Err(DiscreteError::DimensionMismatch {
                context: format!(
                    "{} vertices but killing has {} and base measure {} entries",
                    n,
                    killing.len(),
                    base_measure.len()
                ),
            });
        }
        for i in 0..n {
            for j in 0..n {
                let wij = conductances[(i, j)];
                if wij < 0.0 || !wij.is_finite() {
                    return Err(DiscreteError::NegativeEntry {
                        what: "conductances",
                        index: i * n + j,
                        value: wij,
                    });
                }
                if i == j && wij != 0.0 {
                    return Err(DiscreteError::NegativeEntry {
                        what: "conductance diagonal",
                        index: i,
                        value: wij,
                    });
                }
                if j > i {
                    let wji = conductances[(j, i)];
                    if wij != wji {
                        return Err(DiscreteError::AsymmetricConductance { i, j, wij, wji });
                    }
                }
            }
        }
        for (index, &value) in killing.iter().enumerate() {
            if value < 0.0 || !value.is_finite() {
                return Err(DiscreteError::NegativeEntry { what: "killing", index, value });
            }
        }
        for (index, &value) in base_measure.iter().enumerate() {
            if value <= 0.0 || !value.is_finite() {
                return Err(DiscreteError::NonpositiveBaseMeasure { index, value });
            }
        }
        Ok(Self {
            conductances,
            killing: DVector::from_vec(killing),
            base_measure: DVector::from_vec(base_measure),
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.base_measure.len()
    }

    pub fn base_measure(&self) -> &DVector<f64> {
        &self.base_measure
    }

    pub fn killing(&self) -> &DVector<f64> {
        &self.killing
    }

    pub fn conductances(&self) -> &DMatrix<f64> {
        &self.conductances
    }

    /// The energy `E(u, v)` evaluated from its definition (not via `A_0`),
    /// so tests can cross-check the stiffness assembly.
    pub fn energy(&self, u: &DVector<f64>, v: &DVector<f64>) -> f64 {
        let n = self.vertex_count();
        let mut acc = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                acc += self.conductances[(i, j)] * (u[i] - u[j]) * (v[i] - v[j]);
            }
            acc += self.killing[i] * u[i] * v[i];
        }
        acc
    }

    /// `E_alpha(u, v) = E(u, v) + alpha <u, v>_m`.
    pub fn energy_alpha(&self, alpha: f64, u: &DVector<f64>, v: &DVector<f64>) -> f64 {
        let mut weighted = 0.0;
        for i in 0..self.vertex_count() {
            weighted += self.base_measure[i] * u[i] * v[i];
        }
        self.energy(u, v) + alpha * weighted
    }

    /// `sqrt(E_alpha(u, u))`, clamping round-off below zero.
    pub fn energy_norm(&self, alpha: f64, u: &DVector<f64>) -> f64 {
        self.energy_alpha(alpha, u, u).max(0.0).sqrt()
    }

    /// Stiffness matrix of the base energy: `A_0 = D - W + diag(k)`.
    pub fn base_stiffness(&self) -> DMatrix<f64> {
        let n = self.vertex_count();
        let mut a = DMatrix::zeros(n, n);
        for i in 0..n {
            let mut degree = 0.0;
            for j in 0..n {
                if i != j {
                    let w = self.conductances[(i, j)];
                    degree += w;
                    a[(i, j)] = -w;
                }
            }
            a[(i, i)] = degree + self.killing[i];
        }
        a
    }

    /// `A_alpha = A_0 + alpha diag(m)`.
    pub fn stiffness(&self, alpha: f64) -> Result<DMatrix<f64>, DiscreteError> {
        if alpha <= 0.0 || !alpha.is_finite() {
            return Err(DiscreteError::NonpositiveAlpha(alpha));
        }
        let mut a = self.base_stiffness();
        for i in 0..self.vertex_count() {
            a[(i, i)] += alpha * self.base_measure[i];
        }
        Ok(a)
    }

    /// Cholesky factor of `A_alpha`.
    pub fn factor(&self, alpha: f64) -> Result<SpdFactor, DiscreteError> {
        let a = self.stiffness(alpha)?;
        SpdFactor::new(a).map_err(|cond| DiscreteError::SolverFailure { cond })
    }

    fn solve_checked(
        factor: &SpdFactor,
        rhs: &DVector<f64>,
    ) -> Result<DVector<f64>, DiscreteError> {
        let (x, residual) = factor.solve(rhs);
        if residual > SOLVE_RESIDUAL_TOL {
            return Err(DiscreteError::SolverFailure { cond: residual / SOLVE_RESIDUAL_TOL });
        }
        Ok(x)
    }

    /// The alpha-potential of `mu`: solves `A_alpha u = mu`.
    pub fn potential(
        &self,
        mu: &DiscreteMeasure,
        alpha: f64,
    ) -> Result<PotentialVector, DiscreteError> {
        self.check_len(mu.len())?;
        let factor = self.factor(alpha)?;
        let values = Self::solve_checked(&factor, mu.masses())?;
        Ok(PotentialVector { values, alpha })
    }

    /// The metric `rho_alpha(mu, nu) = |U_alpha mu - U_alpha nu|_{E_alpha}`,
    /// computed as `sqrt((mu - nu)^T A_alpha^{-1} (mu - nu))`.
    pub fn rho_alpha(
        &self,
        mu: &DiscreteMeasure,
        nu: &DiscreteMeasure,
        alpha: f64,
    ) -> Result<f64, DiscreteError> {
        self.check_len(mu.len())?;
        self.check_len(nu.len())?;
        let diff = mu.masses() - nu.masses();
        let factor = self.factor(alpha)?;
        let sol = Self::solve_checked(&factor, &diff)?;
        Ok(diff.dot(&sol).max(0.0).sqrt())
    }

    /// `rho = rho_1`, the canonical metric.
    pub fn rho(&self, mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Result<f64, DiscreteError> {
        self.rho_alpha(mu, nu, 1.0)
    }

    /// Resolvent `R_alpha f = A_alpha^{-1} (M f)` with `M = diag(m)`.
    pub fn resolvent_apply(
        &self,
        f: &DVector<f64>,
        alpha: f64,
    ) -> Result<DVector<f64>, DiscreteError> {
        self.check_len(f.len())?;
        let rhs = f.component_mul(&self.base_measure);
        let factor = self.factor(alpha)?;
        Self::solve_checked(&factor, &rhs)
    }

    /// The approximating sequence `g_n = n (f - n R_{n+1} f)` for a
    /// 1-potential `f`. Satisfies `R_1 g_n = n R_{n+1} f` exactly.
    pub fn approx_g(&self, f: &DVector<f64>, n: u32) -> Result<DVector<f64>, DiscreteError> {
        assert!(n >= 1, "approx_g needs n >= 1");
        let nf = n as f64;
        let rf = self.resolvent_apply(f, nf + 1.0)?;
        Ok((f - rf * nf) * nf)
    }

    /// Resolvent kernel entry `g_alpha(x, y)` with respect to `m`, i.e. the
    /// kernel with `R_alpha f(x) = sum_y g_alpha(x, y) f(y) m_y`. Equals
    /// `(A_alpha^{-1})_{xy}`.
    pub fn resolvent_kernel(&self, alpha: f64, x: usize, y: usize) -> Result<f64, DiscreteError> {
        self.check_vertex(x)?;
        self.check_vertex(y)?;
        let factor = self.factor(alpha)?;
        Ok(factor.inverse_entry(x, y))
    }

    /// 1-capacity of a vertex subset: `min { E_1(u,u) : u = 1 on B }`,
    /// solved through the harmonic-extension linear system.
    pub fn capacity(&self, subset: &[usize]) -> Result<f64, DiscreteError> {
        if subset.is_empty() {
            return Err(DiscreteError::EmptySet);
        }
        let n = self.vertex_count();
        let mut in_b = vec![false; n];
        for &v in subset {
            self.check_vertex(v)?;
            in_b[v] = true;
        }
        let complement: Vec<usize> = (0..n).filter(|&i| !in_b[i]).collect();
        let a1 = self.stiffness(1.0)?;

        let mut u = DVector::from_element(n, 1.0);
        if !complement.is_empty() {
            let nc = complement.len();
            let mut acc = DMatrix::zeros(nc, nc);
            let mut rhs = DVector::zeros(nc);
            for (p, &i) in complement.iter().enumerate() {
                for (q, &j) in complement.iter().enumerate() {
                    acc[(p, q)] = a1[(i, j)];
                }
                let mut boundary = 0.0;
                for j in 0..n {
                    if in_b[j] {
                        boundary += a1[(i, j)];
                    }
                }
                rhs[p] = -boundary;
            }
            let factor =
                SpdFactor::new(acc).map_err(|cond| DiscreteError::SolverFailure { cond })?;
            let uc = Self::solve_checked(&factor, &rhs)?;
            for (p, &i) in complement.iter().enumerate() {
                u[i] = uc[p];
            }
        }
        Ok((&a1 * &u).dot(&u))
    }

    /// Generator `L = -M^{-1} A_0` of the associated Markov semigroup.
    pub fn generator(&self) -> DMatrix<f64> {
        let mut l = self.base_stiffness();
        for i in 0..self.vertex_count() {
            let inv = -1.0 / self.base_measure[i];
            for j in 0..self.vertex_count() {
                l[(i, j)] *= inv;
            }
        }
        l
    }

    /// Finite-time Revuz rate
    /// `(1/t) sum_i m_i E_i[ int_0^t f(X_s) g(X_s) ds ]` for the measure
    /// `mu = g m`. Evaluated exactly through the matrix exponential of the
    /// generator; tends to `sum_i f_i mu_i` as `t -> 0`.
    pub fn revuz_rate(
        &self,
        f: &DVector<f64>,
        mu: &DiscreteMeasure,
        t: f64,
    ) -> Result<f64, DiscreteError> {
        if t <= 0.0 || !t.is_finite() {
            return Err(DiscreteError::NonpositiveTime(t));
        }
        self.check_len(f.len())?;
        self.check_len(mu.len())?;
        let n = self.vertex_count();
        // density of mu with respect to m, so that dA_s = g(X_s) ds
        let density = mu.masses().component_div(&self.base_measure);
        let integrand = f.component_mul(&density);

        // Van Loan block trick: exp([[L, I], [0, 0]] t) has int_0^t exp(sL) ds
        // in its upper right block.
        let l = self.generator();
        let mut block = DMatrix::zeros(2 * n, 2 * n);
        for i in 0..n {
            for j in 0..n {
                block[(i, j)] = l[(i, j)] * t;
            }
            block[(i, n + i)] = t;
        }
        let e = matrix_exp(&block);
        let mut integral = DVector::zeros(n);
        for i in 0..n {
            let mut acc = 0.0;
            for j in 0..n {
                acc += e[(i, n + j)] * integrand[j];
            }
            integral[i] = acc;
        }
        Ok(self.base_measure.dot(&integral) / t)
    }

    fn check_len(&self, len: usize) -> Result<(), DiscreteError> {
        if len != self.vertex_count() {
            return Err(DiscreteError::DimensionMismatch {
                context: format!("expected {} entries, got {}", self.vertex_count(), len),
            });
        }
        Ok(())
    }

    fn check_vertex(&self, v: usize) -> Result<(), DiscreteError> {
        if v >= self.vertex_count() {
            return Err(DiscreteError::VertexOutOfRange {
                index: v,
                vertices: self.vertex_count(),
            });
        }
        Ok(())
    }

    /// Serialize to the form document
    /// `{"vertices": N, "edges": [[i,j,w],...], "killing": [...], "m": [...]}`
    /// with all reals at 17 significant digits.
    pub fn to_json(&self) -> String {
        let n = self.vertex_count();
        let mut out = String::new();
        out.push_str("{\"vertices\": ");
        out.push_str(&n.to_string());
        out.push_str(", \"edges\": [");
        let mut first = true;
        for i in 0..n {
            for j in (i + 1)..n {
                let w = self.conductances[(i, j)];
                if w > 0.0 {
                    if !first {
                        out.push_str(", ");
                    }
                    first = false;
                    out.push('[');
                    out.push_str(&i.to_string());
                    out.push_str(", ");
                    out.push_str(&j.to_string());
                    out.push_str(", ");
                    jsonfmt::push_f64(&mut out, w);
                    out.push(']');
                }
            }
        }
        out.push_str("], \"killing\": ");
        jsonfmt::push_f64_array(&mut out, self.killing.as_slice());
        out.push_str(", \"m\": ");
        jsonfmt::push_f64_array(&mut out, self.base_measure.as_slice());
        out.push('}');
        out
    }

    pub fn from_json(doc: &str) -> Result<Self, DiscreteError> {
        let v: serde_json::Value = serde_json::from_str(doc)
            .map_err(|e| DiscreteError::BadDocument(e.to_string()))?;
        let n = v["vertices"]
            .as_u64()
            .ok_or_else(|| DiscreteError::BadDocument("missing \"vertices\"".into()))?
            as usize;
        let mut w = DMatrix::zeros(n, n);
        let edges = v["edges"]
            .as_array()
            .ok_or_else(|| DiscreteError::BadDocument("missing \"edges\" array".into()))?;
        for e in edges {
            let triple = e
                .as_array()
                .filter(|a| a.len() == 3)
                .ok_or_else(|| DiscreteError::BadDocument("edge must be [i, j, w]".into()))?;
            let i = triple[0]
                .as_u64()
                .ok_or_else(|| DiscreteError::BadDocument("edge index".into()))?
                as usize;
            let j = triple[1]
                .as_u64()
                .ok_or_else(|| DiscreteError::BadDocument("edge index".into()))?
                as usize;
            let weight = triple[2]
                .as_f64()
                .ok_or_else(|| DiscreteError::BadDocument("edge weight".into()))?;
            if i >= n || j >= n {
                return Err(DiscreteError::BadDocument(format!(
                    "edge ({i}, {j}) out of range for {n} vertices"
                )));
            }
            w[(i, j)] = weight;
            w[(j, i)] = weight;
        }
        let killing = jsonfmt::f64_array(&v["killing"])
            .ok_or_else(|| DiscreteError::BadDocument("missing \"killing\" array".into()))?;
        let m = jsonfmt::f64_array(&v["m"])
            .ok_or_else(|| DiscreteError::BadDocument("missing \"m\" array".into()))?;
        Self::build(w, killing, m)
    }
}

/// Parameters for seeded random form generation: Erdos-Renyi connectivity
/// with uniform weights, used by the property suites and the oracle scenario.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct RandomFormSpec {
    pub vertices: usize,
    /// Edge probability (the suites fix 0.3).
    pub edge_prob: f64,
    /// Probability that a vertex carries killing.
    pub killing_prob: f64,
    pub seed: u64,
}

impl RandomFormSpec {
    pub fn new(vertices: usize, seed: u64) -> Self {
        Self { vertices, edge_prob: 0.3, killing_prob: 0.0, seed }
    }
}

/// Random form instance: weights uniform on (0, 1], base measure uniform on
/// [0.5, 1.5]. Deterministic in the spec's seed.
pub fn random_form(spec: &RandomFormSpec) -> DiscreteForm {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let n = spec.vertices;
    let mut w = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            if rng.random::<f64>() < spec.edge_prob {
                let weight = 1.0 - rng.random::<f64>(); // (0, 1]
                w[(i, j)] = weight;
                w[(j, i)] = weight;
            }
        }
    }
    let killing: Vec<f64> = (0..n)
        .map(|_| {
            if rng.random::<f64>() < spec.killing_prob {
                0.5 * rng.random::<f64>()
            } else {
                0.0
            }
        })
        .collect();
    let m: Vec<f64> = (0..n).map(|_| 0.5 + rng.random::<f64>()).collect();
    DiscreteForm::build(w, killing, m).expect("random form construction is always valid")
}

/// Random nonnegative measure with entries uniform on [0, 1).
pub fn random_measure(vertices: usize, seed: u64) -> DiscreteMeasure {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    DiscreteMeasure::new((0..vertices).map(|_| rng.random::<f64>()).collect())
        .expect("nonnegative by construction")
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn two_vertex_form() -> DiscreteForm {
        let w = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        DiscreteForm::build(w, vec![0.0, 0.0], vec![1.0, 1.0]).unwrap()
    }

    #[test]
    fn two_vertex_stiffness_matches_hand_assembly() {
        // E_1(u, v) = u^T [[2,-1],[-1,2]] v assembled by hand
        let form = two_vertex_form();
        let a1 = form.stiffness(1.0).unwrap();
        assert_eq!(a1, DMatrix::from_row_slice(2, 2, &[2.0, -1.0, -1.0, 2.0]));
        // cross-check against the definition of the energy
        let u = DVector::from_vec(vec![0.3, -1.2]);
        let v = DVector::from_vec(vec![2.0, 0.7]);
        assert_relative_eq!(form.energy_alpha(1.0, &u, &v), (&a1 * &v).dot(&u), epsilon = 1e-14);
    }

    #[test]
    fn asymmetric_conductance_rejected() {
        let w = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 2.0, 0.0]);
        let err = DiscreteForm::build(w, vec![0.0, 0.0], vec![1.0, 1.0]).unwrap_err();
        assert!(matches!(err, DiscreteError::AsymmetricConductance { i: 0, j: 1, .. }));
    }

    #[test]
    fn single_vertex_form() {
        let w = DMatrix::zeros(1, 1);
        let form = DiscreteForm::build(w, vec![0.0], vec![1.0]).unwrap();
        let a1 = form.stiffness(1.0).unwrap();
        assert_eq!(a1[(0, 0)], 1.0);
    }

    #[test]
    fn nonpositive_base_measure_names_index() {
        let w = DMatrix::zeros(2, 2);
        let err = DiscreteForm::build(w, vec![0.0, 0.0], vec![1.0, 0.0]).unwrap_err();
        assert!(matches!(err, DiscreteError::NonpositiveBaseMeasure { index: 1, .. }));
    }

    #[test]
    fn potential_by_hand_inverse() {
        // A_1^{-1} = (1/3) [[2,1],[1,2]]
        let form = two_vertex_form();
        let mu = DiscreteMeasure::new(vec![1.0, 0.0]).unwrap();
        let u = form.potential(&mu, 1.0).unwrap();
        assert_relative_eq!(u.values[0], 2.0 / 3.0, epsilon = 1e-12);
        assert_relative_eq!(u.values[1], 1.0 / 3.0, epsilon = 1e-12);

        let nu = DiscreteMeasure::new(vec![0.0, 1.0]).unwrap();
        let v = form.potential(&nu, 1.0).unwrap();
        assert_relative_eq!(v.values[0], 1.0 / 3.0, epsilon = 1e-12);
        assert_relative_eq!(v.values[1], 2.0 / 3.0, epsilon = 1e-12);
    }

    #[test]
    fn zero_measure_zero_potential() {
        let form = two_vertex_form();
        let mu = DiscreteMeasure::new(vec![0.0, 0.0]).unwrap();
        let u = form.potential(&mu, 1.0).unwrap();
        assert_eq!(u.values[0], 0.0);
        assert_eq!(u.values[1], 0.0);
    }

    #[test]
    fn rho_two_vertex_value() {
        // (1,-1) A_1^{-1} (1,-1)^T = 2/3
        let form = two_vertex_form();
        let mu = DiscreteMeasure::new(vec![1.0, 0.0]).unwrap();
        let nu = DiscreteMeasure::new(vec![0.0, 1.0]).unwrap();
        let r = form.rho(&mu, &nu).unwrap();
        assert_relative_eq!(r, (2.0f64 / 3.0).sqrt(), epsilon = 1e-12);
        assert_eq!(form.rho(&mu, &mu).unwrap(), 0.0);
    }

    #[test]
    fn rho_alpha_equivalence_bounds() {
        let form = two_vertex_form();
        let mu = DiscreteMeasure::new(vec![1.0, 0.0]).unwrap();
        let nu = DiscreteMeasure::new(vec![0.0, 1.0]).unwrap();
        let rho = form.rho(&mu, &nu).unwrap();
        let alpha = 2.0;
        let rho_a = form.rho_alpha(&mu, &nu, alpha).unwrap();
        let lower = (1.0 / alpha.max(1.0)).sqrt() * rho;
        let upper = ((1.0 / alpha).max(1.0)).sqrt() * rho;
        assert!(lower - 1e-12 <= rho_a && rho_a <= upper + 1e-12);
    }

    #[test]
    fn resolvent_fixes_constants_without_killing() {
        let form = two_vertex_form();
        let ones = DVector::from_element(2, 1.0);
        let r = form.resolvent_apply(&ones, 1.0).unwrap();
        assert_relative_eq!(r[0], 1.0, epsilon = 1e-12);
        assert_relative_eq!(r[1], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn resolvent_hand_value_and_strong_continuity() {
        let form = two_vertex_form();
        let f = DVector::from_vec(vec![1.0, 0.0]);
        let r = form.resolvent_apply(&f, 1.0).unwrap();
        assert_relative_eq!(r[0], 2.0 / 3.0, epsilon = 1e-12);
        assert_relative_eq!(r[1], 1.0 / 3.0, epsilon = 1e-12);
        // alpha R_alpha f -> f
        let alpha = 1e3;
        let r = form.resolvent_apply(&f, alpha).unwrap() * alpha;
        assert!((r[0] - f[0]).abs() < 1e-2 && (r[1] - f[1]).abs() < 1e-2);
    }

    #[test]
    fn approx_g_hand_value() {
        // f = U_1 (1,0) = (2/3, 1/3); A_2 = [[3,-1],[-1,3]] gives
        // R_2 f = (7/24, 5/24) and g_1 = f - R_2 f = (3/8, 1/8).
        let form = two_vertex_form();
        let mu = DiscreteMeasure::new(vec![1.0, 0.0]).unwrap();
        let f = form.potential(&mu, 1.0).unwrap().values;
        let g1 = form.approx_g(&f, 1).unwrap();
        assert_relative_eq!(g1[0], 3.0 / 8.0, epsilon = 1e-12);
        assert_relative_eq!(g1[1], 1.0 / 8.0, epsilon = 1e-12);
        // resolvent equation: R_1 g_n = n R_{n+1} f, exact algebra
        for n in [1u32, 3, 10] {
            let gn = form.approx_g(&f, n).unwrap();
            let lhs = form.resolvent_apply(&gn, 1.0).unwrap();
            let rhs = form.resolvent_apply(&f, n as f64 + 1.0).unwrap() * n as f64;
            assert_relative_eq!(lhs, rhs, epsilon = 1e-10);
        }
    }

    #[test]
    fn capacity_two_vertex() {
        let form = two_vertex_form();
        assert_relative_eq!(form.capacity(&[0]).unwrap(), 1.5, epsilon = 1e-12);
        // point capacity identity Cap({y}) g_1(y, y) = 1
        let g00 = form.resolvent_kernel(1.0, 0, 0).unwrap();
        assert_relative_eq!(g00, 2.0 / 3.0, epsilon = 1e-12);
        assert_relative_eq!(form.capacity(&[0]).unwrap() * g00, 1.0, epsilon = 1e-12);
        // full set forces u = 1
        let full = form.capacity(&[0, 1]).unwrap();
        assert_relative_eq!(full, 2.0, epsilon = 1e-12); // sum k + sum m
        assert!(matches!(form.capacity(&[]), Err(DiscreteError::EmptySet)));
    }

    #[test]
    fn revuz_rate_conservative_total_mass() {
        // f = 1 on a conservative chain integrates the total mass exactly
        let form = two_vertex_form();
        let mu = DiscreteMeasure::new(vec![0.4, 0.8]).unwrap();
        let ones = DVector::from_element(2, 1.0);
        for t in [1.0, 0.1, 0.01] {
            let rate = form.revuz_rate(&ones, &mu, t).unwrap();
            assert_relative_eq!(rate, mu.total_mass(), epsilon = 1e-10);
        }
    }

    #[test]
    fn revuz_rate_tends_to_pairing() {
        // conservative chain: <1, T_s phi>_m = <phi, 1>_m by symmetry, so the
        // rate equals the pairing sum f_i mu_i exactly at every t
        let form = two_vertex_form();
        let f = DVector::from_vec(vec![1.0, 0.0]);
        let mu = DiscreteMeasure::new(vec![1.0, 0.0]).unwrap();
        let rate = form.revuz_rate(&f, &mu, 0.01).unwrap();
        assert!((rate - 1.0).abs() <= 0.05);
        assert_relative_eq!(rate, 1.0, epsilon = 1e-12);
        assert!(matches!(
            form.revuz_rate(&f, &mu, 0.0),
            Err(DiscreteError::NonpositiveTime(_))
        ));
    }

    #[test]
    fn revuz_rate_with_killing_converges_linearly() {
        // killing makes h = 1 only 0-excessive: the rate drops below the
        // pairing with an O(t) error; closed form on two vertices with
        // k = (1, 0), w01 = 1, m = (1, 1):
        // rate(t) = (1/t) int_0^t <T_s 1, f g>_m ds, evaluated spectrally
        let w = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let form = DiscreteForm::build(w, vec![1.0, 0.0], vec![1.0, 1.0]).unwrap();
        let f = DVector::from_vec(vec![1.0, 0.0]);
        let mu = DiscreteMeasure::new(vec![1.0, 0.0]).unwrap();
        let pairing = 1.0;
        let mut errs = Vec::new();
        for t in [0.1, 0.01, 0.001] {
            let rate = form.revuz_rate(&f, &mu, t).unwrap();
            errs.push((pairing - rate).abs() / t);
        }
        // error / t settles to a constant as t drops
        assert_relative_eq!(errs[1], errs[2], max_relative = 0.05);
        assert!((form.revuz_rate(&f, &mu, 0.001).unwrap() - pairing).abs() <= 0.05 * 0.001 + 1e-3);
    }

    #[test]
    fn json_round_trip() {
        let spec = RandomFormSpec::new(7, 99);
        let form = random_form(&spec);
        let doc = form.to_json();
        let back = DiscreteForm::from_json(&doc).unwrap();
        assert_eq!(form.conductances(), back.conductances());
        assert_eq!(form.killing(), back.killing());
        assert_eq!(form.base_measure(), back.base_measure());

        let mu = random_measure(7, 3);
        let back = DiscreteMeasure::from_json(&mu.to_json()).unwrap();
        assert_eq!(mu, back);
    }
}
