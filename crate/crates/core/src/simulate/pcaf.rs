//! Occupation-time functionals along sampled paths.

use serde::{Deserialize, Serialize};

use super::path::PathSample;
use super::SimError;
use crate::funcspec::FunctionSpec;

/// Time weight inside the accumulation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Weight {
    /// Plain occupation: `int f(X_s) ds`.
    One,
    /// Killed occupation: `int e^{-s} f(X_s) ds`. The weight mass of every
    /// step is integrated exactly, so deterministic integrands accumulate
    /// without quadrature bias.
    Exp,
}

impl Weight {
    /// Exact weight mass of the step `[a, b]`.
    pub fn step_mass(&self, a: f64, b: f64) -> f64 {
        match self {
            Weight::One => b - a,
            Weight::Exp => (-a).exp() - (-b).exp(),
        }
    }
}

/// A nondecreasing trajectory `t -> A_t` on a time grid, `A_0 = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct PcafTrajectory {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub provenance: String,
}

impl PcafTrajectory {
    pub fn terminal(&self) -> f64 {
        *self.values.last().expect("trajectories are never empty")
    }

    /// Value at a grid time index.
    pub fn at(&self, idx: usize) -> f64 {
        self.values[idx]
    }
}

/// Evaluate a spec at a path state: directly in one dimension, at the
/// radius in higher dimension.
pub fn eval_at_state(f: &FunctionSpec, state: &[f64]) -> f64 {
    if state.len() == 1 {
        f.eval(state[0])
    } else {
        f.eval(state.iter().map(|x| x * x).sum::<f64>().sqrt())
    }
}

/// Trapezoidal accumulation of `weight * min(f(X_s), f_cap)` along the grid.
/// The cap absorbs singular evaluations; the result is nondecreasing with
/// `A_0 = 0`.
pub fn occupation_pcaf(
    path: &PathSample,
    f: &FunctionSpec,
    f_cap: f64,
    weight: Weight,
) -> PcafTrajectory {
    let n = path.len();
    let mut values = Vec::with_capacity(n);
    values.push(0.0);
    let mut acc = 0.0;
    let mut prev = eval_at_state(f, path.state(0)).min(f_cap);
    for k in 1..n {
        let cur = eval_at_state(f, path.state(k)).min(f_cap);
        let mass = weight.step_mass(path.times[k - 1], path.times[k]);
        acc += mass * 0.5 * (prev + cur);
        values.push(acc);
        prev = cur;
    }
    PcafTrajectory {
        times: path.times.clone(),
        values,
        provenance: format!("occupation of {f:?} capped at {f_cap}"),
    }
}

/// `max_{t_k <= horizon} |a - b|` over the shared grid.
pub fn sup_distance(a: &PcafTrajectory, b: &PcafTrajectory, horizon: f64) -> Result<f64, SimError> {
    if a.times != b.times {
        return Err(SimError::GridMismatch);
    }
    let mut best = 0.0f64;
    for k in 0..a.times.len() {
        if a.times[k] > horizon {
            break;
        }
        best = best.max((a.values[k] - b.values[k]).abs());
    }
    Ok(best)
}
