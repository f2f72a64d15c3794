//! Discretized trajectories with seed provenance.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::rng::path_rng;
use super::SimError;

/// A globally Lipschitz diffusion coefficient. Only affine coefficients are
/// representable, which is the rejection of non-Lipschitz models: anything
/// else cannot be configured.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Coefficient {
    Constant { value: f64 },
    Affine { intercept: f64, slope: f64 },
}

impl Coefficient {
    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            Coefficient::Constant { value } => value,
            Coefficient::Affine { intercept, slope } => intercept + slope * x,
        }
    }
}

// serializes as "bm1d" / "bm3d" / {"diffusion1d": {"drift": ..., "volatility": ...}}
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProcessModel {
    Bm1d,
    Bm3d,
    Diffusion1d { drift: Coefficient, volatility: Coefficient },
}

impl ProcessModel {
    pub fn dim(&self) -> usize {
        match self {
            ProcessModel::Bm3d => 3,
            _ => 1,
        }
    }
}

/// One sampled trajectory on a strictly increasing grid `0 = t_0 < ... = T`.
/// Regeneration from `(model, T, dt, x0, seed)` is bit-identical.
#[derive(Debug, Clone)]
pub struct PathSample {
    pub model: ProcessModel,
    pub seed: u64,
    pub times: Vec<f64>,
    dim: usize,
    states: Vec<f64>,
}

impl PathSample {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of grid points (steps + 1).
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn state(&self, k: usize) -> &[f64] {
        &self.states[k * self.dim..(k + 1) * self.dim]
    }

    /// Scalar state for one-dimensional models.
    pub fn state_1d(&self, k: usize) -> f64 {
        debug_assert_eq!(self.dim, 1);
        self.states[k]
    }

    pub fn horizon(&self) -> f64 {
        *self.times.last().expect("paths are never empty")
    }

    /// The tail of the path restarted at grid index `from`, with times
    /// shifted to begin at zero. Used to test additivity over concatenated
    /// windows.
    pub fn windowed_from(&self, from: usize) -> PathSample {
        assert!(from < self.len());
        let t0 = self.times[from];
        PathSample {
            model: self.model,
            seed: self.seed,
            times: self.times[from..].iter().map(|t| t - t0).collect(),
            dim: self.dim,
            states: self.states[from * self.dim..].to_vec(),
        }
    }
}

/// Time grid for a horizon and step: `k dt` capped at `T`, with the final
/// point pinned to `T` exactly.
pub fn time_grid(t_max: f64, dt: f64) -> Result<Vec<f64>, SimError> {
    if !(dt > 0.0 && t_max > 0.0 && dt <= t_max) || !dt.is_finite() || !t_max.is_finite() {
        return Err(SimError::NonpositiveStep { dt, t_max });
    }
    let ratio = t_max / dt;
    let steps = if (ratio - ratio.round()).abs() < 1e-9 {
        ratio.round() as usize
    } else {
        ratio.ceil() as usize
    };
    let mut times = Vec::with_capacity(steps + 1);
    for k in 0..steps {
        times.push((k as f64 * dt).min(t_max));
    }
    times.push(t_max);
    debug_assert!(times.windows(2).all(|w| w[1] > w[0]));
    Ok(times)
}

/// Sample one path. Brownian models use exact Gaussian increments, the
/// one-dimensional diffusion uses Euler-Maruyama. Deterministic in the seed.
pub fn sample_path(
    model: &ProcessModel,
    t_max: f64,
    dt: f64,
    x0: &[f64],
    seed: u64,
) -> Result<PathSample, SimError> {
    let dim = model.dim();
    if x0.len() != dim {
        return Err(SimError::DimensionMismatch { expected: dim, got: x0.len() });
    }
    let times = time_grid(t_max, dt)?;
    let steps = times.len() - 1;
    let mut rng = path_rng(seed, 0);
    let mut states = Vec::with_capacity((steps + 1) * dim);
    states.extend_from_slice(x0);

    match model {
        ProcessModel::Bm1d | ProcessModel::Bm3d => {
            for k in 0..steps {
                let delta = times[k + 1] - times[k];
                let sigma = delta.sqrt();
                for axis in 0..dim {
                    let z: f64 = rng.sample(StandardNormal);
                    let prev = states[k * dim + axis];
                    states.push(prev + sigma * z);
                }
            }
        }
        ProcessModel::Diffusion1d { drift, volatility } => {
            for k in 0..steps {
                let delta = times[k + 1] - times[k];
                let z: f64 = rng.sample(StandardNormal);
                let prev = states[k];
                let next =
                    prev + drift.eval(prev) * delta + volatility.eval(prev) * delta.sqrt() * z;
                states.push(next);
            }
        }
    }
    Ok(PathSample { model: *model, seed, times, dim, states })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::mean_stderr;
    use approx::assert_relative_eq;

    #[test]
    fn grid_shape_and_start() {
        let path = sample_path(&ProcessModel::Bm1d, 1.0, 1e-3, &[0.0], 42).unwrap();
        assert_eq!(path.len(), 1001);
        assert_eq!(path.state_1d(0), 0.0);
        assert_eq!(path.horizon(), 1.0);
    }

    #[test]
    fn regeneration_is_bit_identical() {
        let a = sample_path(&ProcessModel::Bm3d, 0.5, 1e-2, &[0.0; 3], 7).unwrap();
        let b = sample_path(&ProcessModel::Bm3d, 0.5, 1e-2, &[0.0; 3], 7).unwrap();
        assert_eq!(a.states, b.states);
        let c = sample_path(&ProcessModel::Bm3d, 0.5, 1e-2, &[0.0; 3], 8).unwrap();
        assert_ne!(a.states, c.states);
    }

    #[test]
    fn ragged_horizon_ends_exactly_at_t() {
        let path = sample_path(&ProcessModel::Bm1d, 1.0, 0.3, &[0.0], 1).unwrap();
        assert_eq!(path.len(), 5);
        for (k, &t) in path.times.iter().enumerate().take(4) {
            assert_relative_eq!(t, k as f64 * 0.3, epsilon = 1e-12);
        }
        assert_eq!(path.horizon(), 1.0);
    }

    #[test]
    fn invalid_steps_rejected() {
        assert!(matches!(
            sample_path(&ProcessModel::Bm1d, 1.0, 0.0, &[0.0], 1),
            Err(SimError::NonpositiveStep { .. })
        ));
        assert!(matches!(
            sample_path(&ProcessModel::Bm1d, 1.0, 2.0, &[0.0], 1),
            Err(SimError::NonpositiveStep { .. })
        ));
    }

    #[test]
    fn ensemble_mean_of_terminal_value_is_clt_consistent() {
        let paths = 10_000usize;
        let t = 1.0;
        let terminal: Vec<f64> = (0..paths)
            .map(|i| {
                let p = sample_path(&ProcessModel::Bm1d, t, 1e-2, &[0.0], 9000 + i as u64).unwrap();
                p.state_1d(p.len() - 1)
            })
            .collect();
        let (mean, _) = mean_stderr(&terminal);
        assert!(mean.abs() <= 4.0 * (t / paths as f64).sqrt(), "CLT bound violated: {mean}");
    }

    #[test]
    fn zero_volatility_diffusion_is_constant() {
        let model = ProcessModel::Diffusion1d {
            drift: Coefficient::Constant { value: 0.0 },
            volatility: Coefficient::Constant { value: 0.0 },
        };
        let path = sample_path(&model, 1.0, 0.1, &[0.3], 5).unwrap();
        for k in 0..path.len() {
            assert_eq!(path.state_1d(k), 0.3);
        }
    }

    #[test]
    fn ou_diffusion_contracts_toward_mean() {
        // drift -2x pulls toward zero; crude check on the variance
        let model = ProcessModel::Diffusion1d {
            drift: Coefficient::Affine { intercept: 0.0, slope: -2.0 },
            volatility: Coefficient::Constant { value: 1.0 },
        };
        let terminal: Vec<f64> = (0..4000)
            .map(|i| {
                let p = sample_path(&model, 3.0, 1e-3, &[0.0], 100 + i as u64).unwrap();
                p.state_1d(p.len() - 1)
            })
            .collect();
        let var: f64 = terminal.iter().map(|x| x * x).sum::<f64>() / terminal.len() as f64;
        // stationary variance sigma^2 / (2 theta) = 0.25
        assert_relative_eq!(var, 0.25, max_relative = 0.15);
    }
}
