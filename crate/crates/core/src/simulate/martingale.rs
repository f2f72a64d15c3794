//! The martingale decomposition check:
//! `M^f(t) = int_0^t e^{-s} f(X_s) ds + e^{-t} R_1 f(X_t)` has constant
//! expectation, so the ensemble mean of `M^f(t) - M^f(0)` must vanish
//! within Monte-Carlo error.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::path::{sample_path, ProcessModel};
use super::pcaf::{occupation_pcaf, Weight};
use super::rng::path_seed;
use super::SimError;
use crate::continuum::{KernelModel, ResolventKernel};
use crate::funcspec::{resolvent_1d, FunctionSpec};
use crate::linalg::mean_stderr;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MartingaleConfig {
    pub model: ProcessModel,
    pub f: FunctionSpec,
    pub t_max: f64,
    pub dt: f64,
    pub paths: usize,
    pub master_seed: u64,
    pub x0: f64,
    /// Checkpoints; each must lie on the time grid.
    pub checkpoints: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckpointRow {
    pub t: f64,
    pub mean: f64,
    pub stderr: f64,
    /// `|mean| <= 3 stderr` (the martingale property at Monte-Carlo scale).
    pub within_three_stderr: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MartingaleReport {
    pub rows: Vec<CheckpointRow>,
    pub paths: usize,
    pub master_seed: u64,
    pub all_within: bool,
}

/// Ensemble residuals `M^f(t) - M^f(0)` at the checkpoints.
pub fn martingale_residual(cfg: &MartingaleConfig) -> Result<MartingaleReport, SimError> {
    if cfg.paths == 0 {
        return Err(SimError::EmptyEnsemble);
    }
    if cfg.model.dim() != 1 {
        return Err(SimError::NotOneDimensional);
    }
    let kernel = ResolventKernel::new(KernelModel::Bm1d, 1.0).expect("alpha 1");
    // grid indices of the checkpoints
    let probe = sample_path(&cfg.model, cfg.t_max, cfg.dt, &[cfg.x0], 0)?;
    let mut indices = Vec::with_capacity(cfg.checkpoints.len());
    for &c in &cfg.checkpoints {
        let idx = probe
            .times
            .iter()
            .position(|t| (t - c).abs() <= 1e-9 * cfg.t_max.max(1.0))
            .ok_or(SimError::CheckpointOffGrid { t: c })?;
        indices.push(idx);
    }
    let m0 = resolvent_1d(&kernel, &cfg.f, cfg.x0);

    let residuals: Vec<Vec<f64>> = (0..cfg.paths as u64)
        .into_par_iter()
        .map(|i| {
            let seed = path_seed(cfg.master_seed, i);
            let path = sample_path(&cfg.model, cfg.t_max, cfg.dt, &[cfg.x0], seed)?;
            let a = occupation_pcaf(&path, &cfg.f, 1e6, Weight::Exp);
            let per_checkpoint: Vec<f64> = indices
                .iter()
                .map(|&idx| {
                    let t = path.times[idx];
                    let m_t =
                        a.at(idx) + (-t).exp() * resolvent_1d(&kernel, &cfg.f, path.state_1d(idx));
                    m_t - m0
                })
                .collect();
            Ok(per_checkpoint)
        })
        .collect::<Result<_, SimError>>()?;

    let mut rows = Vec::with_capacity(indices.len());
    for (j, &idx) in indices.iter().enumerate() {
        let column: Vec<f64> = residuals.iter().map(|r| r[j]).collect();
        let (mean, stderr) = mean_stderr(&column);
        // exact-zero residuals (constant integrands) have zero stderr
        let within = mean.abs() <= (3.0 * stderr).max(1e-10);
        rows.push(CheckpointRow {
            t: probe.times[idx],
            mean,
            stderr,
            within_three_stderr: within,
        });
    }
    let all_within = rows.iter().all(|r| r.within_three_stderr);
    Ok(MartingaleReport { rows, paths: cfg.paths, master_seed: cfg.master_seed, all_within })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_integrand_residual_is_exactly_zero() {
        // R_1 1 = 1 and the exp weight integrates exactly, so
        // M(t) = (1 - e^{-t}) + e^{-t} = 1 on every path
        let cfg = MartingaleConfig {
            model: ProcessModel::Bm1d,
            f: FunctionSpec::Const { value: 1.0 },
            t_max: 2.0,
            dt: 1e-2,
            paths: 16,
            master_seed: 3,
            x0: 0.0,
            checkpoints: vec![0.5, 1.0, 2.0],
        };
        let report = martingale_residual(&cfg).unwrap();
        for row in &report.rows {
            assert!(row.mean.abs() <= 1e-12, "residual {}", row.mean);
            assert!(row.within_three_stderr);
        }
    }

    #[test]
    fn zero_integrand_residual_is_zero() {
        let cfg = MartingaleConfig {
            model: ProcessModel::Bm1d,
            f: FunctionSpec::Const { value: 0.0 },
            t_max: 1.0,
            dt: 1e-2,
            paths: 8,
            master_seed: 3,
            x0: 0.0,
            checkpoints: vec![1.0],
        };
        let report = martingale_residual(&cfg).unwrap();
        assert_eq!(report.rows[0].mean, 0.0);
    }

    #[test]
    fn hat_integrand_within_monte_carlo_error() {
        let cfg = MartingaleConfig {
            model: ProcessModel::Bm1d,
            f: FunctionSpec::Hat { center: 0.0, half_width: 1.0 },
            t_max: 1.0,
            dt: 1e-2,
            paths: 400,
            master_seed: 1234,
            x0: 0.0,
            checkpoints: vec![0.25, 0.5, 1.0],
        };
        let report = martingale_residual(&cfg).unwrap();
        assert!(report.all_within, "rows: {:?}", report.rows);
    }

    #[test]
    fn off_grid_checkpoint_rejected() {
        let cfg = MartingaleConfig {
            model: ProcessModel::Bm1d,
            f: FunctionSpec::Const { value: 1.0 },
            t_max: 1.0,
            dt: 1e-2,
            paths: 4,
            master_seed: 3,
            x0: 0.0,
            checkpoints: vec![0.12345],
        };
        assert!(matches!(
            martingale_residual(&cfg),
            Err(SimError::CheckpointOffGrid { .. })
        ));
    }
}
