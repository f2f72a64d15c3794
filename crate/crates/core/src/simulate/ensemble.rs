//! Ensemble convergence diagnostics with common random numbers.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::local_time::{bin_masses, BinGrid, LocalTimeField};
use super::path::{sample_path, ProcessModel};
use super::pcaf::{eval_at_state, Weight};
use super::rng::path_seed;
use super::SimError;
use crate::continuum::MeasureRep;
use crate::funcspec::FunctionSpec;
use crate::linalg::{log_log_slope, mean_stderr, percentile};

/// Indexed family whose functionals are compared against a reference.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ConvergenceFamily {
    /// `f_n = min(f, cap_n)` against the reference `min(f, f_cap)`;
    /// occupation functionals with the given weight.
    DensityCaps { base: FunctionSpec, caps: Vec<f64>, f_cap: f64, weight: Weight },
    /// Measure-integrated functionals through a shared local-time field.
    Measures { family: Vec<MeasureRep>, labels: Vec<f64>, reference: MeasureRep, bins: BinGrid },
}

impl ConvergenceFamily {
    pub fn labels(&self) -> Vec<f64> {
        match self {
            ConvergenceFamily::DensityCaps { caps, .. } => caps.clone(),
            ConvergenceFamily::Measures { labels, .. } => labels.clone(),
        }
    }

    pub fn len(&self) -> usize {
        match self {
            ConvergenceFamily::DensityCaps { caps, .. } => caps.len(),
            ConvergenceFamily::Measures { family, .. } => family.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct McConfig {
    pub model: ProcessModel,
    pub t_max: f64,
    pub dt: f64,
    /// Sup distances are taken over `t <= horizon` (at most `t_max`).
    pub horizon: f64,
    pub paths: usize,
    pub master_seed: u64,
    pub x0: Vec<f64>,
    pub family: ConvergenceFamily,
}

/// Per-index ensemble statistics of the sup distance.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrendRow {
    pub label: f64,
    pub mean: f64,
    pub stderr: f64,
    pub p90: f64,
}

/// Gap between consecutive indices, paired per path.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrendGap {
    pub from: f64,
    pub to: f64,
    pub mean: f64,
    pub stderr: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrendReport {
    pub rows: Vec<TrendRow>,
    pub gaps: Vec<TrendGap>,
    /// Least-squares slope of `ln mean` against `ln label` (positive means).
    pub slope: Option<f64>,
    pub paths: usize,
    pub master_seed: u64,
    /// Ensemble means strictly decrease along the family.
    pub strictly_decreasing: bool,
    /// Every consecutive gap clears two standard errors (paired).
    pub separated_two_stderr: bool,
}

/// Per path: sup distance of each family member against the reference, with
/// the same path (same sub-seed) reused across the whole family.
fn per_path_sups(cfg: &McConfig, index: u64) -> Result<Vec<f64>, SimError> {
    let seed = path_seed(cfg.master_seed, index);
    let path = sample_path(&cfg.model, cfg.t_max, cfg.dt, &cfg.x0, seed)?;
    match &cfg.family {
        ConvergenceFamily::DensityCaps { base, caps, f_cap, weight } => {
            let n = path.len();
            let mut acc_ref = 0.0f64;
            let mut acc = vec![0.0f64; caps.len()];
            let mut sups = vec![0.0f64; caps.len()];
            let mut prev = eval_at_state(base, path.state(0)).min(*f_cap);
            for k in 1..n {
                if path.times[k] > cfg.horizon {
                    break;
                }
                let cur = eval_at_state(base, path.state(k)).min(*f_cap);
                let mass = weight.step_mass(path.times[k - 1], path.times[k]);
                acc_ref += mass * 0.5 * (prev + cur);
                for (i, cap) in caps.iter().enumerate() {
                    // min(min(f, f_cap), cap) = min(f, cap) for cap <= f_cap
                    acc[i] += mass * 0.5 * (prev.min(*cap) + cur.min(*cap));
                    let diff = (acc[i] - acc_ref).abs();
                    if diff > sups[i] {
                        sups[i] = diff;
                    }
                }
                prev = cur;
            }
            Ok(sups)
        }
        ConvergenceFamily::Measures { family, reference, bins, .. } => {
            let field = LocalTimeField::from_path(&path, *bins)?;
            let ref_masses = bin_masses(bins, reference)?;
            let fam_masses: Vec<Vec<f64>> =
                family.iter().map(|mu| bin_masses(bins, mu)).collect::<Result<_, _>>()?;
            Ok(field.sup_distances_vs(&fam_masses, &ref_masses, cfg.horizon))
        }
    }
}

/// Ensemble mean, standard error and 90th percentile of the sup distance per
/// family index, with the paired-gap separation diagnostics and the fitted
/// log-log slope. Deterministic in `(config, master_seed)` and independent
/// of the worker count.
pub fn mc_convergence(cfg: &McConfig) -> Result<TrendReport, SimError> {
    if cfg.paths == 0 {
        return Err(SimError::EmptyEnsemble);
    }
    if cfg.family.is_empty() {
        return Err(SimError::EmptyEnsemble);
    }
    let per_path: Vec<Vec<f64>> = (0..cfg.paths as u64)
        .into_par_iter()
        .map(|i| per_path_sups(cfg, i))
        .collect::<Result<_, _>>()?;

    let labels = cfg.family.labels();
    let count = labels.len();
    let mut rows = Vec::with_capacity(count);
    for (i, &label) in labels.iter().enumerate() {
        let column: Vec<f64> = per_path.iter().map(|sups| sups[i]).collect();
        let (mean, stderr) = mean_stderr(&column);
        rows.push(TrendRow { label, mean, stderr, p90: percentile(&column, 0.9) });
    }

    let mut gaps = Vec::with_capacity(count.saturating_sub(1));
    for i in 0..count.saturating_sub(1) {
        let diffs: Vec<f64> = per_path.iter().map(|sups| sups[i] - sups[i + 1]).collect();
        let (mean, stderr) = mean_stderr(&diffs);
        gaps.push(TrendGap { from: labels[i], to: labels[i + 1], mean, stderr });
    }

    let means: Vec<f64> = rows.iter().map(|r| r.mean).collect();
    let strictly_decreasing = means.windows(2).all(|w| w[1] < w[0]);
    let separated_two_stderr = gaps.iter().all(|g| g.mean >= 2.0 * g.stderr && g.mean > 0.0);
    let slope = log_log_slope(&labels, &means);

    Ok(TrendReport {
        rows,
        gaps,
        slope,
        paths: cfg.paths,
        master_seed: cfg.master_seed,
        strictly_decreasing,
        separated_two_stderr,
    })
}

/// Ensemble mean of the terminal value of the killed occupation functional
/// `int_0^T e^{-s} f(X_s) ds`, for the duality diagnostics.
pub fn mean_killed_occupation(
    model: &ProcessModel,
    f: &FunctionSpec,
    t_max: f64,
    dt: f64,
    x0: &[f64],
    paths: usize,
    master_seed: u64,
) -> Result<(f64, f64), SimError> {
    if paths == 0 {
        return Err(SimError::EmptyEnsemble);
    }
    let terminals: Vec<f64> = (0..paths as u64)
        .into_par_iter()
        .map(|i| {
            let seed = path_seed(master_seed, i);
            let path = sample_path(model, t_max, dt, x0, seed)?;
            let a = super::pcaf::occupation_pcaf(&path, f, 1e6, Weight::Exp);
            Ok(a.terminal())
        })
        .collect::<Result<Vec<f64>, SimError>>()?;
    Ok(mean_stderr(&terminals))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_caps_config(paths: usize) -> McConfig {
        McConfig {
            model: ProcessModel::Bm1d,
            t_max: 1.0,
            dt: 1e-2,
            horizon: 1.0,
            paths,
            master_seed: 424242,
            x0: vec![0.0],
            family: ConvergenceFamily::DensityCaps {
                base: FunctionSpec::PowAbs { coeff: 1.0, exponent: -0.25, extent: 1.0 },
                caps: vec![2.0, 8.0],
                f_cap: 1e6,
                weight: Weight::One,
            },
        }
    }

    #[test]
    fn identical_family_gives_zero_distances() {
        let mut cfg = small_caps_config(64);
        cfg.family = ConvergenceFamily::DensityCaps {
            base: FunctionSpec::Const { value: 1.0 },
            caps: vec![5.0, 5.0, 5.0], // all caps above the value: f_n = f
            f_cap: 1e6,
            weight: Weight::One,
        };
        let report = mc_convergence(&cfg).unwrap();
        for row in &report.rows {
            assert_eq!(row.mean, 0.0);
            assert_eq!(row.p90, 0.0);
        }
    }

    #[test]
    fn report_is_worker_count_independent() {
        let cfg = small_caps_config(128);
        let pool1 = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let pool4 = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
        let r1 = pool1.install(|| mc_convergence(&cfg)).unwrap();
        let r4 = pool4.install(|| mc_convergence(&cfg)).unwrap();
        for (a, b) in r1.rows.iter().zip(&r4.rows) {
            assert_eq!(a.mean.to_bits(), b.mean.to_bits());
            assert_eq!(a.stderr.to_bits(), b.stderr.to_bits());
            assert_eq!(a.p90.to_bits(), b.p90.to_bits());
        }
    }

    #[test]
    fn truncation_distances_decrease() {
        let report = mc_convergence(&small_caps_config(400)).unwrap();
        assert!(report.strictly_decreasing, "rows: {:?}", report.rows);
    }

    #[test]
    fn measure_family_runs() {
        let bins = BinGrid::centered_at_zero(4.0, 0.05);
        let cfg = McConfig {
            model: ProcessModel::Bm1d,
            t_max: 1.0,
            dt: 1e-3,
            horizon: 1.0,
            paths: 200,
            master_seed: 9,
            x0: vec![0.0],
            family: ConvergenceFamily::Measures {
                family: vec![
                    MeasureRep::uniform_1d(-0.25, 0.25, 1.0, 10),
                    MeasureRep::uniform_1d(-0.0625, 0.0625, 1.0, 10),
                ],
                labels: vec![4.0, 16.0],
                reference: MeasureRep::dirac(vec![0.0]),
                bins,
            },
        };
        let report = mc_convergence(&cfg).unwrap();
        assert!(report.rows[1].mean < report.rows[0].mean);
    }

    #[test]
    fn empty_ensemble_rejected() {
        let cfg = small_caps_config(0);
        assert!(matches!(mc_convergence(&cfg), Err(SimError::EmptyEnsemble)));
    }
}
