//! Monte-Carlo engine: seeded path sampling, occupation-time functionals,
//! local-time fields, measure-integrated functionals and convergence
//! diagnostics.

mod ensemble;
mod local_time;
mod martingale;
mod path;
mod pcaf;
pub mod rng;

pub use ensemble::{
    mc_convergence, mean_killed_occupation, ConvergenceFamily, McConfig, TrendGap, TrendReport,
    TrendRow,
};
pub use local_time::{BinGrid, LocalTimeField};
pub use martingale::{martingale_residual, CheckpointRow, MartingaleConfig, MartingaleReport};
pub use path::{sample_path, Coefficient, PathSample, ProcessModel};
pub use pcaf::{occupation_pcaf, sup_distance, PcafTrajectory, Weight};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("step size must satisfy 0 < dt <= T, got dt = {dt}, T = {t_max}")]
    NonpositiveStep { dt: f64, t_max: f64 },
    #[error("start point has dimension {got}, model needs {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("operation needs a one-dimensional model")]
    NotOneDimensional,
    #[error("trajectories live on different time grids")]
    GridMismatch,
    #[error("measure has mass {mass} outside the binned window")]
    SupportOutsideBins { mass: f64 },
    #[error("ensemble must contain at least one path")]
    EmptyEnsemble,
    #[error("checkpoint {t} is not on the time grid")]
    CheckpointOffGrid { t: f64 },
    #[error("bin grid must have positive width and at least one bin")]
    BadBins,
}
