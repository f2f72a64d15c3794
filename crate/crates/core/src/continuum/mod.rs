//! Closed-form resolvent kernels for Brownian motion, measure
//! representations on `R^d`, energy integrals and the metric in the
//! continuum.

mod classify;
mod energy;
mod kernel;
mod measure;
mod norms;
mod vague;

pub use classify::{classify_measure, MeasureClass};
pub use energy::{mutual_energy, resolvent_potential, rho_cont, Extended};
pub use kernel::{KernelModel, ResolventKernel};
pub use measure::{Atom, GridDensity, MeasureRep};
pub use norms::{lp_norm_region, NormDensity, RegionSpec};
pub use vague::{hat_family, vague_gap, TestFn};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ContinuumError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("unsupported dimension {0}: closed-form kernels exist for d = 1 and d = 3 only")]
    UnsupportedDimension(u32),
    #[error("alpha must be positive, got {0}")]
    NonpositiveAlpha(f64),
    #[error("measure does not have finite self-energy")]
    NotFiniteEnergy,
    #[error("quadrature refinement diverges: {context}")]
    NonintegrableSingularity { context: String },
    #[error("unsupported density/region pairing: {context}")]
    UnsupportedRegion { context: String },
    #[error("invalid measure document: {0}")]
    BadDocument(String),
}
