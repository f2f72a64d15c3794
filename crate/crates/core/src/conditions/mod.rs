//! Numeric verification of the convergence hypotheses on density families:
//! the approximation conditions (Aa), (Ab1), (Ab2), (Ac1), (Ac2) and the
//! tail conditions (Sb), (Sc), over declarative radial families including
//! the example corpus.

mod checker;
mod corpus;
mod family;
mod nest;

pub use checker::{
    check_condition, verify_membership, ConditionId, ConditionReport, CurveReport,
    MembershipReport, Quantity, Verdict, DEFAULT_CONSTANTS, DEFAULT_INDICES,
};
pub use corpus::{corpus_example, CorpusExample};
pub use family::{Approximants, DensityFamily, ExponentSeq};
pub use nest::{NestSpec, RadiusSeq};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConditionsError {
    #[error("invalid family parameters: {0}")]
    BadParams(String),
    #[error("index list must be nonempty and strictly increasing")]
    BadIndices,
    #[error("condition {0:?} needs a probe measure")]
    MissingProbe(ConditionId),
    #[error("tail conditions are implemented for one-dimensional families, got d = {0}")]
    TailDimension(u32),
    #[error(transparent)]
    Continuum(#[from] crate::continuum::ContinuumError),
}
