//! Numerical laboratory for the potential-theory metric on measures of finite
//! energy integrals and for the additive functionals it controls.
//!
//! The crate is organized around four pillars:
//!
//! * [`discrete`] — exact finite-state symmetric Dirichlet forms: resolvents,
//!   potentials, the metric `rho`, capacities and Revuz rates by direct linear
//!   algebra. This is the brute-force ground truth everything else is checked
//!   against.
//! * [`continuum`] — closed-form resolvent kernels for Brownian motion in one
//!   and three dimensions, measure representations, energy integrals and the
//!   metric in the continuum.
//! * [`simulate`] — seeded Monte-Carlo path sampling, occupation-time
//!   functionals, local-time fields and sup-distance convergence diagnostics.
//! * [`conditions`] — numeric checkers for the approximation conditions on
//!   density families, including the radial example corpus.

pub mod conditions;
pub mod continuum;
pub mod discrete;
pub mod funcspec;
pub mod jsonfmt;
pub mod linalg;
pub mod oracle;
pub mod radial;
pub mod simulate;
