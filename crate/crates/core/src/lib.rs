//! Monte Carlo laboratory for superdiffusive self-interacting random walks.
//!
//! Two processes are simulated:
//!
//! * the planar drift walk `Z = (X, Y)` ([`drift_walk`]), whose horizontal
//!   coordinate is pushed by `rho |Y|^gamma / ((1 + X)^alpha (1 + n)^beta)` and
//!   grows like `n^chi` with `chi = (2 + gamma - 2 beta) / (2 + 2 alpha)`;
//! * the barycentric excluded-volume walk `(W, G)` ([`barycentric`]), whose
//!   end-to-end distance appears to scale with the Flory exponent 3/4.
//!
//! [`exponents`] holds the closed-form exponent formulas, [`statistics`] the
//! log-log estimators and ensemble aggregation, and [`harness`] the parallel,
//! bit-reproducible ensemble runner.

// Comparisons such as `!(x >= 0.0)` are written negated so NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod barycentric;
pub mod drift_walk;
pub mod error;
pub mod exponents;
pub mod harness;
pub mod model;
pub mod numeric;
pub mod rng;
pub mod statistics;

pub use barycentric::{BarycentricState, BarycentricVariant, Vec2};
pub use drift_walk::{DriftVariant, DriftWalkState, TransitionLaw};
pub use error::{Result, WalkError};
pub use exponents::{ModelParams, ThetaIteration};
pub use harness::{run_ensemble, EnsembleRun, OutputOptions, RunConfig, RunReport};
pub use model::ModelKind;
pub use rng::RngStream;
pub use statistics::{EnsembleSummary, FitWindow, PathSummary, RegressionResult};
