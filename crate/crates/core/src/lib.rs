//! Detection and tracking of A-series singularities (fold, cusp, swallowtail,
//! butterfly) of variational problems.
//!
//! The crate is organised bottom-up:
//!
//! * [`bell`] enumerates partition multi-indices and complete exponential Bell
//!   polynomials, the combinatorics behind all higher-order test equations.
//! * [`classifier`] runs the generic A-series recognition loop on any
//!   finite-dimensional functional given through its derivative tensors.
//! * [`poisson`] discretises the semilinear Dirichlet problem
//!   `Δu + f(u, λ) = 0` on the unit square with central differences.
//! * [`augmented`] assembles the fold, cusp and swallowtail defining systems
//!   with analytic Jacobians and the associated monitor functions.
//! * [`continuation`] is a pseudoarclength predictor-corrector with event
//!   detection on monitor sign changes.
//! * [`harness`] chains everything into the solution → fold → cusp →
//!   swallowtail hunt and grid-refinement studies.

pub mod augmented;
pub mod bell;
pub mod classifier;
pub mod continuation;
mod error;
pub mod harness;
pub mod linalg;
pub mod poisson;

pub use error::{Error, Result};
pub use linalg::{Jacobian, Sign, SparseMatrix};
