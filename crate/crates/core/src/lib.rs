//! Isogeometric (B-spline Galerkin) discretizations of the Laplace
//! eigenproblem on `[0,1]^d` with optional boundary penalization of
//! high-order derivatives, which removes the spurious high-frequency
//! eigenvalues ("outliers") of the standard method.

pub mod assembly;
pub mod cli;
pub mod closedform;
pub mod eigensolve;
pub mod error;
pub mod metrics;
pub mod quadrature;
pub mod splines;
pub mod tensorize;

pub use assembly::{MatrixPair, PenaltyConfig, ProblemKind};
pub use eigensolve::{gevp, Spectrum};
pub use error::{Error, Result};
pub use splines::{BreakpointGrid, SplineSpace};
