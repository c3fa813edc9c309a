//! Modified algebraic Bethe ansatz for the XXZ Gaudin model with a generic
//! boundary: operator constructions, exact identity checks, Bethe equation
//! solvers and exact-diagonalization cross-checks.

pub mod bethe;
pub mod config;
pub mod error;
pub mod identities;
pub mod kernel;
pub mod matrix;
pub mod operators;
pub mod runner;
pub mod sampling;
pub mod scalar;
pub mod spectral;

pub use error::{Error, Result};
pub use kernel::{BoundaryParams, ChainConfig, Spin};
pub use matrix::{Matrix, StateVector};
pub use operators::{BetheRoots, BetheVariant, Chain, Regime};
pub use scalar::{Rational, Scalar};
