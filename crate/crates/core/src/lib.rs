//! Deformed exponential families of states on matrix algebras.
//!
//! The deformation is `φ(u) = u/(λ+u)` with deformed logarithm
//! `log_φ(v) = v − 1 + λ ln v` and its inverse `exp_φ`.
//!
//! - [`scalar`]: `φ`, `log_φ`, `exp_φ` and the scalar inequalities.
//! - [`operator`]: Hermitian matrices, eigensystems, matrix functions,
//!   Loewner order and 2×2 Loewner determinants.
//! - [`state`]: normalization `α`, states, escorts and curves in the
//!   Hilbert–Schmidt model.
//! - [`lab`]: counterexamples to operator monotonicity.
//! - [`verify`]: the verification suites run by the CLI.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod io;
pub mod lab;
pub mod operator;
pub mod random;
pub mod report;
pub mod scalar;
pub mod state;
pub mod verify;

pub use error::{Error, Result};
pub use operator::{HermitianMatrix, C64};
pub use scalar::{DeformationParameter, ScalarEvalConfig};
