//! Shorted operators, spectral shorted operators, the spectral order and the
//! generalized Kolmogorov complexity of positive semidefinite matrices.
//!
//! Every quantity is available through two independent routes: a closed form
//! built from spectral projections, and the limit of the defining sequence.

#![allow(clippy::needless_range_loop)]

pub mod error;
mod graded;
pub mod harness;
pub mod kolmogorov;
pub mod linalg;
pub mod order;
pub mod shorted;
pub mod spectral_short;
pub mod tol;
pub mod trace;

pub use error::{Error, Result};
pub use linalg::{SpectralDecomposition, Subspace, SymMatrix};
pub use nalgebra;
pub use tol::Tolerances;
