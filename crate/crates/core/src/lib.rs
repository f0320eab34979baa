//! High relative accuracy eigensolver for real symmetric arrowhead matrices.
//!
//! Every eigenvalue is computed as `d_i + 1/nu`, where `nu` is an extreme
//! eigenvalue of the inverse of the matrix shifted to a neighbouring pole.
//! The one inverse element that can suffer cancellation is evaluated in
//! double-double arithmetic when the condition estimates call for it.

pub mod apps;
pub mod check;
pub mod cli;
pub mod dd;
pub mod decomp;
pub mod dpr1;
pub mod error;
pub mod fixtures;
pub mod gen;
pub mod matrix;
pub mod oracle;
pub mod preprocess;
pub mod problem;
pub mod refine;
pub mod solver;

pub use error::{Error, Result};
