//! Numerical Hermitian geometry on flat complex tori.

pub mod bundle;
pub mod cli;
pub mod curvature;
pub mod error;
pub mod fixtures;
pub mod grid;
pub mod laplace;
pub mod metric;

pub use error::{Error, Result};
