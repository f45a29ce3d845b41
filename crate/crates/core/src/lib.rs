//! Numerical laboratory for linear widths, Bernstein widths and best n-term
//! approximation of elliptic solution operators.

pub mod bases;
pub mod error;
pub mod nterm;
pub mod par;
pub mod problems;
pub mod rates;
pub mod runner;
pub mod widths;

pub use error::{Error, Result};
