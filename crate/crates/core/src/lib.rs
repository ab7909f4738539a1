//! Binary GCD with pluggable cost accounting, and the invariant density of
//! its transfer operator from which the mean-cost constants follow.

pub mod cli;
pub mod constants;
pub mod density;
pub mod dirichlet;
pub mod ensembles;
pub mod error;
pub mod gcd;
pub mod numeric;
pub mod report;

pub use error::{Error, Result};
