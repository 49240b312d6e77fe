//! Approximate state designs from resource-constrained orbits: exact and
//! Monte Carlo moment operators, Rényi resource measures, and the bounds
//! relating them.

pub mod cli;
pub mod copyspace;
pub mod design;
pub mod ensembles;
pub mod entropy;
pub mod error;
pub mod layout;
pub mod linalg;
pub mod perm;
pub mod registers;
pub mod twirl;

pub use error::{Error, Result};
