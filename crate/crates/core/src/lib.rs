//! Low-disorder speed expansion for ballistic random walks in random environment.
//!
//! The crate evaluates the perturbative speed expansion of a nearest-neighbour
//! walk whose site kernels are `p0 + gamma * xi`, and cross-checks it against
//! exact formulas, Green-function oracles, Kalikow's auxiliary walk and direct
//! annealed Monte Carlo.

pub mod cli;
pub mod environment;
pub mod error;
pub mod expansion;
pub mod fixtures;
pub mod green;
pub mod kalikow;
pub mod lattice;
pub mod model;
pub mod montecarlo;
pub mod report;
pub mod seed;

pub use error::{Error, Result};
