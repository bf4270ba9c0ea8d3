pub mod algebra;
pub mod error;
pub mod experiments;
pub mod fundamental;
pub mod lattice;
pub mod potentials;
pub mod solver;

pub use error::{Error, Result};
