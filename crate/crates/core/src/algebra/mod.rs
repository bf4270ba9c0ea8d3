//! Complex-quaternion arithmetic and the 16-dimensional Witt-basis realization.

mod cquat;
mod witt;

pub use cquat::{clifford_conjugate, generator_matrices, quat_mul, CQuat};
pub use witt::{embed_block, embed_off_diagonal, embed_scalar, gamma, grading, Mat16, Vec16, WittKind};
