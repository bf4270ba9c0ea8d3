//! Discrete and continuous fundamental solutions of the Schrödinger and
//! parabolic Dirac operators.

mod continuous;
mod discrete;

pub use continuous::{continuous_big_e, continuous_e, l1_distance, l1_distance_with, L1Distance};
pub use discrete::{
    build_discrete_e, FundamentalKind, FundamentalTable, Kernel, KernelEntry, Propagator, Residual, TableExtent,
    TableManifest,
};
