//! Discrete Teodorescu and Cauchy–Bitsadze operators, the least-squares
//! projector `Q_{h,τ}` and operator-norm estimates.

mod norm;
mod projector;
mod teodorescu;

pub use norm::{estimate_norm, power_norm, NormEstimate};
pub use projector::{project_q_small, KerResidual, QProjector, Q_UNKNOWN_LIMIT};
pub use teodorescu::{cauchy_bitsadze, dirac_interior, masked_dirac, teodorescu, Strategy, TeodorescuPlan};
