//! Space-time lattices, lattice fields, difference operators and l_p norms.

mod field;
mod grid;
pub mod io;
mod norms;
mod ops;

use num_complex::Complex64;

pub use field::{spatial_indices, Field, FieldValue, ValueKind};
pub use grid::{GridSpec, MESH_RATIO_BOUND};
pub(crate) use norms::fixed_sum;
pub use norms::{inner, l2_norm, lp_norm, slice_l1_error, ErrorMode};
pub(crate) use ops::dirac_rows;
pub use ops::{
    backward_diff, dirac_mp, dirac_mp_right, dirac_pm, dirac_pm_right, forward_diff, laplacian_cube, parabolic_dirac,
    star_laplacian, time_diff, Axis, DiracKind, TimeSign,
};

/// Discrete Dirac deltas `δ_h` and `δ_τ`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiscreteDelta {
    pub h: f64,
    pub tau: f64,
}

impl DiscreteDelta {
    pub fn spatial(&self, m: [i64; 3]) -> f64 {
        if m == [0, 0, 0] {
            1.0 / self.h.powi(3)
        } else {
            0.0
        }
    }

    pub fn temporal(&self, k: i64) -> f64 {
        if k == 0 {
            1.0 / self.tau
        } else {
            0.0
        }
    }

    /// `δ_τ(k)·δ_h(m)` as a complex number.
    pub fn space_time(&self, m: [i64; 3], k: i64) -> Complex64 {
        Complex64::new(self.spatial(m) * self.temporal(k), 0.0)
    }
}
