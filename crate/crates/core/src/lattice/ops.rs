//! Finite-difference operators on lattice fields. All stencils read through
//! zero extension, so identities between them are exact on points whose full
//! stencil lies inside the grid.

use num_complex::Complex64;
use rayon::prelude::*;

use super::field::{Field, FieldValue};
use crate::algebra::{CQuat, Vec16};

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Axis {
    X1,
    X2,
    X3,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X1, Axis::X2, Axis::X3];

    pub fn index(self) -> usize {
        match self {
            Axis::X1 => 0,
            Axis::X2 => 1,
            Axis::X3 => 2,
        }
    }

    pub fn unit(self) -> [i64; 3] {
        let mut e = [0; 3];
        e[self.index()] = 1;
        e
    }
}

#[inline]
fn shifted(i: [i64; 3], axis: usize, by: i64) -> [i64; 3] {
    let mut j = i;
    j[axis] += by;
    j
}

fn signed(i: [usize; 3]) -> [i64; 3] {
    [i[0] as i64, i[1] as i64, i[2] as i64]
}

/// `(u(m + e_s) − u(m)) / h`.
pub fn forward_diff<V: FieldValue>(u: &Field<V>, axis: Axis) -> Field<V> {
    let inv_h = 1.0 / u.grid().h();
    let a = axis.index();
    Field::from_fn(*u.grid(), |i, k| {
        let p = signed(i);
        (u.get(shifted(p, a, 1), k as i64) - u.get(p, k as i64)) * inv_h
    })
}

/// `(u(m) − u(m − e_s)) / h`.
pub fn backward_diff<V: FieldValue>(u: &Field<V>, axis: Axis) -> Field<V> {
    let inv_h = 1.0 / u.grid().h();
    let a = axis.index();
    Field::from_fn(*u.grid(), |i, k| {
        let p = signed(i);
        (u.get(shifted(p, a, -1), k as i64) - u.get(p, k as i64)) * -inv_h
    })
}

/// `(u(m, k+1) − u(m, k)) / τ`.
pub fn time_diff<V: FieldValue>(u: &Field<V>) -> Field<V> {
    let inv_tau = 1.0 / u.grid().tau();
    Field::from_fn(*u.grid(), |i, k| {
        let p = signed(i);
        (u.get(p, k as i64 + 1) - u.get(p, k as i64)) * inv_tau
    })
}

/// Seven-point star Laplacian `Σ_s ∂^{−s}∂^{+s}`.
pub fn star_laplacian<V: FieldValue>(u: &Field<V>) -> Field<V> {
    let grid = *u.grid();
    let side = grid.side();
    let inv_h2 = 1.0 / (grid.h() * grid.h());
    let mut out = Field::zeros(grid);
    out.values_mut()
        .par_chunks_mut(grid.slice_len())
        .zip(u.values().par_chunks(grid.slice_len()))
        .for_each(|(dst, src)| laplacian_cube(side, inv_h2, src, dst));
    out
}

/// Star Laplacian on a single cube of `side³` values with zero extension,
/// scaled by `inv_h2`.
pub fn laplacian_cube<V: FieldValue>(side: usize, inv_h2: f64, src: &[V], dst: &mut [V]) {
    let s2 = side * side;
    dst.par_chunks_mut(s2).enumerate().for_each(|(i0, plane)| {
        for i1 in 0..side {
            for i2 in 0..side {
                let c = (i0 * side + i1) * side + i2;
                let centre = src[c];
                let mut acc = centre * -6.0;
                if i0 > 0 {
                    acc += src[c - s2];
                }
                if i0 + 1 < side {
                    acc += src[c + s2];
                }
                if i1 > 0 {
                    acc += src[c - side];
                }
                if i1 + 1 < side {
                    acc += src[c + side];
                }
                if i2 > 0 {
                    acc += src[c - 1];
                }
                if i2 + 1 < side {
                    acc += src[c + 1];
                }
                plane[i1 * side + i2] = acc * inv_h2;
            }
        }
    });
}

/// Forward and backward spatial differences of `u` at one point.
#[inline]
fn differences<V: FieldValue>(u: &Field<V>, p: [i64; 3], k: i64, inv_h: f64) -> ([V; 3], [V; 3]) {
    let c = u.get(p, k);
    let fwd = std::array::from_fn(|a| (u.get(shifted(p, a, 1), k) - c) * inv_h);
    let bwd = std::array::from_fn(|a| (c - u.get(shifted(p, a, -1), k)) * inv_h);
    (fwd, bwd)
}

/// Assembles a difference Dirac operator row by row.
///
/// `sv[s]` is the difference used for the scalar/vector couplings along axis
/// `s`, `vv[s]` the one used for vector/vector couplings. `right` selects the
/// right action `u D` instead of `D u`.
#[inline]
pub(crate) fn dirac_rows(sv: &[CQuat; 3], vv: &[CQuat; 3], right: bool) -> CQuat {
    let cross = if right { -1.0 } else { 1.0 };
    let mut out = CQuat::ZERO;
    out[0] = -(sv[0][1] + sv[1][2] + sv[2][3]);
    // row l: sv_l u0 + ε(s, j, l) vv_s u_j
    out[1] = sv[0][0] + (vv[1][3] - vv[2][2]) * cross;
    out[2] = sv[1][0] + (vv[2][1] - vv[0][3]) * cross;
    out[3] = sv[2][0] + (vv[0][2] - vv[1][1]) * cross;
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DiracKind {
    /// `D_h^{−+}`: backward differences on scalar/vector couplings.
    MinusPlus,
    /// `D_h^{+−}`: forward differences on scalar/vector couplings.
    PlusMinus,
}

fn dirac_generic(u: &Field<CQuat>, kind: DiracKind, right: bool) -> Field<CQuat> {
    let inv_h = 1.0 / u.grid().h();
    Field::from_fn(*u.grid(), |i, k| {
        let (fwd, bwd) = differences(u, signed(i), k as i64, inv_h);
        match kind {
            DiracKind::MinusPlus => dirac_rows(&bwd, &fwd, right),
            DiracKind::PlusMinus => dirac_rows(&fwd, &bwd, right),
        }
    })
}

pub fn dirac_mp(u: &Field<CQuat>) -> Field<CQuat> {
    dirac_generic(u, DiracKind::MinusPlus, false)
}

pub fn dirac_pm(u: &Field<CQuat>) -> Field<CQuat> {
    dirac_generic(u, DiracKind::PlusMinus, false)
}

/// Right action `u D_h^{−+}`.
pub fn dirac_mp_right(u: &Field<CQuat>) -> Field<CQuat> {
    dirac_generic(u, DiracKind::MinusPlus, true)
}

/// Right action `u D_h^{+−}`.
pub fn dirac_pm_right(u: &Field<CQuat>) -> Field<CQuat> {
    dirac_generic(u, DiracKind::PlusMinus, true)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TimeSign {
    /// `D_{h,+iτ}`
    Plus,
    /// `D_{h,−iτ}`
    Minus,
}

impl TimeSign {
    pub fn factor(self) -> f64 {
        match self {
            TimeSign::Plus => 1.0,
            TimeSign::Minus => -1.0,
        }
    }
}

/// Parabolic Dirac operator `D_{h,±iτ}` acting on `Vec16` fields: the
/// off-diagonal spatial blocks `[[0, D^{−+}], [D^{+−}, 0]]` on each γ-slot,
/// plus `∂_τ γ⁺` and `± i γ⁻`.
pub fn parabolic_dirac(u: &Field<Vec16>, sign: TimeSign) -> Field<Vec16> {
    let grid = *u.grid();
    let inv_h = 1.0 / grid.h();
    let inv_tau = 1.0 / grid.tau();
    let witt = I * sign.factor();
    Field::from_fn(grid, |i, k| {
        let p = signed(i);
        let k = k as i64;
        let (fwd, bwd) = differences(u, p, k, inv_h);
        let centre = u.get(p, k);
        let dt = (u.get(p, k + 1) - centre) * inv_tau;
        let mut out = dt.gamma_plus() + centre.gamma_minus() * witt;
        for slot in 0..2 {
            let f1: [CQuat; 3] = std::array::from_fn(|a| fwd[a].quat(slot, 1));
            let b1: [CQuat; 3] = std::array::from_fn(|a| bwd[a].quat(slot, 1));
            let f0: [CQuat; 3] = std::array::from_fn(|a| fwd[a].quat(slot, 0));
            let b0: [CQuat; 3] = std::array::from_fn(|a| bwd[a].quat(slot, 0));
            let top = dirac_rows(&b1, &f1, false);
            let bottom = dirac_rows(&f0, &b0, false);
            out.set_quat(slot, 0, out.quat(slot, 0) + top);
            out.set_quat(slot, 1, out.quat(slot, 1) + bottom);
        }
        out
    })
}
