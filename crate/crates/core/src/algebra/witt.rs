//! A concrete 16-dimensional realization of the Witt pair `γ⁺, γ⁻` together
//! with 2×2 blocks of quaternion matrices.
//!
//! Index layout of [`Vec16`]: `slot * 8 + block * 4 + component`, where
//! `slot ∈ {0,1}` is the γ-slot, `block ∈ {0,1}` the quaternion block and
//! `component ∈ 0..4` the quaternion coefficient. Block matrices act on
//! `(block, component)` and trivially on the slot; `γ± = s± ⊗ Γ` with
//! `s⁺ = [[0,1],[0,0]]`, `s⁻ = [[0,0],[1,0]]` and `Γ = diag(I₄, −I₄)`.

use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub, SubAssign};

use nalgebra::{Matrix4, SMatrix, SVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::cquat::CQuat;

pub type Mat16 = SMatrix<Complex64, 16, 16>;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WittKind {
    Plus,
    Minus,
}

/// Sixteen complex components; see the module docs for the layout.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Vec16(pub [Complex64; 16]);

impl Default for Vec16 {
    fn default() -> Self {
        Vec16::ZERO
    }
}

impl Vec16 {
    pub const ZERO: Vec16 = Vec16([ZERO; 16]);

    pub const fn index_of(slot: usize, block: usize, comp: usize) -> usize {
        slot * 8 + block * 4 + comp
    }

    pub fn quat(&self, slot: usize, block: usize) -> CQuat {
        let o = Self::index_of(slot, block, 0);
        CQuat([self.0[o], self.0[o + 1], self.0[o + 2], self.0[o + 3]])
    }

    pub fn set_quat(&mut self, slot: usize, block: usize, q: CQuat) {
        let o = Self::index_of(slot, block, 0);
        self.0[o..o + 4].copy_from_slice(&q.0);
    }

    pub fn from_quats(q: [[CQuat; 2]; 2]) -> Self {
        let mut v = Vec16::ZERO;
        for (s, row) in q.iter().enumerate() {
            for (b, quat) in row.iter().enumerate() {
                v.set_quat(s, b, *quat);
            }
        }
        v
    }

    pub fn norm_sqr(&self) -> f64 {
        self.0.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Vec16(self.0.map(|c| c * s))
    }

    pub fn to_svector(&self) -> SVector<Complex64, 16> {
        SVector::from_column_slice(&self.0)
    }

    pub fn from_svector(v: &SVector<Complex64, 16>) -> Self {
        Vec16(std::array::from_fn(|i| v[i]))
    }

    /// `Σ conj(self_i)·other_i`.
    pub fn dot(&self, other: &Vec16) -> Complex64 {
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// `γ⁺ v`: moves slot 1 into slot 0, negating block 1.
    pub fn gamma_plus(&self) -> Vec16 {
        let mut out = Vec16::ZERO;
        for i in 0..4 {
            out.0[i] = self.0[8 + i];
            out.0[4 + i] = -self.0[12 + i];
        }
        out
    }

    /// `γ⁻ v`: moves slot 0 into slot 1, negating block 1.
    pub fn gamma_minus(&self) -> Vec16 {
        let mut out = Vec16::ZERO;
        for i in 0..4 {
            out.0[8 + i] = self.0[i];
            out.0[12 + i] = -self.0[4 + i];
        }
        out
    }

    pub fn apply(&self, m: &Mat16) -> Vec16 {
        Vec16::from_svector(&(m * self.to_svector()))
    }
}

impl Index<usize> for Vec16 {
    type Output = Complex64;
    fn index(&self, i: usize) -> &Complex64 {
        &self.0[i]
    }
}

impl IndexMut<usize> for Vec16 {
    fn index_mut(&mut self, i: usize) -> &mut Complex64 {
        &mut self.0[i]
    }
}

impl Add for Vec16 {
    type Output = Vec16;
    fn add(self, rhs: Vec16) -> Vec16 {
        Vec16(std::array::from_fn(|i| self.0[i] + rhs.0[i]))
    }
}

impl Sub for Vec16 {
    type Output = Vec16;
    fn sub(self, rhs: Vec16) -> Vec16 {
        Vec16(std::array::from_fn(|i| self.0[i] - rhs.0[i]))
    }
}

impl Neg for Vec16 {
    type Output = Vec16;
    fn neg(self) -> Vec16 {
        Vec16(self.0.map(|c| -c))
    }
}

impl AddAssign for Vec16 {
    fn add_assign(&mut self, rhs: Vec16) {
        for i in 0..16 {
            self.0[i] += rhs.0[i];
        }
    }
}

impl SubAssign for Vec16 {
    fn sub_assign(&mut self, rhs: Vec16) {
        for i in 0..16 {
            self.0[i] -= rhs.0[i];
        }
    }
}

impl Mul<Complex64> for Vec16 {
    type Output = Vec16;
    fn mul(self, rhs: Complex64) -> Vec16 {
        self.scale(rhs)
    }
}

impl Mul<f64> for Vec16 {
    type Output = Vec16;
    fn mul(self, rhs: f64) -> Vec16 {
        Vec16(self.0.map(|c| c * rhs))
    }
}

/// 2×2 matrix on the γ-slot.
fn slot_matrix(kind: WittKind) -> [[f64; 2]; 2] {
    match kind {
        WittKind::Plus => [[0.0, 1.0], [0.0, 0.0]],
        WittKind::Minus => [[0.0, 0.0], [1.0, 0.0]],
    }
}

/// `Γ = I₂ ⊗ diag(I₄, −I₄)`: grading that flips the off-diagonal blocks.
pub fn grading() -> Mat16 {
    Mat16::from_fn(|i, j| {
        if i != j {
            ZERO
        } else if (i / 4) % 2 == 0 {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(-1.0, 0.0)
        }
    })
}

/// `γ⁺` or `γ⁻` as a dense 16×16 matrix.
pub fn gamma(kind: WittKind) -> Mat16 {
    let s = slot_matrix(kind);
    Mat16::from_fn(|i, j| {
        let (si, ri) = (i / 8, i % 8);
        let (sj, rj) = (j / 8, j % 8);
        if ri != rj || s[si][sj] == 0.0 {
            return ZERO;
        }
        let sign = if ri < 4 { 1.0 } else { -1.0 };
        Complex64::new(s[si][sj] * sign, 0.0)
    })
}

/// Embeds `[[A, B], [C, D]]` (each a 4×4 complex matrix) as `I₂ ⊗ [[A,B],[C,D]]`.
pub fn embed_block(blocks: &[[Matrix4<Complex64>; 2]; 2]) -> Mat16 {
    let mut m = Mat16::zeros();
    for slot in 0..2 {
        for (bi, row) in blocks.iter().enumerate() {
            for (bj, blk) in row.iter().enumerate() {
                for i in 0..4 {
                    for j in 0..4 {
                        m[(Vec16::index_of(slot, bi, i), Vec16::index_of(slot, bj, j))] = blk[(i, j)];
                    }
                }
            }
        }
    }
    m
}

/// Off-diagonal block embedding `[[0, X], [Y, 0]]`.
pub fn embed_off_diagonal(x: Matrix4<Complex64>, y: Matrix4<Complex64>) -> Mat16 {
    embed_block(&[[Matrix4::zeros(), x], [y, Matrix4::zeros()]])
}

/// Scalar multiple of the identity on both quaternion blocks.
pub fn embed_scalar(c: Complex64) -> Mat16 {
    Mat16::identity() * c
}
