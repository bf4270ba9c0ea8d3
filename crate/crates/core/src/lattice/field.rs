use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::grid::GridSpec;
use crate::algebra::{CQuat, Vec16};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ValueKind {
    Scalar,
    CQuat,
    Vec16,
}

impl ValueKind {
    pub fn width(self) -> usize {
        match self {
            ValueKind::Scalar => 1,
            ValueKind::CQuat => 4,
            ValueKind::Vec16 => 16,
        }
    }

    pub fn code(self) -> u8 {
        match self {
            ValueKind::Scalar => 0,
            ValueKind::CQuat => 1,
            ValueKind::Vec16 => 2,
        }
    }

    pub fn from_code(c: u8) -> Option<Self> {
        match c {
            0 => Some(ValueKind::Scalar),
            1 => Some(ValueKind::CQuat),
            2 => Some(ValueKind::Vec16),
            _ => None,
        }
    }
}

/// Pointwise value of a lattice field: a complex vector space with a
/// Euclidean modulus.
pub trait FieldValue:
    Copy
    + Send
    + Sync
    + PartialEq
    + std::fmt::Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
    + Mul<f64, Output = Self>
    + Mul<Complex64, Output = Self>
{
    const KIND: ValueKind;
    fn zero() -> Self;
    fn norm_sqr(&self) -> f64;
    fn components(&self) -> &[Complex64];
    fn components_mut(&mut self) -> &mut [Complex64];

    fn modulus(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    fn from_components(c: &[Complex64]) -> Self {
        let mut v = Self::zero();
        v.components_mut().copy_from_slice(c);
        v
    }
}

impl FieldValue for Complex64 {
    const KIND: ValueKind = ValueKind::Scalar;
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn norm_sqr(&self) -> f64 {
        Complex64::norm_sqr(self)
    }
    fn components(&self) -> &[Complex64] {
        std::slice::from_ref(self)
    }
    fn components_mut(&mut self) -> &mut [Complex64] {
        std::slice::from_mut(self)
    }
}

impl FieldValue for CQuat {
    const KIND: ValueKind = ValueKind::CQuat;
    fn zero() -> Self {
        CQuat::ZERO
    }
    fn norm_sqr(&self) -> f64 {
        CQuat::norm_sqr(self)
    }
    fn components(&self) -> &[Complex64] {
        &self.0
    }
    fn components_mut(&mut self) -> &mut [Complex64] {
        &mut self.0
    }
}

impl FieldValue for Vec16 {
    const KIND: ValueKind = ValueKind::Vec16;
    fn zero() -> Self {
        Vec16::ZERO
    }
    fn norm_sqr(&self) -> f64 {
        Vec16::norm_sqr(self)
    }
    fn components(&self) -> &[Complex64] {
        &self.0
    }
    fn components_mut(&mut self) -> &mut [Complex64] {
        &mut self.0
    }
}

/// Dense lattice function over `Ω_{h,τ}`, stored time-major.
///
/// Reads outside the grid return zero.
#[derive(Clone, Debug, PartialEq)]
pub struct Field<V> {
    grid: GridSpec,
    data: Vec<V>,
}

impl<V: FieldValue> Field<V> {
    pub fn zeros(grid: GridSpec) -> Self {
        Field { grid, data: vec![V::zero(); grid.len()] }
    }

    pub fn from_vec(grid: GridSpec, data: Vec<V>) -> Result<Self> {
        if data.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "expected {} values, got {}",
                grid.len(),
                data.len()
            )));
        }
        Ok(Field { grid, data })
    }

    /// Samples `f(i, k)` at every lattice point.
    pub fn from_fn<F>(grid: GridSpec, f: F) -> Self
    where
        F: Fn([usize; 3], usize) -> V + Sync,
    {
        let side = grid.side();
        let slice = grid.slice_len();
        let mut data = vec![V::zero(); grid.len()];
        data.par_chunks_mut(slice).enumerate().for_each(|(k, chunk)| {
            for (idx, out) in chunk.iter_mut().enumerate() {
                let i = [idx / (side * side), (idx / side) % side, idx % side];
                *out = f(i, k);
            }
        });
        Field { grid, data }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[V] {
        &self.data
    }

    pub fn values_mut(&mut self) -> &mut [V] {
        &mut self.data
    }

    pub fn into_values(self) -> Vec<V> {
        self.data
    }

    pub fn index(&self, i: [usize; 3], k: usize) -> usize {
        let s = self.grid.side();
        k * self.grid.slice_len() + (i[0] * s + i[1]) * s + i[2]
    }

    pub fn at(&self, i: [usize; 3], k: usize) -> V {
        self.data[self.index(i, k)]
    }

    pub fn set(&mut self, i: [usize; 3], k: usize, v: V) {
        let idx = self.index(i, k);
        self.data[idx] = v;
    }

    /// Zero-extended read at possibly out-of-grid signed coordinates.
    #[inline]
    pub fn get(&self, i: [i64; 3], k: i64) -> V {
        let n = self.grid.n as i64;
        if k < 0 || k > self.grid.m as i64 || i.iter().any(|&c| c < 0 || c > n) {
            return V::zero();
        }
        self.at([i[0] as usize, i[1] as usize, i[2] as usize], k as usize)
    }

    pub fn slice(&self, k: usize) -> &[V] {
        let l = self.grid.slice_len();
        &self.data[k * l..(k + 1) * l]
    }

    pub fn slice_mut(&mut self, k: usize) -> &mut [V] {
        let l = self.grid.slice_len();
        &mut self.data[k * l..(k + 1) * l]
    }

    pub fn map<W: FieldValue, F: Fn(V) -> W + Sync>(&self, f: F) -> Field<W> {
        Field { grid: self.grid, data: self.data.par_iter().map(|&v| f(v)).collect() }
    }

    pub fn zip_map<W: FieldValue, F: Fn(V, V) -> W + Sync>(&self, other: &Field<V>, f: F) -> Result<Field<W>> {
        self.check_same_grid(other)?;
        Ok(Field {
            grid: self.grid,
            data: self.data.par_iter().zip(other.data.par_iter()).map(|(&a, &b)| f(a, b)).collect(),
        })
    }

    pub fn check_same_grid<W>(&self, other: &Field<W>) -> Result<()> {
        if self.grid.same_lattice(&other.grid) {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!("{:?} vs {:?}", self.grid, other.grid)))
        }
    }

    pub fn scale(&self, c: Complex64) -> Field<V> {
        self.map(|v| v * c)
    }

    pub fn add(&self, other: &Field<V>) -> Result<Field<V>> {
        self.zip_map(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Field<V>) -> Result<Field<V>> {
        self.zip_map(other, |a, b| a - b)
    }

    /// Largest pointwise modulus.
    pub fn max_modulus(&self) -> f64 {
        self.data.par_iter().map(|v| v.modulus()).reduce(|| 0.0, f64::max)
    }

    /// Largest modulus over the points selected by `keep`.
    pub fn max_modulus_where<P: Fn([usize; 3], usize) -> bool + Sync>(&self, keep: P) -> f64 {
        let side = self.grid.side();
        let slice = self.grid.slice_len();
        self.data
            .par_chunks(slice)
            .enumerate()
            .map(|(k, chunk)| {
                chunk
                    .iter()
                    .enumerate()
                    .filter(|(idx, _)| keep([idx / (side * side), (idx / side) % side, idx % side], k))
                    .map(|(_, v)| v.modulus())
                    .fold(0.0, f64::max)
            })
            .reduce(|| 0.0, f64::max)
    }

    /// Sets every parabolic-boundary point (spatial boundary or `k = 0`) to zero.
    pub fn zero_boundary(&mut self) {
        let grid = self.grid;
        let side = grid.side();
        self.data.par_chunks_mut(grid.slice_len()).enumerate().for_each(|(k, chunk)| {
            for (idx, v) in chunk.iter_mut().enumerate() {
                let i = [idx / (side * side), (idx / side) % side, idx % side];
                if grid.is_boundary(i, k) {
                    *v = V::zero();
                }
            }
        });
    }
}

/// Iterates spatial multi-indices of one slice in storage order.
pub fn spatial_indices(grid: &GridSpec) -> impl Iterator<Item = [usize; 3]> {
    let s = grid.side();
    (0..s.pow(3)).map(move |idx| [idx / (s * s), (idx / s) % s, idx % s])
}
