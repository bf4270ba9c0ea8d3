use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::teodorescu::{dirac_interior, masked_dirac};
use crate::algebra::Vec16;
use crate::error::{Error, Result};
use crate::lattice::{parabolic_dirac, Field, GridSpec, TimeSign};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Default cap on the number of unknowns of the dense projector.
pub const Q_UNKNOWN_LIMIT: usize = 20_000;

/// Least-squares projector `Qu = D_{h,−iτ}g*` with
/// `g* = argmin ‖u − D_{h,−iτ}g‖₂` over `g` vanishing on the parabolic
/// boundary. Dense; meant for tiny grids.
#[derive(Clone, Debug)]
pub struct QProjector {
    grid: GridSpec,
    /// Flat field indices of the free points of `g`.
    free: Vec<usize>,
    /// Sparse columns of `D` restricted to the free unknowns: `(row, value)`.
    columns: Vec<Vec<(usize, Complex64)>>,
    chol: nalgebra::linalg::Cholesky<Complex64, nalgebra::Dyn>,
}

impl QProjector {
    pub fn new(grid: GridSpec) -> Result<Self> {
        QProjector::with_limit(grid, Q_UNKNOWN_LIMIT)
    }

    pub fn with_limit(grid: GridSpec, limit: usize) -> Result<Self> {
        let s = grid.side();
        let free: Vec<usize> = (0..grid.len())
            .filter(|&p| {
                let (k, idx) = (p / grid.slice_len(), p % grid.slice_len());
                !grid.is_boundary([idx / (s * s), (idx / s) % s, idx % s], k)
            })
            .collect();
        let unknowns = free.len() * 16;
        if unknowns > limit {
            return Err(Error::TooLarge { unknowns, limit });
        }
        if unknowns == 0 {
            return Err(Error::InvalidGrid("no interior points for the projector".into()));
        }
        let stencil = unit_responses(&grid);
        let columns: Vec<Vec<(usize, Complex64)>> = free
            .iter()
            .flat_map(|&p| {
                let stencil = &stencil;
                (0..16).map(move |c| column(&grid, p, c, stencil))
            })
            .collect();

        // normal matrix from the row-wise sparsity
        let mut rows: Vec<Vec<(usize, Complex64)>> = vec![Vec::new(); grid.len() * 16];
        for (j, col) in columns.iter().enumerate() {
            for &(r, v) in col {
                rows[r].push((j, v));
            }
        }
        let mut normal = DMatrix::<Complex64>::zeros(unknowns, unknowns);
        for row in &rows {
            for &(a, va) in row {
                for &(b, vb) in row {
                    normal[(a, b)] += va.conj() * vb;
                }
            }
        }
        let chol = match normal.clone().cholesky() {
            Some(c) => c,
            None => {
                let rank = normal.rank(1e-10 * normal.norm());
                return Err(Error::Singular { column: rank });
            }
        };
        Ok(QProjector { grid, free, columns, chol })
    }

    pub fn unknowns(&self) -> usize {
        self.columns.len()
    }

    /// Least-squares potential `g*` for `u`.
    pub fn potential(&self, u: &Field<Vec16>) -> Result<Field<Vec16>> {
        u.check_same_grid(&Field::<Vec16>::zeros(self.grid))?;
        let flat: Vec<Complex64> = u.values().iter().flat_map(|v| v.0).collect();
        let rhs = DVector::from_iterator(
            self.columns.len(),
            self.columns.iter().map(|col| col.iter().map(|&(r, v)| v.conj() * flat[r]).sum::<Complex64>()),
        );
        let x = self.chol.solve(&rhs);
        let mut g = Field::zeros(self.grid);
        for (slot, &p) in self.free.iter().enumerate() {
            g.values_mut()[p] = Vec16(std::array::from_fn(|c| x[slot * 16 + c]));
        }
        Ok(g)
    }

    pub fn apply(&self, u: &Field<Vec16>) -> Result<Field<Vec16>> {
        Ok(parabolic_dirac(&self.potential(u)?, TimeSign::Minus))
    }

    /// `Pu = u − Qu` together with `max |D(Pu)|` over the points where the
    /// stencil of `D` lies in the grid.
    pub fn complement(&self, u: &Field<Vec16>) -> Result<(Field<Vec16>, KerResidual)> {
        let pu = u.sub(&self.apply(u)?)?;
        let d = masked_dirac(&pu);
        let g = self.grid;
        let residual = d.max_modulus_where(|i, k| dirac_interior(&g, i, k));
        Ok((pu, KerResidual { max_abs: residual, relative: residual / u.max_modulus().max(f64::MIN_POSITIVE) }))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KerResidual {
    pub max_abs: f64,
    pub relative: f64,
}

pub fn project_q_small(u: &Field<Vec16>) -> Result<Field<Vec16>> {
    QProjector::new(*u.grid())?.apply(u)
}

/// Response of `D_{h,−iτ}` to a unit value in each component, read at the
/// offsets `(row point) − (unit point)` it reaches.
fn unit_responses(grid: &GridSpec) -> Vec<Vec<([i64; 3], i64, Vec16)>> {
    let probe = GridSpec::new(grid.h(), 2, 2, 2.0 * grid.tau()).expect("valid probe grid");
    (0..16)
        .map(|c| {
            let mut unit = Field::<Vec16>::zeros(probe);
            let mut v = Vec16::ZERO;
            v.0[c] = Complex64::new(1.0, 0.0);
            unit.set([1, 1, 1], 1, v);
            let d = parabolic_dirac(&unit, TimeSign::Minus);
            let mut out = Vec::new();
            for k in 0..=2usize {
                for idx in 0..probe.slice_len() {
                    let i = [idx / 9, (idx / 3) % 3, idx % 3];
                    let val = d.at(i, k);
                    if val != Vec16::ZERO {
                        out.push(([i[0] as i64 - 1, i[1] as i64 - 1, i[2] as i64 - 1], k as i64 - 1, val));
                    }
                }
            }
            out
        })
        .collect()
}

fn column(grid: &GridSpec, p: usize, c: usize, stencil: &[Vec<([i64; 3], i64, Vec16)>]) -> Vec<(usize, Complex64)> {
    let s = grid.side();
    let (k, idx) = ((p / grid.slice_len()) as i64, p % grid.slice_len());
    let i = [(idx / (s * s)) as i64, ((idx / s) % s) as i64, (idx % s) as i64];
    let n = grid.n as i64;
    let mut out = Vec::new();
    for &(d, dk, val) in &stencil[c] {
        let q = [i[0] + d[0], i[1] + d[1], i[2] + d[2]];
        let kk = k + dk;
        if q.iter().any(|&x| x < 0 || x > n) || kk < 0 || kk > grid.m as i64 {
            continue;
        }
        let row = kk as usize * grid.slice_len() + ((q[0] as usize) * s + q[1] as usize) * s + q[2] as usize;
        for (comp, z) in val.0.iter().enumerate() {
            if *z != ZERO {
                out.push((row * 16 + comp, *z));
            }
        }
    }
    out
}
