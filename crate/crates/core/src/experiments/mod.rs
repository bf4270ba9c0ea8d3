//! Manufactured-solution experiments on `[−5, 5]³ × [0, 2]`.

mod table;

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::algebra::CQuat;
use crate::error::{Error, Result};
use crate::lattice::{Field, GridSpec};
use crate::solver::Nonlinearity;

pub use table::{observed_order, run_example, Axis, ErrorRow, ErrorTable, OrderFit, RowReport, TABLE_TIMES};

/// Cubic B-spline `g` on `[0, 5]`, zero elsewhere.
pub fn bspline_g(y: f64) -> f64 {
    if !(0.0..=5.0).contains(&y) {
        0.0
    } else if y < 1.0 {
        y.powi(3) / 6.0
    } else if y < 2.0 {
        let s = y - 1.0;
        -1.0 / 3.0 + y / 2.0 + s * s / 2.0 - 11.0 * s.powi(3) / 24.0
    } else if y < 3.0 {
        let s = y - 2.0;
        11.0 / 24.0 + y / 8.0 - 7.0 * s * s / 8.0 + 3.0 * s.powi(3) / 8.0
    } else {
        // 11/6 − y/2 + (y−3)²/4 − (y−3)³/24 expanded about y = 5
        (5.0 - y).powi(3) / 24.0
    }
}

pub fn bspline_g_d1(y: f64) -> f64 {
    if !(0.0..=5.0).contains(&y) {
        0.0
    } else if y < 1.0 {
        y * y / 2.0
    } else if y < 2.0 {
        let s = y - 1.0;
        0.5 + s - 11.0 * s * s / 8.0
    } else if y < 3.0 {
        let s = y - 2.0;
        0.125 - 7.0 * s / 4.0 + 9.0 * s * s / 8.0
    } else {
        -(5.0 - y).powi(2) / 8.0
    }
}

pub fn bspline_g_d2(y: f64) -> f64 {
    if !(0.0..=5.0).contains(&y) {
        0.0
    } else if y < 1.0 {
        y
    } else if y < 2.0 {
        1.0 - 11.0 * (y - 1.0) / 4.0
    } else if y < 3.0 {
        -1.75 + 9.0 * (y - 2.0) / 4.0
    } else {
        (5.0 - y) / 4.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regularity {
    SmoothReal,
    SmoothComplex,
    C1,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExampleSpec {
    pub id: u8,
    pub a: f64,
    pub t: f64,
    pub regularity: Regularity,
}

impl ExampleSpec {
    pub fn new(id: u8) -> Result<Self> {
        let regularity = match id {
            1 => Regularity::SmoothReal,
            2 => Regularity::SmoothComplex,
            3 => Regularity::C1,
            _ => return Err(Error::InvalidArgument(format!("example id must be 1, 2 or 3, got {id}"))),
        };
        Ok(ExampleSpec { id, a: 5.0, t: 2.0, regularity })
    }

    /// Grid with `N` cells per axis and `M` steps on this example's domain.
    pub fn grid(&self, n: usize, m: usize) -> Result<GridSpec> {
        GridSpec::new(self.a, n, m, self.t)
    }

    pub fn exact_solution(&self, x: [f64; 3], t: f64) -> CQuat {
        self.eval(x, t).u
    }

    /// `i∂_t u − Δu − |u|²u` in closed form.
    pub fn manufactured_rhs(&self, x: [f64; 3], t: f64, mode: Nonlinearity) -> CQuat {
        let j = self.eval(x, t);
        let i = Complex64::i();
        let m2: Complex64 = match mode {
            Nonlinearity::Modulus => Complex64::new(j.u.norm_sqr(), 0.0),
            Nonlinearity::Literal => j.u.0.iter().map(|c| c * c).sum(),
        };
        CQuat(std::array::from_fn(|c| i * j.ut.0[c] - j.lap.0[c] - m2 * j.u.0[c]))
    }

    pub fn sample_exact(&self, grid: GridSpec) -> Field<CQuat> {
        Field::from_fn(grid, |i, k| self.exact_solution(grid.point(i), grid.time(k)))
    }

    pub fn sample_rhs(&self, grid: GridSpec, mode: Nonlinearity) -> Field<CQuat> {
        Field::from_fn(grid, |i, k| self.manufactured_rhs(grid.point(i), grid.time(k), mode))
    }

    fn eval(&self, x: [f64; 3], t: f64) -> Jet {
        let z = Complex64::new(0.0, 0.0);
        let r = |v: f64| Complex64::new(v, 0.0);
        let mut jet = Jet { u: CQuat::ZERO, ut: CQuat::ZERO, lap: CQuat::ZERO };
        let [x1, x2, x3] = x;
        let p = x1 * x2 * x3;
        let (s, c) = (PI * p).sin_cos();
        let cross = x2 * x2 * x3 * x3 + x1 * x1 * x3 * x3 + x1 * x1 * x2 * x2;
        match self.id {
            1 => {
                let a = (-x1).exp();
                // cos(πt + π/2)
                let ct = -(PI * t).sin();
                let ct_t = -PI * (PI * t).cos();
                let lap = a * (s * (1.0 - PI * PI * cross) - 2.0 * PI * x2 * x3 * c);
                jet.u = CQuat::new(z, r(a * ct * s), z, z);
                jet.ut = CQuat::new(z, r(a * ct_t * s), z, z);
                jet.lap = CQuat::new(z, r(ct * lap), z, z);
            }
            2 => {
                let phi = (-t).exp() - 1.0;
                let phi_t = -(-t).exp();
                let q = [x1 * x1 - 25.0, x2 * x2 - 25.0, x3 * x3 - 25.0];
                let qq = q[0] * q[1] * q[2];
                let q_lap = 2.0 * (q[1] * q[2] + q[0] * q[2] + q[0] * q[1]);
                let e = Complex64::new(0.0, x1 * t).exp();
                let u3 = e * (phi * s);
                let u3_t = e * (phi_t * s) + u3 * Complex64::new(0.0, x1);
                let u3_lap = e * phi * Complex64::new(-s * (PI * PI * cross + t * t), 2.0 * PI * t * x2 * x3 * c);
                jet.u = CQuat::new(z, r(phi * qq), z, u3);
                jet.ut = CQuat::new(z, r(phi_t * qq), z, u3_t);
                jet.lap = CQuat::new(z, r(phi * q_lap), z, u3_lap);
            }
            _ => {
                let phi = (-t).exp() - 1.0;
                let phi_t = -(-t).exp();
                let g = x.map(|y| bspline_g(y) - bspline_g(-y));
                let g2 = x.map(|y| bspline_g_d2(y) - bspline_g_d2(-y));
                let prod = g[0] * g[1] * g[2];
                let lap = g2[0] * g[1] * g[2] + g[0] * g2[1] * g[2] + g[0] * g[1] * g2[2];
                jet.u = CQuat::new(z, r(phi * prod), z, z);
                jet.ut = CQuat::new(z, r(phi_t * prod), z, z);
                jet.lap = CQuat::new(z, r(phi * lap), z, z);
            }
        }
        jet
    }
}

struct Jet {
    u: CQuat,
    ut: CQuat,
    lap: CQuat,
}
