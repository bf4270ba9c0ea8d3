use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Upper bound on `τ/h²` under which the discrete kernel converges.
pub const MESH_RATIO_BOUND: f64 = 1.0 / (6.0 * PI * PI);

/// Space-time lattice on `[−a, a]³ × [0, T]` with `N` spatial cells per axis
/// and `M` time steps.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub a: f64,
    pub n: usize,
    pub m: usize,
    pub t: f64,
}

impl GridSpec {
    pub fn new(a: f64, n: usize, m: usize, t: f64) -> Result<Self> {
        if !(a > 0.0 && a.is_finite()) {
            return Err(Error::InvalidGrid(format!("half-width must be positive, got {a}")));
        }
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::InvalidGrid(format!("time horizon must be positive, got {t}")));
        }
        if n == 0 || m == 0 {
            return Err(Error::InvalidGrid(format!("need N >= 1 and M >= 1, got N={n}, M={m}")));
        }
        Ok(GridSpec { a, n, m, t })
    }

    /// Chooses `M = ceil(T / (ratio·h²))` for the requested mesh ratio.
    pub fn with_ratio(a: f64, n: usize, t: f64, ratio: f64) -> Result<Self> {
        if !(ratio > 0.0) {
            return Err(Error::InvalidGrid(format!("mesh ratio must be positive, got {ratio}")));
        }
        let h = 2.0 * a / n as f64;
        let m = (t / (ratio * h * h)).ceil() as usize;
        GridSpec::new(a, n, m.max(1), t)
    }

    pub fn h(&self) -> f64 {
        2.0 * self.a / self.n as f64
    }

    pub fn tau(&self) -> f64 {
        self.t / self.m as f64
    }

    pub fn ratio(&self) -> f64 {
        self.tau() / (self.h() * self.h())
    }

    pub fn mesh_ok(&self) -> bool {
        self.ratio() < MESH_RATIO_BOUND
    }

    /// Errors in strict mode when the mesh ratio exceeds the bound, otherwise
    /// logs a warning and returns `false`.
    pub fn check_mesh(&self, strict: bool) -> Result<bool> {
        if self.mesh_ok() {
            return Ok(true);
        }
        if strict {
            return Err(Error::MeshRatio { ratio: self.ratio(), bound: MESH_RATIO_BOUND });
        }
        log::warn!(
            "mesh ratio tau/h^2 = {:.6} exceeds 1/(6 pi^2) = {:.6}",
            self.ratio(),
            MESH_RATIO_BOUND
        );
        Ok(false)
    }

    /// Points per spatial axis, `N + 1`.
    pub fn side(&self) -> usize {
        self.n + 1
    }

    pub fn slice_len(&self) -> usize {
        self.side().pow(3)
    }

    pub fn len(&self) -> usize {
        self.slice_len() * (self.m + 1)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn coord(&self, i: usize) -> f64 {
        -self.a + self.h() * i as f64
    }

    pub fn point(&self, i: [usize; 3]) -> [f64; 3] {
        [self.coord(i[0]), self.coord(i[1]), self.coord(i[2])]
    }

    pub fn time(&self, k: usize) -> f64 {
        self.tau() * k as f64
    }

    /// Nearest time level to `t`, clamped to the grid.
    pub fn nearest_level(&self, t: f64) -> usize {
        ((t / self.tau()).round().max(0.0) as usize).min(self.m)
    }

    pub fn on_spatial_boundary(&self, i: [usize; 3]) -> bool {
        i.iter().any(|&c| c == 0 || c == self.n)
    }

    /// Parabolic boundary: spatial boundary or the initial slice.
    pub fn is_boundary(&self, i: [usize; 3], k: usize) -> bool {
        k == 0 || self.on_spatial_boundary(i)
    }

    pub fn same_lattice(&self, other: &GridSpec) -> bool {
        self.n == other.n
            && self.m == other.m
            && (self.a - other.a).abs() <= 1e-12 * self.a.abs()
            && (self.t - other.t).abs() <= 1e-12 * self.t.abs()
    }

    /// Spatial index of the point closest to the origin (exact when `N` is even).
    pub fn center(&self) -> [usize; 3] {
        [self.n / 2; 3]
    }
}
