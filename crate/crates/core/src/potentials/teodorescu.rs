use std::str::FromStr;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::algebra::{Mat16, Vec16};
use crate::error::{Error, Result};
use crate::fundamental::{FundamentalKind, FundamentalTable, Kernel, KernelEntry, TableExtent};
use crate::lattice::{parabolic_dirac, Field, FieldValue, GridSpec, TimeSign};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    /// Literal double sum over every source point.
    Naive,
    /// Per-lag direct convolutions restricted to the kernel cone.
    Cached,
    /// Zero-padded FFT convolutions accumulated in frequency space.
    Fast,
}

impl FromStr for Strategy {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "naive" => Ok(Strategy::Naive),
            "cached" => Ok(Strategy::Cached),
            "fast" => Ok(Strategy::Fast),
            other => Err(Error::InvalidArgument(format!("unknown strategy {other:?}"))),
        }
    }
}

/// Discrete Teodorescu operator `T_{h,−iτ}` on one grid.
#[derive(Clone, Debug)]
pub struct TeodorescuPlan {
    grid: GridSpec,
    kernel: Kernel,
    strategy: Strategy,
    /// `A_j` with `E(d,k) = Σ_j c_j(d,k) A_j`.
    mats: [Mat16; 8],
}

impl TeodorescuPlan {
    pub fn new(grid: GridSpec, strategy: Strategy) -> Result<Self> {
        let table = FundamentalTable::build(grid.h(), grid.tau(), FundamentalKind::Backward, TableExtent::kernel(&grid))?;
        let kernel = table.kernel(grid.n, grid.m)?;
        TeodorescuPlan::with_kernel(grid, kernel, strategy)
    }

    /// Uses a prebuilt kernel; it must cover offsets up to `N` and lags up
    /// to `M`.
    pub fn with_kernel(grid: GridSpec, kernel: Kernel, strategy: Strategy) -> Result<Self> {
        if kernel.radius() < grid.n || kernel.max_lag() < grid.m {
            return Err(Error::ClippedKernel);
        }
        if (kernel.h() - grid.h()).abs() > 1e-12 * grid.h() || (kernel.tau() - grid.tau()).abs() > 1e-12 * grid.tau() {
            return Err(Error::GridMismatch("kernel spacing differs from the grid".into()));
        }
        let witt = kernel.witt_factor();
        let mats = std::array::from_fn(|j| {
            let mut e = KernelEntry { e: ZERO, dt: ZERO, fwd: [ZERO; 3], bwd: [ZERO; 3], witt: ZERO };
            match j {
                0 => e.witt = witt,
                1 => e.dt = ONE,
                2..=4 => e.fwd[j - 2] = ONE,
                _ => e.bwd[j - 5] = ONE,
            }
            e.matrix()
        });
        Ok(TeodorescuPlan { grid, kernel, strategy, mats })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn kernel(&self) -> &Kernel {
        &self.kernel
    }

    pub fn strategy(&self) -> Strategy {
        self.strategy
    }

    pub fn with_strategy(&self, strategy: Strategy) -> Self {
        TeodorescuPlan { strategy, ..self.clone() }
    }

    /// Same plan with the kernel replaced by zero.
    pub fn zeroed(&self) -> Self {
        TeodorescuPlan { kernel: self.kernel.zeroed(), ..self.clone() }
    }

    fn weight(&self) -> f64 {
        self.grid.h().powi(3) * self.grid.tau()
    }

    /// `(Tu)(m,k) = Σ_{n, s ≤ k} h³τ E(m−n, k−s) u(n,s)`.
    pub fn apply(&self, u: &Field<Vec16>) -> Result<Field<Vec16>> {
        self.check(u)?;
        Ok(match self.strategy {
            Strategy::Naive => self.naive(u, false),
            Strategy::Cached => self.cached(u, false),
            Strategy::Fast => self.fast(u, false),
        })
    }

    /// `(T*v)(n,s) = Σ_{m, k ≥ s} h³τ E(m−n, k−s)^H v(m,k)`.
    pub fn apply_adjoint(&self, v: &Field<Vec16>) -> Result<Field<Vec16>> {
        self.check(v)?;
        Ok(match self.strategy {
            Strategy::Naive => self.naive(v, true),
            Strategy::Cached => self.cached(v, true),
            Strategy::Fast => self.fast(v, true),
        })
    }

    fn check(&self, u: &Field<Vec16>) -> Result<()> {
        if self.grid.same_lattice(u.grid()) {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!("{:?} vs plan {:?}", u.grid(), self.grid)))
        }
    }

    fn naive(&self, u: &Field<Vec16>, adjoint: bool) -> Field<Vec16> {
        let g = self.grid;
        let w = self.weight();
        let s = g.side();
        let m_max = g.m;
        Field::from_fn(g, |i, k| {
            let mut acc = Vec16::ZERO;
            let lags: Vec<(usize, usize)> = if adjoint {
                (k..=m_max).map(|src| (src, src - k)).collect()
            } else {
                (0..=k).map(|src| (src, k - src)).collect()
            };
            for (src, lag) in lags {
                for idx in 0..g.slice_len() {
                    let n = [idx / (s * s), (idx / s) % s, idx % s];
                    let v = u.at(n, src);
                    // forward: E(i − n); adjoint: E(n − i)^H
                    let d: [i64; 3] = std::array::from_fn(|a| {
                        if adjoint {
                            n[a] as i64 - i[a] as i64
                        } else {
                            i[a] as i64 - n[a] as i64
                        }
                    });
                    if let Some(e) = self.kernel.entry(d, lag) {
                        acc += if adjoint { e.apply_adjoint(&v) } else { e.apply(&v) };
                    }
                }
            }
            acc * w
        })
    }

    fn cached(&self, u: &Field<Vec16>, adjoint: bool) -> Field<Vec16> {
        let g = self.grid;
        let w = self.weight();
        let s = g.side();
        let n = g.n as i64;
        let kr = self.kernel.radius() as i64;
        let ks = (2 * kr + 1) as usize;
        let mats: Vec<Mat16> = if adjoint { self.mats.iter().map(|m| m.adjoint()).collect() } else { self.mats.to_vec() };
        let mut out = Field::zeros(g);
        out.values_mut().par_chunks_mut(g.slice_len()).enumerate().for_each(|(k, dst)| {
            let sources: Vec<(usize, usize)> =
                if adjoint { (k..=g.m).map(|src| (src, src - k)).collect() } else { (0..=k).map(|src| (src, k - src)).collect() };
            for (idx, slot) in dst.iter_mut().enumerate() {
                let m = [(idx / (s * s)) as i64, ((idx / s) % s) as i64, (idx % s) as i64];
                let mut acc = [[ZERO; 16]; 8];
                for &(src, lag) in &sources {
                    let comps = self.kernel.components(lag);
                    // kernel vanishes beyond |d| = lag
                    let reach = (lag as i64).min(n);
                    let lo: [i64; 3] = std::array::from_fn(|a| (m[a] - reach).max(0));
                    let hi: [i64; 3] = std::array::from_fn(|a| (m[a] + reach).min(n));
                    let src_slice = u.slice(src);
                    for p0 in lo[0]..=hi[0] {
                        for p1 in lo[1]..=hi[1] {
                            for p2 in lo[2]..=hi[2] {
                                let d = if adjoint { [p0 - m[0], p1 - m[1], p2 - m[2]] } else { [m[0] - p0, m[1] - p1, m[2] - p2] };
                                let kidx = (((d[0] + kr) as usize) * ks + (d[1] + kr) as usize) * ks + (d[2] + kr) as usize;
                                let v = &src_slice[((p0 as usize) * s + p1 as usize) * s + p2 as usize];
                                for (j, c) in comps.iter().enumerate() {
                                    let mut cj = c[kidx];
                                    if cj == ZERO {
                                        continue;
                                    }
                                    if adjoint {
                                        cj = cj.conj();
                                    }
                                    for (a, x) in acc[j].iter_mut().zip(v.0.iter()) {
                                        *a += cj * x;
                                    }
                                }
                            }
                        }
                    }
                }
                let mut total = Vec16::ZERO;
                for (j, a) in acc.iter().enumerate() {
                    total += Vec16(*a).apply(&mats[j]);
                }
                *slot = total * w;
            }
        });
        out
    }

    fn fast(&self, u: &Field<Vec16>, adjoint: bool) -> Field<Vec16> {
        let g = self.grid;
        let p = 2 * g.n + 1;
        let p3 = p * p * p;
        let fft = Fft3::new(p);
        let kr = self.kernel.radius() as i64;
        let ks = 2 * self.kernel.radius() + 1;
        let n = g.n as i64;

        // kernel transforms per lag and component
        let khat: Vec<Vec<Vec<Complex64>>> = (0..=g.m)
            .into_par_iter()
            .map(|lag| {
                let comps = self.kernel.components(lag);
                comps
                    .iter()
                    .map(|c| {
                        let mut buf = vec![ZERO; p3];
                        for d0 in -n..=n {
                            for d1 in -n..=n {
                                for d2 in -n..=n {
                                    let kidx = (((d0 + kr) as usize) * ks + (d1 + kr) as usize) * ks + (d2 + kr) as usize;
                                    let w = |x: i64| x.rem_euclid(p as i64) as usize;
                                    buf[(w(d0) * p + w(d1)) * p + w(d2)] = c[kidx];
                                }
                            }
                        }
                        fft.forward(&mut buf);
                        if adjoint {
                            buf.iter_mut().for_each(|z| *z = z.conj());
                        }
                        buf
                    })
                    .collect()
            })
            .collect();

        // source transforms per slice and component
        let s = g.side();
        let uhat: Vec<Vec<Vec<Complex64>>> = (0..=g.m)
            .into_par_iter()
            .map(|k| {
                let slice = u.slice(k);
                (0..16)
                    .map(|c| {
                        let mut buf = vec![ZERO; p3];
                        for (idx, v) in slice.iter().enumerate() {
                            let i = [idx / (s * s), (idx / s) % s, idx % s];
                            buf[(i[0] * p + i[1]) * p + i[2]] = v.0[c];
                        }
                        fft.forward(&mut buf);
                        buf
                    })
                    .collect()
            })
            .collect();

        let mats: Vec<Mat16> = if adjoint { self.mats.iter().map(|m| m.adjoint()).collect() } else { self.mats.to_vec() };
        let scale = self.weight() / p3 as f64;
        let mut out = Field::zeros(g);
        out.values_mut().par_chunks_mut(g.slice_len()).enumerate().for_each(|(k, dst)| {
            let sources: Vec<(usize, usize)> =
                if adjoint { (k..=g.m).map(|src| (src, src - k)).collect() } else { (0..=k).map(|src| (src, k - src)).collect() };
            let mut spectrum = vec![[ZERO; 16]; p3];
            for (xi, out_xi) in spectrum.iter_mut().enumerate() {
                let mut y = [[ZERO; 16]; 8];
                for &(src, lag) in &sources {
                    for (j, yj) in y.iter_mut().enumerate() {
                        let kv = khat[lag][j][xi];
                        for (c, y) in yj.iter_mut().enumerate() {
                            *y += kv * uhat[src][c][xi];
                        }
                    }
                }
                let mut total = Vec16::ZERO;
                for (j, yj) in y.iter().enumerate() {
                    total += Vec16(*yj).apply(&mats[j]);
                }
                *out_xi = total.0;
            }
            let mut comps: Vec<Vec<Complex64>> = (0..16).map(|c| spectrum.iter().map(|v| v[c]).collect()).collect();
            for buf in comps.iter_mut() {
                fft.inverse(buf);
            }
            for (idx, slot) in dst.iter_mut().enumerate() {
                let i = [idx / (s * s), (idx / s) % s, idx % s];
                let b = (i[0] * p + i[1]) * p + i[2];
                *slot = Vec16(std::array::from_fn(|c| comps[c][b] * scale));
            }
        });
        out
    }
}

/// Unnormalized 3D FFT on a `p³` cube.
struct Fft3 {
    p: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl Fft3 {
    fn new(p: usize) -> Self {
        let mut planner = FftPlanner::new();
        Fft3 { p, fwd: planner.plan_fft_forward(p), inv: planner.plan_fft_inverse(p) }
    }

    fn forward(&self, buf: &mut [Complex64]) {
        self.run(buf, &self.fwd);
    }

    fn inverse(&self, buf: &mut [Complex64]) {
        self.run(buf, &self.inv);
    }

    fn run(&self, buf: &mut [Complex64], f: &Arc<dyn Fft<f64>>) {
        let p = self.p;
        // last axis is contiguous
        f.process(buf);
        let mut line = vec![ZERO; p];
        for stride in [p, p * p] {
            for base in 0..p * p {
                let start = if stride == p { (base / p) * p * p + base % p } else { base };
                for (t, x) in line.iter_mut().enumerate() {
                    *x = buf[start + t * stride];
                }
                f.process(&mut line);
                for (t, x) in line.iter().enumerate() {
                    buf[start + t * stride] = *x;
                }
            }
        }
    }
}

pub fn teodorescu(plan: &TeodorescuPlan, u: &Field<Vec16>) -> Result<Field<Vec16>> {
    plan.apply(u)
}

/// Points where the stencil of `D_{h,−iτ}` lies inside the grid: spatial
/// interior and `k < M`.
pub fn dirac_interior(grid: &GridSpec, i: [usize; 3], k: usize) -> bool {
    k < grid.m && !grid.on_spatial_boundary(i)
}

/// `Fu = u − T(χ D_{h,−iτ}u)` with `χ` the indicator of [`dirac_interior`].
pub fn cauchy_bitsadze(plan: &TeodorescuPlan, u: &Field<Vec16>) -> Result<Field<Vec16>> {
    let du = masked_dirac(u);
    let tdu = plan.apply(&du)?;
    u.sub(&tdu)
}

/// `χ D_{h,−iτ}u`.
pub fn masked_dirac(u: &Field<Vec16>) -> Field<Vec16> {
    let mut du = parabolic_dirac(u, TimeSign::Minus);
    let g = *u.grid();
    let s = g.side();
    du.values_mut().par_chunks_mut(g.slice_len()).enumerate().for_each(|(k, chunk)| {
        for (idx, v) in chunk.iter_mut().enumerate() {
            if !dirac_interior(&g, [idx / (s * s), (idx / s) % s, idx % s], k) {
                *v = Vec16::zero();
            }
        }
    });
    du
}
