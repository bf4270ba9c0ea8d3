use std::fs;
use std::io::BufWriter;
use std::path::Path;

use nalgebra::Matrix4;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::{embed_off_diagonal, gamma, Mat16, Vec16, WittKind};
use crate::error::{Error, Result};
use crate::lattice::{dirac_rows, io, laplacian_cube, GridSpec, TimeSign};

const I: Complex64 = Complex64::new(0.0, 1.0);
const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Largest table we are willing to allocate, in complex values.
const MAX_TABLE_VALUES: usize = 1 << 28;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FundamentalKind {
    /// `e_{h,−iτ}`, propagated by `1 + iτΔ_h`.
    Backward,
    /// `e_{h,+iτ}`, propagated by `1 − iτΔ_h`.
    Forward,
}

impl FundamentalKind {
    fn propagator_sign(self) -> f64 {
        match self {
            FundamentalKind::Backward => 1.0,
            FundamentalKind::Forward => -1.0,
        }
    }

    /// Time sign of the Dirac operator whose square this kind inverts.
    pub fn time_sign(self) -> TimeSign {
        match self {
            FundamentalKind::Backward => TimeSign::Minus,
            FundamentalKind::Forward => TimeSign::Plus,
        }
    }
}

/// Spatial half-width (in cells) and number of steps of a table.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableExtent {
    pub radius: usize,
    pub steps: usize,
}

impl TableExtent {
    /// The box `|m|∞ ≤ ⌈N/2⌉` through step `M`.
    pub fn grid(grid: &GridSpec) -> Self {
        TableExtent { radius: grid.n.div_ceil(2), steps: grid.m }
    }

    /// Smallest box whose kernel slices are exact for offsets up to
    /// `max_offset` and lags up to `max_lag`.
    pub fn covering(max_offset: usize, max_lag: usize) -> Self {
        let steps = max_lag + 1;
        let mut radius = max_offset + 1;
        loop {
            let ext = TableExtent { radius, steps };
            if (0..=max_lag).all(|k| ext.kernel_radius(k).is_some_and(|r| r >= max_offset)) {
                return ext;
            }
            radius += 1;
        }
    }

    /// Kernel extent for a Teodorescu operator on `grid`.
    pub fn kernel(grid: &GridSpec) -> Self {
        TableExtent::covering(grid.n, grid.m)
    }

    pub fn side(&self) -> usize {
        2 * self.radius + 1
    }

    /// True when the cone leaves the box before the last step.
    pub fn clipped(&self) -> bool {
        self.steps >= self.radius + 2
    }

    /// Radius up to which slice `k` equals the unbounded-lattice value.
    pub fn exact_radius(&self, k: usize) -> Option<usize> {
        self.radius.checked_sub(k.saturating_sub(self.radius + 2))
    }

    /// Radius up to which the kernel components of slice `k` are exact.
    pub fn kernel_radius(&self, k: usize) -> Option<usize> {
        if k + 1 > self.steps {
            return None;
        }
        let here = self.exact_radius(k)?.checked_sub(1)?;
        let next = self.exact_radius(k + 1)?;
        Some(here.min(next))
    }
}

/// Discrete fundamental solution `e_{h,∓iτ}` on the box `|m|∞ ≤ R`,
/// slices `k = 0..=steps`. Slice 0 is zero.
#[derive(Clone, Debug)]
pub struct FundamentalTable {
    h: f64,
    tau: f64,
    kind: FundamentalKind,
    extent: TableExtent,
    slices: Vec<Vec<Complex64>>,
}

pub fn build_discrete_e(grid: &GridSpec, kind: FundamentalKind) -> Result<FundamentalTable> {
    FundamentalTable::build(grid.h(), grid.tau(), kind, TableExtent::grid(grid))
}

impl FundamentalTable {
    pub fn build(h: f64, tau: f64, kind: FundamentalKind, extent: TableExtent) -> Result<Self> {
        let side = extent.side();
        let total = side.pow(3) * (extent.steps + 1);
        if total > MAX_TABLE_VALUES {
            return Err(Error::TooLarge { unknowns: total, limit: MAX_TABLE_VALUES });
        }
        if extent.clipped() {
            log::info!(
                "fundamental cone leaves the box |m| <= {} after step {}; outer values are clipped",
                extent.radius,
                extent.radius + 1
            );
        }
        let mut stepper = Propagator::new(h, tau, kind, extent.radius);
        let mut slices = Vec::with_capacity(extent.steps + 1);
        slices.push(vec![ZERO; side.pow(3)]);
        for _ in 1..=extent.steps {
            slices.push(stepper.advance().to_vec());
        }
        Ok(FundamentalTable { h, tau, kind, extent, slices })
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn kind(&self) -> FundamentalKind {
        self.kind
    }

    pub fn extent(&self) -> TableExtent {
        self.extent
    }

    pub fn clipped(&self) -> bool {
        self.extent.clipped()
    }

    pub fn slice(&self, k: usize) -> &[Complex64] {
        &self.slices[k]
    }

    fn offset_index(&self, d: [i64; 3]) -> Option<usize> {
        box_index(self.extent.radius, d)
    }

    /// `e(d, k)`, zero outside the box and for `k ∉ 0..=steps`.
    pub fn value(&self, d: [i64; 3], k: i64) -> Complex64 {
        if k < 0 || k as usize > self.extent.steps {
            return ZERO;
        }
        match self.offset_index(d) {
            Some(idx) => self.slices[k as usize][idx],
            None => ZERO,
        }
    }

    /// Largest `|(∓i∂_τ − Δ_h)e − δ_τδ_h|` over points whose stencil reads
    /// only exact values, for both the absolute and the `1/(τh³)`-scaled
    /// residual.
    pub fn residual_check(&self) -> Residual {
        let r = self.extent.radius as i64;
        let inv_h2 = 1.0 / (self.h * self.h);
        let time_coef = -I * self.kind.propagator_sign() / self.tau;
        let delta = 1.0 / (self.tau * self.h.powi(3));
        let mut worst = 0.0f64;
        let mut points = 0usize;
        for k in 0..self.extent.steps {
            let reach = match (self.extent.exact_radius(k).and_then(|x| x.checked_sub(1)), self.extent.exact_radius(k + 1)) {
                (Some(a), Some(b)) => a.min(b) as i64,
                _ => continue,
            };
            let reach = reach.min(r - 1);
            let (m, n) = (0..(2 * reach + 1).pow(3) as usize)
                .into_par_iter()
                .map(|idx| {
                    let s = (2 * reach + 1) as usize;
                    let d = [
                        (idx / (s * s)) as i64 - reach,
                        ((idx / s) % s) as i64 - reach,
                        (idx % s) as i64 - reach,
                    ];
                    let kk = k as i64;
                    let c = self.value(d, kk);
                    let mut lap = c * -6.0;
                    for a in 0..3 {
                        for sgn in [-1, 1] {
                            let mut q = d;
                            q[a] += sgn;
                            lap += self.value(q, kk);
                        }
                    }
                    let res = (self.value(d, kk + 1) - c) * time_coef - lap * inv_h2;
                    let target = if k == 0 && d == [0, 0, 0] { delta } else { 0.0 };
                    ((res - target).norm(), 1usize)
                })
                .reduce(|| (0.0, 0), |a, b| (a.0.max(b.0), a.1 + b.1));
            worst = worst.max(m);
            points += n;
        }
        Residual { max_abs: worst, max_rel: worst / delta, points }
    }

    /// Kernel components of `E = D_{h,∓iτ}(e·I)` for lags `0..=max_lag` and
    /// offsets `|d|∞ ≤ radius`. Fails if any requested value is clipped.
    pub fn kernel(&self, radius: usize, max_lag: usize) -> Result<Kernel> {
        for k in 0..=max_lag {
            match self.extent.kernel_radius(k) {
                Some(r) if r >= radius => {}
                _ => return Err(Error::ClippedKernel),
            }
        }
        let inv_h = 1.0 / self.h;
        let inv_tau = 1.0 / self.tau;
        let side = 2 * radius + 1;
        let rr = radius as i64;
        let slices = (0..=max_lag)
            .into_par_iter()
            .map(|k| {
                let kk = k as i64;
                let mut s = KernelSlice::zeros(side.pow(3));
                for idx in 0..side.pow(3) {
                    let d = [
                        (idx / (side * side)) as i64 - rr,
                        ((idx / side) % side) as i64 - rr,
                        (idx % side) as i64 - rr,
                    ];
                    let c = self.value(d, kk);
                    s.e[idx] = c;
                    s.dt[idx] = (self.value(d, kk + 1) - c) * inv_tau;
                    for a in 0..3 {
                        let mut p = d;
                        p[a] += 1;
                        let mut q = d;
                        q[a] -= 1;
                        s.fwd[a][idx] = (self.value(p, kk) - c) * inv_h;
                        s.bwd[a][idx] = (c - self.value(q, kk)) * inv_h;
                    }
                }
                s
            })
            .collect();
        Ok(Kernel {
            h: self.h,
            tau: self.tau,
            radius,
            witt: I * self.kind.time_sign().factor(),
            slices,
        })
    }

    /// Writes one binary file per slice plus `manifest.json`.
    pub fn dump(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        let mut files = Vec::with_capacity(self.slices.len());
        let half = self.extent.radius as f64 * self.h;
        for (k, slice) in self.slices.iter().enumerate() {
            let name = format!("slice_{k:05}.bin");
            let w = BufWriter::new(fs::File::create(dir.join(&name))?);
            io::write_slice(w, 2 * self.extent.radius, half, k as f64 * self.tau, slice)?;
            files.push(name);
        }
        let manifest = TableManifest {
            h: self.h,
            tau: self.tau,
            kind: self.kind,
            extent: self.extent,
            clipped: self.clipped(),
            files,
        };
        fs::write(dir.join("manifest.json"), serde_json::to_string_pretty(&manifest)?)?;
        Ok(())
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TableManifest {
    pub h: f64,
    pub tau: f64,
    pub kind: FundamentalKind,
    pub extent: TableExtent,
    pub clipped: bool,
    pub files: Vec<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Residual {
    pub max_abs: f64,
    /// `max_abs · τh³`
    pub max_rel: f64,
    pub points: usize,
}

fn box_index(radius: usize, d: [i64; 3]) -> Option<usize> {
    let r = radius as i64;
    if d.iter().any(|&c| c < -r || c > r) {
        return None;
    }
    let s = (2 * r + 1) as usize;
    Some((((d[0] + r) as usize) * s + (d[1] + r) as usize) * s + (d[2] + r) as usize)
}

/// Marches `e` one slice at a time on a fixed box, keeping two slices.
pub struct Propagator {
    side: usize,
    coef: Complex64,
    inv_h2: f64,
    h3: f64,
    radius: usize,
    k: usize,
    cur: Vec<Complex64>,
    lap: Vec<Complex64>,
}

impl Propagator {
    pub fn new(h: f64, tau: f64, kind: FundamentalKind, radius: usize) -> Self {
        let side = 2 * radius + 1;
        Propagator {
            side,
            coef: I * tau * kind.propagator_sign(),
            inv_h2: 1.0 / (h * h),
            h3: h.powi(3),
            radius,
            k: 0,
            cur: vec![ZERO; side.pow(3)],
            lap: vec![ZERO; side.pow(3)],
        }
    }

    /// Current step index; slice 0 is zero.
    pub fn step(&self) -> usize {
        self.k
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn current(&self) -> &[Complex64] {
        &self.cur
    }

    /// Advances to the next slice and returns it.
    pub fn advance(&mut self) -> &[Complex64] {
        if self.k == 0 {
            let origin = box_index(self.radius, [0, 0, 0]).expect("origin lies in the box");
            // e(·,1) = ±iδ_h, sign opposite to the propagator's
            self.cur[origin] = self.coef / self.coef.norm() / self.h3;
        } else {
            laplacian_cube(self.side, self.inv_h2, &self.cur, &mut self.lap);
            let c = self.coef;
            self.cur.par_iter_mut().zip(self.lap.par_iter()).for_each(|(u, l)| *u += l * c);
        }
        self.k += 1;
        &self.cur
    }
}

/// One lag of the kernel: the scalar arrays from which `E(d, k)` acts.
#[derive(Clone, Debug)]
struct KernelSlice {
    e: Vec<Complex64>,
    dt: Vec<Complex64>,
    fwd: [Vec<Complex64>; 3],
    bwd: [Vec<Complex64>; 3],
}

impl KernelSlice {
    fn zeros(n: usize) -> Self {
        let z = || vec![ZERO; n];
        KernelSlice { e: z(), dt: z(), fwd: [z(), z(), z()], bwd: [z(), z(), z()] }
    }
}

/// Scalar data of one kernel entry.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KernelEntry {
    pub e: Complex64,
    /// γ⁺ coefficient `∂_τe`.
    pub dt: Complex64,
    pub fwd: [Complex64; 3],
    pub bwd: [Complex64; 3],
    /// γ⁻ coefficient `∓i·e`.
    pub witt: Complex64,
}

impl KernelEntry {
    pub fn is_zero(&self) -> bool {
        self.e == ZERO
            && self.dt == ZERO
            && self.fwd.iter().chain(self.bwd.iter()).all(|c| *c == ZERO)
    }

    /// `E v`.
    pub fn apply(&self, v: &Vec16) -> Vec16 {
        let mut out = v.gamma_plus() * self.dt + v.gamma_minus() * self.witt;
        for slot in 0..2 {
            let top = v.quat(slot, 1);
            let bottom = v.quat(slot, 0);
            let t = dirac_rows(
                &self.bwd.map(|c| top * c),
                &self.fwd.map(|c| top * c),
                false,
            );
            let b = dirac_rows(
                &self.fwd.map(|c| bottom * c),
                &self.bwd.map(|c| bottom * c),
                false,
            );
            out.set_quat(slot, 0, out.quat(slot, 0) + t);
            out.set_quat(slot, 1, out.quat(slot, 1) + b);
        }
        out
    }

    /// `E^H v`.
    pub fn apply_adjoint(&self, v: &Vec16) -> Vec16 {
        let mut out = Vec16::ZERO;
        for j in 0..16 {
            let mut basis = Vec16::ZERO;
            basis[j] = Complex64::new(1.0, 0.0);
            out[j] = self.apply(&basis).dot(v);
        }
        out
    }

    pub fn matrix(&self) -> Mat16 {
        let block = |sv: &[Complex64; 3], vv: &[Complex64; 3]| {
            let mut m = Matrix4::zeros();
            for j in 0..4 {
                let q = crate::algebra::CQuat::basis(j);
                let col = dirac_rows(&sv.map(|c| q * c), &vv.map(|c| q * c), false);
                for i in 0..4 {
                    m[(i, j)] = col[i];
                }
            }
            m
        };
        embed_off_diagonal(block(&self.bwd, &self.fwd), block(&self.fwd, &self.bwd))
            + gamma(WittKind::Plus) * self.dt
            + gamma(WittKind::Minus) * self.witt
    }
}

/// `E_{h,∓iτ}(d, k)` for `|d|∞ ≤ radius`, `k = 0..=max_lag`.
#[derive(Clone, Debug)]
pub struct Kernel {
    h: f64,
    tau: f64,
    radius: usize,
    witt: Complex64,
    slices: Vec<KernelSlice>,
}

impl Kernel {
    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn max_lag(&self) -> usize {
        self.slices.len() - 1
    }

    /// Zero kernel of the same shape.
    pub fn zeroed(&self) -> Kernel {
        let n = (2 * self.radius + 1).pow(3);
        Kernel { slices: vec![KernelSlice::zeros(n); self.slices.len()], ..self.clone() }
    }

    pub fn entry(&self, d: [i64; 3], k: usize) -> Option<KernelEntry> {
        let s = self.slices.get(k)?;
        let idx = box_index(self.radius, d)?;
        Some(KernelEntry {
            e: s.e[idx],
            dt: s.dt[idx],
            fwd: std::array::from_fn(|a| s.fwd[a][idx]),
            bwd: std::array::from_fn(|a| s.bwd[a][idx]),
            witt: s.e[idx] * self.witt,
        })
    }

    /// `E(d, k) v`, zero outside the stored range.
    pub fn apply(&self, d: [i64; 3], k: usize, v: &Vec16) -> Vec16 {
        self.entry(d, k).map_or(Vec16::ZERO, |e| e.apply(v))
    }

    pub fn matrix(&self, d: [i64; 3], k: usize) -> Mat16 {
        self.entry(d, k).map_or_else(Mat16::zeros, |e| e.matrix())
    }

    /// Scalar component arrays of lag `k` in box order:
    /// `[e, ∂_τe, ∂⁺¹e, ∂⁺²e, ∂⁺³e, ∂⁻¹e, ∂⁻²e, ∂⁻³e]`.
    pub fn components(&self, k: usize) -> [&[Complex64]; 8] {
        let s = &self.slices[k];
        [
            &s.e, &s.dt, &s.fwd[0], &s.fwd[1], &s.fwd[2], &s.bwd[0], &s.bwd[1], &s.bwd[2],
        ]
    }

    /// γ⁻ coefficient factor, `∓i`.
    pub fn witt_factor(&self) -> Complex64 {
        self.witt
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{parabolic_dirac, Field};
    use nalgebra::DMatrix;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn first_two_slices() {
        let (h, tau) = (0.5, 0.002);
        let t = FundamentalTable::build(h, tau, FundamentalKind::Backward, TableExtent { radius: 3, steps: 3 }).unwrap();
        let h3 = h.powi(3);
        let h5 = h.powi(5);
        assert_eq!(t.value([0, 0, 0], 0), ZERO);
        assert!((t.value([0, 0, 0], 1) - c(0.0, 1.0 / h3)).norm() < 1e-12);
        assert_eq!(t.value([1, 0, 0], 1), ZERO);
        assert!((t.value([0, 0, 0], 2) - c(6.0 * tau / h5, 1.0 / h3)).norm() < 1e-12);
        assert!((t.value([1, 0, 0], 2) - c(-tau / h5, 0.0)).norm() < 1e-12);
        let f = FundamentalTable::build(h, tau, FundamentalKind::Forward, TableExtent { radius: 3, steps: 2 }).unwrap();
        assert!((f.value([0, 0, 0], 1) - c(0.0, -1.0 / h3)).norm() < 1e-12);
    }

    #[test]
    fn matches_dense_matrix_power() {
        let (h, tau, r) = (0.4, 0.0021, 3usize);
        let ext = TableExtent { radius: r, steps: 3 };
        let t = FundamentalTable::build(h, tau, FundamentalKind::Backward, ext).unwrap();
        let s = ext.side();
        let n = s.pow(3);
        let mut lap = DMatrix::<Complex64>::zeros(n, n);
        for idx in 0..n {
            let i = [idx / (s * s), (idx / s) % s, idx % s];
            lap[(idx, idx)] = c(-6.0 / (h * h), 0.0);
            for a in 0..3 {
                for sgn in [-1i64, 1] {
                    let mut j = i.map(|x| x as i64);
                    j[a] += sgn;
                    if j.iter().all(|&x| x >= 0 && x < s as i64) {
                        let jdx = (j[0] as usize * s + j[1] as usize) * s + j[2] as usize;
                        lap[(idx, jdx)] = c(1.0 / (h * h), 0.0);
                    }
                }
            }
        }
        let prop = DMatrix::<Complex64>::identity(n, n) + lap * c(0.0, tau);
        let mut v = nalgebra::DVector::<Complex64>::zeros(n);
        v[box_index(r, [0, 0, 0]).unwrap()] = c(0.0, 1.0 / h.powi(3));
        for k in 1..=3 {
            let err = t.slice(k).iter().zip(v.iter()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
            let scale = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
            assert!(err < 1e-9 * scale, "slice {k}: {err}");
            v = &prop * v;
        }
    }

    #[test]
    fn conical_support_is_exactly_zero() {
        let ext = TableExtent { radius: 6, steps: 6 };
        let t = FundamentalTable::build(0.3, 0.001, FundamentalKind::Backward, ext).unwrap();
        let r = 6i64;
        for k in 1..=6i64 {
            for d0 in -r..=r {
                for d1 in -r..=r {
                    for d2 in -r..=r {
                        let d = [d0, d1, d2];
                        let far = d.iter().map(|x| x.abs()).max().unwrap() > k - 1;
                        if far {
                            assert_eq!(t.value(d, k), ZERO, "{d:?} {k}");
                        }
                    }
                }
            }
        }
        assert!(t.value([5, 0, 0], 6) != ZERO);
    }

    #[test]
    fn residual_vanishes_for_both_kinds() {
        let g = GridSpec::new(1.0, 8, 40, 0.02).unwrap();
        for kind in [FundamentalKind::Backward, FundamentalKind::Forward] {
            let t = build_discrete_e(&g, kind).unwrap();
            assert!(t.clipped());
            let r = t.residual_check();
            assert!(r.points > 0);
            assert!(r.max_rel < 1e-12, "{kind:?}: {r:?}");
        }
    }

    #[test]
    fn extent_bookkeeping() {
        let e = TableExtent { radius: 4, steps: 10 };
        assert_eq!(e.exact_radius(5), Some(4));
        assert_eq!(e.exact_radius(6), Some(4));
        assert_eq!(e.exact_radius(7), Some(3));
        assert!(e.clipped());
        assert!(!TableExtent { radius: 4, steps: 5 }.clipped());
        let k = TableExtent::covering(5, 6);
        for lag in 0..=6 {
            assert!(k.kernel_radius(lag).unwrap() >= 5);
        }
    }

    #[test]
    fn clipped_values_agree_with_a_large_box() {
        let (h, tau) = (0.5, 0.004);
        let small = FundamentalTable::build(h, tau, FundamentalKind::Backward, TableExtent { radius: 3, steps: 8 }).unwrap();
        let big = FundamentalTable::build(h, tau, FundamentalKind::Backward, TableExtent { radius: 9, steps: 8 }).unwrap();
        for k in 0..=8usize {
            let r = small.extent().exact_radius(k).unwrap() as i64;
            for d0 in -r..=r {
                for d1 in -r..=r {
                    let d = [d0, d1, 0];
                    assert!((small.value(d, k as i64) - big.value(d, k as i64)).norm() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn kernel_components_match_recomputation() {
        let g = GridSpec::new(1.0, 4, 3, 0.01).unwrap();
        let ext = TableExtent::kernel(&g);
        let t = FundamentalTable::build(g.h(), g.tau(), FundamentalKind::Backward, ext).unwrap();
        let ker = t.kernel(g.n, g.m).unwrap();
        for (d, k) in [([0, 0, 0], 0usize), ([1, -1, 0], 2), ([0, 2, 1], 3)] {
            let en = ker.entry(d, k).unwrap();
            let kk = k as i64;
            let e = t.value(d, kk);
            assert_eq!(en.e, e);
            assert_eq!(en.witt, -I * e);
            assert!((en.dt - (t.value(d, kk + 1) - e) / g.tau()).norm() <= 1e-12 * en.dt.norm().max(1.0));
        }
        let origin = ker.entry([0, 0, 0], 0).unwrap();
        let expect = gamma(WittKind::Plus) * c(0.0, 1.0 / (g.tau() * g.h().powi(3)));
        assert!((origin.matrix() - expect).norm() < 1e-9 * expect.norm());
        assert!(ker.entry([4, 4, 4], 0).unwrap().is_zero());
        assert!(t.kernel(g.n + 5, g.m + 3).is_err());
    }

    #[test]
    fn apply_agrees_with_matrix() {
        let g = GridSpec::new(1.0, 3, 3, 0.01).unwrap();
        let t = FundamentalTable::build(g.h(), g.tau(), FundamentalKind::Backward, TableExtent::kernel(&g)).unwrap();
        let ker = t.kernel(g.n, g.m).unwrap();
        let v = Vec16(std::array::from_fn(|i| c((i as f64 * 0.7).sin(), (i as f64 * 1.3).cos())));
        for (d, k) in [([0, 0, 0], 1usize), ([1, 0, -1], 2), ([0, 1, 0], 3)] {
            let a = ker.apply(d, k, &v);
            let b = v.apply(&ker.matrix(d, k));
            assert!((a - b).norm() <= 1e-10 * b.norm().max(1.0));
            let m = ker.matrix(d, k);
            let adj = Vec16::from_svector(&(m.adjoint() * v.to_svector()));
            assert!((ker.entry(d, k).unwrap().apply_adjoint(&v) - adj).norm() <= 1e-10 * adj.norm().max(1.0));
        }
    }

    #[test]
    fn dirac_of_kernel_is_a_delta() {
        let (h, tau) = (0.5, 0.003);
        let steps = 6;
        let ext = TableExtent { radius: 8, steps: steps + 1 };
        let t = FundamentalTable::build(h, tau, FundamentalKind::Backward, ext).unwrap();
        let ker = t.kernel(6, steps).unwrap();
        let r = 6usize;
        let g = GridSpec::new(r as f64 * h, 2 * r, steps, steps as f64 * tau).unwrap();
        let v = Vec16(std::array::from_fn(|i| c(1.0 + i as f64, -0.5 * i as f64)));
        let field = Field::from_fn(g, |i, k| {
            let d = i.map(|x| x as i64 - r as i64);
            ker.apply(d, k, &v)
        });
        let dd = parabolic_dirac(&field, TimeSign::Minus);
        let delta = 1.0 / (h.powi(3) * tau);
        let mut worst = 0.0f64;
        for k in 0..steps {
            for idx in 0..g.slice_len() {
                let s = g.side();
                let i = [idx / (s * s), (idx / s) % s, idx % s];
                if g.on_spatial_boundary(i) {
                    continue;
                }
                let d = i.map(|x| x as i64 - r as i64);
                let target = if k == 0 && d == [0, 0, 0] { v * delta } else { Vec16::ZERO };
                worst = worst.max((dd.at(i, k) - target).norm());
            }
        }
        assert!(worst < 1e-10 * delta * v.norm(), "{worst}");
    }

    #[test]
    fn zero_kernel_acts_as_zero() {
        let g = GridSpec::new(1.0, 2, 2, 0.01).unwrap();
        let t = FundamentalTable::build(g.h(), g.tau(), FundamentalKind::Backward, TableExtent::kernel(&g)).unwrap();
        let z = t.kernel(2, 2).unwrap().zeroed();
        let v = Vec16([c(1.0, 1.0); 16]);
        assert_eq!(z.apply([0, 0, 0], 0, &v), Vec16::ZERO);
    }

    #[test]
    fn dump_writes_manifest_and_slices() {
        let dir = tempfile::tempdir().unwrap();
        let t = FundamentalTable::build(0.5, 0.01, FundamentalKind::Forward, TableExtent { radius: 2, steps: 3 }).unwrap();
        t.dump(dir.path()).unwrap();
        let m: TableManifest =
            serde_json::from_str(&fs::read_to_string(dir.path().join("manifest.json")).unwrap()).unwrap();
        assert_eq!(m.files.len(), 4);
        assert_eq!(m.kind, FundamentalKind::Forward);
        let (hdr, vals) = io::read_slice(fs::File::open(dir.path().join(&m.files[2])).unwrap()).unwrap();
        assert_eq!(hdr.n, 4);
        assert_eq!(vals, t.slice(2));
    }
}
