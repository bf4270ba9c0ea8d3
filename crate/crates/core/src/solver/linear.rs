use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use super::monitor::{stability_monitor, StabilityReport};
use super::{BcMode, SolveOptions};
use crate::algebra::CQuat;
use crate::error::{Error, Result};
use crate::fundamental::{FundamentalKind, FundamentalTable, TableExtent};
use crate::lattice::{laplacian_cube, Field, GridSpec};

const I: Complex64 = Complex64::new(0.0, 1.0);

fn check_inputs(f: &Field<CQuat>, boundary: Option<&Field<CQuat>>, opts: &SolveOptions) -> Result<()> {
    opts.validate()?;
    if opts.strict_mesh {
        f.grid().check_mesh(true)?;
    }
    match (opts.bc, boundary) {
        (BcMode::Sampled, None) => Err(Error::InvalidArgument("sampled boundary mode needs boundary data".into())),
        (_, Some(b)) => f.check_same_grid(b),
        _ => Ok(()),
    }
}

fn slice_l2(grid: &GridSpec, slice: &[CQuat]) -> f64 {
    (grid.h().powi(3) * crate::lattice::fixed_sum(slice, |v| v.norm_sqr())).sqrt()
}

/// Explicit march `u^{k+1} = u^k − iτ(Δ_h u^k + f^k)` on spatial-interior
/// points; spatial boundary values and `u(·,0)` come from `bc`.
pub fn solve_linear(f: &Field<CQuat>, boundary: Option<&Field<CQuat>>, opts: &SolveOptions) -> Result<Field<CQuat>> {
    solve_linear_traced(f, boundary, opts).map(|(u, _)| u)
}

/// As [`solve_linear`], also returning the per-step stability report.
pub fn solve_linear_traced(
    f: &Field<CQuat>,
    boundary: Option<&Field<CQuat>>,
    opts: &SolveOptions,
) -> Result<(Field<CQuat>, StabilityReport)> {
    check_inputs(f, boundary, opts)?;
    let grid = *f.grid();
    let bc = if opts.bc == BcMode::Sampled { boundary } else { None };
    let mut u = Field::<CQuat>::zeros(grid);
    if let Some(b) = bc {
        u.slice_mut(0).copy_from_slice(b.slice(0));
    }
    let side = grid.side();
    let len = grid.slice_len();
    let inv_h2 = 1.0 / (grid.h() * grid.h());
    let coef = -I * grid.tau();
    let mut lap = vec![CQuat::ZERO; len];
    let mut trace = Vec::with_capacity(grid.m + 1);
    trace.push(slice_l2(&grid, u.slice(0)));
    for k in 0..grid.m {
        let (done, rest) = u.values_mut().split_at_mut((k + 1) * len);
        let cur = &done[k * len..];
        let next = &mut rest[..len];
        laplacian_cube(side, inv_h2, cur, &mut lap);
        let fk = f.slice(k);
        let bk = bc.map(|b| b.slice(k + 1));
        next.par_iter_mut().enumerate().for_each(|(idx, out)| {
            let i = [idx / (side * side), (idx / side) % side, idx % side];
            *out = if grid.on_spatial_boundary(i) {
                bk.map_or(CQuat::ZERO, |b| b[idx])
            } else {
                cur[idx] + (lap[idx] + fk[idx]) * coef
            };
        });
        let norm = slice_l2(&grid, next);
        if !norm.is_finite() {
            return Err(Error::Instability { level: k + 1 });
        }
        trace.push(norm);
    }
    let report = stability_monitor(&trace, grid.tau(), grid.h(), opts.monitor.growth_threshold);
    Ok((u, report))
}

/// Adjoint of the zero-data linear solve `f ↦ u` in the weighted l₂ inner
/// product: a backward march with `1 + iτΔ_h`.
pub fn solve_linear_adjoint(v: &Field<CQuat>) -> Field<CQuat> {
    let grid = *v.grid();
    let side = grid.side();
    let len = grid.slice_len();
    let inv_h2 = 1.0 / (grid.h() * grid.h());
    let interior = |idx: usize| !grid.on_spatial_boundary([idx / (side * side), (idx / side) % side, idx % side]);
    let mut out = Field::<CQuat>::zeros(grid);
    let mut acc = vec![CQuat::ZERO; len];
    let mut lap = vec![CQuat::ZERO; len];
    let coef = I * grid.tau();
    for s in (0..grid.m).rev() {
        // acc_s = χv(s+1) + χ(1 + iτΔ)acc_{s+1}
        laplacian_cube(side, inv_h2, &acc, &mut lap);
        let vs = v.slice(s + 1);
        acc.par_iter_mut().enumerate().for_each(|(idx, a)| {
            *a = if interior(idx) { *a + lap[idx] * coef + vs[idx] } else { CQuat::ZERO };
        });
        out.slice_mut(s).par_iter_mut().zip(acc.par_iter()).for_each(|(o, a)| *o = *a * coef);
    }
    out
}

/// Zero-boundary linear solve through the discrete Duhamel formula
/// `u(k) = −iτ Σ_{s<k} (1 − iτΔ_h)^{k−1−s} χf(s)`, with the Dirichlet
/// propagator built from the forward fundamental solution by odd images.
pub fn solve_linear_duhamel(f: &Field<CQuat>) -> Result<Field<CQuat>> {
    let grid = *f.grid();
    let ext = TableExtent { radius: grid.m + 1, steps: grid.m };
    let table = FundamentalTable::build(grid.h(), grid.tau(), FundamentalKind::Forward, ext)?;
    let h3 = grid.h().powi(3);
    let n = grid.n as i64;
    let r = ext.radius as i64;
    let side = grid.side();
    let interior = |i: [usize; 3]| !grid.on_spatial_boundary(i);

    // images of source coordinate x along one axis within reach of `m`
    let images = |m: i64, x: i64| -> Vec<(i64, f64)> {
        let mut out = Vec::new();
        let period = 2 * n;
        let lo = (m - r - x).div_euclid(period) - 1;
        let hi = (m + r - x).div_euclid(period) + 1;
        for p in lo..=hi {
            for (pos, sign) in [(x + p * period, 1.0), (-x + p * period, -1.0)] {
                if (m - pos).abs() <= r {
                    out.push((m - pos, sign));
                }
            }
        }
        out
    };

    Ok(Field::from_fn(grid, |i, k| {
        if k == 0 || !interior(i) {
            return CQuat::ZERO;
        }
        let m = i.map(|c| c as i64);
        let mut acc = CQuat::ZERO;
        for s in 0..k {
            let j = k - 1 - s;
            // K_j = (1 − iτΔ)^j δ_h h³ = i h³ e_fwd(j+1)
            let scale = I * h3;
            for idx in 0..grid.slice_len() {
                let src = [idx / (side * side), (idx / side) % side, idx % side];
                if !interior(src) {
                    continue;
                }
                let fv = f.at(src, s);
                if fv == CQuat::ZERO {
                    continue;
                }
                let mut weight = Complex64::new(0.0, 0.0);
                let ax: Vec<Vec<(i64, f64)>> = (0..3).map(|a| images(m[a], src[a] as i64)).collect();
                for &(d0, s0) in &ax[0] {
                    for &(d1, s1) in &ax[1] {
                        for &(d2, s2) in &ax[2] {
                            weight += table.value([d0, d1, d2], j as i64 + 1) * (s0 * s1 * s2);
                        }
                    }
                }
                acc += fv * (weight * scale);
            }
        }
        acc * (-I * grid.tau())
    }))
}

/// Zero-boundary linear solve by assembling and factoring the full
/// space-time system `i∂_τu − Δ_hu = f` on interior unknowns.
pub fn solve_linear_dense(f: &Field<CQuat>) -> Result<Field<CQuat>> {
    let grid = *f.grid();
    let side = grid.side();
    let spatial: Vec<[usize; 3]> = (0..grid.slice_len())
        .map(|idx| [idx / (side * side), (idx / side) % side, idx % side])
        .filter(|&i| !grid.on_spatial_boundary(i))
        .collect();
    let ns = spatial.len();
    let unknowns = ns * grid.m;
    const LIMIT: usize = 8000;
    if unknowns > LIMIT {
        return Err(Error::TooLarge { unknowns, limit: LIMIT });
    }
    let pos = |i: [usize; 3]| spatial.iter().position(|&p| p == i);
    // unknown (p, k) for k = 1..=M at column (k−1)·ns + p; equation (p, k) for k = 0..M−1
    let mut a = DMatrix::<Complex64>::zeros(unknowns, unknowns);
    let inv_tau = 1.0 / grid.tau();
    let inv_h2 = 1.0 / (grid.h() * grid.h());
    for k in 0..grid.m {
        for (p, &i) in spatial.iter().enumerate() {
            let row = k * ns + p;
            a[(row, k * ns + p)] += I * inv_tau;
            if k >= 1 {
                let col = (k - 1) * ns + p;
                a[(row, col)] += -I * inv_tau + 6.0 * inv_h2;
                for ax in 0..3 {
                    for sgn in [-1i64, 1] {
                        let mut q = i.map(|c| c as i64);
                        q[ax] += sgn;
                        if let Some(qp) = pos(q.map(|c| c as usize)) {
                            a[(row, (k - 1) * ns + qp)] += -inv_h2;
                        }
                    }
                }
            }
        }
    }
    let lu = a.lu();
    let mut u = Field::<CQuat>::zeros(grid);
    for comp in 0..4 {
        let rhs = nalgebra::DVector::from_fn(unknowns, |row, _| f.at(spatial[row % ns], row / ns)[comp]);
        let x = lu.solve(&rhs).ok_or(Error::Singular { column: 0 })?;
        for (col, val) in x.iter().enumerate() {
            let (k, p) = (col / ns + 1, col % ns);
            let mut q = u.at(spatial[p], k);
            q[comp] = *val;
            u.set(spatial[p], k, q);
        }
    }
    Ok(u)
}

/// `max |i∂_τu − Δ_hu − f|` over spatial-interior points, `k < M`.
pub fn linear_residual(u: &Field<CQuat>, f: &Field<CQuat>) -> Result<f64> {
    u.check_same_grid(f)?;
    let grid = *u.grid();
    let lap = crate::lattice::star_laplacian(u);
    let dt = crate::lattice::time_diff(u);
    let r = Field::from_fn(grid, |i, k| dt.at(i, k) * I - lap.at(i, k) - f.at(i, k));
    Ok(r.max_modulus_where(|i, k| k < grid.m && !grid.on_spatial_boundary(i)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::inner;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(g: GridSpec, seed: u64) -> Field<CQuat> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let vals = (0..g.len())
            .map(|_| CQuat(std::array::from_fn(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))))
            .collect();
        Field::from_vec(g, vals).unwrap()
    }

    fn grid() -> GridSpec {
        GridSpec::new(1.0, 5, 10, 0.02).unwrap()
    }

    #[test]
    fn zero_rhs_gives_zero() {
        let g = grid();
        let u = solve_linear(&Field::zeros(g), None, &SolveOptions::default()).unwrap();
        assert_eq!(u, Field::zeros(g));
    }

    #[test]
    fn recovers_manufactured_discrete_field() {
        let g = grid();
        let mut w = random(g, 3);
        w.zero_boundary();
        let lap = crate::lattice::star_laplacian(&w);
        let dt = crate::lattice::time_diff(&w);
        let f = Field::from_fn(g, |i, k| dt.at(i, k) * I - lap.at(i, k));
        let u = solve_linear(&f, None, &SolveOptions::default()).unwrap();
        assert!(u.sub(&w).unwrap().max_modulus() <= 1e-11 * w.max_modulus());
        assert!(linear_residual(&u, &f).unwrap() <= 1e-11 * f.max_modulus());
    }

    #[test]
    fn three_realizations_agree() {
        let g = grid();
        let f = random(g, 4);
        let a = solve_linear(&f, None, &SolveOptions::default()).unwrap();
        let b = solve_linear_duhamel(&f).unwrap();
        let c = solve_linear_dense(&f).unwrap();
        let scale = a.max_modulus();
        assert!(a.sub(&b).unwrap().max_modulus() <= 1e-10 * scale);
        assert!(a.sub(&c).unwrap().max_modulus() <= 1e-10 * scale);
    }

    #[test]
    fn linearity() {
        let g = grid();
        let (f, h) = (random(g, 5), random(g, 6));
        let (al, be) = (Complex64::new(0.3, -1.2), Complex64::new(2.0, 0.5));
        let o = SolveOptions::default();
        let lhs = solve_linear(&f.scale(al).add(&h.scale(be)).unwrap(), None, &o).unwrap();
        let rhs = solve_linear(&f, None, &o).unwrap().scale(al).add(&solve_linear(&h, None, &o).unwrap().scale(be)).unwrap();
        assert!(lhs.sub(&rhs).unwrap().max_modulus() <= 1e-11 * lhs.max_modulus());
    }

    #[test]
    fn adjoint_pairing() {
        let g = grid();
        let (f, v) = (random(g, 7), random(g, 8));
        let su = solve_linear(&f, None, &SolveOptions::default()).unwrap();
        let lhs = inner(&v, &su).unwrap();
        let rhs = inner(&solve_linear_adjoint(&v), &f).unwrap();
        assert!((lhs - rhs).norm() <= 1e-11 * lhs.norm());
    }

    #[test]
    fn sampled_boundary_is_imposed() {
        let g = grid();
        let data = random(g, 9);
        let opts = SolveOptions { bc: BcMode::Sampled, ..SolveOptions::default() };
        assert!(solve_linear(&Field::zeros(g), None, &opts).is_err());
        let u = solve_linear(&Field::zeros(g), Some(&data), &opts).unwrap();
        assert_eq!(u.at([0, 2, 3], 4), data.at([0, 2, 3], 4));
        assert_eq!(u.at([2, 2, 3], 0), data.at([2, 2, 3], 0));
    }

    #[test]
    fn strict_mesh_is_enforced() {
        let g = GridSpec::new(1.0, 8, 2, 1.0).unwrap();
        let opts = SolveOptions { strict_mesh: true, ..SolveOptions::default() };
        assert!(matches!(solve_linear(&Field::zeros(g), None, &opts), Err(Error::MeshRatio { .. })));
    }
}
