use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::discrete::{FundamentalKind, Propagator, TableExtent};
use crate::algebra::{embed_off_diagonal, gamma, CQuat, Mat16, WittKind};
use crate::error::{Error, Result};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// `H(t)(4πit)^{−3/2} exp(i|x|²/4t)`, principal branch, `H(0) = 0`.
fn prefactor(x: [f64; 3], t: f64) -> Complex64 {
    if t <= 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
    let power = (I * (4.0 * PI * t)).powf(-1.5);
    power * (I * (r2 / (4.0 * t))).exp()
}

/// Fundamental solution `e_−` of the backward Schrödinger operator.
pub fn continuous_e(x: [f64; 3], t: f64) -> Complex64 {
    I * prefactor(x, t)
}

/// Fundamental solution `E_− = D_{x,−it} e_−` of the backward parabolic
/// Dirac operator, as a 16×16 matrix.
pub fn continuous_big_e(x: [f64; 3], t: f64) -> Mat16 {
    if t <= 0.0 {
        return Mat16::zeros();
    }
    let p = prefactor(x, t);
    let r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
    let v = CQuat::new(
        Complex64::new(0.0, 0.0),
        p * (-x[0] / (2.0 * t)),
        p * (-x[1] / (2.0 * t)),
        p * (-x[2] / (2.0 * t)),
    );
    let l = v.left_matrix();
    let plus = p * Complex64::new(r2 / (4.0 * t * t), -3.0 / (2.0 * t));
    embed_off_diagonal(l, l) + gamma(WittKind::Plus) * plus + gamma(WittKind::Minus) * p
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct L1Distance {
    pub h: f64,
    pub tau: f64,
    /// Half-width of the cube `G`.
    pub half_width: f64,
    pub horizon: f64,
    /// Number of time levels summed, `k = 0..levels`.
    pub levels: usize,
    pub distance: f64,
}

/// `Σ h³τ |e_{h,−iτ} − e_−|` over `G_h × [0, T)_τ` with `G = [−g, g]³`.
pub fn l1_distance(h: f64, tau: f64, half_width: f64, horizon: f64) -> Result<L1Distance> {
    l1_distance_with(h, tau, half_width, horizon, continuous_e)
}

/// As [`l1_distance`] with an arbitrary reference function.
pub fn l1_distance_with<F>(h: f64, tau: f64, half_width: f64, horizon: f64, reference: F) -> Result<L1Distance>
where
    F: Fn([f64; 3], f64) -> Complex64 + Sync,
{
    if !(h > 0.0 && tau > 0.0 && half_width > 0.0 && horizon > 0.0) {
        return Err(Error::InvalidArgument("l1 distance needs positive h, tau, G and T".into()));
    }
    let cells = (half_width / h + 1e-9).floor() as usize;
    let levels = (horizon / tau - 1e-9).ceil().max(1.0) as usize;
    // every slice k < levels must be exact on |m| <= cells
    let ext = TableExtent::covering(cells, levels);
    let mut prop = Propagator::new(h, tau, FundamentalKind::Backward, ext.radius);
    let r = ext.radius as i64;
    let g = cells as i64;
    let side = ext.side();
    let w = h.powi(3) * tau;
    let mut total = 0.0;
    for k in 1..levels {
        let slice = prop.advance();
        let t = k as f64 * tau;
        let gs = (2 * g + 1) as usize;
        let planes: Vec<f64> = (0..gs)
            .into_par_iter()
            .map(|p| {
                (0..gs * gs)
                    .map(|idx| {
                        let d = [p as i64 - g, (idx / gs) as i64 - g, (idx % gs) as i64 - g];
                        let b = (((d[0] + r) as usize) * side + (d[1] + r) as usize) * side + (d[2] + r) as usize;
                        let x = d.map(|c| c as f64 * h);
                        (slice[b] - reference(x, t)).norm()
                    })
                    .sum::<f64>()
            })
            .collect();
        let s: f64 = planes.into_iter().sum();
        total += w * s;
    }
    Ok(L1Distance { h, tau, half_width, horizon, levels, distance: total })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::Vec16;
    use crate::fundamental::FundamentalTable;

    #[test]
    fn heaviside_and_modulus() {
        assert_eq!(continuous_e([1.0, 2.0, 3.0], -1.0), Complex64::new(0.0, 0.0));
        assert_eq!(continuous_e([0.0; 3], 0.0), Complex64::new(0.0, 0.0));
        for &(x, t) in &[([0.3, -1.0, 2.0], 0.7), ([0.0, 0.0, 0.0], 0.05), ([4.0, 1.0, 0.0], 3.0)] {
            let m = continuous_e(x, t).norm();
            assert!((m - (4.0 * PI * t).powf(-1.5)).abs() < 1e-14 * m);
        }
        assert_eq!(continuous_big_e([1.0, 0.0, 0.0], 0.0), Mat16::zeros());
    }

    #[test]
    fn independent_evaluation_at_a_point() {
        // (4πi·0.1)^{−3/2} = (0.4π)^{−3/2} e^{−3πi/4}; phase |x|²/(4t) = 2.5
        let t = 0.1;
        let modulus = (0.4 * PI).powf(-1.5);
        let phase = -3.0 * PI / 4.0 + 2.5 + PI / 2.0;
        let expect = Complex64::from_polar(modulus, phase);
        let got = continuous_e([1.0, 0.0, 0.0], t);
        assert!((got - expect).norm() < 1e-12 * modulus);
    }

    #[test]
    fn big_e_at_origin() {
        let t = 0.3;
        let p = (I * (4.0 * PI * t)).powf(-1.5);
        let m = continuous_big_e([0.0; 3], t);
        let v = Vec16(std::array::from_fn(|i| Complex64::new(i as f64, 1.0)));
        let expect = v.gamma_plus() * (p * Complex64::new(0.0, -1.5 / t)) + v.gamma_minus() * p;
        assert!((v.apply(&m) - expect).norm() < 1e-13 * expect.norm());
    }

    /// Sixth-order central first derivative.
    fn d1<F: Fn(f64) -> Complex64>(f: F, x: f64, h: f64) -> Complex64 {
        let c = [(1.0, 3.0 / 4.0), (2.0, -3.0 / 20.0), (3.0, 1.0 / 60.0)];
        c.iter().map(|&(k, w)| (f(x + k * h) - f(x - k * h)) * w).sum::<Complex64>() / h
    }

    #[test]
    fn big_e_is_dirac_of_e() {
        for &(x, t) in &[([0.4, -0.2, 0.3], 0.5), ([1.0, 0.5, -0.7], 1.3), ([0.0, 0.2, 0.0], 0.25)] {
            let h = 1e-3;
            let grad: [Complex64; 3] = std::array::from_fn(|a| {
                d1(
                    |s| {
                        let mut y = x;
                        y[a] = s;
                        continuous_e(y, t)
                    },
                    x[a],
                    h,
                )
            });
            let dt = d1(|s| continuous_e(x, s), t, h);
            let q = CQuat::new(Complex64::new(0.0, 0.0), grad[0], grad[1], grad[2]);
            let l = q.left_matrix();
            let oracle = embed_off_diagonal(l, l)
                + gamma(WittKind::Plus) * dt
                + gamma(WittKind::Minus) * (-I * continuous_e(x, t));
            let got = continuous_big_e(x, t);
            assert!((got - oracle).norm() < 1e-8 * got.norm(), "{x:?} {t}");
        }
    }

    #[test]
    fn identical_reference_gives_zero() {
        let (h, tau) = (0.25, 0.001);
        let ext = TableExtent::covering(4, 20);
        let t = FundamentalTable::build(h, tau, FundamentalKind::Backward, ext).unwrap();
        let d = l1_distance_with(h, tau, 1.0, 0.02, |x, s| {
            let k = (s / tau).round() as i64;
            t.value(x.map(|c| (c / h).round() as i64), k)
        })
        .unwrap();
        assert_eq!(d.levels, 20);
        assert!(d.distance < 1e-12, "{}", d.distance);
        let far = l1_distance(h, tau, 1.0, 0.02).unwrap();
        assert!(far.distance > 0.0 && far.distance.is_finite());
    }
}
