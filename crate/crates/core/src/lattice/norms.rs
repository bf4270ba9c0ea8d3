use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::field::{Field, FieldValue};
use crate::error::{Error, Result};

const CHUNK: usize = 4096;

/// Parallel sum with a fixed reduction order, so results do not depend on
/// thread scheduling.
pub(crate) fn fixed_sum<T: Sync>(xs: &[T], f: impl Fn(&T) -> f64 + Sync) -> f64 {
    xs.par_chunks(CHUNK).map(|c| c.iter().map(&f).sum::<f64>()).collect::<Vec<_>>().into_iter().sum()
}

/// `(Σ h³τ |u|^p)^{1/p}` over every lattice point.
pub fn lp_norm<V: FieldValue>(u: &Field<V>, p: f64) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(Error::InvalidArgument(format!("l_p norm needs p >= 1, got {p}")));
    }
    let g = u.grid();
    let w = g.h().powi(3) * g.tau();
    let s: f64 = if p == 2.0 {
        fixed_sum(u.values(), |v| v.norm_sqr())
    } else {
        fixed_sum(u.values(), |v| v.modulus().powf(p))
    };
    Ok((w * s).powf(1.0 / p))
}

pub fn l2_norm<V: FieldValue>(u: &Field<V>) -> f64 {
    lp_norm(u, 2.0).expect("p = 2 is valid")
}

/// Weighted inner product `Σ h³τ conj(u)·v`, real part of the component sum.
pub fn inner<V: FieldValue>(u: &Field<V>, v: &Field<V>) -> Result<num_complex::Complex64> {
    u.check_same_grid(v)?;
    let g = u.grid();
    let w = g.h().powi(3) * g.tau();
    let s: num_complex::Complex64 = u
        .values()
        .par_chunks(CHUNK)
        .zip(v.values().par_chunks(CHUNK))
        .map(|(ca, cb)| {
            ca.iter()
                .zip(cb)
                .flat_map(|(a, b)| a.components().iter().zip(b.components()).map(|(x, y)| x.conj() * y))
                .sum::<num_complex::Complex64>()
        })
        .collect::<Vec<_>>()
        .into_iter()
        .sum();
    Ok(s * w)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ErrorMode {
    /// `Σ_m h³ |u − v|(m, k)`
    Weighted,
    /// Mean of `|u − v|` over the slice.
    Mean,
}

impl std::str::FromStr for ErrorMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "weighted" => Ok(ErrorMode::Weighted),
            "mean" => Ok(ErrorMode::Mean),
            other => Err(Error::InvalidArgument(format!("unknown error mode {other:?}"))),
        }
    }
}

/// l1 difference of two fields on time level `k`.
pub fn slice_l1_error<V: FieldValue>(u: &Field<V>, v: &Field<V>, k: usize, mode: ErrorMode) -> Result<f64> {
    u.check_same_grid(v)?;
    let g = u.grid();
    if k > g.m {
        return Err(Error::InvalidArgument(format!("time level {k} outside 0..={}", g.m)));
    }
    let s: f64 = u
        .slice(k)
        .par_chunks(CHUNK)
        .zip(v.slice(k).par_chunks(CHUNK))
        .map(|(ca, cb)| ca.iter().zip(cb).map(|(&a, &b)| (a - b).modulus()).sum::<f64>())
        .collect::<Vec<_>>()
        .into_iter()
        .sum();
    Ok(match mode {
        ErrorMode::Weighted => s * g.h().powi(3),
        ErrorMode::Mean => s / g.slice_len() as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::CQuat;
    use crate::lattice::GridSpec;
    use num_complex::Complex64;

    fn delta_slice(g: GridSpec, k0: usize) -> Field<Complex64> {
        let h3 = g.h().powi(3);
        Field::from_fn(g, |i, k| {
            if i == g.center() && k == k0 {
                Complex64::new(1.0 / h3, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
    }

    #[test]
    fn zero_and_delta() {
        let g = GridSpec::new(1.0, 4, 5, 0.5).unwrap();
        assert_eq!(lp_norm(&Field::<CQuat>::zeros(g), 1.0).unwrap(), 0.0);
        let d = delta_slice(g, 0);
        assert!((lp_norm(&d, 1.0).unwrap() - g.tau()).abs() < 1e-14);
        let zero = Field::zeros(g);
        let w = slice_l1_error(&d, &zero, 0, ErrorMode::Weighted).unwrap();
        assert!((w - 1.0).abs() < 1e-14);
        assert_eq!(slice_l1_error(&d, &d, 0, ErrorMode::Weighted).unwrap(), 0.0);
        assert!(lp_norm(&d, 0.5).is_err());
    }

    #[test]
    fn weighted_is_mean_times_volume() {
        let g = GridSpec::new(1.5, 3, 2, 1.0).unwrap();
        let u = Field::from_fn(g, |i, k| Complex64::new((i[0] * 7 + i[1] + k) as f64, i[2] as f64));
        let v = Field::zeros(g);
        let w = slice_l1_error(&u, &v, 1, ErrorMode::Weighted).unwrap();
        let m = slice_l1_error(&u, &v, 1, ErrorMode::Mean).unwrap();
        assert!((w - m * (g.n as f64 + 1.0).powi(3) * g.h().powi(3)).abs() < 1e-12 * w);
    }

    #[test]
    fn grid_mismatch_is_an_error() {
        let a = Field::<Complex64>::zeros(GridSpec::new(1.0, 2, 2, 1.0).unwrap());
        let b = Field::<Complex64>::zeros(GridSpec::new(2.0, 2, 2, 1.0).unwrap());
        assert!(slice_l1_error(&a, &b, 0, ErrorMode::Mean).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn homogeneity(re in -3.0f64..3.0, im in -3.0f64..3.0, p in 1.0f64..4.0, seed in 0u64..1000) {
                let g = GridSpec::new(1.0, 2, 2, 1.0).unwrap();
                let u = Field::from_fn(g, |i, k| {
                    let x = ((i[0] * 31 + i[1] * 17 + i[2] * 5 + k * 3) as u64 ^ seed) as f64;
                    CQuat::from_real([x.sin(), x.cos(), (2.0 * x).sin(), 0.5])
                });
                let c = Complex64::new(re, im);
                let lhs = lp_norm(&u.scale(c), p).unwrap();
                let rhs = c.norm() * lp_norm(&u, p).unwrap();
                prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.max(1.0));
            }
        }
    }
}
