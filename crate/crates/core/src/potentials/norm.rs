use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{l2_norm, Field, FieldValue, GridSpec};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormEstimate {
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Power iteration on `A*A` in the weighted l₂ inner product. `trials`
/// random restarts are run and the largest estimate kept.
pub fn power_norm<V, A, B>(grid: GridSpec, trials: usize, max_iters: usize, tol: f64, apply: A, adjoint: B) -> Result<NormEstimate>
where
    V: FieldValue,
    A: Fn(&Field<V>) -> Result<Field<V>>,
    B: Fn(&Field<V>) -> Result<Field<V>>,
{
    if trials == 0 {
        return Err(Error::InvalidArgument("norm estimate needs at least one trial".into()));
    }
    let mut best = NormEstimate { value: 0.0, iterations: 0, converged: true };
    for trial in 0..trials {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed + trial as u64);
        let mut x = Field::<V>::zeros(grid);
        for v in x.values_mut() {
            for c in v.components_mut() {
                *c = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            }
        }
        let n0 = l2_norm(&x);
        x = x.scale(Complex64::new(1.0 / n0, 0.0));
        let mut estimate = 0.0;
        let mut converged = false;
        let mut iterations = 0;
        for it in 1..=max_iters {
            iterations = it;
            let y = apply(&x)?;
            let ny = l2_norm(&y);
            if ny == 0.0 {
                estimate = 0.0;
                converged = true;
                break;
            }
            let z = adjoint(&y)?;
            let nz = l2_norm(&z);
            let next = ny;
            let done = (next - estimate).abs() <= tol * next;
            estimate = next;
            if nz == 0.0 {
                converged = true;
                break;
            }
            x = z.scale(Complex64::new(1.0 / nz, 0.0));
            if done {
                converged = true;
                break;
            }
        }
        if !estimate.is_finite() {
            return Err(Error::Instability { level: 0 });
        }
        if estimate >= best.value {
            best = NormEstimate { value: estimate, iterations, converged };
        }
    }
    if !best.converged {
        log::warn!("operator norm estimate did not settle after {max_iters} iterations");
    }
    Ok(best)
}

/// Estimate of `‖T_{h,−iτ}‖` on the weighted l₂ space.
pub fn estimate_norm(plan: &super::TeodorescuPlan, trials: usize) -> Result<NormEstimate> {
    let est = power_norm(*plan.grid(), trials, 200, 1e-8, |u| plan.apply(u), |v| plan.apply_adjoint(v))?;
    // power iteration approaches from below; report a tight upper side
    Ok(NormEstimate { value: est.value * (1.0 + 1e-9), ..est })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::Vec16;
    use crate::potentials::{Strategy, TeodorescuPlan};
    use rand::{Rng, SeedableRng};

    #[test]
    fn zero_kernel_has_zero_norm() {
        let g = GridSpec::new(1.0, 2, 2, 0.02).unwrap();
        let plan = TeodorescuPlan::new(g, Strategy::Cached).unwrap().zeroed();
        assert_eq!(estimate_norm(&plan, 1).unwrap().value, 0.0);
        assert!(estimate_norm(&plan, 0).is_err());
    }

    #[test]
    fn bounds_random_probes() {
        let g = GridSpec::new(1.0, 3, 3, 0.02).unwrap();
        let plan = TeodorescuPlan::new(g, Strategy::Fast).unwrap();
        let est = estimate_norm(&plan, 2).unwrap();
        assert!(est.converged);
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..5 {
            let vals = (0..g.len())
                .map(|_| Vec16(std::array::from_fn(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))))
                .collect();
            let u = Field::from_vec(g, vals).unwrap();
            let ratio = l2_norm(&plan.apply(&u).unwrap()) / l2_norm(&u);
            assert!(ratio <= est.value * (1.0 + 1e-6), "{ratio} > {}", est.value);
        }
    }

    #[test]
    fn diagonal_operator() {
        // multiplication by a known profile: norm is its max modulus
        let g = GridSpec::new(1.0, 2, 2, 0.5).unwrap();
        let prof = Field::from_fn(g, |i, k| Complex64::new(1.0 + (i[0] + i[1] * 2 + k) as f64, 0.0));
        let mul = |u: &Field<Complex64>| u.zip_map(&prof, |a, b| a * b);
        let adj = |u: &Field<Complex64>| u.zip_map(&prof, |a, b| a * b.conj());
        let est = power_norm(g, 1, 500, 1e-12, mul, adj).unwrap();
        assert!((est.value - prof.max_modulus()).abs() < 1e-4 * prof.max_modulus());
    }
}
