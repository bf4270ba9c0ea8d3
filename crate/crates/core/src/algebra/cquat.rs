//! Complex quaternions `ℂ ⊗ ℍ`, the pointwise value type of lattice fields.
//!
//! Generators follow `e₁e₂ = e₃`, `e₂e₃ = e₁`, `e₃e₁ = e₂` and `eⱼ² = −1`.
//! Complex scalars commute with every generator.

use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub, SubAssign};

use nalgebra::Matrix4;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// `c0·e₀ + c1·e₁ + c2·e₂ + c3·e₃` with complex coefficients.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CQuat(pub [Complex64; 4]);

impl CQuat {
    pub const ZERO: CQuat = CQuat([ZERO; 4]);
    pub const ONE: CQuat = CQuat([ONE, ZERO, ZERO, ZERO]);

    pub const fn new(c0: Complex64, c1: Complex64, c2: Complex64, c3: Complex64) -> Self {
        CQuat([c0, c1, c2, c3])
    }

    pub fn from_real(c: [f64; 4]) -> Self {
        CQuat(c.map(|x| Complex64::new(x, 0.0)))
    }

    /// The generator `e_j`, `j ∈ 0..4`.
    pub fn basis(j: usize) -> Self {
        let mut q = CQuat::ZERO;
        q.0[j] = ONE;
        q
    }

    pub fn scalar(c: Complex64) -> Self {
        CQuat([c, ZERO, ZERO, ZERO])
    }

    /// Euclidean modulus over the four complex components.
    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.0.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn scale(&self, s: Complex64) -> Self {
        CQuat(self.0.map(|c| c * s))
    }

    /// Clifford conjugate: `e₀ ↦ e₀`, `eⱼ ↦ −eⱼ`, coefficients complex-conjugated.
    pub fn conj(&self) -> Self {
        let [a, b, c, d] = self.0;
        CQuat([a.conj(), -b.conj(), -c.conj(), -d.conj()])
    }

    /// Image under the printed 4×4 generator representation,
    /// `c0·E₀ + c1·E₁ + c2·E₂ + c3·E₃`. The map is multiplicative.
    pub fn to_matrix(&self) -> Matrix4<Complex64> {
        let g = generator_matrices();
        (0..4).fold(Matrix4::zeros(), |acc, j| acc + g[j] * self.0[j])
    }

    /// Matrix of `v ↦ self · v` on coefficient vectors `(v⁰, v¹, v², v³)`.
    pub fn left_matrix(&self) -> Matrix4<Complex64> {
        let mut m = Matrix4::zeros();
        for j in 0..4 {
            let col = self.mul(&CQuat::basis(j));
            for i in 0..4 {
                m[(i, j)] = col.0[i];
            }
        }
        m
    }

    pub fn from_vector(v: &nalgebra::Vector4<Complex64>) -> Self {
        CQuat([v[0], v[1], v[2], v[3]])
    }

    pub fn to_vector(&self) -> nalgebra::Vector4<Complex64> {
        nalgebra::Vector4::new(self.0[0], self.0[1], self.0[2], self.0[3])
    }

    /// Quaternion product.
    #[allow(clippy::should_implement_trait)]
    pub fn mul(&self, rhs: &CQuat) -> CQuat {
        quat_mul(*self, *rhs)
    }
}

/// Product of two complex quaternions (bilinear, associative).
pub fn quat_mul(a: CQuat, b: CQuat) -> CQuat {
    let [a0, a1, a2, a3] = a.0;
    let [b0, b1, b2, b3] = b.0;
    CQuat([
        a0 * b0 - a1 * b1 - a2 * b2 - a3 * b3,
        a0 * b1 + a1 * b0 + a2 * b3 - a3 * b2,
        a0 * b2 - a1 * b3 + a2 * b0 + a3 * b1,
        a0 * b3 + a1 * b2 - a2 * b1 + a3 * b0,
    ])
}

pub fn clifford_conjugate(a: CQuat) -> CQuat {
    a.conj()
}

/// The four printed generator matrices `E₀..E₃`.
pub fn generator_matrices() -> [Matrix4<Complex64>; 4] {
    let r = |rows: [[f64; 4]; 4]| {
        Matrix4::from_fn(|i, j| Complex64::new(rows[i][j], 0.0))
    };
    [
        Matrix4::identity(),
        r([
            [0.0, 1.0, 0.0, 0.0],
            [-1.0, 0.0, 0.0, 0.0],
            [0.0, 0.0, 0.0, -1.0],
            [0.0, 0.0, 1.0, 0.0],
        ]),
        r([
            [0.0, 0.0, -1.0, 0.0],
            [0.0, 0.0, 0.0, -1.0],
            [1.0, 0.0, 0.0, 0.0],
            [0.0, 1.0, 0.0, 0.0],
        ]),
        r([
            [0.0, 0.0, 0.0, -1.0],
            [0.0, 0.0, 1.0, 0.0],
            [0.0, -1.0, 0.0, 0.0],
            [1.0, 0.0, 0.0, 0.0],
        ]),
    ]
}

impl Index<usize> for CQuat {
    type Output = Complex64;
    fn index(&self, i: usize) -> &Complex64 {
        &self.0[i]
    }
}

impl IndexMut<usize> for CQuat {
    fn index_mut(&mut self, i: usize) -> &mut Complex64 {
        &mut self.0[i]
    }
}

impl Add for CQuat {
    type Output = CQuat;
    fn add(self, rhs: CQuat) -> CQuat {
        CQuat(std::array::from_fn(|i| self.0[i] + rhs.0[i]))
    }
}

impl Sub for CQuat {
    type Output = CQuat;
    fn sub(self, rhs: CQuat) -> CQuat {
        CQuat(std::array::from_fn(|i| self.0[i] - rhs.0[i]))
    }
}

impl Neg for CQuat {
    type Output = CQuat;
    fn neg(self) -> CQuat {
        CQuat(self.0.map(|c| -c))
    }
}

impl AddAssign for CQuat {
    fn add_assign(&mut self, rhs: CQuat) {
        for i in 0..4 {
            self.0[i] += rhs.0[i];
        }
    }
}

impl SubAssign for CQuat {
    fn sub_assign(&mut self, rhs: CQuat) {
        for i in 0..4 {
            self.0[i] -= rhs.0[i];
        }
    }
}

impl Mul for CQuat {
    type Output = CQuat;
    fn mul(self, rhs: CQuat) -> CQuat {
        quat_mul(self, rhs)
    }
}

impl Mul<Complex64> for CQuat {
    type Output = CQuat;
    fn mul(self, rhs: Complex64) -> CQuat {
        self.scale(rhs)
    }
}

impl Mul<f64> for CQuat {
    type Output = CQuat;
    fn mul(self, rhs: f64) -> CQuat {
        CQuat(self.0.map(|c| c * rhs))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_quat(rng: &mut ChaCha8Rng) -> CQuat {
        CQuat(std::array::from_fn(|_| {
            Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        }))
    }

    fn close(a: CQuat, b: CQuat, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn generator_squares_and_anticommutators() {
        for i in 1..4 {
            for j in 1..4 {
                let ei = CQuat::basis(i);
                let ej = CQuat::basis(j);
                let anti = ei * ej + ej * ei;
                let expected = if i == j { CQuat::ONE * -2.0 } else { CQuat::ZERO };
                assert!(close(anti, expected, 1e-14), "e{i}e{j}");
            }
        }
        assert_eq!(CQuat::basis(1) * CQuat::basis(1), -CQuat::ONE);
    }

    #[test]
    fn printed_matrices_fix_handedness() {
        // E1 * E2 multiplied out by hand from the printed matrices equals E3.
        let g = generator_matrices();
        assert_eq!(g[1] * g[2], g[3]);
        assert_eq!(g[2] * g[3], g[1]);
        assert_eq!(g[3] * g[1], g[2]);
        assert_eq!(CQuat::basis(1) * CQuat::basis(2), CQuat::basis(3));
    }

    #[test]
    fn identity_is_two_sided() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..50 {
            let a = random_quat(&mut rng);
            assert_eq!(CQuat::ONE * a, a);
            assert_eq!(a * CQuat::ONE, a);
        }
    }

    #[test]
    fn matrix_representation_is_faithful() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..1000 {
            let a = random_quat(&mut rng);
            let b = random_quat(&mut rng);
            let lhs = (a * b).to_matrix();
            let rhs = a.to_matrix() * b.to_matrix();
            let scale = a.norm() * b.norm();
            assert!((lhs - rhs).norm() <= 1e-13 * scale.max(1.0));
        }
    }

    #[test]
    fn conjugation_rules() {
        assert_eq!(CQuat::ONE.conj(), CQuat::ONE);
        assert_eq!(CQuat::basis(2).conj(), -CQuat::basis(2));
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let a = random_quat(&mut rng);
            let b = random_quat(&mut rng);
            assert!(close((a * b).conj(), b.conj() * a.conj(), 1e-14));
            assert_eq!(a.conj().conj(), a);
        }
    }

    #[test]
    fn complex_scalars_commute_with_generators() {
        let i = CQuat::scalar(Complex64::new(0.0, 1.0));
        for j in 1..4 {
            assert_eq!(i * CQuat::basis(j), CQuat::basis(j) * i);
        }
    }

    #[test]
    fn left_matrix_acts_as_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let a = random_quat(&mut rng);
        let b = random_quat(&mut rng);
        let via = CQuat::from_vector(&(a.left_matrix() * b.to_vector()));
        assert!(close(via, a * b, 1e-14));
    }
}
