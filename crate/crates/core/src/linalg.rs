//! Small fixed-size complex matrix helpers shared by every module.

use nalgebra::{Matrix2, Matrix3, Matrix4, Vector3};
use num_complex::Complex64;

pub type C64 = Complex64;
pub type Mat2 = Matrix2<C64>;
pub type Mat4 = Matrix4<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// σ^μ for μ ∈ 0..=3, with σ^0 the identity.
pub fn pauli(mu: usize) -> Mat2 {
    match mu {
        0 => Mat2::new(ONE, ZERO, ZERO, ONE),
        1 => Mat2::new(ZERO, ONE, ONE, ZERO),
        2 => Mat2::new(ZERO, -I, I, ZERO),
        3 => Mat2::new(ONE, ZERO, ZERO, -ONE),
        _ => panic!("Pauli index {mu} out of range"),
    }
}

/// `A ⊗ B` with `A` on the left (subsystem a) factor.
pub fn kron(a: &Mat2, b: &Mat2) -> Mat4 {
    let mut out = Mat4::zeros();
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                for l in 0..2 {
                    out[(2 * i + k, 2 * j + l)] = a[(i, j)] * b[(k, l)];
                }
            }
        }
    }
    out
}

/// `n0·1 + n·σ`.
pub fn pauli_combination(n0: f64, n: &Vector3<f64>) -> Mat2 {
    pauli(0) * C64::from(n0)
        + pauli(1) * C64::from(n[0])
        + pauli(2) * C64::from(n[1])
        + pauli(3) * C64::from(n[2])
}

/// Matrix of `x ↦ a × x`.
pub fn cross_matrix(a: &Vector3<f64>) -> Matrix3<f64> {
    Matrix3::new(0.0, -a[2], a[1], a[2], 0.0, -a[0], -a[1], a[0], 0.0)
}

pub fn max_abs<R, C, S>(m: &nalgebra::Matrix<C64, R, C, S>) -> f64
where
    R: nalgebra::Dim,
    C: nalgebra::Dim,
    S: nalgebra::RawStorage<C64, R, C>,
{
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn max_abs_diff<R, C, S1, S2>(
    a: &nalgebra::Matrix<C64, R, C, S1>,
    b: &nalgebra::Matrix<C64, R, C, S2>,
) -> f64
where
    R: nalgebra::Dim,
    C: nalgebra::Dim,
    S1: nalgebra::RawStorage<C64, R, C>,
    S2: nalgebra::RawStorage<C64, R, C>,
{
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// `max |H - H†|`.
pub fn hermiticity_residual<D, S>(h: &nalgebra::Matrix<C64, D, D, S>) -> f64
where
    D: nalgebra::Dim,
    S: nalgebra::RawStorage<C64, D, D>,
{
    let (n, _) = h.shape();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            worst = worst.max((h[(i, j)] - h[(j, i)].conj()).norm());
        }
    }
    worst
}

/// `x ln x` with the `0 ln 0 = 0` convention.
pub fn xlogx(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        x * x.ln()
    }
}

/// Complex 3-vector from a real one.
pub fn complexify(v: &Vector3<f64>) -> Vector3<C64> {
    v.map(C64::from)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kron_puts_first_factor_on_the_left_bit() {
        // σ_z ⊗ 1 is diag(1, 1, -1, -1) in |ab⟩ ordering.
        let m = kron(&pauli(3), &pauli(0));
        let diag: Vec<f64> = (0..4).map(|i| m[(i, i)].re).collect();
        assert_eq!(diag, vec![1.0, 1.0, -1.0, -1.0]);
    }

    #[test]
    fn cross_matrix_matches_cross_product() {
        let a = Vector3::new(0.3, -1.2, 2.0);
        let x = Vector3::new(-0.7, 0.1, 0.4);
        assert!((cross_matrix(&a) * x - a.cross(&x)).norm() < 1e-15);
    }

    #[test]
    fn xlogx_zero_convention() {
        assert_eq!(xlogx(0.0), 0.0);
        assert!((xlogx(std::f64::consts::E) - std::f64::consts::E).abs() < 1e-15);
    }
}
