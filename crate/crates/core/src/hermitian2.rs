//! Eigensystems and logarithms of 2×2 Hermitian matrices through their
//! Pauli decomposition `n0 + n·σ`.

use nalgebra::{Vector2, Vector3};
use serde::{Deserialize, Serialize};

use crate::linalg::{hermiticity_residual, pauli, pauli_combination, Mat2, C64, I, ONE, ZERO};
use crate::{tol, Error, Result};

/// `n0·1 + n·σ` with real `n0` and `n`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PauliDecomp2 {
    pub n0: f64,
    pub n: Vector3<f64>,
}

/// Spectral data `λ± = n0 ± |n|` with projectors `P± = (1 ± n̂·σ)/2`.
#[derive(Clone, Debug, PartialEq)]
pub struct Eigensystem2 {
    pub lambda_plus: f64,
    pub lambda_minus: f64,
    pub p_plus: Mat2,
    pub p_minus: Mat2,
}

impl PauliDecomp2 {
    pub fn new(n0: f64, n: Vector3<f64>) -> Self {
        PauliDecomp2 { n0, n }
    }

    pub fn matrix(&self) -> Mat2 {
        pauli_combination(self.n0, &self.n)
    }

    pub fn norm(&self) -> f64 {
        self.n.norm()
    }

    pub fn eigensystem(&self) -> Eigensystem2 {
        eigensystem(self)
    }
}

impl Eigensystem2 {
    pub fn reconstruct(&self) -> Mat2 {
        self.p_plus * C64::from(self.lambda_plus) + self.p_minus * C64::from(self.lambda_minus)
    }
}

/// `n0 = tr(H)/2`, `n_k = tr(Hσ_k)/2`.
pub fn decompose(h: &Mat2) -> Result<PauliDecomp2> {
    let residual = hermiticity_residual(h);
    if residual > tol::HERMITIAN_INPUT {
        return Err(Error::NotHermitian { residual });
    }
    let half_trace = |k: usize| ((h * pauli(k)).trace() * 0.5).re;
    Ok(PauliDecomp2 {
        n0: half_trace(0),
        n: Vector3::new(half_trace(1), half_trace(2), half_trace(3)),
    })
}

/// Spectral decomposition. When `n = 0` the whole space is returned as `P₊`.
pub fn eigensystem(d: &PauliDecomp2) -> Eigensystem2 {
    let r = d.norm();
    if r == 0.0 {
        return Eigensystem2 {
            lambda_plus: d.n0,
            lambda_minus: d.n0,
            p_plus: Mat2::identity(),
            p_minus: Mat2::zeros(),
        };
    }
    let nhat_sigma = pauli_combination(0.0, &(d.n / r));
    Eigensystem2 {
        lambda_plus: d.n0 + r,
        lambda_minus: d.n0 - r,
        p_plus: (Mat2::identity() + nhat_sigma) * C64::from(0.5),
        p_minus: (Mat2::identity() - nhat_sigma) * C64::from(0.5),
    }
}

/// `Σ ln(λ) P` over the eigenvalues that are strictly positive.
///
/// A zero eigenvalue (within [`tol::EIGEN_NEGATIVE`]) is left out, so the
/// result is the logarithm restricted to the support.
pub fn log_psd_2x2(d: &PauliDecomp2) -> Result<Mat2> {
    let es = eigensystem(d);
    if es.lambda_minus < -tol::EIGEN_NEGATIVE {
        return Err(Error::NegativeEigenvalue { value: es.lambda_minus });
    }
    let mut out = Mat2::zeros();
    for (lam, p) in [(es.lambda_plus, es.p_plus), (es.lambda_minus, es.p_minus)] {
        if lam > tol::SUPPORT {
            out += p * C64::from(lam.ln());
        }
    }
    Ok(out)
}

/// Spin up/down along `n`, obtained by rotating `|0⟩, |1⟩` about `ẑ × n` by
/// `arccos(n₃/|n|)`.
///
/// When `n` is parallel to `ẑ` the rotation axis is undefined; `+ẑ` gives the
/// computational basis and `−ẑ` gives it swapped.
pub fn rotated_spin_states(n: &Vector3<f64>) -> Result<(Vector2<C64>, Vector2<C64>)> {
    let r = n.norm();
    if r == 0.0 {
        return Err(Error::ZeroVector);
    }
    let up = Vector2::new(ONE, ZERO);
    let down = Vector2::new(ZERO, ONE);
    let axis = Vector3::z().cross(n);
    let axis_norm = axis.norm();
    if axis_norm <= 1e-15 * r {
        return Ok(if n[2] > 0.0 { (up, down) } else { (down, up) });
    }
    let theta = (n[2] / r).clamp(-1.0, 1.0).acos();
    let axis = axis / axis_norm;
    // exp(-i θ â·σ / 2) = cos(θ/2) − i sin(θ/2) â·σ
    let rot = Mat2::identity() * C64::from((theta / 2.0).cos())
        - pauli_combination(0.0, &axis) * (I * (theta / 2.0).sin());
    Ok((rot * up, rot * down))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs_diff;

    fn diag(a: f64, b: f64) -> Mat2 {
        Mat2::new(C64::from(a), ZERO, ZERO, C64::from(b))
    }

    #[test]
    fn decompose_examples() {
        let d = decompose(&diag(0.7, -0.1)).unwrap();
        assert!((d.n0 - 0.3).abs() < 1e-15);
        assert!((d.n - Vector3::new(0.0, 0.0, 0.4)).norm() < 1e-15);
        let d = decompose(&pauli(1)).unwrap();
        assert_eq!(d.n0, 0.0);
        assert_eq!(d.n, Vector3::new(1.0, 0.0, 0.0));
    }

    #[test]
    fn decompose_rejects_non_hermitian() {
        let m = Mat2::new(ONE, ONE, ZERO, ONE);
        match decompose(&m) {
            Err(Error::NotHermitian { residual }) => assert!((residual - 1.0).abs() < 1e-15),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn eigensystem_examples() {
        let es = eigensystem(&PauliDecomp2::new(0.5, Vector3::new(0.0, 0.0, 0.5)));
        assert_eq!((es.lambda_plus, es.lambda_minus), (1.0, 0.0));
        assert!(max_abs_diff(&es.p_plus, &diag(1.0, 0.0)) < 1e-15);
        assert!(max_abs_diff(&es.p_minus, &diag(0.0, 1.0)) < 1e-15);

        let es = eigensystem(&decompose(&pauli(1)).unwrap());
        assert_eq!((es.lambda_plus, es.lambda_minus), (1.0, -1.0));
        assert!(max_abs_diff(&es.p_plus, &((Mat2::identity() + pauli(1)) * C64::from(0.5))) < 1e-15);
    }

    #[test]
    fn degenerate_eigensystem_keeps_reconstruction_exact() {
        let d = PauliDecomp2::new(0.25, Vector3::zeros());
        let es = eigensystem(&d);
        assert_eq!(es.p_plus, Mat2::identity());
        assert_eq!(es.reconstruct(), d.matrix());
    }

    #[test]
    fn log_examples() {
        let zero = log_psd_2x2(&PauliDecomp2::new(1.0, Vector3::zeros())).unwrap();
        assert!(max_abs_diff(&zero, &Mat2::zeros()) < 1e-15);
        let e = std::f64::consts::E;
        let one = log_psd_2x2(&PauliDecomp2::new(e, Vector3::zeros())).unwrap();
        assert!(max_abs_diff(&one, &Mat2::identity()) < 1e-15);
        let l = log_psd_2x2(&PauliDecomp2::new(0.5, Vector3::new(0.0, 0.0, 0.3))).unwrap();
        assert!(max_abs_diff(&l, &diag(0.8f64.ln(), 0.2f64.ln())) < 1e-15);
    }

    #[test]
    fn log_zero_eigenvalue_is_support_restricted() {
        let l = log_psd_2x2(&PauliDecomp2::new(0.5, Vector3::new(0.0, 0.0, 0.5))).unwrap();
        assert!(max_abs_diff(&l, &Mat2::zeros()) < 1e-15);
    }

    #[test]
    fn log_rejects_negative_spectrum() {
        let err = log_psd_2x2(&PauliDecomp2::new(0.0, Vector3::new(0.1, 0.0, 0.0))).unwrap_err();
        assert!(matches!(err, Error::NegativeEigenvalue { .. }));
    }

    #[test]
    fn rotated_states_examples() {
        let (u, d) = rotated_spin_states(&Vector3::z()).unwrap();
        assert_eq!((u, d), (Vector2::new(ONE, ZERO), Vector2::new(ZERO, ONE)));
        let (u, d) = rotated_spin_states(&Vector3::x()).unwrap();
        let half = |s: f64| (Mat2::identity() + pauli(1) * C64::from(s)) * C64::from(0.5);
        assert!(max_abs_diff(&(u * u.adjoint()), &half(1.0)) < 1e-12);
        assert!(max_abs_diff(&(d * d.adjoint()), &half(-1.0)) < 1e-12);
        assert_eq!(rotated_spin_states(&Vector3::zeros()), Err(Error::ZeroVector));
    }

    #[test]
    fn rotated_states_antiparallel_z() {
        let (u, _) = rotated_spin_states(&Vector3::new(0.0, 0.0, -2.0)).unwrap();
        let es = eigensystem(&PauliDecomp2::new(0.0, Vector3::new(0.0, 0.0, -2.0)));
        assert!(max_abs_diff(&(u * u.adjoint()), &es.p_plus) < 1e-15);
    }
}
