//! Brute-force references. Nothing in here calls the closed-form modules:
//! Bell vectors, partial traces, eigensolver, logs and entropies are all
//! re-derived from their definitions on dense matrices.

mod jacobi;
mod minimize;

use nalgebra::{DMatrix, Vector3};

use crate::bell_algebra::Subsystem;
use crate::linalg::C64;
use crate::werner::{AnsatzParams, WernerSpec};
use crate::{Error, Result};

pub use jacobi::{eig_hermitian, log_psd_dense, DenseHermitian, Eigen};
pub use minimize::{brute_minimize, brute_minimize_with, BruteConfig, BruteMinimum};

/// Bell states written out by hand, as columns of a 4×4 matrix in the
/// `|00⟩, |01⟩, |10⟩, |11⟩` ordering.
pub fn bell_columns() -> DMatrix<C64> {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let re = |x: f64| C64::new(x * r, 0.0);
    let im = |x: f64| C64::new(0.0, x * r);
    let z = C64::new(0.0, 0.0);
    #[rustfmt::skip]
    let cols = [
        [re(1.0), z, z, re(1.0)],
        [z, im(1.0), im(1.0), z],
        [z, re(-1.0), re(1.0), z],
        [im(1.0), z, z, im(-1.0)],
    ];
    DMatrix::from_fn(4, 4, |i, j| cols[j][i])
}

/// Bell-basis matrix to standard basis.
pub fn bell_to_standard(x: &DMatrix<C64>) -> DMatrix<C64> {
    let b = bell_columns();
    &b * x * b.adjoint()
}

/// Standard-basis matrix to Bell basis.
pub fn standard_to_bell(x: &DMatrix<C64>) -> DMatrix<C64> {
    let b = bell_columns();
    b.adjoint() * x * &b
}

/// Index-summation partial trace of a standard-basis 4×4 matrix; `traced`
/// names the qubit summed over.
pub fn partial_trace_dense(x: &DMatrix<C64>, traced: Subsystem) -> DMatrix<C64> {
    DMatrix::from_fn(2, 2, |i, j| {
        (0..2)
            .map(|s| match traced {
                Subsystem::A => x[(2 * s + i, 2 * s + j)],
                Subsystem::B => x[(2 * i + s, 2 * j + s)],
            })
            .sum()
    })
}

fn kron_dense(a: &DMatrix<C64>, b: &DMatrix<C64>) -> DMatrix<C64> {
    DMatrix::from_fn(4, 4, |r, c| a[(r / 2, c / 2)] * b[(r % 2, c % 2)])
}

/// The ansatz member in the Bell basis, transcribed from its block definition
/// for an arbitrary (possibly complex) `ζ`.
pub fn dense_member(spec: &WernerSpec, q: f64, eps: f64, zeta: &Vector3<C64>) -> DMatrix<C64> {
    let (m0, m1, d_v) = (spec.m0(), spec.m1(), spec.d_v());
    let i = C64::new(0.0, 1.0);
    let n = spec.n_alpha() as f64;
    DMatrix::from_fn(4, 4, |r, c| {
        let val = match (r, c) {
            (0, 0) => C64::from(m0),
            (0, c) => i * q * zeta[c - 1].conj(),
            (r, 0) => -i * q * zeta[r - 1],
            (r, c) => {
                let outer = zeta[r - 1] * zeta[c - 1].conj();
                let iv = if r == c && r <= d_v { 1.0 } else { 0.0 };
                outer * m1 + (C64::from(iv) - outer) * (eps * m1)
            }
        };
        val / n
    })
}

/// `R = K_a ⊗ K_b / tr K` of a standard-basis member.
pub fn dense_r(k_std: &DMatrix<C64>) -> DMatrix<C64> {
    let k_a = partial_trace_dense(k_std, Subsystem::B);
    let k_b = partial_trace_dense(k_std, Subsystem::A);
    kron_dense(&k_a, &k_b) / k_std.trace()
}

fn hermitize(x: &DMatrix<C64>) -> DMatrix<C64> {
    (x + x.adjoint()) * C64::from(0.5)
}

/// `(ln K, ln R)` of a Bell-basis member, both in the Bell basis.
pub fn dense_logs(k_bell: &DMatrix<C64>) -> Result<(DMatrix<C64>, DMatrix<C64>)> {
    let k_std = bell_to_standard(k_bell);
    let ln_k = log_psd_dense(&DenseHermitian::new(hermitize(&k_std))?)?;
    let ln_r = log_psd_dense(&DenseHermitian::new(hermitize(&dense_r(&k_std)))?)?;
    Ok((standard_to_bell(&ln_k), standard_to_bell(&ln_r)))
}

fn dense_lagrangian_terms(k_bell: &DMatrix<C64>) -> Result<f64> {
    let k_std = hermitize(&bell_to_standard(k_bell));
    let ek = eig_hermitian(&DenseHermitian::new(k_std.clone())?)?;
    if let Some(&low) = ek.values.iter().find(|&&x| x < -1e-10) {
        return Err(Error::NegativeEigenvalue { value: low });
    }
    let l_k: f64 = ek.values.iter().map(|&x| if x > 0.0 { x * x.ln() } else { 0.0 }).sum();
    let ln_r = log_psd_dense(&DenseHermitian::new(hermitize(&dense_r(&k_std)))?)?;
    let l_r = (&k_std * ln_r).trace().re;
    Ok(l_k - l_r)
}

/// `Σ_α tr(K^α ln K^α) − tr(K^α ln R^α)` from dense matrices.
pub fn lagrangian_dense(spec: &WernerSpec, p: &AnsatzParams) -> Result<f64> {
    lagrangian_dense_raw(spec, p.q, p.eps)
}

/// [`lagrangian_dense`] at raw `(q, ε)`.
pub fn lagrangian_dense_raw(spec: &WernerSpec, q: f64, eps: f64) -> Result<f64> {
    spec.vset()
        .iter()
        .map(|v| dense_lagrangian_terms(&dense_member(spec, q, eps, &v.map(C64::from))))
        .sum()
}

/// `−x log₂ x − (1−x) log₂(1−x)` with `0 log 0 = 0`.
pub fn entropy_bits(x: f64) -> f64 {
    let term = |t: f64| if t > 0.0 { -t * t.log2() } else { 0.0 };
    term(x) + term(1.0 - x)
}

/// Entanglement of formation of a Bell mixture with weights sorted in
/// descending order: `C = max(0, 2 m_max − 1)`, `E = h((1 + √(1−C²))/2)`.
pub fn bell_mixture_eof(weights: &[f64; 4]) -> Result<f64> {
    if weights.iter().any(|&w| w < -1e-12) {
        return Err(Error::Weights("negative weight".into()));
    }
    if (weights.iter().sum::<f64>() - 1.0).abs() > 1e-12 {
        return Err(Error::Weights("weights must sum to 1".into()));
    }
    if weights.windows(2).any(|w| w[0] < w[1]) {
        return Err(Error::Weights("weights must be sorted in descending order".into()));
    }
    let c = (2.0 * weights[0] - 1.0).max(0.0);
    Ok(entropy_bits((1.0 + (1.0 - c * c).max(0.0).sqrt()) / 2.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn max_diff(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
        (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    #[test]
    fn bell_columns_are_orthonormal() {
        let b = bell_columns();
        assert!(max_diff(&(b.adjoint() * &b), &DMatrix::identity(4, 4)) < 1e-15);
    }

    #[test]
    fn partial_trace_examples() {
        let id = DMatrix::<C64>::identity(4, 4);
        for s in [Subsystem::A, Subsystem::B] {
            assert!(max_diff(&partial_trace_dense(&id, s), &(DMatrix::identity(2, 2) * C64::from(2.0))) < 1e-15);
            let b0 = bell_columns().column(0).into_owned();
            let proj = &b0 * b0.adjoint();
            let half = DMatrix::identity(2, 2) * C64::from(0.5);
            assert!(max_diff(&partial_trace_dense(&proj, s), &half) < 1e-15);
        }
    }

    #[test]
    fn pure_bell_state_lagrangian() {
        let s = WernerSpec::new(1.0, 3).unwrap();
        let l = lagrangian_dense(&s, &AnsatzParams::pure_min(&s)).unwrap();
        assert!((l - 2.0 * std::f64::consts::LN_2).abs() < 1e-12);
    }

    #[test]
    fn eof_examples() {
        assert_eq!(bell_mixture_eof(&[1.0, 0.0, 0.0, 0.0]).unwrap(), 1.0);
        assert_eq!(bell_mixture_eof(&[0.5, 0.5, 0.0, 0.0]).unwrap(), 0.0);
        let w = 0.25 / 3.0;
        let e = bell_mixture_eof(&[0.75, w, w, w]).unwrap();
        assert!((e - 0.354_578_902_665_27).abs() < 1e-12);
        assert!(bell_mixture_eof(&[0.2, 0.8, 0.0, 0.0]).is_err());
    }
}
