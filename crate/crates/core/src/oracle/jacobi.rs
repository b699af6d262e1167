use nalgebra::{DMatrix, DVector};

use crate::linalg::C64;
use crate::{Error, Result};

/// A 2×2 or 4×4 Hermitian matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseHermitian {
    entries: DMatrix<C64>,
}

impl DenseHermitian {
    pub fn new(entries: DMatrix<C64>) -> Result<Self> {
        let n = entries.nrows();
        if entries.ncols() != n || !(n == 2 || n == 4) {
            return Err(Error::Domain {
                what: "dimension",
                value: n as f64,
                reason: "dense oracle handles 2x2 and 4x4 only",
            });
        }
        let mut residual = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                residual = residual.max((entries[(i, j)] - entries[(j, i)].conj()).norm());
            }
        }
        if residual > 1e-12 {
            return Err(Error::NotHermitian { residual });
        }
        Ok(DenseHermitian { entries })
    }

    pub fn new4(m: crate::linalg::Mat4) -> Result<Self> {
        Self::new(DMatrix::from_fn(4, 4, |i, j| m[(i, j)]))
    }

    pub fn new2(m: crate::linalg::Mat2) -> Result<Self> {
        Self::new(DMatrix::from_fn(2, 2, |i, j| m[(i, j)]))
    }

    pub fn entries(&self) -> &DMatrix<C64> {
        &self.entries
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }
}

/// Eigenvalues in ascending order; column `i` of `vectors` belongs to `values[i]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Eigen {
    pub values: DVector<f64>,
    pub vectors: DMatrix<C64>,
    pub sweeps: usize,
}

impl Eigen {
    pub fn reconstruct(&self) -> DMatrix<C64> {
        let d = DMatrix::from_diagonal(&self.values.map(C64::from));
        &self.vectors * d * self.vectors.adjoint()
    }

    /// `V f(Λ) V†`.
    pub fn apply(&self, f: impl Fn(f64) -> f64) -> DMatrix<C64> {
        let d = DMatrix::from_diagonal(&self.values.map(|x| C64::from(f(x))));
        &self.vectors * d * self.vectors.adjoint()
    }
}

const MAX_SWEEPS: usize = 100;

fn off_norm(a: &DMatrix<C64>) -> f64 {
    let n = a.nrows();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[(i, j)].norm_sqr();
            }
        }
    }
    s.sqrt()
}

/// Cyclic complex Jacobi. Each rotation first removes the phase of `a_pq`
/// and then applies the real symmetric Schur rotation.
pub fn eig_hermitian(h: &DenseHermitian) -> Result<Eigen> {
    let n = h.dim();
    let mut a = h.entries().clone();
    let mut v = DMatrix::<C64>::identity(n, n);
    let scale = a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let target = 1e-14 * scale;
    let mut sweeps = 0;
    while off_norm(&a) > target {
        if sweeps == MAX_SWEEPS {
            return Err(Error::NotConverged {
                iterations: sweeps,
                residual: off_norm(&a),
            });
        }
        sweeps += 1;
        for p in 0..n {
            for q in p + 1..n {
                let b = a[(p, q)];
                let mag = b.norm();
                if mag == 0.0 {
                    continue;
                }
                let phase = b / mag;
                // Scaling column q by conj(phase) and row q by phase makes a_pq = |a_pq|.
                for i in 0..n {
                    a[(i, q)] *= phase.conj();
                    v[(i, q)] *= phase.conj();
                }
                for j in 0..n {
                    a[(q, j)] *= phase;
                }
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let tau = (aqq - app) / (2.0 * mag);
                let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let t = if tau == 0.0 { 1.0 } else { t };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                for i in 0..n {
                    let (x, y) = (a[(i, p)], a[(i, q)]);
                    a[(i, p)] = x * c - y * s;
                    a[(i, q)] = x * s + y * c;
                    let (x, y) = (v[(i, p)], v[(i, q)]);
                    v[(i, p)] = x * c - y * s;
                    v[(i, q)] = x * s + y * c;
                }
                for j in 0..n {
                    let (x, y) = (a[(p, j)], a[(q, j)]);
                    a[(p, j)] = x * c - y * s;
                    a[(q, j)] = x * s + y * c;
                }
                a[(p, q)] = C64::from(0.0);
                a[(q, p)] = C64::from(0.0);
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re));
    let values = DVector::from_iterator(n, order.iter().map(|&i| a[(i, i)].re));
    let vectors = DMatrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    Ok(Eigen { values, vectors, sweeps })
}

/// `Σ ln(λ) P` over eigenvalues above `1e−14`; eigenvalues below `−1e−10`
/// are rejected.
pub fn log_psd_dense(h: &DenseHermitian) -> Result<DMatrix<C64>> {
    let e = eig_hermitian(h)?;
    if let Some(&low) = e.values.iter().find(|&&x| x < -1e-10) {
        return Err(Error::NegativeEigenvalue { value: low });
    }
    Ok(e.apply(|x| if x > 1e-14 { x.ln() } else { 0.0 }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_hermitian(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<C64> {
        let m = DMatrix::from_fn(n, n, |_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        (&m + m.adjoint()) * C64::from(0.5)
    }

    #[test]
    fn diagonal_input() {
        let d = DMatrix::from_diagonal(&DVector::from_vec(vec![4.0, 2.0, 3.0, 1.0]).map(C64::from));
        let e = eig_hermitian(&DenseHermitian::new(d).unwrap()).unwrap();
        assert_eq!(e.values.as_slice(), &[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(e.sweeps, 0);
    }

    #[test]
    fn sigma_x_tensor_identity() {
        let sx = crate::linalg::pauli(1);
        let m = crate::linalg::kron(&sx, &crate::linalg::pauli(0));
        let e = eig_hermitian(&DenseHermitian::new4(m).unwrap()).unwrap();
        let want = [-1.0, -1.0, 1.0, 1.0];
        for (x, y) in e.values.iter().zip(want) {
            assert!((x - y).abs() < 1e-15);
        }
    }

    #[test]
    fn random_matrices_reconstruct() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in [2, 4] {
            for _ in 0..200 {
                let h = random_hermitian(&mut rng, n);
                let e = eig_hermitian(&DenseHermitian::new(h.clone()).unwrap()).unwrap();
                let err = (e.reconstruct() - &h).iter().map(|z| z.norm()).fold(0.0, f64::max);
                assert!(err < 1e-12);
                let tr: f64 = e.values.iter().sum();
                assert!((tr - h.trace().re).abs() < 1e-12);
                let det = h.determinant();
                let prod: f64 = e.values.iter().product();
                assert!((det.re - prod).abs() < 1e-12 && det.im.abs() < 1e-12);
                let vv = e.vectors.adjoint() * &e.vectors;
                assert!((vv - DMatrix::identity(n, n)).iter().all(|z| z.norm() < 1e-13));
            }
        }
    }

    #[test]
    fn rejects_non_hermitian() {
        let m = DMatrix::from_fn(2, 2, |i, j| C64::from((i + 2 * j) as f64));
        assert!(matches!(DenseHermitian::new(m), Err(Error::NotHermitian { .. })));
    }
}
