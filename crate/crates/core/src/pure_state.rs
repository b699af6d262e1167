//! Entanglement of pure two-qubit states written in the Bell basis,
//! `|ψ⟩ = (z0 + i z·σ_b)|B(0)⟩`.

use nalgebra::{Vector3, Vector4};
use serde::{Deserialize, Serialize};

use crate::bell_algebra::{bell_state, PauliIndex};
use crate::hermitian2::PauliDecomp2;
use crate::linalg::C64;
use crate::{tol, Error, Result};

/// Entropy measured in bits.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EntropyValue(pub f64);

impl EntropyValue {
    pub fn bits(self) -> f64 {
        self.0
    }

    /// Same quantity in nats.
    pub fn nats(self) -> f64 {
        self.0 * std::f64::consts::LN_2
    }
}

/// Normalized Bell-basis coefficients. `scale` is the norm of the raw input.
#[derive(Clone, Debug, PartialEq)]
pub struct BellCoeffs {
    z0: C64,
    z: Vector3<C64>,
    scale: f64,
}

impl BellCoeffs {
    pub fn new(z0: C64, z: Vector3<C64>) -> Result<Self> {
        let norm = (z0.norm_sqr() + z.iter().map(|c| c.norm_sqr()).sum::<f64>()).sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::Domain {
                what: "coefficient norm",
                value: norm,
                reason: "must be positive and finite",
            });
        }
        let s = C64::from(1.0 / norm);
        Ok(BellCoeffs { z0: z0 * s, z: z * s, scale: norm })
    }

    pub fn z0(&self) -> C64 {
        self.z0
    }

    pub fn z(&self) -> &Vector3<C64> {
        &self.z
    }

    /// Norm of the coefficients as supplied, before normalization.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// The state in the standard basis, `z0 B(0) + Σ z_k B(k)`.
    pub fn state_vector(&self) -> Vector4<C64> {
        let mut psi = bell_state(PauliIndex::ALL[0]) * self.z0;
        for k in 0..3 {
            psi += bell_state(PauliIndex::ALL[k + 1]) * self.z[k];
        }
        psi
    }

    /// The same coefficients as a Bell-basis column `(z0, z1, z2, z3)`.
    pub fn bell_column(&self) -> Vector4<C64> {
        Vector4::new(self.z0, self.z[0], self.z[1], self.z[2])
    }

    /// `z0 z* − z0* z` would be anti-Hermitian; this is the real vector
    /// `z0* z − z0 z* + z × z*` divided by `i`.
    fn spin_vector(&self) -> Vector3<f64> {
        let z0 = self.z0;
        let zc = self.z.map(|c| c.conj());
        let v = self.z * z0.conj() - zc * z0 + self.z.cross(&zc);
        v.map(|c| c.im)
    }
}

/// `h(x) = −x log₂x − (1−x) log₂(1−x)`.
pub fn binary_entropy(x: f64) -> Result<EntropyValue> {
    Ok(EntropyValue(h_e(x)? / std::f64::consts::LN_2))
}

/// `h_e(x) = (ln 2) h(x)`, the natural-log binary entropy.
pub fn h_e(x: f64) -> Result<f64> {
    if !(-tol::NORMALIZATION..=1.0 + tol::NORMALIZATION).contains(&x) || x.is_nan() {
        return Err(Error::Domain {
            what: "probability",
            value: x,
            reason: "binary entropy needs x in [0, 1]",
        });
    }
    Ok(h_e_clamped(x))
}

/// [`h_e`] with the argument clamped into `[0, 1]`, for internal callers whose
/// argument is a probability by construction.
pub(crate) fn h_e_clamped(x: f64) -> f64 {
    let x = x.clamp(0.0, 1.0);
    if x == 0.0 || x == 1.0 {
        return 0.0;
    }
    -(x * x.ln() + (1.0 - x) * (-x).ln_1p())
}

/// Reduced density of either qubit, `½ + n·σ` with
/// `n = (i/2)(z0* z − z0 z* + z × z*)`.
pub fn reduced_density(c: &BellCoeffs) -> PauliDecomp2 {
    PauliDecomp2::new(0.5, -c.spin_vector() * 0.5)
}

/// `C = |z0² + z·z|`, clamped into `[0, 1]`.
pub fn concurrence_pure(c: &BellCoeffs) -> f64 {
    (c.z0 * c.z0 + c.z.dot(&c.z)).norm().clamp(0.0, 1.0)
}

/// `h((1 + √(1−C²))/2)`.
pub fn entanglement_from_concurrence(c: f64) -> EntropyValue {
    let c = c.clamp(0.0, 1.0);
    let s = ((1.0 - c) * (1.0 + c)).sqrt();
    EntropyValue(h_e_clamped(0.5 * (1.0 + s)) / std::f64::consts::LN_2)
}

/// `|z0* z − z0 z* + z × z*|² − (1 − |z0² + z·z|²)`, zero for every
/// normalized state.
pub fn vector_identity_residual(c: &BellCoeffs) -> f64 {
    let lhs = c.spin_vector().norm_squared();
    let g = c.z0 * c.z0 + c.z.dot(&c.z);
    lhs - (1.0 - g.norm_sqr())
}

/// Entanglement through the concurrence.
pub fn entanglement_pure(c: &BellCoeffs) -> EntropyValue {
    entanglement_from_concurrence(concurrence_pure(c))
}

/// Entanglement through the reduced density spectrum, `h(n0 + |n|)`.
pub fn entanglement_via_reduced(c: &BellCoeffs) -> EntropyValue {
    let d = reduced_density(c);
    EntropyValue(h_e_clamped(d.n0 + d.norm()) / std::f64::consts::LN_2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{ONE, ZERO};

    fn coeffs(z0: C64, z: [C64; 3]) -> BellCoeffs {
        BellCoeffs::new(z0, Vector3::from(z)).unwrap()
    }

    #[test]
    fn entropy_examples() {
        assert_eq!(binary_entropy(0.5).unwrap().bits(), 1.0);
        assert_eq!(binary_entropy(0.0).unwrap().bits(), 0.0);
        assert_eq!(binary_entropy(1.0).unwrap().bits(), 0.0);
        let x = (1.0 + 0.75f64.sqrt()) / 2.0;
        let h = binary_entropy(x).unwrap().bits();
        assert!((h - 0.354_578_902_665_27).abs() < 1e-12, "{h}");
        assert!(binary_entropy(1.1).is_err());
        assert!(binary_entropy(-1e-6).is_err());
        assert_eq!(binary_entropy(1.0 + 1e-13).unwrap().bits(), 0.0);
    }

    #[test]
    fn entropy_symmetry() {
        for i in 0..=100 {
            let x = i as f64 / 100.0;
            let a = h_e(x).unwrap();
            let b = h_e(1.0 - x).unwrap();
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn construction_normalizes_and_rejects_zero() {
        let c = coeffs(C64::new(2.0, 0.0), [ZERO; 3]);
        assert_eq!(c.z0(), ONE);
        assert_eq!(c.scale(), 2.0);
        assert!(BellCoeffs::new(ZERO, Vector3::from([ZERO; 3])).is_err());
    }

    #[test]
    fn bell_state_is_maximally_entangled() {
        let c = coeffs(ONE, [ZERO; 3]);
        assert_eq!(reduced_density(&c).n, Vector3::zeros());
        assert_eq!(concurrence_pure(&c), 1.0);
        assert_eq!(entanglement_pure(&c).bits(), 1.0);
    }

    #[test]
    fn product_state_examples() {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let c = coeffs(C64::from(r), [C64::new(0.0, r), ZERO, ZERO]);
        assert!((reduced_density(&c).norm() - 0.5).abs() < 1e-15);
        assert!(concurrence_pure(&c) < 1e-15);
        assert!(entanglement_pure(&c).bits() < 1e-14);
        // (½, −½, −½, ½) factorizes: ψ00 ψ11 − ψ01 ψ10 = 0.
        let psi = c.state_vector();
        assert!((psi[0] * psi[3] - psi[1] * psi[2]).norm() < 1e-15);
        assert!((psi[1] + C64::from(0.5)).norm() < 1e-15);
    }

    #[test]
    fn both_routes_agree_at_half_concurrence() {
        let c = coeffs(C64::from(0.75f64.sqrt()), [C64::new(0.0, 0.5), ZERO, ZERO]);
        assert!((concurrence_pure(&c) - 0.5).abs() < 1e-15);
        let a = entanglement_pure(&c).bits();
        let b = entanglement_via_reduced(&c).bits();
        assert!((a - b).abs() < 1e-12);
        assert!((a - 0.354_578_902_665_27).abs() < 1e-12);
    }

    #[test]
    fn entanglement_monotone_in_concurrence() {
        let mut last = -1.0;
        for i in 0..=200 {
            let e = entanglement_from_concurrence(i as f64 / 200.0).bits();
            assert!(e >= last);
            last = e;
        }
    }
}
