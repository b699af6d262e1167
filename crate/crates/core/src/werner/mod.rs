//! Werner-state decompositions built from the two-parameter ansatz `K^α`,
//! their Lagrangian, and the resulting pure- and mixed-minimization
//! entanglement.

mod ansatz;
mod entanglement;
mod lagrangian;
mod orbit;

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::bell_algebra::BellOperator;
use crate::linalg::{Mat4, C64};
use crate::{tol, Error, Result};

pub use ansatz::{
    ansatz_k, log_k, marginals_and_r, member_matrix, projector_family, DecompositionMember,
    Marginals, ProjectorFamily,
};
pub(crate) use ansatz::{log_k_matrix, log_r_matrix};
pub use entanglement::{
    delta_operator, e_mixed, e_pure, mixed_d1_candidates, Candidate, DeltaOutcome, EntanglementReport,
    Mode, Residuals,
};
pub use lagrangian::{lagrangian, lagrangian_d1, lagrangian_parts, stationarity_gradient, LagrangianParts};
pub use orbit::{orbit_insensitivity_check, InsensitivityReport};

/// Supported `(d_v, N_α)` pairs for [`make_vset`].
pub const FAMILIES: [(usize, usize); 4] = [(1, 2), (2, 4), (3, 4), (3, 8)];

/// The built-in v-family for `(d_v, N_α)`.
pub fn make_vset(d_v: usize, n_alpha: usize) -> Result<Vec<Vector3<f64>>> {
    let signs = |bits: usize, n: usize| -> Vec<f64> {
        (0..n).map(|i| if bits >> (n - 1 - i) & 1 == 0 { 1.0 } else { -1.0 }).collect()
    };
    let set = match (d_v, n_alpha) {
        (1, 2) => vec![Vector3::new(1.0, 0.0, 0.0), Vector3::new(-1.0, 0.0, 0.0)],
        (2, 4) => (0..4)
            .map(|b| {
                let s = signs(b, 2);
                Vector3::new(s[0], s[1], 0.0)
            })
            .collect(),
        (3, 4) => vec![
            Vector3::new(1.0, 1.0, 1.0),
            Vector3::new(1.0, -1.0, -1.0),
            Vector3::new(-1.0, 1.0, -1.0),
            Vector3::new(-1.0, -1.0, 1.0),
        ],
        (3, 8) => (0..8)
            .map(|b| {
                let s = signs(b, 3);
                Vector3::new(s[0], s[1], s[2])
            })
            .collect(),
        _ => return Err(Error::UnsupportedFamily { d_v, n_alpha }),
    };
    Ok(set)
}

/// Smallest built-in family for each `d_v`.
pub fn default_n_alpha(d_v: usize) -> Result<usize> {
    match d_v {
        1 => Ok(2),
        2 | 3 => Ok(4),
        _ => Err(Error::Domain {
            what: "d_v",
            value: d_v as f64,
            reason: "must be 1, 2 or 3",
        }),
    }
}

/// `diag(1^{#d_v}, 0^{#3−d_v})`.
pub fn i_v(d_v: usize) -> Matrix3<f64> {
    Matrix3::from_fn(|i, j| if i == j && i < d_v { 1.0 } else { 0.0 })
}

/// Werner state `m0 |B0⟩⟨B0| + m1 Σ_{μ≤d_v} |Bμ⟩⟨Bμ|` together with the
/// v-family used to decompose it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WernerSpec {
    m0: f64,
    d_v: usize,
    m1: f64,
    vset: Vec<Vector3<f64>>,
}

impl WernerSpec {
    /// Uses the default family for `d_v`.
    pub fn new(m0: f64, d_v: usize) -> Result<Self> {
        Self::with_family(m0, d_v, default_n_alpha(d_v)?)
    }

    pub fn with_family(m0: f64, d_v: usize, n_alpha: usize) -> Result<Self> {
        let vset = make_vset(d_v, n_alpha)?;
        Self::with_vset(m0, d_v, vset)
    }

    /// Accepts any family satisfying `vᵀv = d_v`, `Σv = 0`, `Σvvᵀ = N_α I_v`.
    pub fn with_vset(m0: f64, d_v: usize, vset: Vec<Vector3<f64>>) -> Result<Self> {
        if !(0.0..=1.0).contains(&m0) {
            return Err(Error::Domain {
                what: "m0",
                value: m0,
                reason: "must lie in [0, 1]",
            });
        }
        default_n_alpha(d_v)?;
        if vset.is_empty() {
            return Err(Error::VsetConstraint {
                constraint: "non-empty",
                residual: 1.0,
            });
        }
        let n = vset.len() as f64;
        let vtv = vset
            .iter()
            .map(|v| (v.norm_squared() - d_v as f64).abs())
            .fold(0.0, f64::max);
        if vtv > tol::ALGEBRA * 10.0 {
            return Err(Error::VsetConstraint {
                constraint: "v·v = d_v",
                residual: vtv,
            });
        }
        let sum: Vector3<f64> = vset.iter().sum();
        if sum.amax() > tol::ALGEBRA * 10.0 {
            return Err(Error::VsetConstraint {
                constraint: "Σ v = 0",
                residual: sum.amax(),
            });
        }
        let outer: Matrix3<f64> = vset.iter().map(|v| v * v.transpose()).sum();
        let completeness = (outer - i_v(d_v) * n).amax();
        if completeness > tol::ALGEBRA * 10.0 {
            return Err(Error::VsetConstraint {
                constraint: "Σ v vᵀ = N_α I_v",
                residual: completeness,
            });
        }
        Ok(WernerSpec {
            m0,
            d_v,
            m1: (1.0 - m0) / d_v as f64,
            vset,
        })
    }

    /// The same state with every `v` replaced by `Ω v`. Only `d_v = 3` keeps
    /// `I_v` invariant, so other dimensions usually fail validation.
    pub fn rotated(&self, omega: &Matrix3<f64>) -> Result<Self> {
        let vset = self.vset.iter().map(|v| omega * v).collect();
        Self::with_vset(self.m0, self.d_v, vset)
    }

    pub fn m0(&self) -> f64 {
        self.m0
    }

    pub fn m1(&self) -> f64 {
        self.m1
    }

    pub fn d_v(&self) -> usize {
        self.d_v
    }

    pub fn vset(&self) -> &[Vector3<f64>] {
        &self.vset
    }

    pub fn n_alpha(&self) -> usize {
        self.vset.len()
    }

    /// `w_α = 1/N_α`.
    pub fn weight(&self) -> f64 {
        1.0 / self.vset.len() as f64
    }

    /// `√(m0(1−m0))`, the value of `Y` at the pure-min point.
    pub fn y_pure(&self) -> f64 {
        (self.m0 * (1.0 - self.m0)).max(0.0).sqrt()
    }

    /// Largest admissible regulator at a given ε, `√(m0 m1 η / d_v)`.
    pub fn q_max(&self, eps: f64) -> f64 {
        let eta = self.eta(eps);
        (self.m0 * self.m1 * eta / self.d_v as f64).max(0.0).sqrt()
    }

    pub(crate) fn eta(&self, eps: f64) -> f64 {
        let d = self.d_v as f64;
        d - eps * (d - 1.0)
    }

    /// Bell weights `(m0, m1^{#d_v}, 0^{#3−d_v})`.
    pub fn weights(&self) -> [f64; 4] {
        let mut w = [0.0; 4];
        w[0] = self.m0;
        for x in w.iter_mut().skip(1).take(self.d_v) {
            *x = self.m1;
        }
        w
    }

    /// `ρ` in the Bell basis.
    pub fn rho(&self) -> BellOperator {
        let w = self.weights();
        BellOperator::bell(Mat4::from_fn(|i, j| if i == j { C64::from(w[i]) } else { C64::from(0.0) }))
    }
}

/// The ansatz parameters and the auxiliary quantities derived from them.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnsatzParams {
    pub q: f64,
    pub eps: f64,
    pub eta: f64,
    pub u: f64,
    pub k: f64,
    pub y: f64,
    pub x: f64,
    /// Diagonal `(m0, η m1)` of the 2×2 block carrying `λ±`.
    pub block_diag: [f64; 2],
    /// `(u/2)² − X²`, kept separately so that it can be exact near `λ₋ = 0`.
    pub det: f64,
}

impl AnsatzParams {
    /// Validates `q ≥ 0`, `ε ≥ 0` and that every eigenvalue of `K^α` is
    /// non-negative.
    pub fn new(spec: &WernerSpec, q: f64, eps: f64) -> Result<Self> {
        if !(q >= 0.0 && q.is_finite()) {
            return Err(Error::Domain {
                what: "q",
                value: q,
                reason: "regulator must be finite and non-negative",
            });
        }
        if !(eps >= 0.0 && eps.is_finite()) {
            return Err(Error::Domain {
                what: "eps",
                value: eps,
                reason: "must be finite and non-negative",
            });
        }
        let p = Self::unchecked(spec, q, eps);
        if q > spec.q_max(eps) + tol::EIGEN_NEGATIVE {
            return Err(Error::Domain {
                what: "q",
                value: q,
                reason: "exceeds sqrt(m0 m1 eta / d_v)",
            });
        }
        if p.u / 2.0 - p.x < -tol::EIGEN_NEGATIVE {
            return Err(Error::NegativeEigenvalue {
                value: p.u / 2.0 - p.x,
            });
        }
        Ok(p)
    }

    /// Auxiliary parameters without any domain check.
    pub fn unchecked(spec: &WernerSpec, q: f64, eps: f64) -> Self {
        let eta = spec.eta(eps);
        let u = spec.m0 + eta * spec.m1;
        let k = (spec.m0 - eta * spec.m1) / 2.0;
        let y = q.abs() * (spec.d_v as f64).sqrt();
        let x = k.hypot(y);
        AnsatzParams {
            q,
            eps,
            eta,
            u,
            k,
            y,
            x,
            block_diag: [spec.m0, eta * spec.m1],
            det: spec.m0 * spec.m1 * eta - q * q * spec.d_v as f64,
        }
    }

    /// Parameters at `q = √(q_max(ε)² − gap)`, with `ρ = d_v·gap` taken
    /// from `gap` rather than recomputed from `q`.
    pub fn from_gap(spec: &WernerSpec, eps: f64, gap: f64) -> Self {
        let qm = spec.q_max(eps);
        let q = (qm * qm - gap).max(0.0).sqrt();
        let mut p = Self::unchecked(spec, q, eps);
        p.det = spec.d_v as f64 * gap;
        p
    }

    /// `q = √(m0 m1)`, `ε = 0`.
    pub fn pure_min(spec: &WernerSpec) -> Self {
        Self::unchecked(spec, (spec.m0 * spec.m1).sqrt(), 0.0)
    }

    /// `q = 0`, `ε = 1`: every member is `ρ/N_α`.
    pub fn trivial(spec: &WernerSpec) -> Self {
        Self::unchecked(spec, 0.0, 1.0)
    }

    /// `ρ = m0 m1 η − q² d_v = (u/2)² − X²`.
    pub fn rho(&self, _spec: &WernerSpec) -> f64 {
        self.det
    }

    /// `N_α λ₊ = u/2 + X`. At `Y = 0` the block is diagonal and its larger
    /// entry is returned as is.
    pub fn lambda_plus(&self) -> f64 {
        if self.y == 0.0 {
            return self.block_diag[0].max(self.block_diag[1]);
        }
        self.u / 2.0 + self.x
    }

    /// `N_α λ₋ = u/2 − X`, evaluated as `ρ/(u/2 + X)` to avoid cancellation.
    pub fn lambda_minus(&self, spec: &WernerSpec) -> f64 {
        if self.y == 0.0 {
            return self.block_diag[0].min(self.block_diag[1]);
        }
        let lp = self.lambda_plus();
        if lp <= 0.0 {
            return 0.0;
        }
        (self.rho(spec) / lp).max(0.0)
    }

    /// `N_α λ₀ = ε m1`.
    pub fn lambda_zero(&self, spec: &WernerSpec) -> f64 {
        self.eps * spec.m1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn families_satisfy_constraints() {
        for (d_v, n) in FAMILIES {
            let vset = make_vset(d_v, n).unwrap();
            assert_eq!(vset.len(), n);
            WernerSpec::with_vset(0.6, d_v, vset).unwrap();
        }
        assert_eq!(make_vset(2, 8), Err(Error::UnsupportedFamily { d_v: 2, n_alpha: 8 }));
    }

    #[test]
    fn family_examples() {
        assert_eq!(
            make_vset(1, 2).unwrap(),
            vec![Vector3::new(1.0, 0.0, 0.0), Vector3::new(-1.0, 0.0, 0.0)]
        );
        let f8 = make_vset(3, 8).unwrap();
        for a in [1.0, -1.0] {
            for b in [1.0, -1.0] {
                for c in [1.0, -1.0] {
                    assert!(f8.contains(&Vector3::new(a, b, c)));
                }
            }
        }
    }

    #[test]
    fn bad_vsets_rejected() {
        let bad = vec![Vector3::new(1.0, 0.0, 0.0), Vector3::new(1.0, 0.0, 0.0)];
        assert!(matches!(
            WernerSpec::with_vset(0.5, 1, bad),
            Err(Error::VsetConstraint { constraint: "Σ v = 0", .. })
        ));
        assert!(WernerSpec::new(1.5, 3).is_err());
        assert!(WernerSpec::new(0.5, 4).is_err());
    }

    #[test]
    fn auxiliary_parameters_at_pure_min() {
        for d_v in 1..=3 {
            let spec = WernerSpec::new(0.7, d_v).unwrap();
            let p = AnsatzParams::pure_min(&spec);
            assert!((p.u - 1.0).abs() < 1e-15);
            assert!((p.x - 0.5).abs() < 1e-15);
            assert!((p.y - spec.y_pure()).abs() < 1e-15);
            assert!(p.lambda_minus(&spec).abs() < 1e-15);
        }
    }

    #[test]
    fn rho_identity() {
        let spec = WernerSpec::new(0.6, 3).unwrap();
        let p = AnsatzParams::new(&spec, 0.2, 0.1).unwrap();
        let direct = (p.u / 2.0).powi(2) - p.x * p.x;
        assert!((p.rho(&spec) - direct).abs() < 1e-14);
    }

    #[test]
    fn params_domain() {
        let spec = WernerSpec::new(0.6, 3).unwrap();
        assert!(AnsatzParams::new(&spec, -0.1, 0.0).is_err());
        assert!(AnsatzParams::new(&spec, 0.1, -0.1).is_err());
        assert!(AnsatzParams::new(&spec, 0.5, 0.0).is_err());
        assert!(AnsatzParams::new(&spec, spec.q_max(0.3), 0.3).is_ok());
    }
}
