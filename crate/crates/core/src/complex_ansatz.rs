//! The ansatz with complex `ζ^α = U^α v^α`, `U^α = diag(e^{iφ^α_j})`, and the
//! search for α-insensitive orbits among such phase families.

use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::{Matrix3, Matrix4, Vector3, Vector4};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bell_algebra::BellOperator;
use crate::linalg::{max_abs_diff, Mat4, C64, I};
use crate::werner::{
    e_mixed, i_v, log_k_matrix, log_r_matrix, member_matrix, AnsatzParams, Mode, WernerSpec,
};
use crate::{tol, Error, Result};

/// Phases `φ^α_j`, one row per family member.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseFamily {
    pub phi: Vec<[f64; 3]>,
}

/// Worst violations of `ζ†ζ = d_v`, `Σ_α ζ^α = 0` and `Σ_α ζ^α ζ^α† = N_α I_v`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZetaConstraints {
    pub norm: f64,
    pub sum: f64,
    pub completeness: f64,
}

impl ZetaConstraints {
    pub fn max(&self) -> f64 {
        self.norm.max(self.sum).max(self.completeness)
    }
}

impl PhaseFamily {
    pub fn new(phi: Vec<[f64; 3]>) -> Self {
        PhaseFamily { phi }
    }

    pub fn zeros(n_alpha: usize) -> Self {
        Self::uniform(n_alpha, [0.0; 3])
    }

    /// The same phases for every member.
    pub fn uniform(n_alpha: usize, phi: [f64; 3]) -> Self {
        PhaseFamily { phi: vec![phi; n_alpha] }
    }

    /// `e^{2iφ_j} = (−1)^{b_j}`, i.e. `φ_j = b_j π/2`, for every member.
    pub fn from_signs(n_alpha: usize, signs: &[bool]) -> Self {
        let mut phi = [0.0; 3];
        for (p, &b) in phi.iter_mut().zip(signs) {
            *p = if b { FRAC_PI_2 } else { 0.0 };
        }
        Self::uniform(n_alpha, phi)
    }

    /// Independent uniform phases in `[0, 2π)`.
    pub fn random(n_alpha: usize, rng: &mut impl Rng) -> Self {
        PhaseFamily {
            phi: (0..n_alpha)
                .map(|_| [0; 3].map(|_| rng.random_range(0.0..2.0 * PI)))
                .collect(),
        }
    }

    pub fn n_alpha(&self) -> usize {
        self.phi.len()
    }

    fn check(&self, spec: &WernerSpec, alpha: usize) -> Result<()> {
        if self.phi.len() != spec.n_alpha() {
            return Err(Error::Domain {
                what: "phase rows",
                value: self.phi.len() as f64,
                reason: "need one phase row per family member",
            });
        }
        if alpha >= self.phi.len() {
            return Err(Error::Domain {
                what: "alpha",
                value: alpha as f64,
                reason: "index past the end of the v-family",
            });
        }
        Ok(())
    }

    /// `diag(e^{iφ^α_j})`.
    pub fn u(&self, alpha: usize) -> Matrix3<C64> {
        Matrix3::from_diagonal(&Vector3::from(self.phi[alpha].map(|p| C64::from_polar(1.0, p))))
    }

    /// `Ū^α = diag(1, U^α)` acting on the Bell basis.
    pub fn u_bar(&self, alpha: usize) -> Mat4 {
        let p = self.phi[alpha];
        Matrix4::from_diagonal(&Vector4::new(
            C64::from(1.0),
            C64::from_polar(1.0, p[0]),
            C64::from_polar(1.0, p[1]),
            C64::from_polar(1.0, p[2]),
        ))
    }

    pub fn zeta(&self, spec: &WernerSpec, alpha: usize) -> Result<Vector3<C64>> {
        self.check(spec, alpha)?;
        Ok(self.u(alpha) * spec.vset()[alpha].map(C64::from))
    }

    pub fn constraint_residuals(&self, spec: &WernerSpec) -> Result<ZetaConstraints> {
        let d = spec.d_v() as f64;
        let n = spec.n_alpha() as f64;
        let mut out = ZetaConstraints {
            norm: 0.0,
            sum: 0.0,
            completeness: 0.0,
        };
        let mut sum = Vector3::<C64>::zeros();
        let mut outer = Matrix3::<C64>::zeros();
        for a in 0..spec.n_alpha() {
            let z = self.zeta(spec, a)?;
            out.norm = out.norm.max((z.norm_squared() - d).abs());
            sum += z;
            outer += z * z.adjoint();
        }
        out.sum = sum.iter().map(|c| c.norm()).fold(0.0, f64::max);
        out.completeness = max_abs_diff(&outer, &(i_v(spec.d_v()) * n).map(C64::from));
        Ok(out)
    }
}

/// `γ^α = m0 − m1 Σ_j e^{2iφ^α_j} (v^α_j)²`.
pub fn gamma_alpha(spec: &WernerSpec, phases: &PhaseFamily, alpha: usize) -> Result<C64> {
    phases.check(spec, alpha)?;
    let v = spec.vset()[alpha];
    let s: C64 = (0..3).map(|j| C64::from_polar(v[j] * v[j], 2.0 * phases.phi[alpha][j])).sum();
    Ok(C64::from(spec.m0()) - s * spec.m1())
}

/// `(z0, z^α) = (√m0, −i √m1 ζ^α)`.
pub fn z_coeffs(spec: &WernerSpec, phases: &PhaseFamily, alpha: usize) -> Result<(C64, Vector3<C64>)> {
    let zeta = phases.zeta(spec, alpha)?;
    Ok((C64::from(spec.m0().sqrt()), zeta * (-I * spec.m1().sqrt())))
}

/// `|ψ_α⟩ = (z0, z^α)` in the Bell basis.
pub fn psi_tilde(spec: &WernerSpec, phases: &PhaseFamily, alpha: usize) -> Result<Vector4<C64>> {
    let (z0, z) = z_coeffs(spec, phases, alpha)?;
    Ok(Vector4::new(z0, z[0], z[1], z[2]))
}

/// Marginal Bloch data of `K̃^α`: `K_b ∝ ½ + (n + Δn)·σ`,
/// `K_a ∝ ½ + F(n − Δn)·σ`, and `Ỹ = |n + Δn|`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NVectors {
    pub n: Vector3<f64>,
    pub dn: Vector3<f64>,
    pub y_tilde: f64,
}

/// `n = q Re ζ` and `Δn = (i/2) m1 (ζ × ζ*)(1 − ε)`, both real.
pub fn n_vectors(spec: &WernerSpec, phases: &PhaseFamily, p: &AnsatzParams, alpha: usize) -> Result<NVectors> {
    let zeta = phases.zeta(spec, alpha)?;
    let n = zeta.map(|c| c.re) * p.q;
    let cross = zeta.cross(&zeta.map(|c| c.conj()));
    let dn = cross.map(|c| (I * c * 0.5 * spec.m1() * (1.0 - p.eps)).re);
    Ok(NVectors {
        n,
        dn,
        y_tilde: (n + dn).norm(),
    })
}

/// `(|n|², |Δn|²)` from `γ` alone:
/// `|n|² = q²(1 − γ_r)/(2 m1)` and
/// `|Δn|² = (1−ε)²{(1 − |γ|²)/4 − m0(1 − γ_r)/2}`.
pub fn n_magnitudes(spec: &WernerSpec, gamma: C64, p: &AnsatzParams) -> (f64, f64) {
    let n2 = if spec.m1() == 0.0 { 0.0 } else { p.q * p.q * (1.0 - gamma.re) / (2.0 * spec.m1()) };
    let e = 1.0 - p.eps;
    let dn2 = e * e * ((1.0 - gamma.norm_sqr()) / 4.0 - spec.m0() * (1.0 - gamma.re) / 2.0);
    (n2, dn2)
}

/// The complex-ζ member `K̃^α`.
pub fn member_tilde(spec: &WernerSpec, phases: &PhaseFamily, p: &AnsatzParams, alpha: usize) -> Result<BellOperator> {
    let zeta = phases.zeta(spec, alpha)?;
    Ok(BellOperator::bell(member_matrix(spec, p.q, p.eps, &zeta)))
}

/// `ln K̃^α = Ū^α ln K^α Ū^α†`.
pub fn log_k_tilde(spec: &WernerSpec, phases: &PhaseFamily, p: &AnsatzParams, alpha: usize) -> Result<BellOperator> {
    phases.check(spec, alpha)?;
    let w = phases.u_bar(alpha);
    let ln_k = log_k_matrix(spec, p, &spec.vset()[alpha]);
    Ok(BellOperator::bell(w * ln_k * w.adjoint()))
}

/// Closed-form `ln R̃^α`. Diverges at `Ỹ = ½`.
pub fn log_r_tilde(spec: &WernerSpec, phases: &PhaseFamily, p: &AnsatzParams, alpha: usize) -> Result<BellOperator> {
    let nv = n_vectors(spec, phases, p, alpha)?;
    Ok(BellOperator::bell(log_r_matrix(&nv.n, &nv.dn, spec.n_alpha())?))
}

/// `Δ̃^mixed = ln K̃^α − ln R̃^α`.
pub fn delta_tilde(spec: &WernerSpec, phases: &PhaseFamily, p: &AnsatzParams, alpha: usize) -> Result<BellOperator> {
    let k = log_k_tilde(spec, phases, p, alpha)?;
    let r = log_r_tilde(spec, phases, p, alpha)?;
    Ok(BellOperator::bell(k.entries() - r.entries()))
}

fn atanh_ratio(y: f64) -> f64 {
    if y == 0.0 {
        2.0
    } else {
        (2.0 * y).atanh() / y
    }
}

/// Diagonal `D` with `Δ̃^pure |ψ_α⟩ = D |ψ_α⟩` at the pure constraints
/// `q = √(m0 m1)`, `ε = 0`:
/// `D = −ln((½+Ỹ)(½−Ỹ)) − (L/2Ỹ) diag(1 − γ, 1 + γ e^{−2iφ_j})`
/// with `L = ln((½+Ỹ)/(½−Ỹ))` and `Ỹ = ½√(1 − |γ|²)`.
///
/// Near `Ỹ = ½` the two logarithms are combined through `s = ½ − Ỹ =
/// |γ|²/(4(½+Ỹ))` so that `D → 0` as `γ → 0`.
pub fn pure_action_diagonal(spec: &WernerSpec, phases: &PhaseFamily, alpha: usize) -> Result<Vector4<C64>> {
    let gamma = gamma_alpha(spec, phases, alpha)?;
    let y = 0.5 * (1.0 - gamma.norm_sqr()).max(0.0).sqrt();
    let mut c = [C64::from(0.0); 4];
    c[0] = -gamma;
    for j in 0..3 {
        c[j + 1] = gamma * C64::from_polar(1.0, -2.0 * phases.phi[alpha][j]);
    }
    let entry = |c: C64| -> C64 {
        if y <= 0.25 {
            let a = -((0.5 + y) * (0.5 - y)).ln();
            C64::from(a) - (C64::from(1.0) + c) * atanh_ratio(y)
        } else {
            let s = gamma.norm_sqr() / (4.0 * (0.5 + y));
            let lp = (0.5 + y).ln();
            let two_y = 2.0 * y;
            let head = -(C64::from(1.0) + (C64::from(1.0) + c) / two_y) * lp;
            let tail = if s == 0.0 { C64::from(0.0) } else { (c + 2.0 * s) / two_y * s.ln() };
            head + tail
        }
    };
    Ok(Vector4::from(c.map(entry)))
}

/// `Δ̃^pure |ψ_α⟩` from [`pure_action_diagonal`].
pub fn pure_action(spec: &WernerSpec, phases: &PhaseFamily, alpha: usize) -> Result<Vector4<C64>> {
    let d = pure_action_diagonal(spec, phases, alpha)?;
    Ok(d.component_mul(&psi_tilde(spec, phases, alpha)?))
}

/// `(ln K̃^α − ln R̃^α)|ψ_α⟩` from the operator forms; needs `Ỹ < ½`.
pub fn pure_action_from_operators(spec: &WernerSpec, phases: &PhaseFamily, alpha: usize) -> Result<Vector4<C64>> {
    let p = AnsatzParams::pure_min(spec);
    let d = delta_tilde(spec, phases, &p, alpha)?;
    Ok(d.entries() * psi_tilde(spec, phases, alpha)?)
}

/// The classes an orbit can fall in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OrbitClass {
    /// Insensitive and attains the smallest `|γ|` of the admitted orbits.
    GlobalOrbit,
    /// Insensitive at some other stationary point of the pre-concurrence.
    StationaryOrbit,
    /// `γ ≡ 1`, which forces `q = 0` and `ε = 1`.
    ExcludedGamma1,
    NotInsensitive,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrbitReport {
    pub mode: Mode,
    pub label: String,
    /// `b_1..b_{d_v}` for sign-pattern orbits.
    pub signs: Option<Vec<bool>>,
    pub phases: PhaseFamily,
    pub gamma_per_alpha: Vec<C64>,
    pub ytilde_per_alpha: Vec<f64>,
    pub insensitive: bool,
    pub max_delta_deviation: f64,
    pub classification: OrbitClass,
}

impl OrbitReport {
    /// Spread of `γ` and `Ỹ` over the family.
    pub fn alpha_spread(&self) -> f64 {
        let g0 = self.gamma_per_alpha[0];
        let y0 = self.ytilde_per_alpha[0];
        let g = self.gamma_per_alpha.iter().map(|g| (g - g0).norm()).fold(0.0, f64::max);
        let y = self.ytilde_per_alpha.iter().map(|y| (y - y0).abs()).fold(0.0, f64::max);
        g.max(y)
    }
}

/// Largest `‖Δ̃^pure|ψ_α⟩ − D_0 |ψ_α⟩‖` over α, with `D_0` the member-0 diagonal.
pub fn pure_alpha_deviation(spec: &WernerSpec, phases: &PhaseFamily) -> Result<f64> {
    let d0 = pure_action_diagonal(spec, phases, 0)?;
    let mut dev = 0.0f64;
    for a in 0..spec.n_alpha() {
        let psi = psi_tilde(spec, phases, a)?;
        let own = pure_action(spec, phases, a)?;
        dev = dev.max((own - d0.component_mul(&psi)).norm());
    }
    Ok(dev)
}

fn operator_norm(h: &Mat4) -> f64 {
    let herm = (h + h.adjoint()) * C64::from(0.5);
    herm.symmetric_eigenvalues().iter().map(|x| x.abs()).fold(0.0, f64::max)
}

/// Largest operator-norm distance `‖Δ̃^α − Δ̃^0‖` over α.
pub fn mixed_alpha_deviation(spec: &WernerSpec, phases: &PhaseFamily, p: &AnsatzParams) -> Result<f64> {
    let d0 = delta_tilde(spec, phases, p, 0)?;
    let mut dev = 0.0f64;
    for a in 1..spec.n_alpha() {
        let d = delta_tilde(spec, phases, p, a)?;
        dev = dev.max(operator_norm(&(d.entries() - d0.entries())));
    }
    Ok(dev)
}

/// Phases with `γ = 0` for every member, shared by all members. `None`
/// unless the weights `(m0, m1, …)` close into a polygon, which for
/// `d_v ≥ 2` is `m0 ≤ ½` and for `d_v = 1` only `m0 = ½`.
pub fn zero_gamma_phases(spec: &WernerSpec) -> Option<PhaseFamily> {
    let (m0, m1, d) = (spec.m0(), spec.m1(), spec.d_v());
    if m0 > 0.5 || m1 == 0.0 {
        return None;
    }
    // Solve m0 + m1 Σ e^{iθ_j} = 0 and use e^{2iφ_j} = −e^{iθ_j}.
    let theta: Vec<f64> = match d {
        1 if (m0 - m1).abs() <= tol::ALGEBRA => vec![PI],
        1 => return None,
        2 => {
            let t = (-m0 / (2.0 * m1)).clamp(-1.0, 1.0).acos();
            vec![t, -t]
        }
        _ => {
            let t = ((m1 - m0) / (2.0 * m1)).clamp(-1.0, 1.0).acos();
            vec![PI, t, -t]
        }
    };
    let mut phi = [0.0; 3];
    for (p, t) in phi.iter_mut().zip(theta) {
        *p = (t + PI) / 2.0;
    }
    Some(PhaseFamily::uniform(spec.n_alpha(), phi))
}

fn per_alpha(spec: &WernerSpec, phases: &PhaseFamily, p: &AnsatzParams) -> Result<(Vec<C64>, Vec<f64>)> {
    let mut g = Vec::new();
    let mut y = Vec::new();
    for a in 0..spec.n_alpha() {
        g.push(gamma_alpha(spec, phases, a)?);
        y.push(n_vectors(spec, phases, p, a)?.y_tilde);
    }
    Ok((g, y))
}

fn pattern_label(signs: &[bool]) -> String {
    let bits: String = signs.iter().map(|&b| if b { '1' } else { '0' }).collect();
    format!("b={bits}")
}

/// Pure-min orbits: every sign pattern `e^{2iφ_j} = (−1)^{b_j}` plus the
/// `γ = 0` orbit when it exists.
pub fn classify_pure_orbits(spec: &WernerSpec) -> Result<Vec<OrbitReport>> {
    let d = spec.d_v();
    let p = AnsatzParams::pure_min(spec);
    let mut out = Vec::new();
    for bits in 0..1u32 << d {
        let signs: Vec<bool> = (0..d).map(|j| bits >> j & 1 == 1).collect();
        let phases = PhaseFamily::from_signs(spec.n_alpha(), &signs);
        let (g, y) = per_alpha(spec, &phases, &p)?;
        let dev = pure_alpha_deviation(spec, &phases)?;
        let all_flip = signs.iter().all(|&b| b);
        out.push(OrbitReport {
            mode: Mode::Pure,
            label: pattern_label(&signs),
            signs: Some(signs),
            phases,
            gamma_per_alpha: g,
            ytilde_per_alpha: y,
            insensitive: dev <= tol::INSENSITIVE,
            max_delta_deviation: dev,
            classification: if all_flip { OrbitClass::ExcludedGamma1 } else { OrbitClass::StationaryOrbit },
        });
    }
    let has_zero = out.iter().any(|r| r.gamma_per_alpha[0].norm() <= 1e-12);
    if !has_zero {
        if let Some(phases) = zero_gamma_phases(spec) {
            let (g, y) = per_alpha(spec, &phases, &p)?;
            let dev = pure_alpha_deviation(spec, &phases)?;
            out.push(OrbitReport {
                mode: Mode::Pure,
                label: "gamma=0".into(),
                signs: None,
                phases,
                gamma_per_alpha: g,
                ytilde_per_alpha: y,
                insensitive: dev <= tol::INSENSITIVE,
                max_delta_deviation: dev,
                classification: OrbitClass::StationaryOrbit,
            });
        }
    }
    finish_classes(&mut out);
    Ok(out)
}

fn finish_classes(out: &mut [OrbitReport]) {
    for r in out.iter_mut() {
        if r.classification != OrbitClass::ExcludedGamma1 && (!r.insensitive || r.alpha_spread() > tol::INSENSITIVE) {
            r.classification = OrbitClass::NotInsensitive;
        }
    }
    let best = out
        .iter()
        .filter(|r| r.classification == OrbitClass::StationaryOrbit)
        .map(|r| r.gamma_per_alpha[0].norm())
        .fold(f64::INFINITY, f64::min);
    for r in out.iter_mut() {
        if r.classification == OrbitClass::StationaryOrbit && r.gamma_per_alpha[0].norm() <= best + 1e-12 {
            r.classification = OrbitClass::GlobalOrbit;
        }
    }
}

/// Outcome of sampling phase families at the mixed-min parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MixedScan {
    pub params: AnsatzParams,
    pub real_orbit: OrbitReport,
    pub samples: Vec<OrbitReport>,
    /// Random samples that came out insensitive.
    pub counterexamples: usize,
    pub statement: String,
}

fn mixed_report(spec: &WernerSpec, phases: PhaseFamily, p: &AnsatzParams, label: String) -> Result<OrbitReport> {
    let (g, y) = per_alpha(spec, &phases, p)?;
    let dev = mixed_alpha_deviation(spec, &phases, p)?;
    let insensitive = dev <= tol::INSENSITIVE;
    Ok(OrbitReport {
        mode: Mode::Mixed,
        label,
        signs: None,
        phases,
        gamma_per_alpha: g,
        ytilde_per_alpha: y,
        insensitive,
        max_delta_deviation: dev,
        classification: if insensitive { OrbitClass::StationaryOrbit } else { OrbitClass::NotInsensitive },
    })
}

/// The real orbit plus `samples` random phase families, all at `p`.
pub fn mixed_phase_scan(spec: &WernerSpec, p: &AnsatzParams, samples: usize, seed: u64) -> Result<MixedScan> {
    let mut real = mixed_report(spec, PhaseFamily::zeros(spec.n_alpha()), p, "real".into())?;
    if real.insensitive {
        real.classification = OrbitClass::GlobalOrbit;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut reports = Vec::with_capacity(samples);
    for i in 0..samples {
        let phases = PhaseFamily::random(spec.n_alpha(), &mut rng);
        reports.push(mixed_report(spec, phases, p, format!("sample-{i}"))?);
    }
    let counterexamples = reports.iter().filter(|r| r.insensitive).count();
    let statement = if counterexamples == 0 {
        format!("no counterexample found in {samples} samples")
    } else {
        format!("{counterexamples} of {samples} samples are insensitive")
    };
    Ok(MixedScan {
        params: *p,
        real_orbit: real,
        samples: reports,
        counterexamples,
        statement,
    })
}

/// Orbit classification in the given mode. The mixed mode evaluates
/// every phase family at the real-orbit mixed-min parameters and samples
/// 64 random families.
pub fn classify_orbits(spec: &WernerSpec, mode: Mode) -> Result<Vec<OrbitReport>> {
    match mode {
        Mode::Pure => classify_pure_orbits(spec),
        Mode::Mixed => {
            let p = e_mixed(spec)?.params;
            let scan = mixed_phase_scan(spec, &p, 64, 0x0b17)?;
            let mut out = vec![scan.real_orbit];
            let gamma1 = PhaseFamily::uniform(spec.n_alpha(), [FRAC_PI_2; 3]);
            let mut excluded = mixed_report(spec, gamma1, &p, "gamma=1".into())?;
            excluded.classification = OrbitClass::ExcludedGamma1;
            out.push(excluded);
            out.extend(scan.samples);
            Ok(out)
        }
    }
}

/// Result of the Lemma check at `γ ≡ 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LemmaReport {
    /// Largest `|n|` or `|Δn|` seen at `γ ≡ 1` over the parameter grid.
    pub max_n: f64,
    /// Grid points `(q, ε)` where all `K̃^α` coincide.
    pub alpha_independent_points: Vec<(f64, f64)>,
    /// Smallest member spread away from `(0, 1)`.
    pub min_spread_elsewhere: f64,
    pub holds: bool,
}

/// Checks that `γ ≡ 1` kills `n` and `Δn`, and that the only grid point at
/// which the members are α-independent is `q = 0`, `ε = 1` (`q = 0` with any
/// `ε` when `d_v = 1`).
pub fn lemma_check(spec: &WernerSpec, resolution: usize) -> Result<LemmaReport> {
    let phases = PhaseFamily::uniform(spec.n_alpha(), [FRAC_PI_2; 3]);
    let res = resolution.max(2);
    let mut max_n = 0.0f64;
    let mut points = Vec::new();
    let mut min_spread = f64::INFINITY;
    for i in 0..=res {
        let eps = i as f64 / res as f64;
        for j in 0..=res {
            let q = spec.q_max(eps) * j as f64 / res as f64;
            let p = AnsatzParams::unchecked(spec, q, eps);
            let k0 = member_tilde(spec, &phases, &p, 0)?;
            let mut spread = 0.0f64;
            for a in 0..spec.n_alpha() {
                let nv = n_vectors(spec, &phases, &p, a)?;
                max_n = max_n.max(nv.n.norm()).max(nv.dn.norm());
                let k = member_tilde(spec, &phases, &p, a)?;
                spread = spread.max(max_abs_diff(k.entries(), k0.entries()));
            }
            if spread <= tol::ALGEBRA {
                points.push((q, eps));
            } else {
                min_spread = min_spread.min(spread);
            }
        }
    }
    // With d_v = 1 the member does not depend on ε, so only q is pinned.
    let pinned = |&(q, e): &(f64, f64)| q == 0.0 && (e == 1.0 || spec.d_v() == 1);
    let holds = max_n <= tol::ALGEBRA && !points.is_empty() && points.iter().all(pinned);
    Ok(LemmaReport {
        max_n,
        alpha_independent_points: points,
        min_spread_elsewhere: min_spread,
        holds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{dense_logs, dense_member, partial_trace_dense};
    use crate::bell_algebra::Subsystem;
    use crate::werner::{delta_operator, log_k, marginals_and_r};
    use nalgebra::DMatrix;

    fn sample(d_v: usize, m0: f64, seed: u64) -> (WernerSpec, PhaseFamily) {
        let s = WernerSpec::new(m0, d_v).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ph = PhaseFamily::random(s.n_alpha(), &mut rng);
        (s, ph)
    }

    fn dense4(m: &Mat4) -> DMatrix<C64> {
        DMatrix::from_fn(4, 4, |i, j| m[(i, j)])
    }

    fn dmax(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
        (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    #[test]
    fn gamma_examples() {
        let s = WernerSpec::new(0.3, 3).unwrap();
        let g = gamma_alpha(&s, &PhaseFamily::zeros(4), 0).unwrap();
        assert!((g - C64::from(2.0 * 0.3 - 1.0)).norm() < 1e-15);
        let g = gamma_alpha(&s, &PhaseFamily::uniform(4, [FRAC_PI_2; 3]), 2).unwrap();
        assert!((g - C64::from(1.0)).norm() < 1e-15);
        let s = WernerSpec::new(0.5, 3).unwrap();
        let g = gamma_alpha(&s, &PhaseFamily::uniform(4, [0.0, FRAC_PI_2, FRAC_PI_2]), 1).unwrap();
        let sixth = 0.5 / 3.0;
        assert!((g - C64::from(0.5 - sixth + 2.0 * sixth)).norm() < 1e-15);
    }

    #[test]
    fn gamma_matches_z_form() {
        for seed in 0..20 {
            let (s, ph) = sample(3, 0.1 + 0.04 * seed as f64, seed);
            for a in 0..4 {
                let (z0, z) = z_coeffs(&s, &ph, a).unwrap();
                let direct = z0 * z0 + z.dot(&z);
                assert!((gamma_alpha(&s, &ph, a).unwrap() - direct).norm() <= 1e-13);
            }
        }
    }

    #[test]
    fn n_vectors_match_z_forms_and_magnitudes() {
        for seed in 0..20 {
            let (s, ph) = sample(3, 0.2 + 0.03 * seed as f64, seed);
            let p = AnsatzParams::new(&s, 0.6 * s.q_max(0.3), 0.3).unwrap();
            for a in 0..4 {
                let nv = n_vectors(&s, &ph, &p, a).unwrap();
                let (z0, z) = z_coeffs(&s, &ph, a).unwrap();
                let zc = z.map(|c| c.conj());
                let n = (z - zc) * (I * 0.5 * z0 * p.q / (s.m0() * s.m1()).sqrt());
                let dn = z.cross(&zc) * (I * 0.5 * (1.0 - p.eps));
                for j in 0..3 {
                    assert!((n[j] - C64::from(nv.n[j])).norm() < 1e-13);
                    assert!((dn[j] - C64::from(nv.dn[j])).norm() < 1e-13);
                }
                assert!(nv.n.dot(&nv.dn).abs() <= 1e-13);
                let (n2, dn2) = n_magnitudes(&s, gamma_alpha(&s, &ph, a).unwrap(), &p);
                assert!((n2 - nv.n.norm_squared()).abs() <= 1e-12);
                assert!((dn2 - nv.dn.norm_squared()).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn marginals_match_partial_traces() {
        let (s, ph) = sample(3, 0.35, 5);
        let p = AnsatzParams::new(&s, 0.5 * s.q_max(0.4), 0.4).unwrap();
        let f = Vector3::new(1.0, -1.0, 1.0);
        for a in 0..4 {
            let k = member_tilde(&s, &ph, &p, a).unwrap();
            let std = crate::oracle::bell_to_standard(&dense4(k.entries()));
            let kb = partial_trace_dense(&std, Subsystem::A);
            let ka = partial_trace_dense(&std, Subsystem::B);
            let nv = n_vectors(&s, &ph, &p, a).unwrap();
            let nn = s.n_alpha() as f64;
            let want_b = crate::linalg::pauli_combination(0.5, &(nv.n + nv.dn)) / C64::from(nn);
            let want_a = crate::linalg::pauli_combination(0.5, &(nv.n - nv.dn).component_mul(&f)) / C64::from(nn);
            assert!(dmax(&kb, &DMatrix::from_fn(2, 2, |i, j| want_b[(i, j)])) < 1e-14);
            assert!(dmax(&ka, &DMatrix::from_fn(2, 2, |i, j| want_a[(i, j)])) < 1e-14);
        }
    }

    #[test]
    fn logs_match_dense() {
        let (s, ph) = sample(3, 0.45, 9);
        let p = AnsatzParams::new(&s, 0.7 * s.q_max(0.25), 0.25).unwrap();
        for a in 0..4 {
            let zeta = ph.zeta(&s, a).unwrap();
            let (ln_k, ln_r) = dense_logs(&dense_member(&s, p.q, p.eps, &zeta)).unwrap();
            let k = log_k_tilde(&s, &ph, &p, a).unwrap();
            let r = log_r_tilde(&s, &ph, &p, a).unwrap();
            assert!(dmax(&ln_k, &dense4(k.entries())) < 1e-12);
            assert!(dmax(&ln_r, &dense4(r.entries())) < 1e-12);
        }
    }

    #[test]
    fn zero_phases_reduce_to_real_ansatz() {
        for (m0, d_v) in [(0.3, 3), (0.7, 2), (0.6, 1)] {
            let s = WernerSpec::new(m0, d_v).unwrap();
            let ph = PhaseFamily::zeros(s.n_alpha());
            let p = AnsatzParams::new(&s, 0.5 * s.q_max(0.2), 0.2).unwrap();
            for a in 0..s.n_alpha() {
                let k = log_k_tilde(&s, &ph, &p, a).unwrap();
                assert!(max_abs_diff(k.entries(), log_k(&s, &p, a).unwrap().entries()) <= 1e-13);
                let r = log_r_tilde(&s, &ph, &p, a).unwrap();
                let real = marginals_and_r(&s, &p, a).unwrap();
                assert!(max_abs_diff(r.entries(), real.ln_r.entries()) <= 1e-13);
            }
            let pure = delta_operator(&s, &AnsatzParams::pure_min(&s), Mode::Pure).unwrap();
            for a in 0..s.n_alpha() {
                let psi = psi_tilde(&s, &ph, a).unwrap();
                let want = pure.delta.entries() * psi;
                assert!(max_abs_diff(&pure_action(&s, &ph, a).unwrap(), &want) <= 1e-13);
            }
        }
    }

    #[test]
    fn pure_action_matches_operator_form() {
        for seed in 0..10 {
            let (s, ph) = sample(3, 0.15 + 0.07 * seed as f64, 100 + seed);
            for a in 0..4 {
                let closed = pure_action(&s, &ph, a).unwrap();
                let op = pure_action_from_operators(&s, &ph, a).unwrap();
                assert!(max_abs_diff(&closed, &op) <= 1e-10, "{}", max_abs_diff(&closed, &op));
            }
        }
    }

    #[test]
    fn zero_gamma_orbit() {
        for (m0, d_v) in [(0.4, 3), (0.2, 3), (0.45, 2), (0.5, 1), (0.5, 3)] {
            let s = WernerSpec::new(m0, d_v).unwrap();
            let ph = zero_gamma_phases(&s).unwrap();
            let p = AnsatzParams::pure_min(&s);
            for a in 0..s.n_alpha() {
                assert!(gamma_alpha(&s, &ph, a).unwrap().norm() < 1e-15);
                let nv = n_vectors(&s, &ph, &p, a).unwrap();
                assert!((nv.y_tilde - 0.5).abs() <= 1e-12);
                assert!(pure_action(&s, &ph, a).unwrap().norm() <= 1e-10);
            }
        }
        assert!(zero_gamma_phases(&WernerSpec::new(0.6, 3).unwrap()).is_none());
        assert!(zero_gamma_phases(&WernerSpec::new(0.4, 1).unwrap()).is_none());
    }

    #[test]
    fn constraints_hold_for_shared_phases() {
        let s = WernerSpec::new(0.4, 3).unwrap();
        let ph = PhaseFamily::uniform(4, [0.3, 1.1, -2.0]);
        assert!(ph.constraint_residuals(&s).unwrap().max() < 1e-14);
        let (s, ph) = sample(3, 0.4, 3);
        assert!(ph.constraint_residuals(&s).unwrap().max() > 1e-3);
    }

    #[test]
    fn pure_orbits_follow_stationary_values() {
        use crate::preconcurrence::{stationary_values, WeightVector};
        for m0 in [0.4, 0.8] {
            let s = WernerSpec::new(m0, 3).unwrap();
            let orbits = classify_pure_orbits(&s).unwrap();
            let m1 = s.m1();
            let st = stationary_values(&WeightVector::new(vec![m0, m1, m1, 1.0 - m0 - 2.0 * m1]).unwrap()).unwrap();
            for r in orbits.iter().filter(|r| r.signs.is_some()) {
                let g = r.gamma_per_alpha[0].norm();
                assert!(st.values.iter().any(|v| (v - g).abs() <= 1e-12));
                assert!(r.insensitive);
            }
            let zero = orbits.iter().any(|r| r.label == "gamma=0");
            assert_eq!(zero, m0 <= 0.5);
            let excluded: Vec<_> = orbits.iter().filter(|r| r.classification == OrbitClass::ExcludedGamma1).collect();
            assert_eq!(excluded.len(), 1);
            assert!((excluded[0].gamma_per_alpha[0] - C64::from(1.0)).norm() < 1e-15);
            let global: Vec<_> = orbits.iter().filter(|r| r.classification == OrbitClass::GlobalOrbit).collect();
            assert_eq!(global.len(), 1);
            let want = if m0 <= 0.5 { 0.0 } else { 2.0 * m0 - 1.0 };
            assert!((global[0].gamma_per_alpha[0].norm() - want).abs() < 1e-12);
        }
    }

    #[test]
    fn lemma() {
        let s = WernerSpec::new(0.6, 3).unwrap();
        let r = lemma_check(&s, 20).unwrap();
        assert!(r.holds, "{r:?}");
        assert_eq!(r.alpha_independent_points, vec![(0.0, 1.0)]);
        assert!(r.min_spread_elsewhere > 1e-6);
    }

    #[test]
    fn mixed_scan_at_stationary_point() {
        let s = WernerSpec::new(0.6, 3).unwrap();
        let p = e_mixed(&s).unwrap().params;
        let scan = mixed_phase_scan(&s, &p, 16, 1).unwrap();
        assert!(scan.real_orbit.insensitive, "{}", scan.real_orbit.max_delta_deviation);
        assert_eq!(scan.counterexamples, 0);
    }
}
