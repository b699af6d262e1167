use nalgebra::{Matrix3, Vector3, Vector4};

use super::{i_v, AnsatzParams, WernerSpec};
use crate::bell_algebra::{BellOperator, QubitOperator};
use crate::linalg::{cross_matrix, kron, pauli_combination, Mat4, C64, I, ZERO};
use crate::{tol, Error, Result};

/// One member `K^α` of the decomposition, with weight `w = tr K = 1/N_α`.
#[derive(Clone, Debug, PartialEq)]
pub struct DecompositionMember {
    pub alpha: usize,
    pub k: BellOperator,
    pub weight: f64,
}

/// `E_α`, `Σ_α`, `P⁰_α` and `P± = (E ± Σ)/2` as Bell-basis matrices.
#[derive(Clone, Debug, PartialEq)]
pub struct ProjectorFamily {
    pub e: Mat4,
    pub sigma: Mat4,
    pub p0: Mat4,
    pub p_plus: Mat4,
    pub p_minus: Mat4,
}

/// Partial traces of `K^α`, `R^α = K_a K_b / w_α` and its closed-form log.
#[derive(Clone, Debug, PartialEq)]
pub struct Marginals {
    pub k_a: QubitOperator,
    pub k_b: QubitOperator,
    pub r: BellOperator,
    pub ln_r: BellOperator,
}

fn embed(top_left: C64, top: &Vector3<C64>, left: &Vector3<C64>, block: &Matrix3<C64>) -> Mat4 {
    let mut m = Mat4::zeros();
    m[(0, 0)] = top_left;
    for i in 0..3 {
        m[(0, i + 1)] = top[i];
        m[(i + 1, 0)] = left[i];
        for j in 0..3 {
            m[(i + 1, j + 1)] = block[(i, j)];
        }
    }
    m
}

fn real3(m: &Matrix3<f64>) -> Matrix3<C64> {
    m.map(C64::from)
}

/// `(1/N_α) [[m0, i q ζ†], [−i q ζ, m1 ζζ† + ε m1 (I_v − ζζ†)]]` for a possibly
/// complex `ζ`; the real ansatz uses `ζ = v^α`.
pub fn member_matrix(spec: &WernerSpec, q: f64, eps: f64, zeta: &Vector3<C64>) -> Mat4 {
    let m1 = spec.m1();
    let zz = zeta * zeta.adjoint();
    let iv = real3(&i_v(spec.d_v()));
    let block = zz * C64::from(m1) + (iv - zz) * C64::from(eps * m1);
    let top = zeta.map(|c| I * q * c.conj());
    let left = zeta.map(|c| -I * q * c);
    embed(C64::from(spec.m0()), &top, &left, &block) * C64::from(spec.weight())
}

fn check_alpha(spec: &WernerSpec, alpha: usize) -> Result<Vector3<f64>> {
    spec.vset().get(alpha).copied().ok_or(Error::Domain {
        what: "alpha",
        value: alpha as f64,
        reason: "index past the end of the v-family",
    })
}

fn check_spectrum(spec: &WernerSpec, p: &AnsatzParams) -> Result<()> {
    let low = p.u / 2.0 - p.x;
    if low < -tol::EIGEN_NEGATIVE {
        return Err(Error::NegativeEigenvalue { value: low });
    }
    if p.eps * spec.m1() < -tol::EIGEN_NEGATIVE {
        return Err(Error::NegativeEigenvalue { value: p.eps * spec.m1() });
    }
    Ok(())
}

/// The ansatz member for index `alpha` (0-based).
pub fn ansatz_k(spec: &WernerSpec, p: &AnsatzParams, alpha: usize) -> Result<DecompositionMember> {
    let v = check_alpha(spec, alpha)?;
    check_spectrum(spec, p)?;
    Ok(DecompositionMember {
        alpha,
        k: BellOperator::bell(member_matrix(spec, p.q, p.eps, &v.map(C64::from))),
        weight: spec.weight(),
    })
}

/// The spectral projectors of `K^α`. Needs `X > 0`.
pub fn projector_family(spec: &WernerSpec, p: &AnsatzParams, alpha: usize) -> Result<ProjectorFamily> {
    let v = check_alpha(spec, alpha)?;
    if p.x == 0.0 {
        return Err(Error::Degenerate);
    }
    let d = spec.d_v() as f64;
    let vv = v * v.transpose() / d;
    let vc = v.map(C64::from);
    let zero3 = Vector3::from([ZERO; 3]);
    let e = embed(C64::from(1.0), &zero3, &zero3, &real3(&vv));
    let sigma = embed(
        C64::from(p.k),
        &(vc * (I * p.q)),
        &(vc * (-I * p.q)),
        &real3(&(vv * -p.k)),
    ) / C64::from(p.x);
    let p0 = embed(ZERO, &zero3, &zero3, &real3(&(i_v(spec.d_v()) - vv)));
    Ok(ProjectorFamily {
        p_plus: (e + sigma) * C64::from(0.5),
        p_minus: (e - sigma) * C64::from(0.5),
        e,
        sigma,
        p0,
    })
}

/// Log restricted to the nonzero eigenvalues, `−ln N_α + Σ_σ ln(λ'_σ) P^σ`.
///
/// Directions with a zero eigenvalue get `−ln N_α`; those entries are
/// annihilated by `ρ`, so the choice does not enter any trace.
pub(crate) fn log_k_matrix(spec: &WernerSpec, p: &AnsatzParams, v: &Vector3<f64>) -> Mat4 {
    let d = spec.d_v() as f64;
    let ln_n = (spec.n_alpha() as f64).ln();
    let lp = p.lambda_plus();
    let lm = p.lambda_minus(spec);
    let l0 = p.lambda_zero(spec);
    let ln_s = |x: f64| if x > tol::SUPPORT { x.ln() } else { 0.0 };
    let vv = v * v.transpose() / d;
    let vc = v.map(C64::from);
    let zero3 = Vector3::from([ZERO; 3]);
    let e = embed(C64::from(1.0), &zero3, &zero3, &real3(&vv));
    let p0 = embed(ZERO, &zero3, &zero3, &real3(&(i_v(spec.d_v()) - vv)));
    let mut out = Mat4::identity() * C64::from(-ln_n) + p0 * C64::from(ln_s(l0));
    if p.x == 0.0 {
        // Single eigenvalue u/2 on the E_α block.
        out += e * C64::from(ln_s(p.u / 2.0));
    } else {
        let sigma = embed(
            C64::from(p.k),
            &(vc * (I * p.q)),
            &(vc * (-I * p.q)),
            &real3(&(vv * -p.k)),
        ) / C64::from(p.x);
        let (a, b) = (ln_s(lp), ln_s(lm));
        out += e * C64::from((a + b) / 2.0) + sigma * C64::from((a - b) / 2.0);
    }
    out
}

/// `ln K^α` in the Bell basis; see [`log_k_matrix`] for the support convention.
pub fn log_k(spec: &WernerSpec, p: &AnsatzParams, alpha: usize) -> Result<BellOperator> {
    let v = check_alpha(spec, alpha)?;
    check_spectrum(spec, p)?;
    Ok(BellOperator::bell(log_k_matrix(spec, p, &v)))
}

/// `−ln N + ln((½+Ỹ)(½−Ỹ)) + (L/Ỹ) [[0, i nᵀ], [−i n, i (Δn ×·)]]` with
/// `Ỹ = |n + Δn|` and `L = ln((½+Ỹ)/(½−Ỹ))`. With `Δn = 0` this is the
/// real-ansatz `ln R`.
pub(crate) fn log_r_matrix(n: &Vector3<f64>, dn: &Vector3<f64>, n_alpha: usize) -> Result<Mat4> {
    let y = (n + dn).norm();
    if y >= 0.5 {
        return Err(Error::Divergent("ln R"));
    }
    let diag = -(n_alpha as f64).ln() + ((0.5 + y) * (0.5 - y)).ln();
    let mut out = Mat4::identity() * C64::from(diag);
    if y > 0.0 {
        let scale = (2.0 * y).atanh() * 2.0 / y;
        let nc = n.map(C64::from);
        let block = real3(&cross_matrix(dn)) * I;
        out += embed(ZERO, &(nc * I), &(nc * -I), &block) * C64::from(scale);
    }
    Ok(out)
}

/// `R = K_a ⊗ K_b / w` with `K_b = (½ + nb·σ)/N`, `K_a = (½ + na·σ)/N`.
pub(crate) fn r_from_marginal_vectors(
    na: &Vector3<f64>,
    nb: &Vector3<f64>,
    n_alpha: usize,
) -> (QubitOperator, QubitOperator, BellOperator) {
    let n = n_alpha as f64;
    let k_a = pauli_combination(0.5, na) / C64::from(n);
    let k_b = pauli_combination(0.5, nb) / C64::from(n);
    let r = BellOperator::standard(kron(&k_a, &k_b) * C64::from(n)).to_basis(crate::bell_algebra::Basis::Bell);
    (QubitOperator(k_a), QubitOperator(k_b), r)
}

/// `diag(1, −1, 1)`: the reflection relating the two marginals.
pub(crate) fn flip() -> Matrix3<f64> {
    Matrix3::from_diagonal(&Vector3::new(1.0, -1.0, 1.0))
}

/// Marginals, `R^α` and the closed-form `ln R^α`. Needs `Y < ½`.
pub fn marginals_and_r(spec: &WernerSpec, p: &AnsatzParams, alpha: usize) -> Result<Marginals> {
    let v = check_alpha(spec, alpha)?;
    let n = v * p.q;
    let ln_r = log_r_matrix(&n, &Vector3::zeros(), spec.n_alpha())?;
    let (k_a, k_b, r) = r_from_marginal_vectors(&(flip() * n), &n, spec.n_alpha());
    Ok(Marginals {
        k_a,
        k_b,
        r,
        ln_r: BellOperator::bell(ln_r),
    })
}

/// `|ψ_α⟩ = (√m0, −i √m1 v^α)` in the Bell basis.
pub(crate) fn psi_alpha(spec: &WernerSpec, v: &Vector3<f64>) -> Vector4<C64> {
    let s = spec.m1().sqrt();
    Vector4::new(
        C64::from(spec.m0().sqrt()),
        -I * s * v[0],
        -I * s * v[1],
        -I * s * v[2],
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs_diff;
    use crate::oracle::{eig_hermitian, DenseHermitian};

    fn spec_params(m0: f64, d_v: usize, q: f64, eps: f64) -> (WernerSpec, AnsatzParams) {
        let s = WernerSpec::new(m0, d_v).unwrap();
        let p = AnsatzParams::new(&s, q, eps).unwrap();
        (s, p)
    }

    #[test]
    fn closure_sums_to_rho() {
        for (d_v, n) in super::super::FAMILIES {
            let s = WernerSpec::with_family(0.55, d_v, n).unwrap();
            let p = AnsatzParams::new(&s, 0.6 * s.q_max(0.3), 0.3).unwrap();
            let mut sum = Mat4::zeros();
            for a in 0..n {
                let m = ansatz_k(&s, &p, a).unwrap();
                assert!((m.k.entries().trace().re - m.weight).abs() < 1e-15);
                sum += m.k.entries();
            }
            assert!(max_abs_diff(&sum, s.rho().entries()) < 1e-15);
        }
    }

    #[test]
    fn spectrum_matches_table() {
        let (s, p) = spec_params(0.6, 3, 0.2, 0.1);
        let n = s.n_alpha() as f64;
        let mut table = vec![p.lambda_plus() / n, p.lambda_minus(&s) / n, 0.1 * s.m1() / n, 0.1 * s.m1() / n];
        table.sort_by(f64::total_cmp);
        for a in 0..4 {
            let k = ansatz_k(&s, &p, a).unwrap();
            let eig = eig_hermitian(&DenseHermitian::new4(*k.k.entries()).unwrap()).unwrap();
            for (x, y) in eig.values.iter().zip(&table) {
                assert!((x - y).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn pure_min_member_is_rank_one() {
        let s = WernerSpec::new(0.7, 3).unwrap();
        let p = AnsatzParams::pure_min(&s);
        assert!((p.lambda_plus() - 1.0).abs() < 1e-15);
        for a in 0..s.n_alpha() {
            let fam = projector_family(&s, &p, a).unwrap();
            let psi = psi_alpha(&s, &s.vset()[a]);
            assert!(max_abs_diff(&fam.p_plus, &(psi * psi.adjoint())) < 1e-14);
            let ln_k = log_k(&s, &p, a).unwrap();
            let want = psi * C64::from(-(s.n_alpha() as f64).ln());
            assert!(max_abs_diff(&(ln_k.entries() * psi), &want) < 1e-14);
        }
    }

    #[test]
    fn projector_tables() {
        let (s, p) = spec_params(0.6, 3, 0.2, 0.1);
        let f = projector_family(&s, &p, 1).unwrap();
        assert!(max_abs_diff(&(f.e * f.sigma), &f.sigma) < 1e-14);
        assert!(max_abs_diff(&(f.sigma * f.sigma), &f.e) < 1e-14);
        assert!(max_abs_diff(&(f.p0 * f.e), &Mat4::zeros()) < 1e-14);
        assert!(max_abs_diff(&(f.p_plus * f.p_minus), &Mat4::zeros()) < 1e-14);
        assert!(max_abs_diff(&(f.p_plus * f.p_plus), &f.p_plus) < 1e-14);
        let n = s.n_alpha() as f64;
        let k = f.p_plus * C64::from(p.lambda_plus() / n)
            + f.p_minus * C64::from(p.lambda_minus(&s) / n)
            + f.p0 * C64::from(p.lambda_zero(&s) / n);
        assert!(max_abs_diff(&k, ansatz_k(&s, &p, 1).unwrap().k.entries()) < 1e-15);
    }

    #[test]
    fn degenerate_projectors_rejected() {
        // k = 0 and q = 0 give X = 0.
        let s = WernerSpec::new(0.5, 1).unwrap();
        let p = AnsatzParams::new(&s, 0.0, 0.0).unwrap();
        assert_eq!(projector_family(&s, &p, 0), Err(Error::Degenerate));
        // ln K is still defined: K = ρ/N.
        let l = log_k(&s, &p, 0).unwrap();
        assert!((l.entries()[(0, 0)].re - (0.25f64).ln()).abs() < 1e-15);
    }

    #[test]
    fn diagonal_ansatz_log() {
        let (s, p) = spec_params(0.25, 3, 0.0, 1.0);
        let l = log_k(&s, &p, 2).unwrap();
        let want = Mat4::identity() * C64::from((0.25f64 / 4.0).ln());
        assert!(max_abs_diff(l.entries(), &want) < 1e-14);
    }

    #[test]
    fn marginals_at_zero_regulator() {
        let (s, p) = spec_params(0.6, 2, 0.0, 0.4);
        let m = marginals_and_r(&s, &p, 0).unwrap();
        let n = s.n_alpha() as f64;
        assert!(max_abs_diff(m.k_b.matrix(), &(crate::linalg::Mat2::identity() / C64::from(2.0 * n))) < 1e-15);
        assert!(max_abs_diff(m.r.entries(), &(Mat4::identity() / C64::from(4.0 * n))) < 1e-15);
        assert!(max_abs_diff(m.ln_r.entries(), &(Mat4::identity() * C64::from((0.25 / n).ln()))) < 1e-15);
    }

    #[test]
    fn boundary_regulator_rejected() {
        let s = WernerSpec::new(0.5, 1).unwrap();
        let p = AnsatzParams::pure_min(&s);
        assert_eq!(marginals_and_r(&s, &p, 0), Err(Error::Divergent("ln R")));
    }
}
