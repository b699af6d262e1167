//! Invariant suites over every module, each reduced to a maximum residual
//! and compared with a fixed tolerance.

use nalgebra::{DMatrix, Matrix3, Rotation3, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bell_algebra::{
    bell_matrix_element, exact_matmul, exact_pauli, oplus, partial_trace_bell, pauli_product,
    structure_constant_closed_form, BellOperator, PauliIndex, Subsystem, STRUCTURE,
};
use crate::complex_ansatz::{
    classify_pure_orbits, gamma_alpha, log_k_tilde, log_r_tilde, n_vectors, pure_action,
    zero_gamma_phases, PhaseFamily, lemma_check,
};
use crate::eq_solver::{f_rho, power_residuals, residuals};
use crate::linalg::{max_abs_diff, pauli, Mat4, C64};
use crate::oracle::{
    bell_columns, bell_mixture_eof, bell_to_standard, eig_hermitian, lagrangian_dense, partial_trace_dense,
    DenseHermitian,
};
use crate::preconcurrence::{
    first_variation, min_concurrence, minimum_witness, pattern_phases, stationary_values, WeightVector,
};
use crate::pure_state::{entanglement_pure, entanglement_via_reduced, reduced_density, vector_identity_residual, BellCoeffs};
use crate::werner::{
    ansatz_k, e_pure, lagrangian, log_k, marginals_and_r, AnsatzParams, WernerSpec, FAMILIES,
};
use crate::{tol, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    All,
    Algebra,
    Werner,
    Appendices,
}

impl Suite {
    fn includes(self, other: Suite) -> bool {
        self == Suite::All || self == other
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyConfig {
    pub suite: Suite,
    pub seed: u64,
    pub samples: usize,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            suite: Suite::All,
            seed: 1,
            samples: 200,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InvariantResult {
    pub suite: Suite,
    pub name: String,
    pub checks: usize,
    pub max_residual: f64,
    pub tolerance: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifySummary {
    pub passed: bool,
    pub results: Vec<InvariantResult>,
    pub failures: Vec<String>,
}

struct Recorder {
    suite: Suite,
    results: Vec<InvariantResult>,
}

impl Recorder {
    fn push(&mut self, name: &str, residuals: impl IntoIterator<Item = f64>, tolerance: f64) {
        let mut checks = 0;
        let mut max = 0.0f64;
        let mut nan = false;
        for r in residuals {
            checks += 1;
            nan |= r.is_nan();
            max = max.max(r.abs());
        }
        let max = if nan { f64::NAN } else { max };
        self.results.push(InvariantResult {
            suite: self.suite,
            name: name.to_string(),
            checks,
            max_residual: max,
            tolerance,
            passed: !nan && max <= tolerance,
        });
    }

    /// Records an error from a step as a failed invariant.
    fn push_result(&mut self, name: &str, r: Result<Vec<f64>>, tolerance: f64) {
        match r {
            Ok(v) => self.push(name, v, tolerance),
            Err(_) => self.push(name, [f64::NAN], tolerance),
        }
    }
}

fn random_c64(rng: &mut ChaCha8Rng) -> C64 {
    C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
}

fn random_mat4(rng: &mut ChaCha8Rng) -> Mat4 {
    Mat4::from_fn(|_, _| random_c64(rng))
}

fn dense(m: &Mat4) -> DMatrix<C64> {
    DMatrix::from_fn(4, 4, |i, j| m[(i, j)])
}

fn dmax(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// A random Werner spec, family and interior parameter point.
pub fn random_point(rng: &mut ChaCha8Rng) -> (WernerSpec, AnsatzParams) {
    let (d_v, n_alpha) = FAMILIES[rng.random_range(0..FAMILIES.len())];
    let m0 = rng.random_range(0.01..0.99);
    let spec = WernerSpec::with_family(m0, d_v, n_alpha).expect("built-in family");
    let eps = rng.random_range(0.01..1.0);
    let q = rng.random_range(0.0..0.999) * spec.q_max(eps);
    let p = AnsatzParams::new(&spec, q, eps).expect("interior point");
    (spec, p)
}

fn algebra(rec: &mut Recorder, rng: &mut ChaCha8Rng, samples: usize) {
    let all = PauliIndex::ALL;
    let mut mismatches = Vec::new();
    for mu in all {
        for nu in all {
            let (f, k) = pauli_product(mu, nu);
            let lhs = exact_matmul(&exact_pauli(mu), &exact_pauli(nu));
            let rhs = exact_pauli(k).map(|row| row.map(|x| f * x));
            mismatches.push(if lhs == rhs && f == structure_constant_closed_form(mu, nu) { 0.0 } else { 1.0 });
        }
    }
    rec.push("pauli_products_exact", mismatches, 0.0);

    let mut sym = Vec::new();
    for a in all {
        for b in all {
            let herm = STRUCTURE[b.idx()][a.idx()] == STRUCTURE[a.idx()][b.idx()].conj();
            let shifted = STRUCTURE[oplus(a, b).idx()][b.idx()].conj() == STRUCTURE[a.idx()][b.idx()];
            sym.push(if herm && shifted { 0.0 } else { 1.0 });
        }
    }
    rec.push("structure_constant_symmetries", sym, 0.0);

    let b = bell_columns();
    let sigma_b: Vec<DMatrix<C64>> = (0..4)
        .map(|beta| {
            let s = pauli(beta);
            DMatrix::from_fn(4, 4, |r, c| if r / 2 == c / 2 { s[(r % 2, c % 2)] } else { C64::from(0.0) })
        })
        .collect();
    let mut elems = Vec::new();
    for _ in 0..samples {
        let c: Vec<C64> = (0..4).map(|_| random_c64(rng)).collect();
        let op: DMatrix<C64> = (0..4).map(|beta| &sigma_b[beta] * c[beta]).fold(DMatrix::zeros(4, 4), |acc, m| acc + m);
        let want = b.adjoint() * op * &b;
        let got = DMatrix::from_fn(4, 4, |m1, m2| {
            (0..4)
                .map(|beta| c[beta] * bell_matrix_element(all[m1], all[beta], all[m2]))
                .sum::<C64>()
        });
        elems.push(dmax(&want, &got));
    }
    rec.push("bell_matrix_elements_vs_dense", elems, 1e-12);

    let mut traces = Vec::new();
    for _ in 0..samples {
        let x = random_mat4(rng);
        let std = bell_to_standard(&dense(&x));
        for side in [Subsystem::A, Subsystem::B] {
            let got = partial_trace_bell(&BellOperator::bell(x), side).expect("bell tag");
            let want = partial_trace_dense(&std, side);
            traces.push(dmax(&want, &DMatrix::from_fn(2, 2, |i, j| got.matrix()[(i, j)])));
        }
    }
    rec.push("partial_trace_vs_dense", traces, 1e-12);

    let mut ident = Vec::new();
    let mut routes = Vec::new();
    let mut reduced = Vec::new();
    for _ in 0..samples {
        let c = BellCoeffs::new(random_c64(rng), Vector3::from_fn(|_, _| random_c64(rng))).expect("nonzero");
        ident.push(vector_identity_residual(&c));
        routes.push(entanglement_pure(&c).bits() - entanglement_via_reduced(&c).bits());
        let psi = c.state_vector();
        let proj = DMatrix::from_fn(4, 4, |i, j| psi[i] * psi[j].conj());
        let want = partial_trace_dense(&proj, Subsystem::A);
        let got = reduced_density(&c).matrix();
        reduced.push(dmax(&want, &DMatrix::from_fn(2, 2, |i, j| got[(i, j)])));
    }
    rec.push("pure_vector_identity", ident, 1e-12);
    rec.push("pure_entropy_routes", routes, 1e-10);
    rec.push("pure_reduced_density_vs_dense", reduced, 1e-12);

    let mut eig = Vec::new();
    for _ in 0..samples {
        let m = random_mat4(rng);
        let h = (m + m.adjoint()) * C64::from(0.5);
        let e = eig_hermitian(&DenseHermitian::new4(h).expect("hermitian")).expect("converges");
        let tr: f64 = e.values.iter().sum();
        let fro: f64 = e.values.iter().map(|x| x * x).sum::<f64>().sqrt();
        let fro_h = h.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        eig.push((tr - h.trace().re).abs().max((fro - fro_h).abs()).max(dmax(&e.reconstruct(), &dense(&h))));
    }
    rec.push("eig_hermitian_preserves_trace_and_norm", eig, 1e-12);
}

fn werner(rec: &mut Recorder, rng: &mut ChaCha8Rng, samples: usize) {
    let mut closure = Vec::new();
    let mut spectrum = Vec::new();
    let mut lag = Vec::new();
    let mut rho_id = Vec::new();
    for _ in 0..samples {
        let (spec, p) = random_point(rng);
        let mut sum = Mat4::zeros();
        for a in 0..spec.n_alpha() {
            sum += ansatz_k(&spec, &p, a).expect("valid").k.entries();
        }
        closure.push(max_abs_diff(&sum, spec.rho().entries()));

        let k = ansatz_k(&spec, &p, 0).expect("valid");
        let e = eig_hermitian(&DenseHermitian::new4(k.k.matrix_in(crate::bell_algebra::Basis::Standard)).expect("hermitian"))
            .expect("converges");
        let nn = spec.n_alpha() as f64;
        let mut want = vec![p.lambda_plus(), p.lambda_minus(&spec)];
        want.extend(std::iter::repeat_n(p.lambda_zero(&spec), spec.d_v() - 1));
        want.extend(std::iter::repeat_n(0.0, 3 - spec.d_v()));
        want.sort_by(f64::total_cmp);
        spectrum.push(e.values.iter().zip(&want).map(|(a, b)| (a - b / nn).abs()).fold(0.0, f64::max));

        lag.push(match lagrangian_dense(&spec, &p) {
            Ok(d) => d - lagrangian(&spec, &p),
            Err(_) => f64::NAN,
        });
        let (u, x) = (p.u, p.x);
        rho_id.push(p.rho(&spec) - ((u / 2.0) * (u / 2.0) - x * x));
    }
    rec.push("ansatz_closure", closure, 1e-12);
    rec.push("ansatz_spectrum_vs_dense", spectrum, 1e-12);
    rec.push("lagrangian_vs_dense", lag, tol::LAGRANGIAN);
    rec.push("rho_identity", rho_id, 1e-14);

    let mut eof = Vec::new();
    let mut trace_id = Vec::new();
    let mut alpha = Vec::new();
    for d_v in 1..=3 {
        for i in 0..=20 {
            let m0 = i as f64 / 20.0;
            let spec = WernerSpec::new(m0, d_v).expect("valid");
            let r = e_pure(&spec);
            let mut w = spec.weights();
            w.sort_by(|a, b| b.total_cmp(a));
            eof.push(match bell_mixture_eof(&w) {
                Ok(_) => {
                    let c = (2.0 * m0 - 1.0).abs();
                    r.e.bits() - crate::oracle::entropy_bits((1.0 + (1.0 - c * c).sqrt()) / 2.0)
                }
                Err(_) => f64::NAN,
            });
            let key = if r.boundary { "trace_identity_limit" } else { "trace_identity" };
            trace_id.push(r.residuals.get(key).copied().unwrap_or(f64::NAN));
            if let Some(d) = r.residuals.get("alpha_deviation") {
                alpha.push(*d);
            }
        }
    }
    rec.push("pure_min_entropy", eof, tol::global());
    rec.push("pure_min_trace_identity", trace_id, tol::LAGRANGIAN);
    rec.push("pure_min_alpha_insensitive", alpha, tol::INSENSITIVE);

    let mut rot = Vec::new();
    for _ in 0..samples.min(50) {
        let m0 = rng.random_range(0.05..0.95);
        let spec = WernerSpec::new(m0, 3).expect("valid");
        let axis = Vector3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        let omega: Matrix3<f64> = Rotation3::new(axis).into_inner();
        let turned = spec.rotated(&omega).expect("rotation keeps constraints");
        let eps = rng.random_range(0.01..1.0);
        let p = AnsatzParams::new(&spec, 0.7 * spec.q_max(eps), eps).expect("interior");
        rot.push(match (lagrangian_dense(&spec, &p), lagrangian_dense(&turned, &p)) {
            (Ok(a), Ok(b)) => a - b,
            _ => f64::NAN,
        });
    }
    rec.push("lagrangian_rotation_invariance", rot, tol::LAGRANGIAN);
}

fn appendices(rec: &mut Recorder, rng: &mut ChaCha8Rng, samples: usize) {
    let mut f0 = Vec::new();
    let mut triv = Vec::new();
    for d_v in 2..=3 {
        for i in 1..20 {
            let spec = WernerSpec::new(i as f64 / 20.0, d_v).expect("valid");
            let y0 = spec.y_pure();
            let v = f_rho(&spec, 0.0);
            f0.push(if v <= 0.0 { v - (y0 * y0 - 0.25) } else { f64::INFINITY });
            let r = residuals(&spec, 1.0, 0.0);
            let pr = power_residuals(&spec, 1.0, 0.0);
            triv.push(r[0].abs().max(r[1].abs()).max(pr[0].abs()).max(pr[1].abs()));
        }
    }
    rec.push("f_rho_at_zero", f0, 1e-15);
    rec.push("trivial_root_residual", triv, 0.0);

    let mut zero = Vec::new();
    let mut y_half = Vec::new();
    for d_v in 2..=3 {
        for i in 1..=10 {
            let spec = WernerSpec::new(0.05 * i as f64, d_v).expect("valid");
            let Some(ph) = zero_gamma_phases(&spec) else {
                zero.push(f64::NAN);
                continue;
            };
            let p = AnsatzParams::pure_min(&spec);
            for a in 0..spec.n_alpha() {
                zero.push(pure_action(&spec, &ph, a).map(|v| v.norm()).unwrap_or(f64::NAN));
                y_half.push(n_vectors(&spec, &ph, &p, a).map(|n| n.y_tilde - 0.5).unwrap_or(f64::NAN));
            }
        }
    }
    rec.push("gamma_zero_pure_action_vanishes", zero, 1e-10);
    rec.push("gamma_zero_ytilde_half", y_half, 1e-12);

    let mut orbit_gamma = Vec::new();
    for d_v in 1..=3 {
        for i in 1..20 {
            let m0 = i as f64 / 20.0;
            let spec = WernerSpec::new(m0, d_v).expect("valid");
            let mut w = vec![m0];
            w.extend(std::iter::repeat_n(spec.m1(), d_v));
            let st = WeightVector::new(w).and_then(|w| stationary_values(&w));
            let orbits = classify_pure_orbits(&spec);
            match (st, orbits) {
                (Ok(st), Ok(orbits)) => {
                    for r in orbits.iter().filter(|r| r.signs.is_some()) {
                        let g = r.gamma_per_alpha[0].norm();
                        orbit_gamma.push(st.values.iter().map(|v| (v - g).abs()).fold(f64::INFINITY, f64::min));
                    }
                }
                _ => orbit_gamma.push(f64::NAN),
            }
        }
    }
    rec.push("pure_orbit_gamma_in_stationary_set", orbit_gamma, 1e-12);

    let mut variation = Vec::new();
    let mut minimum = Vec::new();
    for _ in 0..samples.min(20) {
        let n = rng.random_range(1..=3);
        let mut w: Vec<f64> = (0..=n).map(|_| rng.random_range(0.0..1.0)).collect();
        let s: f64 = w.iter().sum();
        w.iter_mut().for_each(|x| *x /= s);
        w.sort_by(|a, b| b.total_cmp(a));
        let last = 1.0 - w[..n].iter().sum::<f64>();
        w[n] = last.max(0.0);
        let Ok(m) = WeightVector::new(w) else {
            variation.push(f64::NAN);
            continue;
        };
        if let Ok(st) = stationary_values(&m) {
            for p in &st.witnesses {
                let fv = first_variation(&m, &pattern_phases(&p.signs)).unwrap_or_default();
                variation.push(fv.iter().map(|x| x.abs()).fold(0.0, f64::max));
            }
        }
        if let Ok(c) = min_concurrence(&m) {
            minimum.push(minimum_witness(&m).value - c);
        }
    }
    rec.push("stationary_first_variation", variation, 1e-12);
    rec.push("min_concurrence_vs_grid", minimum, 1e-6);

    let mut lemma = Vec::new();
    for d_v in 1..=3 {
        let spec = WernerSpec::new(0.6, d_v).expect("valid");
        lemma.push(match lemma_check(&spec, 10) {
            Ok(r) if r.holds => r.max_n,
            _ => f64::NAN,
        });
    }
    rec.push("lemma_gamma_one", lemma, tol::ALGEBRA);

    let real: Result<Vec<f64>> = (|| {
        let mut out = Vec::new();
        for _ in 0..samples.min(50) {
            let (spec, p) = random_point(rng);
            let ph = PhaseFamily::zeros(spec.n_alpha());
            for a in 0..spec.n_alpha() {
                out.push(max_abs_diff(log_k_tilde(&spec, &ph, &p, a)?.entries(), log_k(&spec, &p, a)?.entries()));
                out.push(max_abs_diff(
                    log_r_tilde(&spec, &ph, &p, a)?.entries(),
                    marginals_and_r(&spec, &p, a)?.ln_r.entries(),
                ));
                out.push((gamma_alpha(&spec, &ph, a)? - C64::from(2.0 * spec.m0() - 1.0)).norm());
            }
        }
        Ok(out)
    })();
    rec.push_result("zero_phases_reduce_to_real", real, 1e-13);
}

/// Runs the selected suites.
pub fn run(cfg: &VerifyConfig) -> VerifySummary {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut results = Vec::new();
    let suites: [(Suite, fn(&mut Recorder, &mut ChaCha8Rng, usize)); 3] =
        [(Suite::Algebra, algebra), (Suite::Werner, werner), (Suite::Appendices, appendices)];
    for (suite, f) in suites {
        if cfg.suite.includes(suite) {
            let mut rec = Recorder { suite, results: Vec::new() };
            f(&mut rec, &mut rng, cfg.samples);
            results.extend(rec.results);
        }
    }
    let failures: Vec<String> = results
        .iter()
        .filter(|r| !r.passed)
        .map(|r| format!("{:?}/{}: {:e} > {:e}", r.suite, r.name, r.max_residual, r.tolerance).to_lowercase())
        .collect();
    VerifySummary {
        passed: failures.is_empty(),
        results,
        failures,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_suites_pass() {
        let s = run(&VerifyConfig {
            samples: 40,
            ..Default::default()
        });
        assert!(s.passed, "{:?}", s.failures);
        let algebra: Vec<_> = s.results.iter().filter(|r| r.name == "pauli_products_exact").collect();
        assert_eq!(algebra[0].checks, 16);
    }
}
