use std::collections::BTreeMap;
use std::f64::consts::LN_2;

use serde::{Deserialize, Serialize};

use super::ansatz::{log_k_matrix, log_r_matrix, psi_alpha};
use super::{lagrangian, stationarity_gradient, AnsatzParams, WernerSpec};
use crate::bell_algebra::BellOperator;
use crate::eq_solver;
use crate::linalg::{max_abs_diff, xlogx, Mat4, C64};
use crate::pure_state::{h_e_clamped, EntropyValue};
use crate::{tol, Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Pure,
    Mixed,
}

/// Named residuals attached to a report.
pub type Residuals = BTreeMap<String, f64>;

/// A stationary point (or endpoint) considered while minimizing.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub label: String,
    pub q: f64,
    pub eps: f64,
    pub lagrangian: f64,
    pub stationary: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EntanglementReport {
    pub mode: Mode,
    pub e: EntropyValue,
    pub params: AnsatzParams,
    /// `None` when `Δ` diverges (pure minimization at `m0 = ½`).
    pub delta: Option<BellOperator>,
    pub residuals: Residuals,
    pub converged: bool,
    /// `Y = ½`: `ln R` is singular and only limit forms are available.
    pub boundary: bool,
    pub candidates: Vec<Candidate>,
}

/// `Δ` together with how far the per-member operators stray from it.
#[derive(Clone, Debug, PartialEq)]
pub struct DeltaOutcome {
    pub delta: BellOperator,
    /// Pure mode: `max_α |(ln K^α − ln R^α)ψ_α − Δψ_α|`.
    /// Mixed mode: `max_α max|ln K^α − ln R^α − Δ|`.
    pub alpha_deviation: f64,
    pub insensitive: bool,
}

/// `artanh(2Y)/Y`, continuous at `Y = 0`.
fn atanh_ratio(y: f64) -> f64 {
    if y == 0.0 {
        2.0
    } else {
        (2.0 * y).atanh() / y
    }
}

fn ln_support(x: f64) -> f64 {
    if x > tol::SUPPORT {
        x.ln()
    } else {
        0.0
    }
}

fn diag4(d: [f64; 4]) -> Mat4 {
    Mat4::from_fn(|i, j| if i == j { C64::from(d[i]) } else { C64::from(0.0) })
}

/// The diagonal entries of `Δ = M + a`.
fn delta_diagonal(spec: &WernerSpec, p: &AnsatzParams, mode: Mode) -> Result<[f64; 4]> {
    let d_v = spec.d_v();
    let (m, y) = match mode {
        Mode::Pure => {
            let y = spec.y_pure();
            if y >= 0.5 {
                return Err(Error::Divergent("pure-min entanglement operator"));
            }
            // −ln((½+Y)/(½−Y)) f = −2 g(Y)(1−m0) and /f ↦ m0, with g = artanh(2Y)/Y.
            let g = atanh_ratio(y);
            (
                [-2.0 * g * (1.0 - spec.m0()), -2.0 * g * spec.m0()],
                y,
            )
        }
        Mode::Mixed => {
            if p.y >= 0.5 {
                return Err(Error::Divergent("mixed-min entanglement operator"));
            }
            let lp = ln_support(p.lambda_plus());
            let lm = ln_support(p.lambda_minus(spec));
            let r = if p.x == 0.0 { 0.0 } else { p.k / (2.0 * p.x) };
            let top = (0.5 + r) * lp + (0.5 - r) * lm;
            // For d_v = 1 the ε-equation is vacuous and ε m1 takes the value it
            // would have if the equation were imposed.
            let v_block = if d_v == 1 {
                (0.5 - r) * lp + (0.5 + r) * lm
            } else {
                ln_support(p.lambda_zero(spec))
            };
            ([top, v_block], p.y)
        }
    };
    let a = -((0.5 + y) * (0.5 - y)).ln();
    let mut d = [a; 4];
    d[0] += m[0];
    for x in d.iter_mut().skip(1).take(d_v) {
        *x += m[1];
    }
    Ok(d)
}

/// `Δ = M + a` for the given minimization mode, plus its α-deviation.
pub fn delta_operator(spec: &WernerSpec, p: &AnsatzParams, mode: Mode) -> Result<DeltaOutcome> {
    let delta = diag4(delta_diagonal(spec, p, mode)?);
    let mut dev = 0.0f64;
    for v in spec.vset() {
        let ln_k = log_k_matrix(spec, p, v);
        let ln_r = log_r_matrix(&(v * p.q), &nalgebra::Vector3::zeros(), spec.n_alpha())?;
        let diff = ln_k - ln_r;
        dev = dev.max(match mode {
            Mode::Pure => {
                let psi = psi_alpha(spec, v);
                max_abs_diff(&(diff * psi), &(delta * psi))
            }
            Mode::Mixed => max_abs_diff(&diff, &delta),
        });
    }
    Ok(DeltaOutcome {
        delta: BellOperator::bell(delta),
        alpha_deviation: dev,
        insensitive: dev <= tol::INSENSITIVE,
    })
}

fn trace_rho(spec: &WernerSpec, delta: &BellOperator) -> f64 {
    let w = spec.weights();
    (0..4).map(|i| w[i] * delta.entries()[(i, i)].re).sum()
}

/// Pure-minimization entanglement `h(½ + √(m0(1−m0)))` with its `Δ`.
pub fn e_pure(spec: &WernerSpec) -> EntanglementReport {
    let p = AnsatzParams::pure_min(spec);
    let y = spec.y_pure();
    let l = 2.0 * h_e_clamped(0.5 + y);
    let mut residuals = Residuals::new();
    let closed = lagrangian(spec, &p);
    residuals.insert("lagrangian_closed_form".into(), (closed - l).abs());
    let (delta, boundary) = match delta_operator(spec, &p, Mode::Pure) {
        Ok(out) => {
            residuals.insert("trace_identity".into(), (trace_rho(spec, &out.delta) - l).abs());
            residuals.insert("alpha_deviation".into(), out.alpha_deviation);
            (Some(out.delta), false)
        }
        Err(_) => {
            // tr(ρΔ) = −ln(¼−Y²) − 4Y artanh(2Y) regrouped as −2Σ x ln x.
            let limit = -2.0 * (xlogx(0.5 + y) + xlogx(0.5 - y));
            residuals.insert("trace_identity_limit".into(), (limit - l).abs());
            (None, true)
        }
    };
    EntanglementReport {
        mode: Mode::Pure,
        e: EntropyValue(l / (2.0 * LN_2)),
        params: p,
        delta,
        residuals,
        converged: true,
        boundary,
        candidates: vec![Candidate {
            label: "pure-min".into(),
            q: p.q,
            eps: p.eps,
            lagrangian: l,
            stationary: false,
        }],
    }
}

/// `ln((½+X)/(½−X))/(2X) − ln((½+Y)/(½−Y))/Y` for `d_v = 1`; its sign is that
/// of `∂ℒ/∂Y` for `Y > 0`.
fn reduced_slope(spec: &WernerSpec, p: &AnsatzParams) -> f64 {
    let lm = p.lambda_minus(spec);
    if lm <= 0.0 {
        return f64::INFINITY;
    }
    let first = if p.x == 0.0 { 2.0 } else { (p.lambda_plus() / lm).ln() / (2.0 * p.x) };
    first - 2.0 * atanh_ratio(p.y)
}

/// Stationary points of the `d_v = 1` Lagrangian in `Y ∈ (0, Y_pure)` plus both
/// endpoints.
pub fn mixed_d1_candidates(spec: &WernerSpec) -> Vec<Candidate> {
    mixed_d1_points(spec).into_iter().map(|(c, _)| c).collect()
}

/// The search runs in `gap = Y_pure² − Y²`, which keeps `λ₋` exact as the
/// stationary point approaches `Y_pure` for `m0 → ½`.
fn mixed_d1_points(spec: &WernerSpec) -> Vec<(Candidate, AnsatzParams)> {
    let y_max = spec.y_pure();
    let at = |gap: f64| AnsatzParams::from_gap(spec, 0.0, gap);
    let cand = |label: &str, p: AnsatzParams, stationary: bool| {
        (
            Candidate {
                label: label.into(),
                q: p.q,
                eps: 0.0,
                lagrangian: lagrangian(spec, &p),
                stationary,
            },
            p,
        )
    };
    let top = y_max * y_max;
    let mut out = vec![cand("Y=0", at(top), true)];
    if y_max == 0.0 {
        return out;
    }
    const SAMPLES: usize = 2048;
    let mut gaps: Vec<f64> = (1..SAMPLES)
        .map(|i| {
            let y = y_max * i as f64 / SAMPLES as f64;
            (y_max - y) * (y_max + y)
        })
        .collect();
    gaps.extend((12..=160).map(|k| top * 2f64.powi(-k)));
    gaps.retain(|&g| g > 0.0 && g < top);
    gaps.sort_by(|a, b| b.total_cmp(a));
    gaps.dedup();
    let slopes: Vec<f64> = gaps.iter().map(|&g| reduced_slope(spec, &at(g))).collect();
    for i in 0..gaps.len() - 1 {
        if slopes[i] == 0.0 {
            out.push(cand("interior", at(gaps[i]), true));
        } else if slopes[i] * slopes[i + 1] < 0.0 {
            let (mut lo, mut hi) = (gaps[i].ln(), gaps[i + 1].ln());
            let s_lo = slopes[i];
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mid == lo || mid == hi {
                    break;
                }
                if reduced_slope(spec, &at(mid.exp())) * s_lo > 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            out.push(cand("interior", at((0.5 * (lo + hi)).exp()), true));
        }
    }
    out.push(cand("Y=Y_pure", at(0.0), false));
    out
}

fn gradient_residuals(residuals: &mut Residuals, spec: &WernerSpec, p: &AnsatzParams) -> f64 {
    let g = stationarity_gradient(spec, p);
    residuals.insert("stationarity_eps".into(), g[0].abs());
    residuals.insert("stationarity_q".into(), g[1].abs());
    g[0].abs().max(g[1].abs())
}

fn finish_mixed(spec: &WernerSpec, p: AnsatzParams, candidates: Vec<Candidate>, corner: bool) -> Result<EntanglementReport> {
    let l = lagrangian(spec, &p);
    let mut residuals = Residuals::new();
    let g = gradient_residuals(&mut residuals, spec, &p);
    let pure = 2.0 * h_e_clamped(0.5 + spec.y_pure());
    residuals.insert("excess_over_pure".into(), (l - pure).max(0.0) / (2.0 * LN_2));
    let delta = match delta_operator(spec, &p, Mode::Mixed) {
        Ok(out) => {
            residuals.insert("trace_identity".into(), (trace_rho(spec, &out.delta) - l).abs());
            residuals.insert("alpha_deviation".into(), out.alpha_deviation);
            Some(out.delta)
        }
        Err(Error::Divergent(_)) => None,
        Err(e) => return Err(e),
    };
    Ok(EntanglementReport {
        mode: Mode::Mixed,
        e: EntropyValue(l / (2.0 * LN_2)),
        params: p,
        boundary: delta.is_none(),
        delta,
        residuals,
        converged: corner || g <= tol::STATIONARITY,
        candidates,
    })
}

/// Mixed-minimization entanglement.
///
/// `d_v = 1` scans the sign of `∂ℒ/∂Y` and bisects every sign change; larger
/// `d_v` solve the ε–q system (see [`eq_solver::solve_exact`]). The lowest
/// Lagrangian among the stationary candidates and the pure-min corner wins;
/// all candidates are returned in the report. The corner only wins where the
/// stationary branch runs into it, as at `m0 = ½`.
pub fn e_mixed(spec: &WernerSpec) -> Result<EntanglementReport> {
    let corner = AnsatzParams::pure_min(spec);
    let corner_candidate = Candidate {
        label: "pure-min".into(),
        q: corner.q,
        eps: corner.eps,
        lagrangian: lagrangian(spec, &corner),
        stationary: false,
    };
    let (mut candidates, mut params) = if spec.d_v() == 1 {
        mixed_d1_points(spec).into_iter().unzip()
    } else {
        let trivial = AnsatzParams::trivial(spec);
        let mut c = vec![Candidate {
            label: "trivial".into(),
            q: 0.0,
            eps: 1.0,
            lagrangian: lagrangian(spec, &trivial),
            stationary: true,
        }];
        let mut p = vec![trivial];
        // With m1 = 0 or m0 = 0, q is pinned to zero and only the trivial root
        // remains.
        if spec.q_max(0.0) > 0.0 {
            let sol = eq_solver::solve_exact(spec)?;
            for r in &sol.roots {
                let rp = r.params(spec);
                c.push(Candidate {
                    label: if sol.near_pure.as_ref() == Some(r) { "near-pure".into() } else { "multistart".into() },
                    q: r.q,
                    eps: r.eps,
                    lagrangian: lagrangian(spec, &rp),
                    stationary: r.converged,
                });
                p.push(rp);
            }
        }
        (c, p)
    };
    if spec.d_v() > 1 {
        candidates.push(corner_candidate);
        params.push(corner);
    }
    let best = (0..candidates.len())
        .min_by(|&a, &b| candidates[a].lagrangian.total_cmp(&candidates[b].lagrangian))
        .expect("at least one candidate");
    let won_corner = !candidates[best].stationary;
    // Every candidate is either stationary or the corner.
    let near = candidates.iter().any(|c| c.label == "near-pure");
    let mut report = finish_mixed(spec, params[best], candidates, won_corner)?;
    if spec.d_v() > 1 {
        report.residuals.insert("near_pure_root_found".into(), if near { 1.0 } else { 0.0 });
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pure_state::entanglement_from_concurrence;

    #[test]
    fn pure_examples() {
        let one = e_pure(&WernerSpec::new(1.0, 3).unwrap());
        assert_eq!(one.e.bits(), 1.0);
        let half = e_pure(&WernerSpec::new(0.5, 3).unwrap());
        assert!(half.e.bits().abs() < 1e-15);
        assert!(half.boundary && half.delta.is_none());
        let r = e_pure(&WernerSpec::new(0.75, 3).unwrap());
        assert!((r.e.bits() - entanglement_from_concurrence(0.5).bits()).abs() < 1e-14);
        assert!(r.residuals["trace_identity"] < 1e-12);
        assert!(r.residuals["alpha_deviation"] < 1e-12);
    }

    #[test]
    fn pure_delta_at_bell_state() {
        let r = e_pure(&WernerSpec::new(1.0, 2).unwrap());
        let d = r.delta.unwrap();
        assert!((d.entries()[(0, 0)].re - 2.0 * LN_2).abs() < 1e-15);
        assert!(r.residuals["trace_identity"] < 1e-15);
    }

    #[test]
    fn mixed_d1_interior_minimum() {
        let s = WernerSpec::new(0.7, 1).unwrap();
        let r = e_mixed(&s).unwrap();
        assert!(r.converged);
        assert!(r.params.y > 0.0 && r.params.y < s.y_pure());
        assert!(r.e.bits() < e_pure(&s).e.bits());
        assert!(r.residuals["stationarity_q"] < 1e-10);
        assert!(r.residuals["trace_identity"] < 1e-9);
        assert!(r.residuals["alpha_deviation"] < 1e-8);
    }

    #[test]
    fn mixed_pure_bell_state() {
        for d_v in 1..=3 {
            let r = e_mixed(&WernerSpec::new(1.0, d_v).unwrap()).unwrap();
            assert!((r.e.bits() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn mixed_higher_dimension_root() {
        let s = WernerSpec::new(0.55, 3).unwrap();
        let r = e_mixed(&s).unwrap();
        assert!(r.converged);
        assert!((r.e.bits() - 0.022_156_627_0).abs() < 1e-8, "{}", r.e.bits());
        assert!(r.e.bits() < e_pure(&s).e.bits());
        assert!(r.residuals["trace_identity"] < 1e-9);
        assert!(r.residuals["alpha_deviation"] < 1e-8);
    }

    #[test]
    fn mixed_at_half_is_the_corner() {
        for d_v in 1..=3 {
            let r = e_mixed(&WernerSpec::new(0.5, d_v).unwrap()).unwrap();
            assert!(r.e.bits().abs() < 1e-15);
            assert!(r.boundary && r.converged);
        }
    }

    #[test]
    fn mixed_never_exceeds_pure() {
        for d_v in 1..=3 {
            for i in 0..=20 {
                let s = WernerSpec::new(i as f64 / 20.0, d_v).unwrap();
                let m = e_mixed(&s).unwrap();
                assert!(m.e.bits() <= e_pure(&s).e.bits() + 1e-15, "m0 = {}, d_v = {d_v}", s.m0());
            }
        }
    }
}
