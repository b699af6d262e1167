//! Stationary points of the Werner Lagrangian for `d_v > 1`: the exact
//! two-equation ε–q system and its approximate single-variable reduction
//! through `ρ = m0 m1 η − q² d_v`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::werner::{lagrangian, stationarity_gradient, AnsatzParams, WernerSpec};
use crate::{tol, Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RootKind {
    /// `(ε, q) = (1, 0)`.
    Trivial,
    /// A root with `q > q_min`.
    Physical,
    /// From the ρ-approximation, not a root of the exact system.
    Approximate,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EqSystemRoot {
    pub eps: f64,
    pub q: f64,
    /// `q_max(ε)² − q²`, carried at full precision.
    pub gap: f64,
    pub residuals: [f64; 2],
    pub kind: RootKind,
    pub converged: bool,
    pub iterations: usize,
}

impl EqSystemRoot {
    /// Ansatz parameters at the root, built from `gap`.
    pub fn params(&self, spec: &WernerSpec) -> AnsatzParams {
        AnsatzParams::from_gap(spec, self.eps, self.gap)
    }

    pub fn residual_norm(&self) -> f64 {
        self.residuals[0].abs().max(self.residuals[1].abs())
    }
}

/// Deviations of the approximate root from the pure-min reference values.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelfConsistency {
    pub du: f64,
    pub dk: f64,
    pub dx: f64,
    pub dy: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RhoApprox {
    pub rho: f64,
    pub eps: f64,
    pub q: f64,
    pub f_residual: f64,
    pub self_consistency: SelfConsistency,
}

/// Outcome of [`solve_exact`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExactSolution {
    /// Root reached from the ρ-approximation seed, when that seed exists and
    /// Newton converges to a physical root from it.
    pub near_pure: Option<EqSystemRoot>,
    /// Distinct converged physical roots from every start, the near-pure one
    /// included; sorted by Lagrangian.
    pub roots: Vec<EqSystemRoot>,
    /// Lowest-Lagrangian converged root, or the best iterate seen when
    /// nothing converged.
    pub best: EqSystemRoot,
    pub approx: Option<RhoApprox>,
    pub starts: usize,
}

/// Newton settings.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub max_iter: usize,
    pub max_halvings: usize,
    pub random_starts: usize,
    /// Deterministic starts on a `grid_starts × grid_starts` grid in
    /// `(log ε, q/q_max)`.
    pub grid_starts: usize,
    pub seed: u64,
    pub q_min: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            max_iter: 200,
            max_halvings: 30,
            random_starts: 8,
            grid_starts: 6,
            seed: 0x5eed,
            q_min: tol::Q_MIN,
        }
    }
}

fn require_multi(spec: &WernerSpec) -> Result<()> {
    if spec.d_v() < 2 {
        return Err(Error::Domain {
            what: "d_v",
            value: spec.d_v() as f64,
            reason: "the eps-q system needs d_v > 1",
        });
    }
    Ok(())
}

fn in_domain(spec: &WernerSpec, eps: f64, q: f64) -> bool {
    eps >= 0.0 && q >= 0.0 && eps.is_finite() && q.is_finite() && q <= spec.q_max(eps)
}

/// `(∂ℒ/∂ε, ∂ℒ/∂q)`; infinite outside the domain or where a log argument
/// vanishes.
pub fn residuals(spec: &WernerSpec, eps: f64, q: f64) -> [f64; 2] {
    if !in_domain(spec, eps, q) {
        return [f64::INFINITY; 2];
    }
    let g = stationarity_gradient(spec, &AnsatzParams::unchecked(spec, q, eps));
    g.map(|x| if x.is_nan() { f64::INFINITY } else { x })
}

/// The same system with the logs exponentiated:
/// `εm1 − λ₊^{½−k/2X} λ₋^{½+k/2X}` and `(λ₋/λ₊)^Y − ((½−Y)/(½+Y))^{2X}`.
pub fn power_residuals(spec: &WernerSpec, eps: f64, q: f64) -> [f64; 2] {
    if !in_domain(spec, eps, q) {
        return [f64::INFINITY; 2];
    }
    let p = AnsatzParams::unchecked(spec, q, eps);
    let lp = p.lambda_plus();
    let lm = p.lambda_minus(spec);
    let r = if p.x == 0.0 { 0.0 } else { p.k / (2.0 * p.x) };
    let first = if (spec.d_v() as f64 - 1.0) * spec.m1() == 0.0 {
        0.0
    } else {
        p.eps * spec.m1() - lp.powf(0.5 - r) * lm.powf(0.5 + r)
    };
    let second = (lm / lp).powf(p.y) - ((0.5 - p.y) / (0.5 + p.y)).powf(2.0 * p.x);
    [first, second]
}

fn y0(spec: &WernerSpec) -> f64 {
    spec.y_pure()
}

/// `f(ρ) = −ρ + Y0²[1 − ρ^{m0}(d_v−1)/(1−m0)] − [½ − ρ^{Y0}(½+Y0)]²`.
pub fn f_rho(spec: &WernerSpec, rho: f64) -> f64 {
    let (m0, d) = (spec.m0(), spec.d_v() as f64);
    let y0 = y0(spec);
    let pm = if rho == 0.0 { 0.0 } else { rho.powf(m0) };
    let py = if rho == 0.0 && y0 > 0.0 { 0.0 } else { rho.powf(y0) };
    let tail = 0.5 - py * (0.5 + y0);
    -rho + y0 * y0 * (1.0 - pm * (d - 1.0) / (1.0 - m0)) - tail * tail
}

/// Exact first and second derivatives of [`f_rho`] for `ρ > 0`.
pub fn f_rho_derivatives(spec: &WernerSpec, rho: f64) -> (f64, f64) {
    let (m0, d) = (spec.m0(), spec.d_v() as f64);
    let y0 = y0(spec);
    let c = y0 * y0 * (d - 1.0) / (1.0 - m0);
    let b = 0.5 + y0;
    let py = rho.powf(y0);
    let tail = 0.5 - py * b;
    let dpy = y0 * rho.powf(y0 - 1.0);
    let ddpy = y0 * (y0 - 1.0) * rho.powf(y0 - 2.0);
    let first = -1.0 - c * m0 * rho.powf(m0 - 1.0) + 2.0 * tail * b * dpy;
    let second = -c * m0 * (m0 - 1.0) * rho.powf(m0 - 2.0) - 2.0 * b * b * dpy * dpy + 2.0 * tail * b * ddpy;
    (first, second)
}

/// Small-ρ, small-|δm| limits with `δm = m0 − ½`:
/// `f' ≈ ρ^{−½}[−¼(d_v−1)ρ^{δm} + ½]`,
/// `f'' ≈ ρ^{−3/2}[−¼(d_v−1)(δm−½)ρ^{δm} − ¼]`.
pub fn f_rho_derivative_limits(spec: &WernerSpec, rho: f64) -> (f64, f64) {
    let d = spec.d_v() as f64;
    let dm = spec.m0() - 0.5;
    let p = rho.powf(dm);
    let first = rho.powf(-0.5) * (-0.25 * (d - 1.0) * p + 0.5);
    let second = rho.powf(-1.5) * (-0.25 * (d - 1.0) * (dm - 0.5) * p - 0.25);
    (first, second)
}

/// The leading branch of each limit, chosen by the sign of `δm`.
pub fn f_rho_derivative_asymptotes(spec: &WernerSpec, rho: f64) -> (f64, f64) {
    let d = spec.d_v() as f64;
    let dm = spec.m0() - 0.5;
    if dm > 0.0 {
        (0.5 / rho.sqrt(), -0.25 * rho.powf(-1.5))
    } else {
        (
            -(d - 1.0) / 4.0 * rho.powf(-0.5 - dm.abs()),
            (d - 1.0) / 8.0 * rho.powf(-1.5 - dm.abs()),
        )
    }
}

/// `ε = ρ^{m0} d_v/(1−m0)`, `q = [½ − ρ^{Y0}(½+Y0)]/√d_v`.
pub fn eps_q_from_rho(spec: &WernerSpec, rho: f64) -> (f64, f64) {
    let (m0, d) = (spec.m0(), spec.d_v() as f64);
    let y0 = y0(spec);
    let eps = rho.powf(m0) * d / (1.0 - m0);
    let q = (0.5 - rho.powf(y0) * (0.5 + y0)) / d.sqrt();
    (eps, q)
}

/// `ρ_max = m0 m1 d_v`.
pub fn rho_max(spec: &WernerSpec) -> f64 {
    spec.m0() * spec.m1() * spec.d_v() as f64
}

/// Log-spaced samples of `f` on `[1e−12, ρ_max]`.
pub fn f_rho_samples(spec: &WernerSpec, n: usize) -> Vec<(f64, f64)> {
    let hi = rho_max(spec);
    if hi <= 1e-12 {
        return vec![(hi, f_rho(spec, hi))];
    }
    let (a, b) = (1e-12f64.ln(), hi.ln());
    (0..n)
        .map(|i| {
            let rho = if i + 1 == n { hi } else { (a + (b - a) * i as f64 / (n - 1) as f64).exp() };
            (rho, f_rho(spec, rho))
        })
        .collect()
}

/// Root of `f` in the first bracketing interval of 64 log-spaced samples.
pub fn solve_approx(spec: &WernerSpec) -> Result<RhoApprox> {
    require_multi(spec)?;
    if spec.m0() >= 1.0 || spec.m0() <= 0.0 {
        return Err(Error::NoRoot { rho_max: rho_max(spec) });
    }
    let samples = f_rho_samples(spec, 64);
    let bracket = samples
        .windows(2)
        .find(|w| w[0].1 == 0.0 || w[0].1.signum() != w[1].1.signum())
        .ok_or(Error::NoRoot { rho_max: rho_max(spec) })?;
    let (mut lo, mut hi) = (bracket[0].0, bracket[1].0);
    let f_lo = bracket[0].1;
    if f_lo != 0.0 {
        for _ in 0..300 {
            let mid = (lo * hi).sqrt();
            if mid <= lo || mid >= hi {
                break;
            }
            let fm = f_rho(spec, mid);
            if fm == 0.0 {
                lo = mid;
                hi = mid;
                break;
            }
            if fm.signum() == f_lo.signum() {
                lo = mid;
            } else {
                hi = mid;
            }
        }
    }
    let rho = if f_lo == 0.0 { lo } else { 0.5 * (lo + hi) };
    let (eps, q) = eps_q_from_rho(spec, rho);
    let p = AnsatzParams::unchecked(spec, q, eps);
    let y0 = y0(spec);
    Ok(RhoApprox {
        rho,
        eps,
        q,
        f_residual: f_rho(spec, rho).abs(),
        self_consistency: SelfConsistency {
            du: (p.u - 1.0).abs(),
            dk: (p.k - (spec.m0() - 0.5)).abs(),
            dx: (p.x - 0.5).abs(),
            dy: (p.y - y0).abs(),
        },
    })
}

/// Unknowns `(ln ε, ln ρ')` with `ρ' = q_max(ε)² − q²`, which keep Newton
/// iterates inside the domain and resolve the stiff corner where `λ₋ → 0`.
fn to_coords(spec: &WernerSpec, eps: f64, q: f64) -> Option<[f64; 2]> {
    let qm = spec.q_max(eps);
    let gap = (qm - q) * (qm + q);
    if eps <= 0.0 || gap <= 0.0 {
        return None;
    }
    Some([eps.ln(), gap.ln()])
}

fn from_coords(spec: &WernerSpec, c: [f64; 2]) -> Option<(f64, f64)> {
    let eps = c[0].exp();
    let qm = spec.q_max(eps);
    let q2 = qm * qm - c[1].exp();
    if !(eps.is_finite() && q2 >= 0.0) {
        return None;
    }
    Some((eps, q2.sqrt()))
}

fn coord_residual(spec: &WernerSpec, c: [f64; 2]) -> [f64; 2] {
    let eps = c[0].exp();
    let gap = c[1].exp();
    let qm = spec.q_max(eps);
    if !eps.is_finite() || gap > qm * qm {
        return [f64::INFINITY; 2];
    }
    let g = stationarity_gradient(spec, &AnsatzParams::from_gap(spec, eps, gap));
    g.map(|x| if x.is_nan() { f64::INFINITY } else { x })
}

fn norm(r: [f64; 2]) -> f64 {
    r[0].hypot(r[1])
}

/// Damped Newton in `(ln ε, ln ρ')` with a central-difference Jacobian.
pub fn newton(spec: &WernerSpec, eps0: f64, q0: f64, cfg: &SolverConfig) -> EqSystemRoot {
    let mut c = match to_coords(spec, eps0, q0) {
        Some(c) => c,
        None => {
            return EqSystemRoot {
                eps: eps0,
                q: q0,
                gap: spec.q_max(eps0).powi(2) - q0 * q0,
                residuals: residuals(spec, eps0, q0),
                kind: RootKind::Physical,
                converged: false,
                iterations: 0,
            }
        }
    };
    let mut r = coord_residual(spec, c);
    let mut iterations = 0;
    while iterations < cfg.max_iter && !(r[0].abs() <= tol::STATIONARITY * 0.01 && r[1].abs() <= tol::STATIONARITY * 0.01) {
        iterations += 1;
        let mut jac = [[0.0; 2]; 2];
        for j in 0..2 {
            let h = 1e-6 * c[j].abs().max(1.0);
            let mut plus = c;
            let mut minus = c;
            plus[j] += h;
            minus[j] -= h;
            let (rp, rm) = (coord_residual(spec, plus), coord_residual(spec, minus));
            for i in 0..2 {
                jac[i][j] = (rp[i] - rm[i]) / (2.0 * h);
            }
        }
        let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
        if !det.is_finite() || det == 0.0 {
            break;
        }
        let step = [
            (jac[1][1] * r[0] - jac[0][1] * r[1]) / det,
            (jac[0][0] * r[1] - jac[1][0] * r[0]) / det,
        ];
        let mut scale = 1.0;
        let current = norm(r);
        let mut accepted = false;
        for _ in 0..=cfg.max_halvings {
            let trial = [c[0] - scale * step[0], c[1] - scale * step[1]];
            let rt = coord_residual(spec, trial);
            if norm(rt) < current {
                c = trial;
                r = rt;
                accepted = true;
                break;
            }
            scale *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    let (eps, q, gap, res) = match from_coords(spec, c) {
        Some((eps, q)) => (eps, q, c[1].exp(), coord_residual(spec, c)),
        None => (eps0, q0, spec.q_max(eps0).powi(2) - q0 * q0, residuals(spec, eps0, q0)),
    };
    let converged = res[0].abs() <= tol::STATIONARITY && res[1].abs() <= tol::STATIONARITY;
    let kind = if q <= cfg.q_min { RootKind::Trivial } else { RootKind::Physical };
    EqSystemRoot {
        eps,
        q,
        gap,
        residuals: res,
        kind,
        converged,
        iterations,
    }
}

fn same_root(a: &EqSystemRoot, b: &EqSystemRoot) -> bool {
    (a.eps - b.eps).abs() <= 1e-7 * a.eps.abs().max(1.0) && (a.q - b.q).abs() <= 1e-7
}

/// Newton from the ρ-approximation seed, then from seeded random interior
/// starts. Every distinct converged physical root is kept.
pub fn solve_exact(spec: &WernerSpec) -> Result<ExactSolution> {
    solve_exact_with(spec, &SolverConfig::default())
}

pub fn solve_exact_with(spec: &WernerSpec, cfg: &SolverConfig) -> Result<ExactSolution> {
    require_multi(spec)?;
    let approx = solve_approx(spec).ok();
    let mut attempts = Vec::new();
    let mut near_pure = None;
    if let Some(a) = &approx {
        let root = newton(spec, a.eps, a.q, cfg);
        if root.converged && root.kind == RootKind::Physical {
            near_pure = Some(root.clone());
        }
        attempts.push(root);
    }
    let g = cfg.grid_starts;
    for i in 0..g {
        let eps = 10f64.powf(-3.0 * (1.0 - i as f64 / (g - 1).max(1) as f64));
        for j in 0..g {
            let t = 1.0 - 0.5 * 10f64.powf(-3.0 * j as f64 / (g - 1).max(1) as f64);
            attempts.push(newton(spec, eps, t * spec.q_max(eps), cfg));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    for _ in 0..cfg.random_starts {
        let eps = rng.random_range(0.01..1.0);
        let t: f64 = rng.random_range(0.05..0.999);
        attempts.push(newton(spec, eps, t * spec.q_max(eps), cfg));
    }
    let starts = attempts.len();
    let value = |r: &EqSystemRoot| lagrangian(spec, &r.params(spec));
    let mut roots: Vec<EqSystemRoot> = Vec::new();
    for r in attempts.iter().filter(|r| r.converged && r.kind == RootKind::Physical) {
        if !roots.iter().any(|s| same_root(s, r)) {
            roots.push(r.clone());
        }
    }
    roots.sort_by(|a, b| value(a).total_cmp(&value(b)));
    let best = match roots.first() {
        Some(r) => r.clone(),
        None => attempts
            .iter()
            .min_by(|a, b| a.residual_norm().total_cmp(&b.residual_norm()))
            .cloned()
            .expect("at least one start"),
    };
    Ok(ExactSolution {
        near_pure,
        roots,
        best,
        approx,
        starts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trivial_root() {
        for d_v in 2..=3 {
            let s = WernerSpec::new(0.6, d_v).unwrap();
            assert_eq!(residuals(&s, 1.0, 0.0), [0.0, 0.0]);
            assert_eq!(power_residuals(&s, 1.0, 0.0), [0.0, 0.0]);
        }
    }

    #[test]
    fn pure_corner_is_not_a_root() {
        let s = WernerSpec::new(0.6, 3).unwrap();
        let r = residuals(&s, 0.0, (s.m0() * s.m1()).sqrt());
        assert!(r.iter().any(|x| !x.is_finite() || x.abs() > 1.0));
    }

    #[test]
    fn f_at_zero() {
        assert_eq!(f_rho(&WernerSpec::new(0.5, 3).unwrap(), 0.0), 0.0);
        assert!((f_rho(&WernerSpec::new(0.75, 2).unwrap(), 0.0) + 0.0625).abs() < 1e-15);
    }

    #[test]
    fn f_derivatives_match_finite_differences() {
        let s = WernerSpec::new(0.55, 3).unwrap();
        let rho = 1e-3;
        let h = 1e-7;
        let (d1, d2) = f_rho_derivatives(&s, rho);
        let fd1 = (f_rho(&s, rho + h) - f_rho(&s, rho - h)) / (2.0 * h);
        let fd2 = (f_rho(&s, rho + h) - 2.0 * f_rho(&s, rho) + f_rho(&s, rho - h)) / (h * h);
        assert!((d1 - fd1).abs() < 1e-6 * d1.abs().max(1.0));
        assert!((d2 - fd2).abs() < 1e-3 * d2.abs().max(1.0));
    }

    #[test]
    fn approx_root_existence() {
        assert!(solve_approx(&WernerSpec::new(0.45, 2).unwrap()).is_ok());
        assert!(solve_approx(&WernerSpec::new(0.55, 2).unwrap()).is_ok());
        assert!(solve_approx(&WernerSpec::new(0.55, 3).unwrap()).is_ok());
        assert!(matches!(solve_approx(&WernerSpec::new(0.45, 3).unwrap()), Err(Error::NoRoot { .. })));
    }

    #[test]
    fn approx_is_self_consistent_near_half() {
        let a = solve_approx(&WernerSpec::new(0.52, 2).unwrap()).unwrap();
        assert!(a.f_residual <= 1e-12);
        let sc = a.self_consistency;
        assert!(sc.du < 0.05 && sc.dk < 0.05 && sc.dx < 0.05 && sc.dy < 0.05, "{sc:?}");
    }

    #[test]
    fn exact_roots_match_reference_values() {
        // (m0, d_v, ε, q)
        let cases = [
            (0.55, 3, 0.025_535_901, 0.284_747_275),
            (0.52, 2, 0.002_002_034, 0.353_093_279),
            (0.45, 2, 0.044_188_193, 0.347_828_365),
        ];
        for (m0, d_v, eps, q) in cases {
            let s = WernerSpec::new(m0, d_v).unwrap();
            let sol = solve_exact(&s).unwrap();
            let r = sol.near_pure.expect("near-pure root");
            assert!(r.residual_norm() <= 1e-10);
            assert!((r.eps - eps).abs() < 1e-8, "{} vs {eps}", r.eps);
            assert!((r.q - q).abs() < 1e-8, "{} vs {q}", r.q);
            let pr = power_residuals(&s, r.eps, r.q);
            assert!(pr[0].abs() < 1e-10 && pr[1].abs() < 1e-10);
        }
    }

    #[test]
    fn no_near_pure_root_below_half_in_three_dimensions() {
        let s = WernerSpec::new(0.45, 3).unwrap();
        let sol = solve_exact(&s).unwrap();
        assert!(sol.approx.is_none());
        assert!(sol.near_pure.is_none());
        assert_eq!(sol.starts, 8 + 36);
    }

    #[test]
    fn converges_near_half() {
        for d_v in [2, 3] {
            for i in 1..=16 {
                let m0 = 0.5 + 0.15 * i as f64 / 16.0;
                let s = WernerSpec::new(m0, d_v).unwrap();
                let sol = solve_exact(&s).unwrap();
                let r = &sol.roots[0];
                assert!(r.converged && r.kind == RootKind::Physical, "m0 = {m0}, d_v = {d_v}");
                assert!(r.residual_norm() <= tol::STATIONARITY);
            }
        }
    }

    #[test]
    fn root_beyond_approximation_range() {
        // The ρ-approximation has no root here; the seed grid still finds one.
        let s = WernerSpec::new(0.7, 3).unwrap();
        let sol = solve_exact(&s).unwrap();
        assert!(sol.approx.is_none());
        assert!((sol.best.eps - 0.137_894).abs() < 1e-5);
        assert!((sol.best.q - 0.250_409).abs() < 1e-5);
    }
}
