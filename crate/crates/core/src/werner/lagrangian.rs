use serde::{Deserialize, Serialize};

use super::{AnsatzParams, WernerSpec};
use crate::linalg::xlogx;
use crate::pure_state::h_e_clamped;

/// `l_K = Σ_α tr(K ln K)` and `l_R = Σ_α tr(K ln R)`; `ℒ = l_K − l_R`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LagrangianParts {
    pub l_k: f64,
    pub l_r: f64,
}

impl LagrangianParts {
    pub fn total(&self) -> f64 {
        self.l_k - self.l_r
    }
}

pub fn lagrangian_parts(spec: &WernerSpec, p: &AnsatzParams) -> LagrangianParts {
    let ln_n = (spec.n_alpha() as f64).ln();
    let d = spec.d_v() as f64;
    let l_k = -ln_n
        + xlogx(p.lambda_plus())
        + xlogx(p.lambda_minus(spec))
        + (d - 1.0) * xlogx(p.lambda_zero(spec));
    let l_r = -ln_n - 2.0 * h_e_clamped(0.5 + p.y);
    LagrangianParts { l_k, l_r }
}

/// `Σ_σ (u/2+σX) ln(u/2+σX) + (d_v−1) εm1 ln(εm1) + 2 h_e(½+Y)`.
pub fn lagrangian(spec: &WernerSpec, p: &AnsatzParams) -> f64 {
    let d = spec.d_v() as f64;
    xlogx(p.lambda_plus())
        + xlogx(p.lambda_minus(spec))
        + (d - 1.0) * xlogx(p.lambda_zero(spec))
        + 2.0 * h_e_clamped(0.5 + p.y)
}

/// The `d_v = 1` form, `−h_e(½ + √(k² + Y²)) + 2 h_e(½ + Y)`.
pub fn lagrangian_d1(k: f64, y: f64) -> f64 {
    -h_e_clamped(0.5 + k.hypot(y)) + 2.0 * h_e_clamped(0.5 + y)
}

/// `(∂ℒ/∂ε, ∂ℒ/∂q)`.
///
/// Zero eigenvalues make the logs diverge; the result is then infinite (or
/// NaN when the point is outside the domain), never silently finite.
pub fn stationarity_gradient(spec: &WernerSpec, p: &AnsatzParams) -> [f64; 2] {
    let d = spec.d_v() as f64;
    let lp = p.lambda_plus();
    let lm = p.lambda_minus(spec);
    let (w_plus, w_minus) = if p.x == 0.0 {
        (0.5, 0.5)
    } else {
        (0.5 - p.k / (2.0 * p.x), 0.5 + p.k / (2.0 * p.x))
    };
    let pref = (d - 1.0) * spec.m1();
    let weighted_log = |w: f64, lam: f64| if w == 0.0 { 0.0 } else { w * lam.ln() };
    let d_eps = if pref == 0.0 {
        0.0
    } else {
        pref * ((p.eps * spec.m1()).ln() - weighted_log(w_plus, lp) - weighted_log(w_minus, lm))
    };
    let spectral = if p.y == 0.0 { 0.0 } else { (p.y / p.x) * (lp / lm).ln() };
    let d_q = d.sqrt() * (spectral + 2.0 * ((0.5 - p.y) / (0.5 + p.y)).ln());
    [d_eps, d_q]
}
