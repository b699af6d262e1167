use serde::{Deserialize, Serialize};

use super::lagrangian_dense_raw;
use crate::werner::WernerSpec;
use crate::Result;

/// Grid and refinement settings for [`brute_minimize_with`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BruteConfig {
    /// Points per axis of the coarse grid.
    pub coarse: usize,
    /// Number of zoom rounds around the running best point.
    pub rounds: usize,
    /// Each round shrinks the grid spacing by this factor.
    pub zoom: usize,
    /// Final coordinate golden-section tolerance.
    pub tol: f64,
}

impl Default for BruteConfig {
    fn default() -> Self {
        BruteConfig {
            coarse: 256,
            rounds: 3,
            zoom: 10,
            tol: 1e-10,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BruteMinimum {
    pub q: f64,
    pub eps: f64,
    pub lagrangian: f64,
    pub evaluations: usize,
}

/// Minimizes the dense Lagrangian over `ε ∈ [0,1]` and `q ∈ [0, q_max(ε)]`
/// with default settings.
pub fn brute_minimize(spec: &WernerSpec) -> Result<BruteMinimum> {
    brute_minimize_with(spec, &BruteConfig::default())
}

/// The search runs in `(ε, t)` with `q = t·q_max(ε)` so that the region is a
/// unit square. `d_v = 1` does not depend on `ε` and searches `t` only.
pub fn brute_minimize_with(spec: &WernerSpec, cfg: &BruteConfig) -> Result<BruteMinimum> {
    let one_dim = spec.d_v() == 1;
    let mut evals = 0usize;
    let mut f = |eps: f64, t: f64| -> Result<f64> {
        evals += 1;
        let q = t.clamp(0.0, 1.0) * spec.q_max(eps);
        lagrangian_dense_raw(spec, q, eps)
    };

    let n = cfg.coarse.max(2);
    let eps_points = if one_dim { 1 } else { n };
    let mut best = (f64::INFINITY, 0.0, 0.0);
    for i in 0..eps_points {
        let eps = if one_dim { 0.0 } else { i as f64 / (n - 1) as f64 };
        for j in 0..n {
            let t = j as f64 / (n - 1) as f64;
            let l = f(eps, t)?;
            if l < best.0 {
                best = (l, eps, t);
            }
        }
    }

    let mut h = 1.0 / (n - 1) as f64;
    for _ in 0..cfg.rounds {
        let m = cfg.zoom.max(2);
        let (e_lo, e_hi) = ((best.1 - 2.0 * h).max(0.0), (best.1 + 2.0 * h).min(1.0));
        let (t_lo, t_hi) = ((best.2 - 2.0 * h).max(0.0), (best.2 + 2.0 * h).min(1.0));
        let steps = 4 * m;
        for i in 0..=if one_dim { 0 } else { steps } {
            let eps = if one_dim { 0.0 } else { e_lo + (e_hi - e_lo) * i as f64 / steps as f64 };
            for j in 0..=steps {
                let t = t_lo + (t_hi - t_lo) * j as f64 / steps as f64;
                let l = f(eps, t)?;
                if l < best.0 {
                    best = (l, eps, t);
                }
            }
        }
        h /= m as f64;
    }

    // Alternate golden-section searches along t and ε inside the last cell.
    let mut width = 2.0 * h;
    for _ in 0..60 {
        let before = best.0;
        let eps = best.1;
        let (lo, hi) = ((best.2 - width).max(0.0), (best.2 + width).min(1.0));
        let (t, l) = golden(|t| f(eps, t), lo, hi, cfg.tol)?;
        if l < best.0 {
            best = (l, eps, t);
        }
        if !one_dim {
            let t = best.2;
            let (lo, hi) = ((best.1 - width).max(0.0), (best.1 + width).min(1.0));
            let (e, l) = golden(|e| f(e, t), lo, hi, cfg.tol)?;
            if l < best.0 {
                best = (l, e, t);
            }
        }
        if before - best.0 <= 1e-16 {
            width *= 0.5;
            if width < cfg.tol {
                break;
            }
        }
    }

    Ok(BruteMinimum {
        q: best.2 * spec.q_max(best.1),
        eps: best.1,
        lagrangian: best.0,
        evaluations: evals,
    })
}

/// Golden-section search on `[a, b]`, returning the best point seen
/// (including the endpoints).
fn golden(mut f: impl FnMut(f64) -> Result<f64>, a: f64, b: f64, tol: f64) -> Result<(f64, f64)> {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (a, b);
    let fa = f(a)?;
    let fb = f(b)?;
    let mut best = if fa < fb { (a, fa) } else { (b, fb) };
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    while (b - a).abs() > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d)?;
        }
        for (x, fx) in [(c, fc), (d, fd)] {
            if fx < best.1 {
                best = (x, fx);
            }
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_finds_parabola_minimum() {
        let (x, fx) = golden(|x| Ok((x - 0.3) * (x - 0.3)), 0.0, 1.0, 1e-10).unwrap();
        assert!((x - 0.3).abs() < 1e-9 && fx < 1e-18);
    }

    #[test]
    fn pure_state_minimizer_is_the_corner() {
        let s = WernerSpec::new(1.0, 1).unwrap();
        let m = brute_minimize_with(&s, &BruteConfig { coarse: 16, ..Default::default() }).unwrap();
        assert!((m.lagrangian - 2.0 * std::f64::consts::LN_2).abs() < 1e-12);
        assert_eq!(m.q, 0.0);
    }
}
