//! Stationary points of the pre-concurrence `C_θ = |Σ_j e^{iθ_j} m_j|`.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::linalg::C64;
use crate::{tol, Error, Result};

pub const MAX_WEIGHTS: usize = 21;

/// Nonnegative weights `m_0..m_n` summing to one.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct WeightVector(Vec<f64>);

impl WeightVector {
    pub fn new(m: Vec<f64>) -> Result<Self> {
        if m.is_empty() {
            return Err(Error::Weights("at least one weight is required".into()));
        }
        if let Some(w) = m.iter().find(|w| !w.is_finite() || **w < 0.0) {
            return Err(Error::Weights(format!("weight {w} is negative or not finite")));
        }
        let sum: f64 = m.iter().sum();
        if (sum - 1.0).abs() > tol::NORMALIZATION {
            return Err(Error::Weights(format!("weights sum to {sum}, not 1")));
        }
        Ok(WeightVector(m))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    /// Number of weights after `m_0`.
    pub fn n(&self) -> usize {
        self.0.len() - 1
    }

    pub fn is_sorted_descending(&self) -> bool {
        self.0.iter().skip(1).all(|&w| w <= self.0[0])
    }
}

impl TryFrom<Vec<f64>> for WeightVector {
    type Error = Error;
    fn try_from(m: Vec<f64>) -> Result<Self> {
        WeightVector::new(m)
    }
}

impl From<WeightVector> for Vec<f64> {
    fn from(w: WeightVector) -> Self {
        w.0
    }
}

/// Pre-concurrence amplitude `γ_θ = Σ_j e^{iθ_j} m_j`. `theta` may omit
/// `θ_0` (length `n`) or include it (length `n + 1`, with `θ_0 = 0`).
pub fn gamma_theta(m: &WeightVector, theta: &[f64]) -> Result<C64> {
    let w = m.as_slice();
    let rest = if theta.len() == w.len() {
        if theta[0] != 0.0 {
            return Err(Error::Domain {
                what: "theta_0",
                value: theta[0],
                reason: "the first phase is fixed to zero",
            });
        }
        &theta[1..]
    } else if theta.len() == w.len() - 1 {
        theta
    } else {
        return Err(Error::Domain {
            what: "theta length",
            value: theta.len() as f64,
            reason: "expected n or n + 1 phases",
        });
    };
    Ok(C64::from(w[0]) + rest.iter().zip(&w[1..]).map(|(t, m)| C64::from_polar(*m, *t)).sum::<C64>())
}

/// `C_θ = |γ_θ|`.
pub fn c_theta(m: &WeightVector, theta: &[f64]) -> Result<f64> {
    Ok(gamma_theta(m, theta)?.norm())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StationaryPoint {
    /// `b_1..b_n`; `b_0 = 0`.
    pub signs: Vec<bool>,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StationarySet {
    /// Distinct `|Σ(−1)^{b_j} m_j|` in ascending order, zero excluded.
    pub values: Vec<f64>,
    /// `C_θ = 0` is attainable, which needs `m_0 ≤ ½`.
    pub zero_feasible: bool,
    /// One sign pattern per entry of `values`.
    pub witnesses: Vec<StationaryPoint>,
}

impl StationarySet {
    /// `values` with zero prepended when feasible.
    pub fn all_values(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.values.len() + 1);
        if self.zero_feasible && self.values.first().is_none_or(|&x| x > 1e-12) {
            v.push(0.0);
        }
        v.extend(&self.values);
        v
    }

    pub fn min(&self) -> f64 {
        if self.zero_feasible {
            0.0
        } else {
            self.values[0]
        }
    }
}

/// Sign-pattern phases `θ_j = π b_j`.
pub fn pattern_phases(signs: &[bool]) -> Vec<f64> {
    signs.iter().map(|&b| if b { PI } else { 0.0 }).collect()
}

/// Enumerates the `2ⁿ` sign patterns with `b_0 = 0`.
pub fn stationary_values(m: &WeightVector) -> Result<StationarySet> {
    let n = m.n();
    if n > MAX_WEIGHTS - 1 {
        return Err(Error::TooManyWeights {
            n,
            limit: MAX_WEIGHTS - 1,
        });
    }
    let w = m.as_slice();
    let mut found: Vec<StationaryPoint> = (0..1u32 << n)
        .map(|bits| {
            let signs: Vec<bool> = (0..n).map(|j| bits >> j & 1 == 1).collect();
            let s = w[0] + signs.iter().zip(&w[1..]).map(|(&b, &x)| if b { -x } else { x }).sum::<f64>();
            StationaryPoint { signs, value: s.abs() }
        })
        .collect();
    found.sort_by(|a, b| a.value.total_cmp(&b.value));
    let mut witnesses: Vec<StationaryPoint> = Vec::new();
    for p in found {
        if witnesses.last().is_none_or(|last| p.value - last.value > 1e-12) {
            witnesses.push(p);
        }
    }
    Ok(StationarySet {
        values: witnesses.iter().map(|p| p.value).collect(),
        zero_feasible: w[0] <= 0.5,
        witnesses,
    })
}

/// `m_j |γ_θ| sin(θ_j − ∠γ_θ)` for `j ≥ 1`.
pub fn first_variation(m: &WeightVector, theta: &[f64]) -> Result<Vec<f64>> {
    let g = gamma_theta(m, theta)?;
    let arg = g.arg();
    let rest = if theta.len() == m.as_slice().len() { &theta[1..] } else { theta };
    Ok(rest
        .iter()
        .zip(&m.as_slice()[1..])
        .map(|(t, w)| w * g.norm() * (t - arg).sin())
        .collect())
}

fn require_sorted(m: &WeightVector) -> Result<()> {
    if !m.is_sorted_descending() {
        return Err(Error::Weights("m_0 must be the largest weight".into()));
    }
    Ok(())
}

/// `0` if `m_0 ≤ ½`, else `m_0 − Σ_{j≥1} m_j`.
pub fn min_concurrence(m: &WeightVector) -> Result<f64> {
    require_sorted(m)?;
    let w = m.as_slice();
    Ok(if w[0] <= 0.5 { 0.0 } else { w[0] - w[1..].iter().sum::<f64>() })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridMinimum {
    pub theta: Vec<f64>,
    pub value: f64,
    pub evaluations: usize,
}

/// Minimum of `C_θ` over a uniform grid with `resolution` points per phase
/// on `[0, 2π)`.
pub fn grid_minimum(m: &WeightVector, resolution: usize) -> GridMinimum {
    let n = m.n();
    let res = resolution.max(1);
    let mut idx = vec![0usize; n];
    let mut best = GridMinimum {
        theta: vec![0.0; n],
        value: f64::INFINITY,
        evaluations: 0,
    };
    let step = TAU / res as f64;
    loop {
        let theta: Vec<f64> = idx.iter().map(|&i| i as f64 * step).collect();
        let v = c_theta(m, &theta).expect("length checked");
        best.evaluations += 1;
        if v < best.value {
            best.value = v;
            best.theta = theta;
        }
        let mut j = 0;
        while j < n {
            idx[j] += 1;
            if idx[j] < res {
                break;
            }
            idx[j] = 0;
            j += 1;
        }
        if j == n {
            break;
        }
    }
    best
}

/// Grid minimum followed by coordinate descent with shrinking steps.
pub fn refine_minimum(m: &WeightVector, start: &GridMinimum, resolution: usize) -> GridMinimum {
    let mut best = start.clone();
    let mut h = TAU / resolution.max(1) as f64;
    while h > 1e-15 && best.value > 0.0 {
        let mut improved = false;
        for j in 0..best.theta.len() {
            for s in [-1.0, 1.0] {
                let mut t = best.theta.clone();
                t[j] += s * h;
                let v = c_theta(m, &t).expect("length checked");
                best.evaluations += 1;
                if v < best.value {
                    best.value = v;
                    best.theta = t;
                    improved = true;
                }
            }
        }
        if !improved {
            h *= 0.5;
        }
    }
    best
}

/// Phase vector with `C_θ` minimal, found by a grid at `π/100` then descent.
pub fn minimum_witness(m: &WeightVector) -> GridMinimum {
    let res = if m.n() <= 3 { 200 } else { 8 };
    let g = grid_minimum(m, res);
    refine_minimum(m, &g, res)
}

/// `C_θ` over `[0,2π)²` for `n = 2`; rows are `θ_1`, columns `θ_2`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurfaceGrid {
    pub theta1: Vec<f64>,
    pub theta2: Vec<f64>,
    pub values: Vec<Vec<f64>>,
}

impl SurfaceGrid {
    pub fn min(&self) -> f64 {
        self.values.iter().flatten().copied().fold(f64::INFINITY, f64::min)
    }
}

pub fn surface_grid(m: &WeightVector, resolution: usize) -> Result<SurfaceGrid> {
    let w = m.as_slice();
    if w.len() != 3 {
        return Err(Error::Weights("the surface needs exactly three weights".into()));
    }
    if (w[1] - w[2]).abs() > tol::NORMALIZATION {
        return Err(Error::Weights("the surface needs m_1 = m_2".into()));
    }
    let res = resolution.max(1);
    let axis: Vec<f64> = (0..res).map(|i| TAU * i as f64 / res as f64).collect();
    let values = axis
        .iter()
        .map(|&t1| axis.iter().map(|&t2| c_theta(m, &[t1, t2]).expect("n = 2")).collect())
        .collect();
    Ok(SurfaceGrid {
        theta1: axis.clone(),
        theta2: axis,
        values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn wv(m: &[f64]) -> WeightVector {
        WeightVector::new(m.to_vec()).unwrap()
    }

    #[test]
    fn gamma_examples() {
        assert_eq!(gamma_theta(&wv(&[0.4, 0.3, 0.3]), &[0.0, 0.0]).unwrap(), C64::from(1.0));
        assert!(gamma_theta(&wv(&[0.5, 0.5]), &[PI]).unwrap().norm() < 1e-16);
        let g = gamma_theta(&wv(&[0.4, 0.3, 0.3]), &[0.0, TAU / 3.0, 2.0 * TAU / 3.0]).unwrap();
        // 0.4 + 0.3(e^{2πi/3} + e^{4πi/3}) = 0.4 − 0.3
        assert!((g - C64::from(0.1)).norm() < 1e-15);
        assert!(gamma_theta(&wv(&[0.4, 0.3, 0.3]), &[0.1, 0.0, 0.0]).is_err());
    }

    #[test]
    fn stationary_examples() {
        let s = stationary_values(&wv(&[0.7, 0.1, 0.1, 0.1])).unwrap();
        let want = [0.4, 0.6, 0.8, 1.0];
        assert_eq!(s.values.len(), 4);
        assert!(s.values.iter().zip(want).all(|(a, b)| (a - b).abs() < 1e-12));
        assert!(!s.zero_feasible);
        assert!((s.min() - 0.4).abs() < 1e-12);

        let s = stationary_values(&wv(&[0.4, 0.2, 0.2, 0.2])).unwrap();
        let all = s.all_values();
        let want = [0.0, 0.2, 0.6, 1.0];
        assert_eq!(all.len(), 4);
        assert!(all.iter().zip(want).all(|(a, b)| (a - b).abs() < 1e-12));

        assert_eq!(stationary_values(&wv(&[1.0])).unwrap().values, vec![1.0]);
    }

    #[test]
    fn witnesses_are_stationary() {
        let m = wv(&[0.35, 0.3, 0.2, 0.15]);
        for p in stationary_values(&m).unwrap().witnesses {
            let th = pattern_phases(&p.signs);
            assert!((c_theta(&m, &th).unwrap() - p.value).abs() < 1e-15);
            assert!(first_variation(&m, &th).unwrap().iter().all(|x| x.abs() <= 1e-12));
        }
    }

    #[test]
    fn too_many_weights() {
        let m = wv(&vec![1.0 / 22.0; 22]);
        assert!(matches!(stationary_values(&m), Err(Error::TooManyWeights { .. })));
    }

    #[test]
    fn min_rule() {
        assert!((min_concurrence(&wv(&[0.7, 0.3])).unwrap() - 0.4).abs() < 1e-15);
        assert_eq!(min_concurrence(&wv(&[0.5, 0.5])).unwrap(), 0.0);
        let m = wv(&[0.4, 0.3, 0.2, 0.1]);
        assert_eq!(min_concurrence(&m).unwrap(), 0.0);
        assert!(minimum_witness(&m).value < 1e-12);
        assert!(min_concurrence(&wv(&[0.2, 0.8])).is_err());
    }

    #[test]
    fn surface() {
        let g = surface_grid(&wv(&[0.6, 0.2, 0.2]), 400).unwrap();
        assert!((g.min() - 0.2).abs() < 1e-3);
        assert_eq!(g.values[0][0], 1.0);
        let third = 1.0 / 3.0;
        let g = surface_grid(&WeightVector::new(vec![third, third, 1.0 - 2.0 * third]).unwrap(), 300).unwrap();
        assert!(g.min() < 1e-3);
    }

    #[test]
    fn grid_minima_do_not_increase_when_doubling() {
        let m = wv(&[0.45, 0.35, 0.2]);
        let mut prev = f64::INFINITY;
        for res in [25, 50, 100, 200] {
            let v = grid_minimum(&m, res).value;
            assert!(v <= prev + 1e-15);
            prev = v;
        }
    }
}
