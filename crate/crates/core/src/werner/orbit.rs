use std::f64::consts::LN_2;

use serde::{Deserialize, Serialize};

use super::{delta_operator, lagrangian, AnsatzParams, Mode, WernerSpec};
use crate::oracle::bell_mixture_eof;
use crate::Result;

/// How strongly `Δ` depends on the member index at a given point, and how the
/// orbit's entanglement compares with the Bell-mixture reference value.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InsensitivityReport {
    pub mode: Mode,
    pub max_deviation: f64,
    pub insensitive: bool,
    pub e_orbit: f64,
    pub e_reference: f64,
    pub matches_reference: bool,
}

/// Insensitivity diagnostics for the orbit through `p`.
///
/// Insensitivity is necessary for a decomposition to be optimal but this
/// check makes no claim of sufficiency.
pub fn orbit_insensitivity_check(spec: &WernerSpec, p: &AnsatzParams, mode: Mode) -> Result<InsensitivityReport> {
    let out = delta_operator(spec, p, mode)?;
    let e_orbit = lagrangian(spec, p) / (2.0 * LN_2);
    let mut w = spec.weights();
    w.sort_by(|a, b| b.total_cmp(a));
    let e_reference = bell_mixture_eof(&w)?;
    Ok(InsensitivityReport {
        mode,
        max_deviation: out.alpha_deviation,
        insensitive: out.insensitive,
        e_orbit,
        e_reference,
        matches_reference: (e_orbit - e_reference).abs() <= 1e-9,
    })
}
