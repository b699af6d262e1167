//! Named float tolerances. Every equality check in the crate goes through one
//! of these so thresholds can be audited in a single place.

/// Bell-basis algebra: matrix elements, conversions, partial traces.
pub const ALGEBRA: f64 = 1e-13;

/// Hermiticity accepted on input to the 2×2 decomposition.
pub const HERMITIAN_INPUT: f64 = 1e-12;

/// Normalization slack for probabilities and coefficient vectors.
pub const NORMALIZATION: f64 = 1e-12;

/// Largest negative eigenvalue still treated as zero.
pub const EIGEN_NEGATIVE: f64 = 1e-12;

/// Eigenvalues at or below this are outside the support of a log.
pub const SUPPORT: f64 = 1e-14;

/// Dense versus closed-form Lagrangian and entanglement operators.
pub const LAGRANGIAN: f64 = 1e-9;

/// Stationarity residual accepted for a root of the ε–q system.
pub const STATIONARITY: f64 = 1e-10;

/// α-deviation of an entanglement operator that still counts as insensitive.
pub const INSENSITIVE: f64 = 1e-8;

/// Regulator floor: roots with `q` below this are trivial.
pub const Q_MIN: f64 = 1e-8;

/// Default for checks without a dedicated tolerance; `BELLMIX_TOL` overrides it.
pub const DEFAULT: f64 = 1e-10;

/// Name of the environment variable that overrides [`DEFAULT`].
pub const ENV_VAR: &str = "BELLMIX_TOL";

/// [`DEFAULT`], or the value of `BELLMIX_TOL` when it parses as a positive float.
pub fn global() -> f64 {
    std::env::var(ENV_VAR)
        .ok()
        .and_then(|s| s.trim().parse::<f64>().ok())
        .filter(|t| t.is_finite() && *t > 0.0)
        .unwrap_or(DEFAULT)
}
