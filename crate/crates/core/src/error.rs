use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("Pauli index {0} is outside 0..=3")]
    PauliIndex(u8),

    #[error("operator is tagged {found:?}, expected {expected:?}")]
    WrongBasis {
        expected: crate::bell_algebra::Basis,
        found: crate::bell_algebra::Basis,
    },

    #[error("matrix is not Hermitian (max |H - H†| = {residual:e})")]
    NotHermitian { residual: f64 },

    #[error("{what} = {value} is out of domain: {reason}")]
    Domain {
        what: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("zero vector where a direction is required")]
    ZeroVector,

    #[error("no built-in v-family for d_v = {d_v}, N_alpha = {n_alpha}")]
    UnsupportedFamily { d_v: usize, n_alpha: usize },

    #[error("v-family violates the {constraint} constraint (residual {residual:e})")]
    VsetConstraint {
        constraint: &'static str,
        residual: f64,
    },

    #[error("ansatz member has a negative eigenvalue {value:e}")]
    NegativeEigenvalue { value: f64 },

    #[error("{0} diverges at the Y = 1/2 boundary")]
    Divergent(&'static str),

    #[error("projector family is degenerate (X = 0)")]
    Degenerate,

    #[error("f(rho) has no sign change on (0, {rho_max:e}]")]
    NoRoot { rho_max: f64 },

    #[error("solver stopped after {iterations} iterations with residual {residual:e}")]
    NotConverged { iterations: usize, residual: f64 },

    #[error("invalid weight vector: {0}")]
    Weights(String),

    #[error("{n} weights exceed the enumeration limit of {limit}")]
    TooManyWeights { n: usize, limit: usize },
}
