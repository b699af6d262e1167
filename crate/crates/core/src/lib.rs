//! Entanglement of two-qubit Bell mixtures.
//!
//! The crate evaluates pure- and mixed-minimization entanglement of Werner
//! states from closed-form algebra and cross-checks every closed form against
//! dense brute-force references in [`oracle`].
//!
//! Conventions used throughout:
//!
//! * Standard basis ordering is `|ab⟩` with `a` the left qubit, index `2a + b`.
//! * 4×4 operators are Bell-basis matrices unless tagged otherwise
//!   (see [`bell_algebra::Basis`]).
//! * Entropies returned as [`pure_state::EntropyValue`] are in bits; the
//!   Lagrangian and all operator logarithms use natural logs.

pub mod bell_algebra;
pub mod complex_ansatz;
pub mod eq_solver;
mod error;
pub mod hermitian2;
pub mod linalg;
pub mod oracle;
pub mod preconcurrence;
pub mod pure_state;
pub mod tol;
pub mod verify;
pub mod werner;

pub use error::{Error, Result};

pub use num_complex::Complex64;
