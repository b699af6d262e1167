//! Pauli-group structure constants, the magic-phase Bell basis, and
//! Bell-basis matrix elements and partial traces.
//!
//! The structure constants are exact Gaussian integers; no float enters
//! [`pauli_product`]. Everything else is `f64` and is compared at
//! [`tol::ALGEBRA`](crate::tol::ALGEBRA).

use std::fmt;
use std::ops::{Add, Mul, Neg};
use std::sync::LazyLock;

use nalgebra::Vector4;
use serde::{Deserialize, Serialize};

use crate::linalg::{kron, pauli, Mat2, Mat4, C64, I, ONE, ZERO};
use crate::{Error, Result};

/// An index into `{σ^0 = 1, σ_x, σ_y, σ_z}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliIndex(u8);

impl PauliIndex {
    pub const ALL: [PauliIndex; 4] = [PauliIndex(0), PauliIndex(1), PauliIndex(2), PauliIndex(3)];

    pub fn new(value: u8) -> Result<Self> {
        if value < 4 {
            Ok(PauliIndex(value))
        } else {
            Err(Error::PauliIndex(value))
        }
    }

    pub fn value(self) -> u8 {
        self.0
    }

    pub fn idx(self) -> usize {
        self.0 as usize
    }

    pub fn is_identity(self) -> bool {
        self.0 == 0
    }
}

impl fmt::Display for PauliIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A Gaussian integer `re + i·im`. Large enough for products of Pauli
/// matrix entries and structure constants.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub struct GaussInt {
    pub re: i32,
    pub im: i32,
}

impl GaussInt {
    pub const ZERO: GaussInt = GaussInt { re: 0, im: 0 };
    pub const ONE: GaussInt = GaussInt { re: 1, im: 0 };
    pub const I: GaussInt = GaussInt { re: 0, im: 1 };

    pub const fn new(re: i32, im: i32) -> Self {
        GaussInt { re, im }
    }

    pub fn conj(self) -> Self {
        GaussInt::new(self.re, -self.im)
    }

    pub fn to_c64(self) -> C64 {
        C64::new(self.re as f64, self.im as f64)
    }

    /// `i^k` for `k ≥ 0`.
    pub fn i_pow(k: u32) -> Self {
        match k % 4 {
            0 => GaussInt::ONE,
            1 => GaussInt::I,
            2 => -GaussInt::ONE,
            _ => -GaussInt::I,
        }
    }
}

impl Add for GaussInt {
    type Output = GaussInt;
    fn add(self, o: GaussInt) -> GaussInt {
        GaussInt::new(self.re + o.re, self.im + o.im)
    }
}

impl Mul for GaussInt {
    type Output = GaussInt;
    fn mul(self, o: GaussInt) -> GaussInt {
        GaussInt::new(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)
    }
}

impl Neg for GaussInt {
    type Output = GaussInt;
    fn neg(self) -> GaussInt {
        GaussInt::new(-self.re, -self.im)
    }
}

const fn g(re: i32, im: i32) -> GaussInt {
    GaussInt::new(re, im)
}

/// `μ ⊕ ν`, the Klein four-group on `0..=3`.
pub const OPLUS: [[u8; 4]; 4] = [[0, 1, 2, 3], [1, 0, 3, 2], [2, 3, 0, 1], [3, 2, 1, 0]];

/// `f_{μν}` such that `σ^μ σ^ν = f_{μν} σ^{μ⊕ν}`.
pub const STRUCTURE: [[GaussInt; 4]; 4] = [
    [g(1, 0), g(1, 0), g(1, 0), g(1, 0)],
    [g(1, 0), g(1, 0), g(0, 1), g(0, -1)],
    [g(1, 0), g(0, -1), g(1, 0), g(0, 1)],
    [g(1, 0), g(0, 1), g(0, -1), g(1, 0)],
];

pub fn oplus(mu: PauliIndex, nu: PauliIndex) -> PauliIndex {
    PauliIndex(OPLUS[mu.idx()][nu.idx()])
}

/// `(f_{μν}, μ⊕ν)`.
pub fn pauli_product(mu: PauliIndex, nu: PauliIndex) -> (GaussInt, PauliIndex) {
    (STRUCTURE[mu.idx()][nu.idx()], oplus(mu, nu))
}

/// Totally antisymmetric symbol on `1..=3`; zero if any index is 0 or repeated.
pub fn levi_civita(i: usize, j: usize, k: usize) -> i32 {
    match (i, j, k) {
        (1, 2, 3) | (2, 3, 1) | (3, 1, 2) => 1,
        (3, 2, 1) | (1, 3, 2) | (2, 1, 3) => -1,
        _ => 0,
    }
}

/// The indicator-sum form of `f_{μν}`. Kept alongside [`STRUCTURE`] and
/// tested against it.
pub fn structure_constant_closed_form(mu: PauliIndex, nu: PauliIndex) -> GaussInt {
    let (m, n) = (mu.idx(), nu.idx());
    let diag = i32::from(m == n);
    let left = i32::from(m != 0 && n == 0);
    let right = i32::from(m == 0 && n != 0);
    let both = m != 0 && n != 0;
    let eps = if both {
        levi_civita(m, n, oplus(mu, nu).idx())
    } else {
        0
    };
    g(diag + left + right, eps)
}

/// σ^μ with exact Gaussian-integer entries.
pub fn exact_pauli(mu: PauliIndex) -> [[GaussInt; 2]; 2] {
    match mu.0 {
        0 => [[g(1, 0), g(0, 0)], [g(0, 0), g(1, 0)]],
        1 => [[g(0, 0), g(1, 0)], [g(1, 0), g(0, 0)]],
        2 => [[g(0, 0), g(0, -1)], [g(0, 1), g(0, 0)]],
        _ => [[g(1, 0), g(0, 0)], [g(0, 0), g(-1, 0)]],
    }
}

pub fn exact_matmul(a: &[[GaussInt; 2]; 2], b: &[[GaussInt; 2]; 2]) -> [[GaussInt; 2]; 2] {
    let mut out = [[GaussInt::ZERO; 2]; 2];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            *cell = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

/// `|B(μ)⟩` in the standard basis `|00⟩, |01⟩, |10⟩, |11⟩`.
///
/// `|B(0)⟩ = (|00⟩ + |11⟩)/√2` and `|B(μ)⟩ = i σ_b^μ |B(0)⟩` otherwise.
pub fn bell_state(mu: PauliIndex) -> Vector4<C64> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let phi = Vector4::new(C64::from(s), ZERO, ZERO, C64::from(s));
    if mu.is_identity() {
        phi
    } else {
        kron(&pauli(0), &pauli(mu.idx())) * phi * I
    }
}

/// Sign `s` with `σ_a^μ |B(ν)⟩ = s · σ_b^μ |B(ν)⟩`.
pub fn sigma_a_action_sign(mu: PauliIndex, nu: PauliIndex) -> i8 {
    let mut s = 1;
    if mu.0 == 2 {
        s = -s;
    }
    if !mu.is_identity() && !nu.is_identity() && mu != nu {
        s = -s;
    }
    s
}

/// `⟨B(μ1)| σ_b^β |B(μ2)⟩`, exactly.
pub fn bell_matrix_element_exact(mu1: PauliIndex, beta: PauliIndex, mu2: PauliIndex) -> GaussInt {
    if oplus(oplus(beta, mu1), mu2).0 != 0 {
        return GaussInt::ZERO;
    }
    let left = if mu1.is_identity() { GaussInt::ONE } else { -GaussInt::I };
    let right = if mu2.is_identity() { GaussInt::ONE } else { GaussInt::I };
    left * STRUCTURE[beta.idx()][mu2.idx()] * right
}

pub fn bell_matrix_element(mu1: PauliIndex, beta: PauliIndex, mu2: PauliIndex) -> C64 {
    bell_matrix_element_exact(mu1, beta, mu2).to_c64()
}

/// Which expansion a 4×4 array of coefficients refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Basis {
    /// Entry `(μ, ν)` multiplies `σ_a^μ σ_b^ν`.
    Pauli,
    /// Entry `(i, j)` multiplies `|i⟩⟨j|` in `|ab⟩` ordering.
    Standard,
    /// Entry `(μ, ν)` multiplies `|B(μ)⟩⟨B(ν)|`.
    Bell,
}

/// Which qubit a partial trace removes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Subsystem {
    A,
    B,
}

/// A two-qubit operator together with the basis its entries refer to.
#[derive(Clone, Debug, PartialEq)]
pub struct BellOperator {
    entries: Mat4,
    basis: Basis,
}

impl BellOperator {
    pub fn new(entries: Mat4, basis: Basis) -> Self {
        BellOperator { entries, basis }
    }

    pub fn bell(entries: Mat4) -> Self {
        Self::new(entries, Basis::Bell)
    }

    pub fn standard(entries: Mat4) -> Self {
        Self::new(entries, Basis::Standard)
    }

    pub fn pauli(entries: Mat4) -> Self {
        Self::new(entries, Basis::Pauli)
    }

    pub fn identity(basis: Basis) -> Self {
        let entries = match basis {
            Basis::Pauli => {
                let mut m = Mat4::zeros();
                m[(0, 0)] = ONE;
                m
            }
            Basis::Standard | Basis::Bell => Mat4::identity(),
        };
        Self::new(entries, basis)
    }

    pub fn entries(&self) -> &Mat4 {
        &self.entries
    }

    pub fn into_entries(self) -> Mat4 {
        self.entries
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    pub fn to_basis(&self, target: Basis) -> BellOperator {
        basis_convert(self, target)
    }

    /// The operator's matrix in `target`; for [`Basis::Pauli`] this is the
    /// coefficient array, not a matrix representation.
    pub fn matrix_in(&self, target: Basis) -> Mat4 {
        basis_convert(self, target).entries
    }

    fn require(&self, expected: Basis) -> Result<()> {
        if self.basis == expected {
            Ok(())
        } else {
            Err(Error::WrongBasis { expected, found: self.basis })
        }
    }
}

/// A single-qubit operator.
#[derive(Clone, Debug, PartialEq)]
pub struct QubitOperator(pub Mat2);

impl QubitOperator {
    pub fn matrix(&self) -> &Mat2 {
        &self.0
    }

    pub fn trace(&self) -> C64 {
        self.0.trace()
    }
}

/// Columns are `|B(μ)⟩` in the standard basis.
static BELL_UNITARY: LazyLock<Mat4> = LazyLock::new(|| {
    let mut u = Mat4::zeros();
    for mu in PauliIndex::ALL {
        u.set_column(mu.idx(), &bell_state(mu));
    }
    u
});

/// `σ^μ ⊗ σ^ν` in the standard basis, indexed `4μ + ν`.
static PAULI_PRODUCTS: LazyLock<[Mat4; 16]> =
    LazyLock::new(|| std::array::from_fn(|k| kron(&pauli(k / 4), &pauli(k % 4))));

pub fn bell_unitary() -> &'static Mat4 {
    &BELL_UNITARY
}

fn to_standard(op: &BellOperator) -> Mat4 {
    match op.basis {
        Basis::Standard => op.entries,
        Basis::Bell => *BELL_UNITARY * op.entries * BELL_UNITARY.adjoint(),
        Basis::Pauli => {
            let mut out = Mat4::zeros();
            for (k, p) in PAULI_PRODUCTS.iter().enumerate() {
                let c = op.entries[(k / 4, k % 4)];
                if c != ZERO {
                    out += p * c;
                }
            }
            out
        }
    }
}

fn from_standard(m: &Mat4, target: Basis) -> Mat4 {
    match target {
        Basis::Standard => *m,
        Basis::Bell => BELL_UNITARY.adjoint() * m * *BELL_UNITARY,
        Basis::Pauli => {
            let mut out = Mat4::zeros();
            for (k, p) in PAULI_PRODUCTS.iter().enumerate() {
                out[(k / 4, k % 4)] = (p * m).trace() * 0.25;
            }
            out
        }
    }
}

/// Re-expresses `op` in `target`. Conversions go through the standard basis.
pub fn basis_convert(op: &BellOperator, target: Basis) -> BellOperator {
    if op.basis == target {
        return op.clone();
    }
    BellOperator::new(from_standard(&to_standard(op), target), target)
}

/// Partial trace of a Bell-basis operator, evaluated from its Bell-basis
/// entries without leaving that basis.
///
/// Tracing out `a` gives an operator on `b` and vice versa. The `b` trace uses
/// the entries re-signed by `(-1)^{δ(μ,2)}(-1)^{δ(ν,2)}`.
pub fn partial_trace_bell(x: &BellOperator, traced: Subsystem) -> Result<QubitOperator> {
    x.require(Basis::Bell)?;
    let m = &x.entries;
    let entry = |mu: usize, nu: usize| -> C64 {
        match traced {
            Subsystem::A => m[(mu, nu)],
            Subsystem::B => {
                let s = |k: usize| if k == 2 { -1.0 } else { 1.0 };
                m[(mu, nu)] * (s(mu) * s(nu))
            }
        }
    };
    let trace = (0..4).map(|mu| entry(mu, mu)).fold(ZERO, |a, b| a + b);
    let mut out = pauli(0) * (trace * 0.5);
    for k in 1..=3 {
        let mut c = entry(k, 0) - entry(0, k);
        for p in 1..=3 {
            for q in 1..=3 {
                let e = levi_civita(p, q, k);
                if e != 0 {
                    c += entry(p, q) * e as f64;
                }
            }
        }
        out += pauli(k) * (c * I * 0.5);
    }
    Ok(QubitOperator(out))
}

/// `Ω ⊗ 1` (on `a`) or `1 ⊗ Ω` (on `b`) in the standard basis.
pub fn local_operator(omega: &Mat2, on: Subsystem) -> BellOperator {
    let m = match on {
        Subsystem::A => kron(omega, &pauli(0)),
        Subsystem::B => kron(&pauli(0), omega),
    };
    BellOperator::standard(m)
}

/// Bell-basis matrix of `x·σ_b` built from [`bell_matrix_element`].
pub fn sigma_b_dot(x: &nalgebra::Vector3<C64>) -> Mat4 {
    let mut out = Mat4::zeros();
    for mu1 in PauliIndex::ALL {
        for mu2 in PauliIndex::ALL {
            let mut acc = ZERO;
            for k in 1..=3u8 {
                let beta = PauliIndex(k);
                acc += x[k as usize - 1] * bell_matrix_element(mu1, beta, mu2);
            }
            out[(mu1.idx(), mu2.idx())] = acc;
        }
    }
    out
}

/// Bell-basis matrix of `x·σ_a`, using `σ_a^μ|B(ν)⟩ = s(μ,ν) σ_b^μ|B(ν)⟩`.
pub fn sigma_a_dot(x: &nalgebra::Vector3<C64>) -> Mat4 {
    let mut out = Mat4::zeros();
    for mu1 in PauliIndex::ALL {
        for mu2 in PauliIndex::ALL {
            let mut acc = ZERO;
            for k in 1..=3u8 {
                let beta = PauliIndex(k);
                let s = sigma_a_action_sign(beta, mu2) as f64;
                acc += x[k as usize - 1] * bell_matrix_element(mu1, beta, mu2) * s;
            }
            out[(mu1.idx(), mu2.idx())] = acc;
        }
    }
    out
}
