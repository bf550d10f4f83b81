//! Polarization-qubit primitives: pure-state specifications, 2×2 density
//! matrices and Pauli operators.
//!
//! Logical encoding: |0⟩ = one horizontally polarized photon, |1⟩ = one
//! vertically polarized photon.

use std::fmt;
use std::str::FromStr;

use nalgebra::Matrix2;
use serde::{Deserialize, Serialize};

use crate::error::{SimError, SimResult};
use crate::C64;

const HERMITICITY_TOL: f64 = 1e-9;

/// A pure qubit state α|0⟩ + β|1⟩.
#[derive(Clone, Debug, PartialEq)]
pub struct QubitSpec {
    alpha: C64,
    beta: C64,
}

impl QubitSpec {
    /// A normalized amplitude pair (|α|² + |β|² = 1 within 1e-9).
    pub fn new(alpha: C64, beta: C64) -> SimResult<Self> {
        if (alpha.norm_sqr() + beta.norm_sqr() - 1.0).abs() > 1e-9 {
            return Err(SimError::NotNormalized(
                "qubit amplitudes must satisfy |α|² + |β|² = 1".into(),
            ));
        }
        Ok(QubitSpec { alpha, beta })
    }

    pub fn zero() -> Self {
        QubitSpec { alpha: C64::new(1.0, 0.0), beta: C64::new(0.0, 0.0) }
    }

    pub fn one() -> Self {
        QubitSpec { alpha: C64::new(0.0, 0.0), beta: C64::new(1.0, 0.0) }
    }

    pub fn plus() -> Self {
        let r = 1.0 / std::f64::consts::SQRT_2;
        QubitSpec { alpha: C64::new(r, 0.0), beta: C64::new(r, 0.0) }
    }

    pub fn plus_i() -> Self {
        let r = 1.0 / std::f64::consts::SQRT_2;
        QubitSpec { alpha: C64::new(r, 0.0), beta: C64::new(0.0, r) }
    }

    /// The four standard probe states used throughout: |0⟩, |1⟩, |+⟩, |+i⟩.
    pub fn standard_probes() -> Vec<(&'static str, QubitSpec)> {
        vec![
            ("zero", QubitSpec::zero()),
            ("one", QubitSpec::one()),
            ("plus", QubitSpec::plus()),
            ("plus_i", QubitSpec::plus_i()),
        ]
    }

    pub fn alpha(&self) -> C64 {
        self.alpha
    }

    pub fn beta(&self) -> C64 {
        self.beta
    }

    pub fn ket(&self) -> [C64; 2] {
        [self.alpha, self.beta]
    }

    /// |ψ⟩⟨ψ| as a density matrix.
    pub fn density(&self) -> DensityMatrix {
        let k = self.ket();
        let mut m = Matrix2::<C64>::zeros();
        for r in 0..2 {
            for c in 0..2 {
                m[(r, c)] = k[r] * k[c].conj();
            }
        }
        DensityMatrix { m }
    }
}

impl FromStr for QubitSpec {
    type Err = SimError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "zero" | "0" => Ok(QubitSpec::zero()),
            "one" | "1" => Ok(QubitSpec::one()),
            "plus" | "+" => Ok(QubitSpec::plus()),
            "plus_i" | "+i" => Ok(QubitSpec::plus_i()),
            other => Err(SimError::InvalidParameter(format!(
                "unknown input state '{other}' (expected zero, one, plus or plus_i)"
            ))),
        }
    }
}

/// A qubit density matrix: Hermitian, unit trace, positive semidefinite.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    m: Matrix2<C64>,
}

impl DensityMatrix {
    /// Validates Hermiticity, unit trace and positivity (within 1e-9).
    pub fn try_new(m: Matrix2<C64>) -> SimResult<Self> {
        let herm_dev = (m[(0, 1)] - m[(1, 0)].conj()).norm()
            .max(m[(0, 0)].im.abs())
            .max(m[(1, 1)].im.abs());
        if herm_dev > HERMITICITY_TOL {
            return Err(SimError::NotPhysical(format!(
                "density matrix is not Hermitian (deviation {herm_dev:.3e})"
            )));
        }
        let trace = m[(0, 0)].re + m[(1, 1)].re;
        if (trace - 1.0).abs() > HERMITICITY_TOL {
            return Err(SimError::NotPhysical(format!(
                "density matrix trace is {trace}, expected 1"
            )));
        }
        let rho = DensityMatrix { m };
        let (lo, _) = rho.eigenvalues();
        if lo < -HERMITICITY_TOL {
            return Err(SimError::NotPhysical(format!(
                "density matrix has negative eigenvalue {lo:.3e}"
            )));
        }
        Ok(rho)
    }

    /// Normalizes a positive Hermitian block by its trace.
    pub fn from_unnormalized(block: &Matrix2<C64>) -> SimResult<Self> {
        let trace = block[(0, 0)].re + block[(1, 1)].re;
        if trace < 1e-150 {
            return Err(SimError::EmptySubspace("zero-trace qubit block".into()));
        }
        let inv = C64::new(1.0 / trace, 0.0);
        DensityMatrix::try_new(block * inv)
    }

    /// The maximally mixed state I/2.
    pub fn maximally_mixed() -> Self {
        let half = C64::new(0.5, 0.0);
        DensityMatrix { m: Matrix2::from_diagonal_element(half) }
    }

    /// Convex mixture Σ w_i ρ_i; weights must be nonnegative and sum to a
    /// positive value (they are renormalized).
    pub fn mixture(parts: &[(f64, DensityMatrix)]) -> SimResult<Self> {
        let total: f64 = parts.iter().map(|(w, _)| *w).sum();
        if total <= 0.0 || parts.iter().any(|(w, _)| *w < 0.0) {
            return Err(SimError::InvalidParameter(
                "mixture weights must be nonnegative with positive sum".into(),
            ));
        }
        let mut m = Matrix2::<C64>::zeros();
        for (w, rho) in parts {
            m += rho.m * C64::new(*w / total, 0.0);
        }
        DensityMatrix::try_new(m)
    }

    pub fn matrix(&self) -> &Matrix2<C64> {
        &self.m
    }

    pub fn entry(&self, r: usize, c: usize) -> C64 {
        self.m[(r, c)]
    }

    /// Eigenvalues in (min, max) order, from the closed form for 2×2
    /// Hermitian matrices.
    pub fn eigenvalues(&self) -> (f64, f64) {
        let a = self.m[(0, 0)].re;
        let d = self.m[(1, 1)].re;
        let b2 = self.m[(0, 1)].norm_sqr();
        let mean = 0.5 * (a + d);
        let disc = (0.25 * (a - d) * (a - d) + b2).sqrt();
        (mean - disc, mean + disc)
    }

    /// Purity Tr ρ².
    pub fn purity(&self) -> f64 {
        let (lo, hi) = self.eigenvalues();
        lo * lo + hi * hi
    }

    /// Fidelity ⟨ψ|ρ|ψ⟩ against a pure state.
    pub fn fidelity(&self, psi: &QubitSpec) -> f64 {
        let k = psi.ket();
        let mut f = C64::new(0.0, 0.0);
        for r in 0..2 {
            for c in 0..2 {
                f += k[r].conj() * self.m[(r, c)] * k[c];
            }
        }
        f.re
    }

    /// Bloch vector (⟨X⟩, ⟨Y⟩, ⟨Z⟩).
    pub fn bloch(&self) -> [f64; 3] {
        let x = 2.0 * self.m[(0, 1)].re;
        let y = -2.0 * self.m[(0, 1)].im;
        let z = self.m[(0, 0)].re - self.m[(1, 1)].re;
        [x, y, z]
    }

    /// Expectation value of a Hermitian observable.
    pub fn expectation(&self, obs: &Matrix2<C64>) -> f64 {
        let mut t = C64::new(0.0, 0.0);
        for r in 0..2 {
            for c in 0..2 {
                t += obs[(r, c)] * self.m[(c, r)];
            }
        }
        t.re
    }

    /// U ρ U† for a 2×2 unitary U.
    pub fn conjugated_by(&self, u: &Matrix2<C64>) -> DensityMatrix {
        let m = u * self.m * u.adjoint();
        DensityMatrix { m }
    }
}

/// Single-qubit Pauli operator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn matrix(&self) -> Matrix2<C64> {
        let o = C64::new(0.0, 0.0);
        let one = C64::new(1.0, 0.0);
        let i = C64::new(0.0, 1.0);
        match self {
            Pauli::I => Matrix2::new(one, o, o, one),
            Pauli::X => Matrix2::new(o, one, one, o),
            Pauli::Y => Matrix2::new(o, -i, i, o),
            Pauli::Z => Matrix2::new(one, o, o, -one),
        }
    }

    /// The I, X, Y, Z basis in canonical order.
    pub fn basis() -> [Pauli; 4] {
        [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z]
    }

    /// The three measurement axes X, Y, Z.
    pub fn measurement_axes() -> [Pauli; 3] {
        [Pauli::X, Pauli::Y, Pauli::Z]
    }
}

impl fmt::Display for Pauli {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Pauli::I => "I",
            Pauli::X => "X",
            Pauli::Y => "Y",
            Pauli::Z => "Z",
        };
        f.write_str(s)
    }
}

/// Correction unitary applied by the receiver: a product of X and Z factors
/// (global phase irrelevant).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PauliWord {
    I,
    X,
    Z,
    XZ,
}

impl PauliWord {
    pub fn unitary(&self) -> Matrix2<C64> {
        match self {
            PauliWord::I => Pauli::I.matrix(),
            PauliWord::X => Pauli::X.matrix(),
            PauliWord::Z => Pauli::Z.matrix(),
            PauliWord::XZ => Pauli::X.matrix() * Pauli::Z.matrix(),
        }
    }

    pub fn all() -> [PauliWord; 4] {
        [PauliWord::I, PauliWord::X, PauliWord::Z, PauliWord::XZ]
    }
}

impl fmt::Display for PauliWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            PauliWord::I => "I",
            PauliWord::X => "X",
            PauliWord::Z => "Z",
            PauliWord::XZ => "XZ",
        };
        f.write_str(s)
    }
}

impl FromStr for PauliWord {
    type Err = SimError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "I" => Ok(PauliWord::I),
            "X" => Ok(PauliWord::X),
            "Z" => Ok(PauliWord::Z),
            "XZ" => Ok(PauliWord::XZ),
            other => Err(SimError::InvalidParameter(format!("unknown Pauli word '{other}'"))),
        }
    }
}
