//! The four Bell states and the eight three-qubit GHZ states.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Serialize, Serializer};

use crate::quantum_core::{QubitLabel, StateError, StateVector, FRAC_1_SQRT_2, PHYSICAL_TOL};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BellState {
    PhiPlus,
    PhiMinus,
    PsiPlus,
    PsiMinus,
}

impl BellState {
    pub const ALL: [BellState; 4] = [
        BellState::PhiPlus,
        BellState::PhiMinus,
        BellState::PsiPlus,
        BellState::PsiMinus,
    ];

    /// Lowercase ASCII name used on the command line.
    pub fn name(self) -> &'static str {
        match self {
            BellState::PhiPlus => "phi+",
            BellState::PhiMinus => "phi-",
            BellState::PsiPlus => "psi+",
            BellState::PsiMinus => "psi-",
        }
    }

    /// (support bitstring, sign of the |11⟩ or |10⟩ term).
    fn pattern(self) -> (usize, f64) {
        match self {
            BellState::PhiPlus => (0b00, 1.0),
            BellState::PhiMinus => (0b00, -1.0),
            BellState::PsiPlus => (0b01, 1.0),
            BellState::PsiMinus => (0b01, -1.0),
        }
    }
}

impl fmt::Display for BellState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl Serialize for BellState {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown state name {0:?}")]
pub struct UnknownStateName(pub String);

impl FromStr for BellState {
    type Err = UnknownStateName;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        BellState::ALL
            .into_iter()
            .find(|b| b.name() == s.trim().to_ascii_lowercase())
            .ok_or_else(|| UnknownStateName(s.to_string()))
    }
}

/// GHZ basis element. Declaration order is the order of the 3-bit key code
/// (P+ = 000 … S− = 111).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GhzState {
    PPlus,
    PMinus,
    QPlus,
    QMinus,
    RPlus,
    RMinus,
    SPlus,
    SMinus,
}

impl GhzState {
    pub const ALL: [GhzState; 8] = [
        GhzState::PPlus,
        GhzState::PMinus,
        GhzState::QPlus,
        GhzState::QMinus,
        GhzState::RPlus,
        GhzState::RMinus,
        GhzState::SPlus,
        GhzState::SMinus,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    pub fn tag(self) -> &'static str {
        match self {
            GhzState::PPlus => "P+",
            GhzState::PMinus => "P-",
            GhzState::QPlus => "Q+",
            GhzState::QMinus => "Q-",
            GhzState::RPlus => "R+",
            GhzState::RMinus => "R-",
            GhzState::SPlus => "S+",
            GhzState::SMinus => "S-",
        }
    }

    /// The low-weight bitstring of the support; the other is its complement.
    fn support(self) -> usize {
        self.index() >> 1
    }

    fn sign(self) -> f64 {
        if self.index() & 1 == 0 {
            1.0
        } else {
            -1.0
        }
    }
}

impl fmt::Display for GhzState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl Serialize for GhzState {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.tag())
    }
}

impl FromStr for GhzState {
    type Err = UnknownStateName;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim().to_ascii_uppercase();
        GhzState::ALL
            .into_iter()
            .find(|g| g.tag() == t)
            .ok_or_else(|| UnknownStateName(s.to_string()))
    }
}

/// A GHZ basis element together with the global phase that was found.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhasedGhz {
    pub state: GhzState,
    pub phase: Complex64,
}

pub fn bell_vector(b: BellState, labels: [QubitLabel; 2]) -> StateVector {
    let (low, sign) = b.pattern();
    let high = low ^ 0b11;
    StateVector::from_terms(
        labels.to_vec(),
        &[
            (low, Complex64::new(FRAC_1_SQRT_2, 0.0)),
            (high, Complex64::new(sign * FRAC_1_SQRT_2, 0.0)),
        ],
    )
    .expect("bell labels must be distinct")
}

pub fn ghz_vector(g: GhzState, labels: [QubitLabel; 3]) -> StateVector {
    let low = g.support();
    let high = low ^ 0b111;
    StateVector::from_terms(
        labels.to_vec(),
        &[
            (low, Complex64::new(FRAC_1_SQRT_2, 0.0)),
            (high, Complex64::new(g.sign() * FRAC_1_SQRT_2, 0.0)),
        ],
    )
    .expect("ghz labels must be distinct")
}

/// All eight GHZ vectors on `labels`, in [`GhzState::ALL`] order.
pub fn ghz_basis(labels: [QubitLabel; 3]) -> Vec<StateVector> {
    GhzState::ALL
        .iter()
        .map(|&g| ghz_vector(g, labels))
        .collect()
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum IdentifyError {
    #[error("expected a 3-qubit state, got {0} qubits")]
    WrongSize(usize),
    #[error("state is not a GHZ basis element up to phase")]
    NotGhz,
    #[error(transparent)]
    State(#[from] StateError),
}

/// Finds the GHZ element `g` and unit phase `c` with `v = c·g`, using the
/// vector's own label order.
pub fn identify_ghz(v: &StateVector) -> Result<PhasedGhz, IdentifyError> {
    let labels: [QubitLabel; 3] = v
        .labels()
        .try_into()
        .map_err(|_| IdentifyError::WrongSize(v.num_qubits()))?;
    for g in GhzState::ALL {
        let basis = ghz_vector(g, labels);
        let phase = basis.inner(v)?;
        if (phase.norm() - 1.0).abs() > PHYSICAL_TOL {
            continue;
        }
        if basis.scaled(phase).approx_eq(v, PHYSICAL_TOL) {
            return Ok(PhasedGhz { state: g, phase });
        }
    }
    Err(IdentifyError::NotGhz)
}
