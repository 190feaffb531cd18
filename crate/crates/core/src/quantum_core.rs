//! Dense state-vector engine for small labeled qubit registers.
//!
//! Amplitudes are indexed big-endian in label order: the first label is the
//! most significant bit of the basis index. Reordering qubits is always an
//! explicit call to [`StateVector::reorder`].

use std::fmt;

use num_complex::Complex64;
use rand::Rng;

/// Identifier of a physical qubit (particle number).
pub type QubitLabel = u8;

/// Largest register the engine accepts.
pub const MAX_QUBITS: usize = 8;

/// Tolerance for physical checks (norms, probabilities).
pub const PHYSICAL_TOL: f64 = 1e-9;

/// Tolerance for algebraic identities on exact inputs.
pub const ALGEBRAIC_TOL: f64 = 1e-12;

/// 1/√2, the only irrational constant the protocol needs.
pub const FRAC_1_SQRT_2: f64 = std::f64::consts::FRAC_1_SQRT_2;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum StateError {
    #[error("qubit label {0} appears in both operands")]
    LabelCollision(QubitLabel),
    #[error("duplicate qubit label {0}")]
    DuplicateLabel(QubitLabel),
    #[error("unknown qubit label {0}")]
    UnknownLabel(QubitLabel),
    #[error("label mismatch: expected {expected:?}, found {found:?}")]
    LabelMismatch {
        expected: Vec<QubitLabel>,
        found: Vec<QubitLabel>,
    },
    #[error("{0} qubits exceeds the engine limit of {MAX_QUBITS}")]
    TooManyQubits(usize),
    #[error("amplitude vector has length {len}, expected {expected}")]
    BadLength { len: usize, expected: usize },
    #[error("amplitude is not finite")]
    NonFinite,
    #[error("state is not normalized (squared norm {0})")]
    NotNormalized(f64),
    #[error("measurement basis is not orthonormal and complete: {0}")]
    InvalidBasis(String),
    #[error("outcome {0} has zero probability")]
    ImpossibleOutcome(usize),
}

/// Amplitudes over an ordered list of distinct qubit labels.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    labels: Vec<QubitLabel>,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    /// Builds a normalized state. Fails on bad length, duplicate labels,
    /// non-finite amplitudes or a norm off by more than [`PHYSICAL_TOL`].
    pub fn new(labels: Vec<QubitLabel>, amplitudes: Vec<Complex64>) -> Result<Self, StateError> {
        let state = Self::unnormalized(labels, amplitudes)?;
        let norm = state.norm_sqr();
        if (norm - 1.0).abs() > PHYSICAL_TOL {
            return Err(StateError::NotNormalized(norm));
        }
        Ok(state)
    }

    /// Same checks as [`StateVector::new`] except the norm.
    pub fn unnormalized(
        labels: Vec<QubitLabel>,
        amplitudes: Vec<Complex64>,
    ) -> Result<Self, StateError> {
        check_labels(&labels)?;
        let expected = 1usize << labels.len();
        if amplitudes.len() != expected {
            return Err(StateError::BadLength {
                len: amplitudes.len(),
                expected,
            });
        }
        if amplitudes
            .iter()
            .any(|a| !a.re.is_finite() || !a.im.is_finite())
        {
            return Err(StateError::NonFinite);
        }
        Ok(Self { labels, amplitudes })
    }

    /// Computational basis state; `bits` is read big-endian over `labels`.
    pub fn basis(labels: Vec<QubitLabel>, bits: usize) -> Result<Self, StateError> {
        check_labels(&labels)?;
        let dim = 1usize << labels.len();
        if bits >= dim {
            return Err(StateError::BadLength {
                len: bits,
                expected: dim,
            });
        }
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); dim];
        amplitudes[bits] = Complex64::new(1.0, 0.0);
        Ok(Self { labels, amplitudes })
    }

    /// Builds a state from a sparse `(bitstring, amplitude)` list.
    pub fn from_terms(
        labels: Vec<QubitLabel>,
        terms: &[(usize, Complex64)],
    ) -> Result<Self, StateError> {
        let dim = 1usize << labels.len();
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); dim];
        for &(bits, amp) in terms {
            if bits >= dim {
                return Err(StateError::BadLength {
                    len: bits,
                    expected: dim,
                });
            }
            amplitudes[bits] += amp;
        }
        Self::new(labels, amplitudes)
    }

    pub fn labels(&self) -> &[QubitLabel] {
        &self.labels
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn num_qubits(&self) -> usize {
        self.labels.len()
    }

    pub fn amplitude(&self, bits: usize) -> Complex64 {
        self.amplitudes[bits]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    fn position(&self, label: QubitLabel) -> Result<usize, StateError> {
        self.labels
            .iter()
            .position(|&l| l == label)
            .ok_or(StateError::UnknownLabel(label))
    }

    /// Bit mask of `label` inside the big-endian index.
    fn mask(&self, label: QubitLabel) -> Result<usize, StateError> {
        let pos = self.position(label)?;
        Ok(1usize << (self.labels.len() - 1 - pos))
    }

    /// Same state with qubits listed in `order`, which must be a permutation
    /// of the current labels.
    pub fn reorder(&self, order: &[QubitLabel]) -> Result<Self, StateError> {
        if self.labels == order {
            return Ok(self.clone());
        }
        if !same_label_set(&self.labels, order) {
            return Err(StateError::LabelMismatch {
                expected: self.labels.clone(),
                found: order.to_vec(),
            });
        }
        let masks: Vec<usize> = order
            .iter()
            .map(|&l| self.mask(l))
            .collect::<Result<_, _>>()?;
        let n = order.len();
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); self.amplitudes.len()];
        for (new_idx, slot) in amplitudes.iter_mut().enumerate() {
            let mut old_idx = 0;
            for (k, &mask) in masks.iter().enumerate() {
                if new_idx & (1 << (n - 1 - k)) != 0 {
                    old_idx |= mask;
                }
            }
            *slot = self.amplitudes[old_idx];
        }
        Ok(Self {
            labels: order.to_vec(),
            amplitudes,
        })
    }

    /// ⟨self|other⟩ after aligning `other` to this state's label order.
    pub fn inner(&self, other: &StateVector) -> Result<Complex64, StateError> {
        let other = other.reorder(&self.labels)?;
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// Largest entrywise distance after aligning label order.
    pub fn max_distance(&self, other: &StateVector) -> Result<f64, StateError> {
        let other = other.reorder(&self.labels)?;
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    pub fn approx_eq(&self, other: &StateVector, tol: f64) -> bool {
        self.max_distance(other).is_ok_and(|d| d <= tol)
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        Self {
            labels: self.labels.clone(),
            amplitudes: self.amplitudes.iter().map(|a| a * factor).collect(),
        }
    }

    /// Rescales to unit norm. Returns `None` for the zero vector.
    pub fn normalized(&self) -> Option<Self> {
        let norm = self.norm_sqr().sqrt();
        (norm > PHYSICAL_TOL).then(|| self.scaled(Complex64::new(1.0 / norm, 0.0)))
    }
}

impl fmt::Display for StateVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = self.labels.len();
        let mut first = true;
        for (idx, amp) in self.amplitudes.iter().enumerate() {
            if amp.norm() <= ALGEBRAIC_TOL {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(
                f,
                "({:.6}{:+.6}i)|{:0width$b}⟩",
                amp.re,
                amp.im,
                idx,
                width = n
            )?;
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

fn check_labels(labels: &[QubitLabel]) -> Result<(), StateError> {
    if labels.len() > MAX_QUBITS {
        return Err(StateError::TooManyQubits(labels.len()));
    }
    for (i, l) in labels.iter().enumerate() {
        if labels[..i].contains(l) {
            return Err(StateError::DuplicateLabel(*l));
        }
    }
    Ok(())
}

fn same_label_set(a: &[QubitLabel], b: &[QubitLabel]) -> bool {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_unstable();
    b.sort_unstable();
    a == b
}

/// Names for the operators the protocol uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum OpName {
    Identity,
    PauliX,
    /// iσ_y = |0⟩⟨1| − |1⟩⟨0|, a real matrix.
    ISigmaY,
    PauliZ,
    Hadamard,
}

impl OpName {
    pub fn as_str(self) -> &'static str {
        match self {
            OpName::Identity => "I",
            OpName::PauliX => "X",
            OpName::ISigmaY => "iY",
            OpName::PauliZ => "Z",
            OpName::Hadamard => "H",
        }
    }
}

impl fmt::Display for OpName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A 2×2 operator, row-major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingleQubitOp {
    pub name: OpName,
    pub matrix: [[Complex64; 2]; 2],
}

impl SingleQubitOp {
    fn real(name: OpName, m: [[f64; 2]; 2]) -> Self {
        let c = |x: f64| Complex64::new(x, 0.0);
        Self {
            name,
            matrix: [[c(m[0][0]), c(m[0][1])], [c(m[1][0]), c(m[1][1])]],
        }
    }

    pub fn identity() -> Self {
        Self::real(OpName::Identity, [[1.0, 0.0], [0.0, 1.0]])
    }

    pub fn pauli_x() -> Self {
        Self::real(OpName::PauliX, [[0.0, 1.0], [1.0, 0.0]])
    }

    pub fn i_sigma_y() -> Self {
        Self::real(OpName::ISigmaY, [[0.0, 1.0], [-1.0, 0.0]])
    }

    pub fn pauli_z() -> Self {
        Self::real(OpName::PauliZ, [[1.0, 0.0], [0.0, -1.0]])
    }

    pub fn hadamard() -> Self {
        let h = FRAC_1_SQRT_2;
        Self::real(OpName::Hadamard, [[h, h], [h, -h]])
    }

    pub fn from_name(name: OpName) -> Self {
        match name {
            OpName::Identity => Self::identity(),
            OpName::PauliX => Self::pauli_x(),
            OpName::ISigmaY => Self::i_sigma_y(),
            OpName::PauliZ => Self::pauli_z(),
            OpName::Hadamard => Self::hadamard(),
        }
    }

    /// Largest entrywise deviation of M†M from the identity.
    pub fn unitarity_defect(&self) -> f64 {
        let m = &self.matrix;
        let mut worst: f64 = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                let entry: Complex64 = (0..2).map(|k| m[k][i].conj() * m[k][j]).sum();
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((entry - Complex64::new(target, 0.0)).norm());
            }
        }
        worst
    }
}

/// Tensor product; labels are `a`'s followed by `b`'s.
pub fn tensor(a: &StateVector, b: &StateVector) -> Result<StateVector, StateError> {
    if let Some(&l) = a.labels.iter().find(|l| b.labels.contains(l)) {
        return Err(StateError::LabelCollision(l));
    }
    let mut labels = a.labels.clone();
    labels.extend_from_slice(&b.labels);
    if labels.len() > MAX_QUBITS {
        return Err(StateError::TooManyQubits(labels.len()));
    }
    let amplitudes = a
        .amplitudes
        .iter()
        .flat_map(|x| b.amplitudes.iter().map(move |y| x * y))
        .collect();
    Ok(StateVector { labels, amplitudes })
}

/// Applies `op` to the tensor factor carrying `qubit`.
pub fn apply_single(
    state: &StateVector,
    op: &SingleQubitOp,
    qubit: QubitLabel,
) -> Result<StateVector, StateError> {
    let mask = state.mask(qubit)?;
    let m = &op.matrix;
    let mut amplitudes = state.amplitudes.clone();
    for idx in 0..amplitudes.len() {
        if idx & mask != 0 {
            continue;
        }
        let a0 = state.amplitudes[idx];
        let a1 = state.amplitudes[idx | mask];
        amplitudes[idx] = m[0][0] * a0 + m[0][1] * a1;
        amplitudes[idx | mask] = m[1][0] * a0 + m[1][1] * a1;
    }
    Ok(StateVector {
        labels: state.labels.clone(),
        amplitudes,
    })
}

/// Result of contracting a state with a basis vector on a subset of qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct Projection {
    /// ‖residual‖; the phase lives in the residual.
    pub coefficient: Complex64,
    /// (⟨basis| ⊗ I)|state⟩ on the remaining qubits, in the state's order.
    /// When every qubit is projected this is a zero-qubit vector whose single
    /// amplitude is the full inner product.
    pub residual: StateVector,
}

/// Contracts `basis_state` (defined exactly on `on_qubits`) against `state`.
pub fn project_amplitude(
    state: &StateVector,
    basis_state: &StateVector,
    on_qubits: &[QubitLabel],
) -> Result<Projection, StateError> {
    let residual = partial_inner(state, basis_state, on_qubits)?;
    let coefficient = Complex64::new(residual.norm_sqr().sqrt(), 0.0);
    Ok(Projection {
        coefficient,
        residual,
    })
}

fn partial_inner(
    state: &StateVector,
    basis_state: &StateVector,
    on_qubits: &[QubitLabel],
) -> Result<StateVector, StateError> {
    align(state, on_qubits)?.contract(basis_state)
}

/// `state` reordered so that `on_qubits` lead, ready for repeated contraction.
struct Aligned<'q> {
    on_qubits: &'q [QubitLabel],
    rest: Vec<QubitLabel>,
    amplitudes: Vec<Complex64>,
}

fn align<'q>(state: &StateVector, on_qubits: &'q [QubitLabel]) -> Result<Aligned<'q>, StateError> {
    check_labels(on_qubits)?;
    let rest: Vec<QubitLabel> = state
        .labels
        .iter()
        .copied()
        .filter(|l| !on_qubits.contains(l))
        .collect();
    let mut order = on_qubits.to_vec();
    order.extend_from_slice(&rest);
    let aligned = state.reorder(&order)?;
    Ok(Aligned {
        on_qubits,
        rest,
        amplitudes: aligned.amplitudes,
    })
}

impl Aligned<'_> {
    fn contract(&self, basis_state: &StateVector) -> Result<StateVector, StateError> {
        if !same_label_set(basis_state.labels(), self.on_qubits) {
            return Err(StateError::LabelMismatch {
                expected: self.on_qubits.to_vec(),
                found: basis_state.labels().to_vec(),
            });
        }
        let basis_state = basis_state.reorder(self.on_qubits)?;
        let rest_dim = 1usize << self.rest.len();
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); rest_dim];
        for (b_idx, b_amp) in basis_state.amplitudes.iter().enumerate() {
            if b_amp.norm_sqr() == 0.0 {
                continue;
            }
            let conj = b_amp.conj();
            let block = &self.amplitudes[b_idx * rest_dim..(b_idx + 1) * rest_dim];
            for (slot, a) in amplitudes.iter_mut().zip(block) {
                *slot += conj * a;
            }
        }
        Ok(StateVector {
            labels: self.rest.clone(),
            amplitudes,
        })
    }
}

/// Verifies that `basis` is an orthonormal, complete basis on `on_qubits`.
pub fn check_basis(basis: &[StateVector], on_qubits: &[QubitLabel]) -> Result<(), StateError> {
    check_labels(on_qubits)?;
    let dim = 1usize << on_qubits.len();
    if basis.len() != dim {
        return Err(StateError::InvalidBasis(format!(
            "{} vectors for a {dim}-dimensional space",
            basis.len()
        )));
    }
    for (i, u) in basis.iter().enumerate() {
        if !same_label_set(u.labels(), on_qubits) {
            return Err(StateError::LabelMismatch {
                expected: on_qubits.to_vec(),
                found: u.labels().to_vec(),
            });
        }
        for (j, v) in basis.iter().enumerate().skip(i) {
            let overlap = u.inner(v)?;
            let target = if i == j { 1.0 } else { 0.0 };
            if (overlap - Complex64::new(target, 0.0)).norm() > PHYSICAL_TOL {
                return Err(StateError::InvalidBasis(format!("⟨{i}|{j}⟩ = {overlap}")));
            }
        }
    }
    Ok(())
}

/// Born probabilities of every basis outcome. Sums to 1 for a normalized
/// state and a complete basis.
pub fn outcome_probabilities(
    state: &StateVector,
    basis: &[StateVector],
    on_qubits: &[QubitLabel],
) -> Result<Vec<f64>, StateError> {
    check_basis(basis, on_qubits)?;
    let aligned = align(state, on_qubits)?;
    basis
        .iter()
        .map(|b| aligned.contract(b).map(|r| r.norm_sqr()))
        .collect()
}

/// Post-measurement state for a chosen outcome: (|b⟩⟨b| ⊗ I)|state⟩,
/// normalized, over the full label set in the state's order.
pub fn collapse(
    state: &StateVector,
    basis: &[StateVector],
    on_qubits: &[QubitLabel],
    outcome: usize,
) -> Result<(f64, StateVector), StateError> {
    check_basis(basis, on_qubits)?;
    let b = basis
        .get(outcome)
        .ok_or(StateError::ImpossibleOutcome(outcome))?;
    collapse_unchecked(state, b, on_qubits, outcome)
}

fn collapse_unchecked(
    state: &StateVector,
    b: &StateVector,
    on_qubits: &[QubitLabel],
    outcome: usize,
) -> Result<(f64, StateVector), StateError> {
    let residual = partial_inner(state, b, on_qubits)?;
    let prob = residual.norm_sqr();
    if prob <= PHYSICAL_TOL * PHYSICAL_TOL {
        return Err(StateError::ImpossibleOutcome(outcome));
    }
    let residual = residual.scaled(Complex64::new(1.0 / prob.sqrt(), 0.0));
    let joint = tensor(&b.reorder(on_qubits)?, &residual)?;
    Ok((prob, joint.reorder(state.labels())?))
}

/// Projective measurement of `on_qubits` in `basis`. Returns the outcome
/// index (drawn with Born probabilities) and the normalized collapsed state.
pub fn measure_in_basis<R: Rng + ?Sized>(
    state: &StateVector,
    basis: &[StateVector],
    on_qubits: &[QubitLabel],
    rng: &mut R,
) -> Result<(usize, StateVector), StateError> {
    let probs = outcome_probabilities(state, basis, on_qubits)?;
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > PHYSICAL_TOL {
        return Err(StateError::NotNormalized(total));
    }
    let draw: f64 = rng.random::<f64>() * total;
    let mut acc = 0.0;
    let mut outcome = probs.iter().rposition(|&p| p > 0.0).unwrap_or(0);
    for (i, p) in probs.iter().enumerate() {
        acc += p;
        if draw < acc && *p > 0.0 {
            outcome = i;
            break;
        }
    }
    let (_, collapsed) = collapse_unchecked(state, &basis[outcome], on_qubits, outcome)?;
    Ok((outcome, collapsed))
}

/// Z eigenbasis {|0⟩, |1⟩} on one qubit.
pub fn z_basis(qubit: QubitLabel) -> [StateVector; 2] {
    [0, 1].map(|b| StateVector::basis(vec![qubit], b).expect("single qubit basis"))
}

/// X eigenbasis {|+⟩, |−⟩} on one qubit.
pub fn x_basis(qubit: QubitLabel) -> [StateVector; 2] {
    let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
    [h, -h].map(|sign| StateVector {
        labels: vec![qubit],
        amplitudes: vec![h, sign],
    })
}
