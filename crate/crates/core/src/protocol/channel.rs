//! EPR distribution and the intercept-resend eavesdropper.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::Serialize;

use super::rng::SimRng;
use super::transcript::{Actor, Event, Transcript};
use super::ProtocolError;
use crate::bases::BellState;
use crate::quantum_core::{measure_in_basis, x_basis, z_basis, QubitLabel, StateVector};
use crate::swap_engine::{BellTriple, BOB_PARTICLES};

/// One group of three shared pairs and the current six-qubit state.
#[derive(Debug, Clone, PartialEq)]
pub struct PairGroup {
    pub index: usize,
    pub triple: BellTriple,
    pub state: StateVector,
}

impl PairGroup {
    pub fn new(index: usize, triple: BellTriple) -> Self {
        Self {
            index,
            triple,
            state: triple.joint_state(),
        }
    }
}

/// Single-qubit measurement basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Basis {
    Z,
    X,
}

impl Basis {
    pub fn vectors(self, qubit: QubitLabel) -> [StateVector; 2] {
        match self {
            Basis::Z => z_basis(qubit),
            Basis::X => x_basis(qubit),
        }
    }

    pub fn random(rng: &mut SimRng) -> Self {
        if rng.random::<bool>() {
            Basis::X
        } else {
            Basis::Z
        }
    }
}

/// Whether both halves of `bell` give equal outcomes when measured in `basis`.
pub fn expects_equal(bell: BellState, basis: Basis) -> bool {
    match (bell, basis) {
        (BellState::PhiPlus, _) => true,
        (BellState::PhiMinus, Basis::Z) | (BellState::PsiPlus, Basis::X) => true,
        (BellState::PhiMinus, Basis::X) | (BellState::PsiPlus, Basis::Z) => false,
        (BellState::PsiMinus, _) => false,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EveStrategy {
    None,
    InterceptResendZ,
    InterceptResendX,
    InterceptResendRandom,
}

impl EveStrategy {
    pub fn name(self) -> &'static str {
        match self {
            EveStrategy::None => "none",
            EveStrategy::InterceptResendZ => "z",
            EveStrategy::InterceptResendX => "x",
            EveStrategy::InterceptResendRandom => "random",
        }
    }
}

impl fmt::Display for EveStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EveStrategy {
    type Err = ProtocolError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        [
            EveStrategy::None,
            EveStrategy::InterceptResendZ,
            EveStrategy::InterceptResendX,
            EveStrategy::InterceptResendRandom,
        ]
        .into_iter()
        .find(|e| e.name() == s.trim().to_ascii_lowercase())
        .ok_or_else(|| ProtocolError::UnknownStrategy(s.to_string()))
    }
}

/// Eavesdropper on the qubits travelling to Bob. She measures each
/// intercepted qubit and forwards the post-measurement state; she keeps no
/// quantum memory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EveConfig {
    pub strategy: EveStrategy,
    pub intercept_probability: f64,
}

impl EveConfig {
    pub fn none() -> Self {
        Self {
            strategy: EveStrategy::None,
            intercept_probability: 0.0,
        }
    }

    pub fn new(strategy: EveStrategy, intercept_probability: f64) -> Result<Self, ProtocolError> {
        let cfg = Self {
            strategy,
            intercept_probability,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ProtocolError> {
        if !(0.0..=1.0).contains(&self.intercept_probability) {
            return Err(ProtocolError::InvalidProbability(
                self.intercept_probability,
            ));
        }
        Ok(())
    }

    fn active(&self) -> bool {
        self.strategy != EveStrategy::None && self.intercept_probability > 0.0
    }

    /// Per-tested-pair verification error rate this attack produces.
    pub fn expected_error_rate(&self) -> f64 {
        if self.active() {
            0.25 * self.intercept_probability
        } else {
            0.0
        }
    }
}

impl Default for EveConfig {
    fn default() -> Self {
        Self::none()
    }
}

/// How each group's Bell triple is chosen.
#[derive(Debug, Clone, PartialEq)]
pub enum TripleChoice {
    Fixed(BellTriple),
    /// Uniform over all 64 triples, drawn per group from the run's RNG.
    Random,
    PerGroup(Vec<BellTriple>),
}

impl Default for TripleChoice {
    fn default() -> Self {
        TripleChoice::Fixed(BellTriple::default())
    }
}

impl fmt::Display for TripleChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TripleChoice::Fixed(t) => write!(f, "{t}"),
            TripleChoice::Random => f.write_str("random"),
            TripleChoice::PerGroup(ts) => {
                let parts: Vec<String> = ts.iter().map(|t| t.to_string()).collect();
                write!(f, "[{}]", parts.join(";"))
            }
        }
    }
}

/// Prepares `n_groups` groups and sends Bob's halves through Eve.
pub fn distribute(
    n_groups: usize,
    triples: &TripleChoice,
    eve: &EveConfig,
    rng: &mut SimRng,
    transcript: &mut Transcript,
) -> Result<Vec<PairGroup>, ProtocolError> {
    if n_groups == 0 {
        return Err(ProtocolError::NoGroups);
    }
    eve.validate()?;
    if let TripleChoice::PerGroup(ts) = triples {
        if ts.len() != n_groups {
            return Err(ProtocolError::TripleCount {
                expected: n_groups,
                found: ts.len(),
            });
        }
    }
    let mut groups = Vec::with_capacity(n_groups);
    for index in 0..n_groups {
        let triple = match triples {
            TripleChoice::Fixed(t) => *t,
            TripleChoice::Random => {
                let pick = |rng: &mut SimRng| BellState::ALL[rng.random_range(0..4)];
                BellTriple::new(pick(rng), pick(rng), pick(rng))
            }
            TripleChoice::PerGroup(ts) => ts[index],
        };
        let mut group = PairGroup::new(index, triple);
        transcript.record(
            Actor::Source,
            Event::PairsDistributed {
                group: index,
                triple,
            },
            rng,
        )?;
        if eve.active() {
            for qubit in BOB_PARTICLES {
                intercept(&mut group, qubit, eve, rng, transcript)?;
            }
        }
        groups.push(group);
    }
    Ok(groups)
}

fn intercept(
    group: &mut PairGroup,
    qubit: QubitLabel,
    eve: &EveConfig,
    rng: &mut SimRng,
    transcript: &mut Transcript,
) -> Result<(), ProtocolError> {
    let p = eve.intercept_probability;
    let hit = p >= 1.0 || rng.random_bool(p);
    if !hit {
        return Ok(());
    }
    let basis = match eve.strategy {
        EveStrategy::InterceptResendZ => Basis::Z,
        EveStrategy::InterceptResendX => Basis::X,
        EveStrategy::InterceptResendRandom => Basis::random(rng),
        EveStrategy::None => return Ok(()),
    };
    let (outcome, collapsed) =
        measure_in_basis(&group.state, &basis.vectors(qubit), &[qubit], rng)?;
    group.state = collapsed;
    transcript.record(
        Actor::Eve,
        Event::EveIntercept {
            group: group.index,
            qubit,
            basis,
            outcome: outcome as u8,
        },
        rng,
    )
}
