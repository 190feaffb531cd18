//! Per-group exchange between Alice and Bob once the channel is verified.
//!
//! The steps must run in order: Alice encodes, measures particles 1, 3, 5,
//! and announces that she has measured; Bob measures 2, 4, 6 and works out
//! the baseline outcome; only then does he request Alice's result, which she
//! reveals, and he decodes.

use super::channel::PairGroup;
use super::rng::SimRng;
use super::transcript::{Actor, ClassicalMessage, Event, Transcript};
use super::ProtocolError;
use crate::bases::{ghz_basis, GhzState};
use crate::encoding::{decode_group, Code, EncodingScheme, ALICE_PARTICLES};
use crate::quantum_core::{collapse, measure_in_basis, QubitLabel, StateVector};
use crate::swap_engine::{DecodeTable, BOB_PARTICLES};

/// How a GHZ measurement picks its outcome.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    /// Born-rule draw from the run's RNG.
    Sample,
    /// Take this outcome; fails if it has zero probability.
    Forced(GhzState),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Stage {
    Fresh,
    Encoded,
    AliceMeasured,
    Announced,
    BobMeasured,
    Requested,
    Revealed,
    Decoded,
}

#[derive(Debug, Clone)]
pub struct GroupExchange<'a> {
    group: PairGroup,
    scheme: &'a EncodingScheme,
    table: &'a DecodeTable,
    stage: Stage,
    code: Option<Code>,
    alice_outcome: Option<GhzState>,
    bob_outcome: Option<GhzState>,
    bob_baseline: Option<GhzState>,
    revealed: Option<GhzState>,
}

impl<'a> GroupExchange<'a> {
    pub fn new(group: PairGroup, scheme: &'a EncodingScheme, table: &'a DecodeTable) -> Self {
        Self {
            group,
            scheme,
            table,
            stage: Stage::Fresh,
            code: None,
            alice_outcome: None,
            bob_outcome: None,
            bob_baseline: None,
            revealed: None,
        }
    }

    pub fn stage(&self) -> Stage {
        self.stage
    }

    pub fn state(&self) -> &StateVector {
        &self.group.state
    }

    pub fn alice_outcome(&self) -> Option<GhzState> {
        self.alice_outcome
    }

    pub fn bob_outcome(&self) -> Option<GhzState> {
        self.bob_outcome
    }

    /// Alice's outcome implied by Bob's result with no encoding applied.
    pub fn bob_baseline(&self) -> Option<GhzState> {
        self.bob_baseline
    }

    fn advance(&mut self, from: Stage, to: Stage) -> Result<(), ProtocolError> {
        if self.stage != from {
            return Err(ProtocolError::OutOfOrder {
                expected: from,
                actual: self.stage,
            });
        }
        self.stage = to;
        Ok(())
    }

    /// Alice applies the operations for `code`.
    pub fn alice_encode(
        &mut self,
        code: Code,
        rng: &SimRng,
        transcript: &mut Transcript,
    ) -> Result<(), ProtocolError> {
        let ops = self.scheme.encode_group(code)?;
        self.advance(Stage::Fresh, Stage::Encoded)?;
        self.group.state = self.scheme.apply(&self.group.state, code)?;
        self.code = Some(code);
        transcript.record(
            Actor::Alice,
            Event::AliceEncoded {
                group: self.group.index,
                code,
                ops: ops
                    .iter()
                    .map(|o| format!("{}@{}", o.symbol, o.position))
                    .collect(),
            },
            rng,
        )
    }

    /// GHZ measurement on particles 1, 3, 5.
    pub fn alice_measure(
        &mut self,
        branch: Branch,
        rng: &mut SimRng,
        transcript: &mut Transcript,
    ) -> Result<GhzState, ProtocolError> {
        self.advance(Stage::Encoded, Stage::AliceMeasured)?;
        let outcome = self.measure(ALICE_PARTICLES, branch, rng)?;
        self.alice_outcome = Some(outcome);
        transcript.record(
            Actor::Alice,
            Event::AliceMeasured {
                group: self.group.index,
                outcome,
            },
            rng,
        )?;
        Ok(outcome)
    }

    /// Alice says she has measured, without the result.
    pub fn alice_announce(
        &mut self,
        rng: &SimRng,
        transcript: &mut Transcript,
    ) -> Result<(), ProtocolError> {
        self.advance(Stage::AliceMeasured, Stage::Announced)?;
        transcript.send(
            Actor::Alice,
            ClassicalMessage::MeasurementAnnounced {
                group: self.group.index,
            },
            rng,
        )
    }

    /// GHZ measurement on particles 2, 4, 6 and the baseline lookup.
    pub fn bob_measure(
        &mut self,
        branch: Branch,
        rng: &mut SimRng,
        transcript: &mut Transcript,
    ) -> Result<GhzState, ProtocolError> {
        self.advance(Stage::Announced, Stage::BobMeasured)?;
        let outcome = self.measure(BOB_PARTICLES, branch, rng)?;
        let baseline = self.table.alice_baseline(outcome);
        self.bob_outcome = Some(outcome);
        self.bob_baseline = Some(baseline);
        transcript.record(
            Actor::Bob,
            Event::BobMeasured {
                group: self.group.index,
                outcome,
                baseline,
            },
            rng,
        )?;
        Ok(outcome)
    }

    /// Bob asks for Alice's outcome; only allowed after he has measured.
    pub fn bob_request(
        &mut self,
        rng: &SimRng,
        transcript: &mut Transcript,
    ) -> Result<(), ProtocolError> {
        self.advance(Stage::BobMeasured, Stage::Requested)?;
        transcript.send(
            Actor::Bob,
            ClassicalMessage::ResultRequest {
                group: self.group.index,
            },
            rng,
        )
    }

    pub fn alice_reveal(
        &mut self,
        rng: &SimRng,
        transcript: &mut Transcript,
    ) -> Result<GhzState, ProtocolError> {
        self.advance(Stage::Requested, Stage::Revealed)?;
        let outcome = self.alice_outcome.expect("measured before reveal");
        self.revealed = Some(outcome);
        transcript.send(
            Actor::Alice,
            ClassicalMessage::ResultReveal {
                group: self.group.index,
                outcome,
            },
            rng,
        )?;
        Ok(outcome)
    }

    /// Bob compares the revealed outcome with his baseline.
    pub fn bob_decode(
        &mut self,
        rng: &SimRng,
        transcript: &mut Transcript,
    ) -> Result<Code, ProtocolError> {
        self.advance(Stage::Revealed, Stage::Decoded)?;
        let baseline = self.bob_baseline.expect("bob measured");
        let observed = self.revealed.expect("result revealed");
        let bits = decode_group(self.scheme, self.table, baseline, observed)?;
        transcript.record(
            Actor::Bob,
            Event::Decoded {
                group: self.group.index,
                bits,
            },
            rng,
        )?;
        Ok(bits)
    }

    /// The baseline Alice infers from her own code and outcome.
    pub fn alice_baseline(&self) -> Option<GhzState> {
        let code = self.code?;
        let outcome = self.alice_outcome?;
        self.table.baseline_for(code, outcome)
    }

    /// Runs the whole exchange with sampled measurements; returns Bob's bits.
    pub fn run(
        &mut self,
        code: Code,
        rng: &mut SimRng,
        transcript: &mut Transcript,
    ) -> Result<Code, ProtocolError> {
        self.alice_encode(code, rng, transcript)?;
        self.alice_measure(Branch::Sample, rng, transcript)?;
        self.alice_announce(rng, transcript)?;
        self.bob_measure(Branch::Sample, rng, transcript)?;
        self.bob_request(rng, transcript)?;
        self.alice_reveal(rng, transcript)?;
        self.bob_decode(rng, transcript)
    }

    fn measure(
        &mut self,
        particles: [QubitLabel; 3],
        branch: Branch,
        rng: &mut SimRng,
    ) -> Result<GhzState, ProtocolError> {
        let basis = ghz_basis(particles);
        let (index, collapsed) = match branch {
            Branch::Sample => measure_in_basis(&self.group.state, &basis, &particles, rng)?,
            Branch::Forced(g) => {
                let (_, s) = collapse(&self.group.state, &basis, &particles, g.index())
                    .map_err(|_| ProtocolError::ImpossibleBranch(g))?;
                (g.index(), s)
            }
        };
        self.group.state = collapsed;
        Ok(GhzState::ALL[index])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::swap_engine::{build_decode_table, BellTriple};

    #[test]
    fn worked_example_branch() {
        let scheme = EncodingScheme::main();
        let table = build_decode_table(BellTriple::default(), &scheme).unwrap();
        let mut rng = SimRng::new(0);
        let mut t = Transcript::new();
        let mut ex = GroupExchange::new(PairGroup::new(0, BellTriple::default()), &scheme, &table);
        ex.alice_encode("111".parse().unwrap(), &rng, &mut t)
            .unwrap();
        ex.alice_measure(Branch::Forced(GhzState::PPlus), &mut rng, &mut t)
            .unwrap();
        ex.alice_announce(&rng, &mut t).unwrap();
        assert_eq!(
            ex.bob_measure(Branch::Sample, &mut rng, &mut t).unwrap(),
            GhzState::RMinus
        );
        assert_eq!(ex.bob_baseline(), Some(GhzState::RMinus));
        ex.bob_request(&rng, &mut t).unwrap();
        ex.alice_reveal(&rng, &mut t).unwrap();
        assert_eq!(ex.bob_decode(&rng, &mut t).unwrap().to_string(), "111");
        assert_eq!(ex.alice_baseline(), Some(GhzState::RMinus));
    }

    #[test]
    fn request_before_bob_measures_is_refused() {
        let scheme = EncodingScheme::main();
        let table = build_decode_table(BellTriple::default(), &scheme).unwrap();
        let mut rng = SimRng::new(0);
        let mut t = Transcript::new();
        let mut ex = GroupExchange::new(PairGroup::new(0, BellTriple::default()), &scheme, &table);
        ex.alice_encode("010".parse().unwrap(), &rng, &mut t)
            .unwrap();
        ex.alice_measure(Branch::Sample, &mut rng, &mut t).unwrap();
        ex.alice_announce(&rng, &mut t).unwrap();
        let err = ex.bob_request(&rng, &mut t).unwrap_err();
        assert!(matches!(
            err,
            ProtocolError::OutOfOrder {
                expected: Stage::BobMeasured,
                actual: Stage::Announced
            }
        ));
        assert!(ex.alice_reveal(&rng, &mut t).is_err());
    }

    #[test]
    fn forced_impossible_branch() {
        let scheme = EncodingScheme::main();
        let table = build_decode_table(BellTriple::default(), &scheme).unwrap();
        let mut rng = SimRng::new(0);
        let mut t = Transcript::new();
        let mut ex = GroupExchange::new(PairGroup::new(0, BellTriple::default()), &scheme, &table);
        ex.alice_encode("000".parse().unwrap(), &rng, &mut t)
            .unwrap();
        ex.alice_measure(Branch::Forced(GhzState::QPlus), &mut rng, &mut t)
            .unwrap();
        ex.alice_announce(&rng, &mut t).unwrap();
        let err = ex
            .bob_measure(Branch::Forced(GhzState::PPlus), &mut rng, &mut t)
            .unwrap_err();
        assert!(matches!(
            err,
            ProtocolError::ImpossibleBranch(GhzState::PPlus)
        ));
    }
}
