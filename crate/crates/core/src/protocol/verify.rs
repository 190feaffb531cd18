//! Channel verification on sacrificed pairs.
//!
//! For every tested pair Alice announces a random basis (Z or X), both
//! parties measure their half, Bob reveals his result and Alice compares it
//! with the correlation the declared Bell state must show in that basis.

use serde::Serialize;

use super::channel::{expects_equal, Basis, PairGroup};
use super::rng::SimRng;
use super::transcript::{Actor, ClassicalMessage, Event, Transcript};
use super::ProtocolError;
use crate::quantum_core::measure_in_basis;
use crate::swap_engine::PAIR_LABELS;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VerificationReport {
    pub pairs_tested: usize,
    pub mismatches: usize,
    pub qber: f64,
    pub threshold: f64,
    pub passed: bool,
}

impl VerificationReport {
    fn new(pairs_tested: usize, mismatches: usize, threshold: f64) -> Self {
        let qber = mismatches as f64 / pairs_tested as f64;
        Self {
            pairs_tested,
            mismatches,
            qber,
            threshold,
            passed: qber <= threshold,
        }
    }
}

/// Tests the listed `(group position in groups, pair slot 0..3)` pairs.
/// On failure Alice sends an abort.
pub fn verify_pairs(
    groups: &[PairGroup],
    pairs: &[(usize, usize)],
    threshold: f64,
    rng: &mut SimRng,
    transcript: &mut Transcript,
) -> Result<VerificationReport, ProtocolError> {
    if pairs.is_empty() {
        return Err(ProtocolError::EmptySample);
    }
    if !(0.0..=1.0).contains(&threshold) {
        return Err(ProtocolError::InvalidProbability(threshold));
    }
    let mut states: Vec<_> = groups.iter().map(|g| g.state.clone()).collect();
    let mut mismatches = 0;
    for &(pos, slot) in pairs {
        let group = groups.get(pos).ok_or(ProtocolError::EmptySample)?;
        let [a, b] = PAIR_LABELS[slot];
        let basis = Basis::random(rng);
        transcript.send(
            Actor::Alice,
            ClassicalMessage::VerifyBasisChoice {
                group: group.index,
                pair: slot,
                basis,
            },
            rng,
        )?;
        let (alice, s) = measure_in_basis(&states[pos], &basis.vectors(a), &[a], rng)?;
        let (bob, s) = measure_in_basis(&s, &basis.vectors(b), &[b], rng)?;
        states[pos] = s;
        transcript.send(
            Actor::Bob,
            ClassicalMessage::VerifyOutcome {
                group: group.index,
                pair: slot,
                outcome: bob as u8,
            },
            rng,
        )?;
        let bell = group.triple.pairs()[slot];
        let mismatch = (alice == bob) != expects_equal(bell, basis);
        mismatches += usize::from(mismatch);
        transcript.record(
            Actor::Alice,
            Event::PairChecked {
                group: group.index,
                pair: slot,
                mismatch,
            },
            rng,
        )?;
    }
    let report = VerificationReport::new(pairs.len(), mismatches, threshold);
    transcript.record(Actor::Alice, Event::Verification(report), rng)?;
    if !report.passed {
        transcript.send(
            Actor::Alice,
            ClassicalMessage::Abort {
                reason: format!(
                    "verification error rate {} exceeds threshold {}",
                    report.qber, threshold
                ),
            },
            rng,
        )?;
    }
    Ok(report)
}

/// Tests all three pairs of every sacrificed group.
pub fn verify_channel(
    groups: &[PairGroup],
    threshold: f64,
    rng: &mut SimRng,
    transcript: &mut Transcript,
) -> Result<VerificationReport, ProtocolError> {
    let pairs: Vec<(usize, usize)> = (0..groups.len())
        .flat_map(|g| (0..3).map(move |slot| (g, slot)))
        .collect();
    verify_pairs(groups, &pairs, threshold, rng, transcript)
}
