//! Alice/Bob protocol runs: distribution, verification, direct
//! communication, key distribution, and eavesdropper experiments.
//!
//! A run is one sequential state machine driven by a single [`SimRng`].
//! Everything that happens is appended to a [`Transcript`]; after the
//! verification phase the transcript refuses further qubit transfers, so
//! the message itself never travels as qubits.

mod channel;
mod rng;
mod session;
mod transcript;
mod verify;

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;

use rand::Rng;
use serde::Serialize;

pub use channel::{
    distribute, expects_equal, Basis, EveConfig, EveStrategy, PairGroup, TripleChoice,
};
pub use rng::SimRng;
pub use session::{Branch, GroupExchange, Stage};
pub use transcript::{Actor, ClassicalMessage, Event, Record, Transcript};
pub use verify::{verify_channel, verify_pairs, VerificationReport};

use crate::bases::{GhzState, IdentifyError};
use crate::encoding::{Code, EncodingError, EncodingScheme, GhzBitCode, Message};
use crate::quantum_core::StateError;
use crate::swap_engine::{build_decode_table, BellTriple, DecodeTable, SwapError};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ProtocolError {
    #[error(transparent)]
    Encoding(#[from] EncodingError),
    #[error(transparent)]
    State(#[from] StateError),
    #[error(transparent)]
    Swap(#[from] SwapError),
    #[error(transparent)]
    Identify(#[from] IdentifyError),
    #[error("step out of order: expected stage {expected:?}, at {actual:?}")]
    OutOfOrder { expected: Stage, actual: Stage },
    #[error("forced outcome {0} has zero probability")]
    ImpossibleBranch(GhzState),
    #[error("verification sample is empty")]
    EmptySample,
    #[error("probability {0} is outside [0, 1]")]
    InvalidProbability(f64),
    #[error("at least one group is required")]
    NoGroups,
    #[error("expected {expected} per-group triples, got {found}")]
    TripleCount { expected: usize, found: usize },
    #[error("qubit transfer recorded after the quantum channel was closed")]
    QuantumAfterClose,
    #[error("unknown eavesdropper strategy {0:?}")]
    UnknownStrategy(String),
}

/// Settings shared by direct-communication and key-distribution runs.
#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolConfig {
    pub scheme: EncodingScheme,
    /// Triples for all groups, verification groups included.
    pub triples: TripleChoice,
    pub eve: EveConfig,
    /// Verification groups per message group; `ceil(fraction × groups)`
    /// extra groups are prepared and sacrificed. Zero skips verification.
    pub verify_fraction: f64,
    /// Largest tolerated verification error rate.
    pub threshold: f64,
}

impl Default for ProtocolConfig {
    fn default() -> Self {
        Self {
            scheme: EncodingScheme::main(),
            triples: TripleChoice::default(),
            eve: EveConfig::none(),
            verify_fraction: 0.0,
            threshold: 0.0,
        }
    }
}

impl ProtocolConfig {
    pub fn validate(&self) -> Result<(), ProtocolError> {
        self.eve.validate()?;
        for p in [self.verify_fraction, self.threshold] {
            if !(0.0..=1.0).contains(&p) {
                return Err(ProtocolError::InvalidProbability(p));
            }
        }
        Ok(())
    }

    pub fn verify_groups(&self, message_groups: usize) -> usize {
        (self.verify_fraction * message_groups as f64).ceil() as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Completed,
    /// Verification failed; the pairs are thrown away.
    Aborted,
}

/// What happened to one message group.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroupResult {
    pub index: usize,
    pub triple: BellTriple,
    pub code: Code,
    pub alice_outcome: GhzState,
    pub bob_outcome: GhzState,
    pub bob_baseline: GhzState,
    pub decoded: Code,
}

#[derive(Debug, Clone)]
pub struct QsdcRun {
    pub status: RunStatus,
    pub verification: Option<VerificationReport>,
    pub groups: Vec<GroupResult>,
    pub decoded: Option<Message>,
    pub transcript: Transcript,
}

#[derive(Debug, Clone)]
pub struct QkdRun {
    pub status: RunStatus,
    pub verification: Option<VerificationReport>,
    pub groups: Vec<GroupResult>,
    pub alice_key: Vec<u8>,
    pub bob_key: Vec<u8>,
    pub transcript: Transcript,
}

struct Established {
    transcript: Transcript,
    message_groups: Vec<PairGroup>,
    verification: Option<VerificationReport>,
    aborted: bool,
}

/// Steps 1–2 and channel verification: distribute, pick the sacrificed
/// groups uniformly without replacement, test them, then close the quantum
/// channel.
fn establish(
    mode: &'static str,
    config: &ProtocolConfig,
    message_groups: usize,
    rng: &mut SimRng,
) -> Result<Established, ProtocolError> {
    config.validate()?;
    if message_groups == 0 {
        return Err(ProtocolError::NoGroups);
    }
    let verify_groups = config.verify_groups(message_groups);
    let total = message_groups + verify_groups;
    let mut transcript = Transcript::new();
    transcript.record(
        Actor::Driver,
        Event::RunStarted {
            mode,
            scheme: config.scheme.id(),
            triples: config.triples.to_string(),
            eve: config.eve,
            verify_fraction: config.verify_fraction,
            threshold: config.threshold,
            message_groups,
            verify_groups,
            seed: rng.seed(),
        },
        rng,
    )?;
    let groups = distribute(total, &config.triples, &config.eve, rng, &mut transcript)?;

    let mut verification: Vec<usize> = if verify_groups > 0 {
        rand::seq::index::sample(rng, total, verify_groups).into_vec()
    } else {
        Vec::new()
    };
    verification.sort_unstable();
    let (sacrificed, kept): (Vec<PairGroup>, Vec<PairGroup>) = groups
        .into_iter()
        .partition(|g| verification.binary_search(&g.index).is_ok());
    transcript.record(
        Actor::Driver,
        Event::GroupsAssigned {
            verification: verification.clone(),
            message: kept.iter().map(|g| g.index).collect(),
        },
        rng,
    )?;

    let report = if sacrificed.is_empty() {
        None
    } else {
        Some(verify_channel(
            &sacrificed,
            config.threshold,
            rng,
            &mut transcript,
        )?)
    };
    let aborted = report.is_some_and(|r| !r.passed);
    if !aborted {
        transcript.record(Actor::Driver, Event::QuantumChannelClosed, rng)?;
    }
    Ok(Established {
        transcript,
        message_groups: kept,
        verification: report,
        aborted,
    })
}

fn tables_for(
    groups: &[PairGroup],
    scheme: &EncodingScheme,
) -> Result<BTreeMap<BellTriple, DecodeTable>, ProtocolError> {
    let mut tables = BTreeMap::new();
    for g in groups {
        if let Entry::Vacant(slot) = tables.entry(g.triple) {
            slot.insert(build_decode_table(g.triple, scheme)?);
        }
    }
    Ok(tables)
}

fn exchange(
    group: PairGroup,
    code: Code,
    scheme: &EncodingScheme,
    table: &DecodeTable,
    rng: &mut SimRng,
    transcript: &mut Transcript,
) -> Result<(GroupResult, Option<GhzState>), ProtocolError> {
    let (index, triple) = (group.index, group.triple);
    let mut ex = GroupExchange::new(group, scheme, table);
    let decoded = ex.run(code, rng, transcript)?;
    let result = GroupResult {
        index,
        triple,
        code,
        alice_outcome: ex.alice_outcome().expect("measured"),
        bob_outcome: ex.bob_outcome().expect("measured"),
        bob_baseline: ex.bob_baseline().expect("measured"),
        decoded,
    };
    Ok((result, ex.alice_baseline()))
}

fn finish(
    transcript: &mut Transcript,
    status: RunStatus,
    output: String,
    rng: &SimRng,
) -> Result<(), ProtocolError> {
    let status = match status {
        RunStatus::Completed => "completed",
        RunStatus::Aborted => "aborted",
    };
    transcript.record(Actor::Driver, Event::RunFinished { status, output }, rng)
}

/// Direct communication of `message`, three bits per group.
pub fn run_qsdc(
    message: &Message,
    config: &ProtocolConfig,
    rng: &mut SimRng,
) -> Result<QsdcRun, ProtocolError> {
    let codes = message.groups(config.scheme.bits_per_group())?;
    let Established {
        mut transcript,
        message_groups,
        verification,
        aborted,
    } = establish("qsdc", config, codes.len(), rng)?;
    if aborted {
        finish(&mut transcript, RunStatus::Aborted, String::new(), rng)?;
        return Ok(QsdcRun {
            status: RunStatus::Aborted,
            verification,
            groups: Vec::new(),
            decoded: None,
            transcript,
        });
    }
    let tables = tables_for(&message_groups, &config.scheme)?;
    let mut results = Vec::with_capacity(codes.len());
    for (group, code) in message_groups.into_iter().zip(codes) {
        let table = &tables[&group.triple];
        let (result, _) = exchange(group, code, &config.scheme, table, rng, &mut transcript)?;
        results.push(result);
    }
    let decoded = Message::from_codes(&results.iter().map(|r| r.decoded).collect::<Vec<_>>());
    finish(
        &mut transcript,
        RunStatus::Completed,
        decoded.to_string(),
        rng,
    )?;
    Ok(QsdcRun {
        status: RunStatus::Completed,
        verification,
        groups: results,
        decoded: Some(decoded),
        transcript,
    })
}

/// Key distribution: Alice encodes random codes; each group yields the
/// code itself (certain bits) followed by the bit code of the baseline
/// outcome (random bits).
pub fn run_qkd(
    n_groups: usize,
    config: &ProtocolConfig,
    bit_code: &GhzBitCode,
    rng: &mut SimRng,
) -> Result<QkdRun, ProtocolError> {
    let Established {
        mut transcript,
        message_groups,
        verification,
        aborted,
    } = establish("qkd", config, n_groups, rng)?;
    if aborted {
        finish(&mut transcript, RunStatus::Aborted, String::new(), rng)?;
        return Ok(QkdRun {
            status: RunStatus::Aborted,
            verification,
            groups: Vec::new(),
            alice_key: Vec::new(),
            bob_key: Vec::new(),
            transcript,
        });
    }
    let tables = tables_for(&message_groups, &config.scheme)?;
    let width = config.scheme.bits_per_group() as u8;
    let mut results = Vec::with_capacity(n_groups);
    let mut alice_key = Vec::new();
    let mut bob_key = Vec::new();
    for group in message_groups {
        let code = Code::new(rng.random_range(0..(1u16 << width)) as u8, width)?;
        let table = &tables[&group.triple];
        let (result, alice_baseline) =
            exchange(group, code, &config.scheme, table, rng, &mut transcript)?;
        let alice_random = bit_code.bits(alice_baseline.expect("code maps some baseline"));
        let bob_random = bit_code.bits(result.bob_baseline);
        transcript.record(
            Actor::Alice,
            Event::KeyBits {
                group: result.index,
                certain: code,
                random: alice_random,
            },
            rng,
        )?;
        transcript.record(
            Actor::Bob,
            Event::KeyBits {
                group: result.index,
                certain: result.decoded,
                random: bob_random,
            },
            rng,
        )?;
        alice_key.extend(code.bits());
        alice_key.extend(alice_random.bits());
        bob_key.extend(result.decoded.bits());
        bob_key.extend(bob_random.bits());
        results.push(result);
    }
    let shown: String = bob_key.iter().map(|b| char::from(b'0' + b)).collect();
    finish(&mut transcript, RunStatus::Completed, shown, rng)?;
    Ok(QkdRun {
        status: RunStatus::Completed,
        verification,
        groups: results,
        alice_key,
        bob_key,
        transcript,
    })
}

/// Outcome of an eavesdropping experiment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AttackReport {
    pub eve: EveConfig,
    pub pairs_tested: usize,
    pub mismatches: usize,
    pub error_rate: f64,
    /// Binomial standard error of `error_rate`.
    pub sigma: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub expected_rate: f64,
}

/// Distributes random triples through Eve and verifies exactly `n_pairs`
/// pairs, reporting the error rate with a ±3σ interval.
pub fn run_attack(
    eve: EveConfig,
    n_pairs: usize,
    rng: &mut SimRng,
) -> Result<AttackReport, ProtocolError> {
    if n_pairs == 0 {
        return Err(ProtocolError::EmptySample);
    }
    let mut transcript = Transcript::new();
    let groups = distribute(
        n_pairs.div_ceil(3),
        &TripleChoice::Random,
        &eve,
        rng,
        &mut transcript,
    )?;
    let pairs: Vec<(usize, usize)> = (0..n_pairs).map(|i| (i / 3, i % 3)).collect();
    let report = verify_pairs(&groups, &pairs, 1.0, rng, &mut transcript)?;
    let rate = report.qber;
    let sigma = (rate * (1.0 - rate) / n_pairs as f64).sqrt();
    Ok(AttackReport {
        eve,
        pairs_tested: report.pairs_tested,
        mismatches: report.mismatches,
        error_rate: rate,
        sigma,
        ci_low: (rate - 3.0 * sigma).max(0.0),
        ci_high: (rate + 3.0 * sigma).min(1.0),
        expected_rate: eve.expected_error_rate(),
    })
}
