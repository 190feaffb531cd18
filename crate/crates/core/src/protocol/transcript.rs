//! Ordered event log of a protocol run, serialized as JSON lines.
//!
//! Each line has the fields `seq`, `actor`, `event`, `payload` and
//! `rng_position`. The same configuration and seed always yield the same
//! bytes.

use serde::Serialize;

use super::channel::{Basis, EveConfig};
use super::rng::SimRng;
use super::verify::VerificationReport;
use super::ProtocolError;
use crate::bases::GhzState;
use crate::encoding::{Code, SchemeId};
use crate::swap_engine::BellTriple;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Actor {
    Alice,
    Bob,
    Eve,
    /// The party preparing and distributing the EPR pairs.
    Source,
    Driver,
}

/// Messages on the authenticated classical channel.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ClassicalMessage {
    /// Alice says she has measured particles 1, 3, 5 in the GHZ basis,
    /// without the result.
    MeasurementAnnounced {
        group: usize,
    },
    ResultRequest {
        group: usize,
    },
    ResultReveal {
        group: usize,
        outcome: GhzState,
    },
    VerifyBasisChoice {
        group: usize,
        pair: usize,
        basis: Basis,
    },
    VerifyOutcome {
        group: usize,
        pair: usize,
        outcome: u8,
    },
    Abort {
        reason: String,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "event", content = "payload", rename_all = "snake_case")]
pub enum Event {
    RunStarted {
        mode: &'static str,
        scheme: SchemeId,
        triples: String,
        eve: EveConfig,
        verify_fraction: f64,
        threshold: f64,
        message_groups: usize,
        verify_groups: usize,
        seed: u64,
    },
    PairsDistributed {
        group: usize,
        triple: BellTriple,
    },
    EveIntercept {
        group: usize,
        qubit: u8,
        basis: Basis,
        outcome: u8,
    },
    GroupsAssigned {
        verification: Vec<usize>,
        message: Vec<usize>,
    },
    Classical(ClassicalMessage),
    PairChecked {
        group: usize,
        pair: usize,
        mismatch: bool,
    },
    Verification(VerificationReport),
    QuantumChannelClosed,
    AliceEncoded {
        group: usize,
        code: Code,
        ops: Vec<String>,
    },
    AliceMeasured {
        group: usize,
        outcome: GhzState,
    },
    BobMeasured {
        group: usize,
        outcome: GhzState,
        baseline: GhzState,
    },
    Decoded {
        group: usize,
        bits: Code,
    },
    KeyBits {
        group: usize,
        certain: Code,
        random: Code,
    },
    RunFinished {
        status: &'static str,
        output: String,
    },
}

impl Event {
    /// Events that move a qubit between parties.
    pub fn is_quantum_transfer(&self) -> bool {
        matches!(
            self,
            Event::PairsDistributed { .. } | Event::EveIntercept { .. }
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Record {
    pub seq: u64,
    pub actor: Actor,
    #[serde(flatten)]
    pub event: Event,
    pub rng_position: u64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Transcript {
    records: Vec<Record>,
    quantum_closed: bool,
}

impl Transcript {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends an event. Once the quantum channel is closed, any further
    /// qubit transfer is refused.
    pub fn record(
        &mut self,
        actor: Actor,
        event: Event,
        rng: &SimRng,
    ) -> Result<(), ProtocolError> {
        if self.quantum_closed && event.is_quantum_transfer() {
            return Err(ProtocolError::QuantumAfterClose);
        }
        if matches!(event, Event::QuantumChannelClosed) {
            self.quantum_closed = true;
        }
        self.records.push(Record {
            seq: self.records.len() as u64,
            actor,
            event,
            rng_position: rng.position(),
        });
        Ok(())
    }

    pub fn send(
        &mut self,
        sender: Actor,
        message: ClassicalMessage,
        rng: &SimRng,
    ) -> Result<(), ProtocolError> {
        self.record(sender, Event::Classical(message), rng)
    }

    pub fn records(&self) -> &[Record] {
        &self.records
    }

    pub fn events(&self) -> impl Iterator<Item = &Event> {
        self.records.iter().map(|r| &r.event)
    }

    pub fn quantum_closed(&self) -> bool {
        self.quantum_closed
    }

    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            out.push_str(&serde_json::to_string(r).expect("records serialize"));
            out.push('\n');
        }
        out
    }
}
