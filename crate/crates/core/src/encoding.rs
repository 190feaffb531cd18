//! Message ↔ local-operation encodings and the GHZ-state bit code used for
//! key generation.
//!
//! Every scheme carries three bits per group of three pairs. A scheme is a
//! list of slots; each slot puts one operator alphabet on one of Alice's
//! particles (1, 3 or 5). A code is split across slots most-significant-first,
//! so for the main scheme `ijk` selects `σ_ij` on particle 1 and `σ_k` on
//! particle 3.
//!
//! Catalog:
//!
//! | id | particle 1 | particle 3 | particle 5 |
//! |----|------------|------------|------------|
//! | `main` | {I, σx, iσy, σz} (2 bits) | {I, σx} (1 bit) | |
//! | `b1` | {I, σx, iσy, σz} (2 bits) | {I, iσy} (1 bit) | |
//! | `b2` | {I, σx} (1 bit) | {I, σx, iσy, σz} (2 bits) | |
//! | `b3` | {I, iσy} (1 bit) | {I, σx, iσy, σz} (2 bits) | |
//! | `c:m,n:x` / `c:m,n:iy` | four-operator alphabet on `m`, two-operator alphabet on `n` | | |
//! | `d` | {I, iσy} | {I, iσy} | {I, iσy} |
//!
//! `b1` only replaces the alphabet on particle 3; particle 1 keeps the
//! four-operator alphabet so the group still carries three bits.

use std::fmt;
use std::str::FromStr;

use serde::{Serialize, Serializer};

use crate::bases::GhzState;
use crate::quantum_core::{
    apply_single, OpName, QubitLabel, SingleQubitOp, StateError, StateVector,
};
use crate::swap_engine::{self, DecodeTable};

/// Alice's particle numbers, in the order her GHZ measurement uses.
pub const ALICE_PARTICLES: [QubitLabel; 3] = [1, 3, 5];

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EncodingError {
    #[error("code has {found} bits, scheme expects {expected}")]
    WrongCodeLength { expected: usize, found: usize },
    #[error("code value {value} does not fit in {width} bits")]
    CodeOutOfRange { value: u8, width: u8 },
    #[error("invalid bit {0:?} (expected 0 or 1)")]
    BadBit(char),
    #[error("message is empty")]
    EmptyMessage,
    #[error("message length {len} is not a multiple of {group}")]
    MessageLength { len: usize, group: usize },
    #[error("unknown scheme id {0:?}")]
    UnknownScheme(String),
    #[error("particle {0} is not one of Alice's particles 1, 3, 5")]
    BadPosition(QubitLabel),
    #[error("particle {0} is used by two slots")]
    DuplicatePosition(QubitLabel),
    #[error("scheme {scheme} does not act bijectively on the GHZ basis")]
    NotBijective { scheme: String },
    #[error("decode table was built for scheme {table}, not {scheme}")]
    TableMismatch { table: String, scheme: String },
    #[error("no operation maps {baseline} to {observed}; channel corrupted")]
    ChannelCorruption {
        baseline: GhzState,
        observed: GhzState,
    },
    #[error("bit code is not a bijection onto 3-bit values")]
    BadBitCode,
    #[error(transparent)]
    State(#[from] StateError),
}

/// A fixed-width group of bits, most significant first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Code {
    value: u8,
    width: u8,
}

impl Code {
    pub fn new(value: u8, width: u8) -> Result<Self, EncodingError> {
        if width == 0 || width > 8 || (width < 8 && value >> width != 0) {
            return Err(EncodingError::CodeOutOfRange { value, width });
        }
        Ok(Self { value, width })
    }

    pub fn from_bits(bits: &[u8]) -> Result<Self, EncodingError> {
        let mut value = 0u8;
        for &b in bits {
            if b > 1 {
                return Err(EncodingError::BadBit(char::from(b'0' + b.min(9))));
            }
            value = (value << 1) | b;
        }
        Self::new(value, bits.len() as u8)
    }

    pub fn value(self) -> u8 {
        self.value
    }

    pub fn width(self) -> usize {
        self.width as usize
    }

    pub fn bits(self) -> Vec<u8> {
        (0..self.width)
            .rev()
            .map(|k| (self.value >> k) & 1)
            .collect()
    }

    /// Every code of the given width, in increasing order.
    pub fn all(width: u8) -> impl Iterator<Item = Code> {
        (0..(1u16 << width)).map(move |v| Code {
            value: v as u8,
            width,
        })
    }
}

impl fmt::Display for Code {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.bits() {
            write!(f, "{b}")?;
        }
        Ok(())
    }
}

impl FromStr for Code {
    type Err = EncodingError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Code::from_bits(&parse_bits(s)?)
    }
}

impl Serialize for Code {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

fn parse_bits(s: &str) -> Result<Vec<u8>, EncodingError> {
    s.chars()
        .map(|c| match c {
            '0' => Ok(0),
            '1' => Ok(1),
            other => Err(EncodingError::BadBit(other)),
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OperatorAlphabet {
    /// σ00 = I, σ01 = σx, σ10 = iσy, σ11 = σz; two bits.
    PauliFour,
    /// σ0 = I, σ1 = σx; one bit.
    BitFlip,
    /// I, iσy; one bit.
    ISigmaY,
}

impl OperatorAlphabet {
    pub fn ops(self) -> &'static [OpName] {
        match self {
            OperatorAlphabet::PauliFour => &[
                OpName::Identity,
                OpName::PauliX,
                OpName::ISigmaY,
                OpName::PauliZ,
            ],
            OperatorAlphabet::BitFlip => &[OpName::Identity, OpName::PauliX],
            OperatorAlphabet::ISigmaY => &[OpName::Identity, OpName::ISigmaY],
        }
    }

    pub fn bits(self) -> u8 {
        match self {
            OperatorAlphabet::PauliFour => 2,
            OperatorAlphabet::BitFlip | OperatorAlphabet::ISigmaY => 1,
        }
    }

    /// Conventional symbol for entry `index`.
    pub fn symbol(self, index: usize) -> &'static str {
        match self {
            OperatorAlphabet::PauliFour => ["σ00", "σ01", "σ10", "σ11"][index],
            OperatorAlphabet::BitFlip => ["σ0", "σ1"][index],
            OperatorAlphabet::ISigmaY => ["I", "iσy"][index],
        }
    }
}

/// The two-operator alphabet placed on the second particle of a `c` scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PairAlphabet {
    BitFlip,
    ISigmaY,
}

impl PairAlphabet {
    fn alphabet(self) -> OperatorAlphabet {
        match self {
            PairAlphabet::BitFlip => OperatorAlphabet::BitFlip,
            PairAlphabet::ISigmaY => OperatorAlphabet::ISigmaY,
        }
    }

    fn name(self) -> &'static str {
        match self {
            PairAlphabet::BitFlip => "x",
            PairAlphabet::ISigmaY => "iy",
        }
    }
}

/// Stable scheme identifier: `main`, `b1`, `b2`, `b3`, `c:<m>,<n>:<x|iy>`, `d`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SchemeId {
    Main,
    B1,
    B2,
    B3,
    C {
        four_on: QubitLabel,
        pair_on: QubitLabel,
        pair: PairAlphabet,
    },
    D,
}

impl fmt::Display for SchemeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SchemeId::Main => f.write_str("main"),
            SchemeId::B1 => f.write_str("b1"),
            SchemeId::B2 => f.write_str("b2"),
            SchemeId::B3 => f.write_str("b3"),
            SchemeId::C {
                four_on,
                pair_on,
                pair,
            } => write!(f, "c:{four_on},{pair_on}:{}", pair.name()),
            SchemeId::D => f.write_str("d"),
        }
    }
}

impl Serialize for SchemeId {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl FromStr for SchemeId {
    type Err = EncodingError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let unknown = || EncodingError::UnknownScheme(s.to_string());
        match s.trim().to_ascii_lowercase().as_str() {
            "main" => Ok(SchemeId::Main),
            "b1" => Ok(SchemeId::B1),
            "b2" => Ok(SchemeId::B2),
            "b3" => Ok(SchemeId::B3),
            "d" => Ok(SchemeId::D),
            other => {
                let rest = other.strip_prefix("c:").ok_or_else(unknown)?;
                let (positions, alphabet) = rest.split_once(':').ok_or_else(unknown)?;
                let (m, n) = positions.split_once(',').ok_or_else(unknown)?;
                let four_on = m.trim().parse().map_err(|_| unknown())?;
                let pair_on = n.trim().parse().map_err(|_| unknown())?;
                let pair = match alphabet {
                    "x" => PairAlphabet::BitFlip,
                    "iy" => PairAlphabet::ISigmaY,
                    _ => return Err(unknown()),
                };
                Ok(SchemeId::C {
                    four_on,
                    pair_on,
                    pair,
                })
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Slot {
    pub position: QubitLabel,
    pub alphabet: OperatorAlphabet,
}

/// One operator Alice applies to one of her particles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalOperation {
    pub position: QubitLabel,
    pub op: SingleQubitOp,
    pub symbol: &'static str,
}

impl LocalOperation {
    pub fn name(&self) -> OpName {
        self.op.name
    }
}

/// A validated encoding scheme.
#[derive(Debug, Clone, PartialEq)]
pub struct EncodingScheme {
    id: SchemeId,
    slots: Vec<Slot>,
    bits_per_group: u8,
}

impl EncodingScheme {
    /// Builds the scheme and checks that, for every GHZ state, the codes
    /// map it onto distinct GHZ states.
    pub fn new(id: SchemeId) -> Result<Self, EncodingError> {
        use OperatorAlphabet::*;
        let slot = |position, alphabet| Slot { position, alphabet };
        let slots = match id {
            SchemeId::Main => vec![slot(1, PauliFour), slot(3, BitFlip)],
            SchemeId::B1 => vec![slot(1, PauliFour), slot(3, ISigmaY)],
            SchemeId::B2 => vec![slot(1, BitFlip), slot(3, PauliFour)],
            SchemeId::B3 => vec![slot(1, ISigmaY), slot(3, PauliFour)],
            SchemeId::C {
                four_on,
                pair_on,
                pair,
            } => vec![slot(four_on, PauliFour), slot(pair_on, pair.alphabet())],
            SchemeId::D => vec![slot(1, ISigmaY), slot(3, ISigmaY), slot(5, ISigmaY)],
        };
        for (i, s) in slots.iter().enumerate() {
            if !ALICE_PARTICLES.contains(&s.position) {
                return Err(EncodingError::BadPosition(s.position));
            }
            if slots[..i].iter().any(|t| t.position == s.position) {
                return Err(EncodingError::DuplicatePosition(s.position));
            }
        }
        let bits_per_group = slots.iter().map(|s| s.alphabet.bits()).sum();
        let scheme = Self {
            id,
            slots,
            bits_per_group,
        };
        swap_engine::operation_action(&scheme).map_err(|_| EncodingError::NotBijective {
            scheme: id.to_string(),
        })?;
        Ok(scheme)
    }

    pub fn main() -> Self {
        Self::new(SchemeId::Main).expect("main scheme is valid")
    }

    pub fn id(&self) -> SchemeId {
        self.id
    }

    pub fn slots(&self) -> &[Slot] {
        &self.slots
    }

    pub fn positions(&self) -> Vec<QubitLabel> {
        self.slots.iter().map(|s| s.position).collect()
    }

    pub fn bits_per_group(&self) -> usize {
        self.bits_per_group as usize
    }

    pub fn codes(&self) -> impl Iterator<Item = Code> {
        Code::all(self.bits_per_group)
    }

    /// Operation tuple for one group, slot order.
    pub fn encode_group(&self, code: Code) -> Result<Vec<LocalOperation>, EncodingError> {
        if code.width() != self.bits_per_group() {
            return Err(EncodingError::WrongCodeLength {
                expected: self.bits_per_group(),
                found: code.width(),
            });
        }
        let mut remaining = self.bits_per_group;
        let mut ops = Vec::with_capacity(self.slots.len());
        for slot in &self.slots {
            let bits = slot.alphabet.bits();
            remaining -= bits;
            let index = ((code.value() >> remaining) & ((1 << bits) - 1)) as usize;
            ops.push(LocalOperation {
                position: slot.position,
                op: SingleQubitOp::from_name(slot.alphabet.ops()[index]),
                symbol: slot.alphabet.symbol(index),
            });
        }
        Ok(ops)
    }

    /// Applies the operations for `code` to `state`.
    pub fn apply(&self, state: &StateVector, code: Code) -> Result<StateVector, EncodingError> {
        self.encode_group(code)?
            .iter()
            .try_fold(state.clone(), |s, op| {
                apply_single(&s, &op.op, op.position).map_err(EncodingError::from)
            })
    }
}

/// The code whose operation turns `baseline` into `observed`.
pub fn decode_group(
    scheme: &EncodingScheme,
    table: &DecodeTable,
    baseline: GhzState,
    observed: GhzState,
) -> Result<Code, EncodingError> {
    if table.scheme() != scheme.id() {
        return Err(EncodingError::TableMismatch {
            table: table.scheme().to_string(),
            scheme: scheme.id().to_string(),
        });
    }
    table
        .code_for(baseline, observed)
        .ok_or(EncodingError::ChannelCorruption { baseline, observed })
}

/// Every scheme, with `c` expanded over ordered particle pairs and both
/// two-operator alphabets.
pub fn list_schemes() -> Vec<EncodingScheme> {
    let mut ids = vec![SchemeId::Main, SchemeId::B1, SchemeId::B2, SchemeId::B3];
    for m in ALICE_PARTICLES {
        for n in ALICE_PARTICLES {
            if m == n {
                continue;
            }
            for pair in [PairAlphabet::BitFlip, PairAlphabet::ISigmaY] {
                ids.push(SchemeId::C {
                    four_on: m,
                    pair_on: n,
                    pair,
                });
            }
        }
    }
    ids.push(SchemeId::D);
    ids.into_iter()
        .map(|id| EncodingScheme::new(id).expect("cataloged schemes are valid"))
        .collect()
}

/// Assignment of a 3-bit value to each GHZ state.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GhzBitCode {
    codes: [u8; 8],
}

impl GhzBitCode {
    /// P+ → 000, P− → 001, Q+ → 010, …, S− → 111.
    pub fn standard() -> Self {
        Self {
            codes: [0, 1, 2, 3, 4, 5, 6, 7],
        }
    }

    /// `codes[g.index()]` is the value assigned to `g`.
    pub fn new(codes: [u8; 8]) -> Result<Self, EncodingError> {
        let mut seen = [false; 8];
        for &c in &codes {
            if c > 7 || seen[c as usize] {
                return Err(EncodingError::BadBitCode);
            }
            seen[c as usize] = true;
        }
        Ok(Self { codes })
    }

    pub fn bits(&self, g: GhzState) -> Code {
        Code {
            value: self.codes[g.index()],
            width: 3,
        }
    }

    pub fn state(&self, code: Code) -> Option<GhzState> {
        self.codes
            .iter()
            .position(|&c| code.width() == 3 && c == code.value())
            .and_then(GhzState::from_index)
    }
}

impl Default for GhzBitCode {
    fn default() -> Self {
        Self::standard()
    }
}

pub fn ghz_to_bits(code: &GhzBitCode, g: GhzState) -> Code {
    code.bits(g)
}

/// A bit string to be sent.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Message {
    bits: Vec<u8>,
}

impl Message {
    pub fn from_bits(bits: Vec<u8>) -> Result<Self, EncodingError> {
        if let Some(&b) = bits.iter().find(|&&b| b > 1) {
            return Err(EncodingError::BadBit(char::from(b'0' + b.min(9))));
        }
        Ok(Self { bits })
    }

    pub fn from_codes(codes: &[Code]) -> Self {
        Self {
            bits: codes.iter().flat_map(|c| c.bits()).collect(),
        }
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    /// Splits into codes of `width` bits. Lengths that are not a positive
    /// multiple of `width` are rejected; nothing is padded.
    pub fn groups(&self, width: usize) -> Result<Vec<Code>, EncodingError> {
        if self.bits.is_empty() {
            return Err(EncodingError::EmptyMessage);
        }
        if width == 0 || !self.bits.len().is_multiple_of(width) {
            return Err(EncodingError::MessageLength {
                len: self.bits.len(),
                group: width,
            });
        }
        self.bits.chunks(width).map(Code::from_bits).collect()
    }
}

impl FromStr for Message {
    type Err = EncodingError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(Self {
            bits: parse_bits(s.trim())?,
        })
    }
}

impl fmt::Display for Message {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in &self.bits {
            write!(f, "{b}")?;
        }
        Ok(())
    }
}
