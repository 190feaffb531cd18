//! Quantum secure direct communication over shared EPR pairs using
//! entanglement swapping into GHZ states.
//!
//! Alice and Bob share groups of three Bell pairs on particles (1,2), (3,4),
//! (5,6). Alice encodes three bits per group by local operations on her
//! particles, both sides measure their three particles in the GHZ basis, and
//! Bob decodes by comparing the outcome Alice announces with the one his own
//! result implies.
//!
//! - [`quantum_core`]: dense state vectors over labeled qubits.
//! - [`bases`]: Bell and GHZ states.
//! - [`swap_engine`]: swapping decompositions and decode tables.
//! - [`encoding`]: encoding schemes and the GHZ bit code.
//! - [`protocol`]: Alice/Bob state machines, channel verification, the
//!   intercept-resend eavesdropper, and transcripts.
//! - [`cli`]: the `qsdc` command line.

pub mod bases;
pub mod cli;
pub mod encoding;
pub mod protocol;
pub mod quantum_core;
pub mod swap_engine;
