//! Entanglement swapping of three Bell pairs into GHZ ⊗ GHZ terms, the
//! Bob → Alice baseline pairing, and the operation decode tables.
//!
//! Decompositions are computed numerically: the six-qubit product state is
//! projected onto every `GHZ₁₃₅ ⊗ GHZ₂₄₆` basis element.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::str::FromStr;

use num_complex::Complex64;
use serde::Serialize;

use crate::bases::{bell_vector, ghz_vector, identify_ghz, BellState, GhzState, UnknownStateName};
use crate::encoding::{Code, EncodingScheme, SchemeId, ALICE_PARTICLES};
use crate::quantum_core::{project_amplitude, tensor, QubitLabel, StateVector, PHYSICAL_TOL};

pub const BOB_PARTICLES: [QubitLabel; 3] = [2, 4, 6];
pub const PAIR_LABELS: [[QubitLabel; 2]; 3] = [[1, 2], [3, 4], [5, 6]];

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SwapError {
    #[error("scheme {scheme}: code {code} sends {baseline} outside the GHZ basis")]
    NotGhz {
        scheme: String,
        code: String,
        baseline: GhzState,
    },
    #[error("scheme {scheme}: two codes send {baseline} to {observed}")]
    NotBijective {
        scheme: String,
        baseline: GhzState,
        observed: GhzState,
    },
}

/// The three Bell states shared in one group, on pairs (1,2), (3,4), (5,6).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BellTriple {
    pub pair12: BellState,
    pub pair34: BellState,
    pub pair56: BellState,
}

impl BellTriple {
    pub fn new(pair12: BellState, pair34: BellState, pair56: BellState) -> Self {
        Self {
            pair12,
            pair34,
            pair56,
        }
    }

    pub fn pairs(&self) -> [BellState; 3] {
        [self.pair12, self.pair34, self.pair56]
    }

    /// All 64 triples.
    pub fn all() -> impl Iterator<Item = BellTriple> {
        BellState::ALL.into_iter().flat_map(|a| {
            BellState::ALL.into_iter().flat_map(move |b| {
                BellState::ALL
                    .into_iter()
                    .map(move |c| BellTriple::new(a, b, c))
            })
        })
    }

    /// Product state over qubits 1..6 in that order.
    pub fn joint_state(&self) -> StateVector {
        let [a, b, c] = self.pairs();
        let ab = tensor(
            &bell_vector(a, PAIR_LABELS[0]),
            &bell_vector(b, PAIR_LABELS[1]),
        )
        .expect("disjoint pair labels");
        tensor(&ab, &bell_vector(c, PAIR_LABELS[2])).expect("disjoint pair labels")
    }
}

impl Default for BellTriple {
    fn default() -> Self {
        Self::new(BellState::PhiPlus, BellState::PhiPlus, BellState::PhiPlus)
    }
}

impl fmt::Display for BellTriple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{},{}", self.pair12, self.pair34, self.pair56)
    }
}

impl Serialize for BellTriple {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl FromStr for BellTriple {
    type Err = UnknownStateName;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(',').collect();
        let [a, b, c] = parts[..] else {
            return Err(UnknownStateName(s.to_string()));
        };
        Ok(Self::new(a.parse()?, b.parse()?, c.parse()?))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SwapTerm {
    pub alice: GhzState,
    pub bob: GhzState,
    pub coeff: Complex64,
}

/// `|triple⟩ = Σ coeff · |alice⟩₁₃₅ ⊗ |bob⟩₂₄₆`, terms in Alice's
/// [`GhzState::ALL`] order.
#[derive(Debug, Clone, PartialEq)]
pub struct SwapDecomposition {
    pub triple: BellTriple,
    pub terms: Vec<SwapTerm>,
}

impl SwapDecomposition {
    /// Σ coeff · alice ⊗ bob, reordered back to qubits 1..6.
    pub fn reconstruct(&self) -> StateVector {
        let mut labels = ALICE_PARTICLES.to_vec();
        labels.extend(BOB_PARTICLES);
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); 64];
        for term in &self.terms {
            let product = tensor(
                &ghz_vector(term.alice, ALICE_PARTICLES),
                &ghz_vector(term.bob, BOB_PARTICLES),
            )
            .expect("disjoint halves");
            for (slot, a) in amplitudes.iter_mut().zip(product.amplitudes()) {
                *slot += term.coeff * a;
            }
        }
        StateVector::unnormalized(labels, amplitudes)
            .and_then(|s| s.reorder(&[1, 2, 3, 4, 5, 6]))
            .expect("six distinct labels")
    }

    pub fn alice_for(&self, bob: GhzState) -> Option<GhzState> {
        self.terms.iter().find(|t| t.bob == bob).map(|t| t.alice)
    }

    pub fn bob_for(&self, alice: GhzState) -> Option<GhzState> {
        self.terms.iter().find(|t| t.alice == alice).map(|t| t.bob)
    }
}

pub fn decompose(t: BellTriple) -> SwapDecomposition {
    let joint = t.joint_state();
    let mut terms = Vec::with_capacity(8);
    for alice in GhzState::ALL {
        let residual = project_amplitude(
            &joint,
            &ghz_vector(alice, ALICE_PARTICLES),
            &ALICE_PARTICLES,
        )
        .expect("alice particles are in the joint state")
        .residual;
        for bob in GhzState::ALL {
            let coeff = ghz_vector(bob, BOB_PARTICLES)
                .inner(&residual)
                .expect("residual lives on bob's particles");
            if coeff.norm() > PHYSICAL_TOL {
                terms.push(SwapTerm { alice, bob, coeff });
            }
        }
    }
    SwapDecomposition { triple: t, terms }
}

/// Bob's GHZ outcome → Alice's outcome when no operation is applied.
pub type Pairing = BTreeMap<GhzState, GhzState>;

pub fn baseline_pairing(t: BellTriple) -> Pairing {
    decompose(t)
        .terms
        .iter()
        .map(|t| (t.bob, t.alice))
        .collect()
}

/// How each code of a scheme moves Alice's GHZ state.
#[derive(Debug, Clone, PartialEq)]
pub struct OperationAction {
    pub op_map: BTreeMap<(GhzState, Code), GhzState>,
    pub inverse: BTreeMap<(GhzState, GhzState), Code>,
}

/// Applies every code of `scheme` to every GHZ state on Alice's particles
/// and identifies the result. Fails unless each code keeps the basis and,
/// for each starting state, distinct codes land on distinct states.
pub fn operation_action(scheme: &EncodingScheme) -> Result<OperationAction, SwapError> {
    let mut op_map = BTreeMap::new();
    let mut inverse = BTreeMap::new();
    for baseline in GhzState::ALL {
        let start = ghz_vector(baseline, ALICE_PARTICLES);
        for code in scheme.codes() {
            let moved = scheme
                .apply(&start, code)
                .ok()
                .and_then(|v| identify_ghz(&v).ok())
                .ok_or_else(|| SwapError::NotGhz {
                    scheme: scheme.id().to_string(),
                    code: code.to_string(),
                    baseline,
                })?;
            if inverse.insert((baseline, moved.state), code).is_some() {
                return Err(SwapError::NotBijective {
                    scheme: scheme.id().to_string(),
                    baseline,
                    observed: moved.state,
                });
            }
            op_map.insert((baseline, code), moved.state);
        }
    }
    Ok(OperationAction { op_map, inverse })
}

/// Everything Bob needs to turn (his outcome, Alice's outcome) into bits.
#[derive(Debug, Clone, PartialEq)]
pub struct DecodeTable {
    triple: BellTriple,
    scheme: SchemeId,
    baseline: Pairing,
    action: OperationAction,
}

impl DecodeTable {
    pub fn triple(&self) -> BellTriple {
        self.triple
    }

    pub fn scheme(&self) -> SchemeId {
        self.scheme
    }

    pub fn baseline(&self) -> &Pairing {
        &self.baseline
    }

    pub fn op_map(&self) -> &BTreeMap<(GhzState, Code), GhzState> {
        &self.action.op_map
    }

    pub fn inverse(&self) -> &BTreeMap<(GhzState, GhzState), Code> {
        &self.action.inverse
    }

    /// Alice's outcome implied by Bob's outcome with no operation applied.
    pub fn alice_baseline(&self, bob: GhzState) -> GhzState {
        self.baseline[&bob]
    }

    pub fn observed(&self, baseline: GhzState, code: Code) -> Option<GhzState> {
        self.action.op_map.get(&(baseline, code)).copied()
    }

    pub fn code_for(&self, baseline: GhzState, observed: GhzState) -> Option<Code> {
        self.action.inverse.get(&(baseline, observed)).copied()
    }

    /// The baseline that `code` maps onto `observed`; Alice's side of the
    /// key derivation.
    pub fn baseline_for(&self, code: Code, observed: GhzState) -> Option<GhzState> {
        GhzState::ALL
            .into_iter()
            .find(|&g| self.observed(g, code) == Some(observed))
    }
}

pub fn build_decode_table(
    t: BellTriple,
    scheme: &EncodingScheme,
) -> Result<DecodeTable, SwapError> {
    Ok(DecodeTable {
        triple: t,
        scheme: scheme.id(),
        baseline: baseline_pairing(t),
        action: operation_action(scheme)?,
    })
}

fn fmt_real(x: f64) -> String {
    // Avoid printing "-0.000…".
    format!("{:.15}", if x == 0.0 { 0.0 } else { x })
}

/// Text export, one record per line:
///
/// ```text
/// triple phi+,phi+,phi+ scheme main
/// term <alice> <bob> <coeff re> <coeff im>     (8 lines)
/// decode <baseline> <code> <observed>          (8 × 2^bits lines)
/// ```
pub fn export_table(decomposition: &SwapDecomposition, table: &DecodeTable) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "triple {} scheme {}",
        decomposition.triple, table.scheme
    );
    for term in &decomposition.terms {
        let _ = writeln!(
            out,
            "term {} {} {} {}",
            term.alice,
            term.bob,
            fmt_real(term.coeff.re),
            fmt_real(term.coeff.im)
        );
    }
    for ((baseline, code), observed) in &table.action.op_map {
        let _ = writeln!(out, "decode {baseline} {code} {observed}");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bases::BellState::*;
    use crate::bases::GhzState::*;
    use crate::encoding::list_schemes;

    fn pairs(d: &SwapDecomposition) -> Vec<(GhzState, GhzState)> {
        let mut v: Vec<_> = d.terms.iter().map(|t| (t.alice, t.bob)).collect();
        v.sort();
        v
    }

    fn sorted(mut v: Vec<(GhzState, GhzState)>) -> Vec<(GhzState, GhzState)> {
        v.sort();
        v
    }

    #[test]
    fn all_phi_plus_is_identity_pairing() {
        let d = decompose(BellTriple::default());
        assert_eq!(pairs(&d), GhzState::ALL.map(|g| (g, g)).to_vec());
        for t in &d.terms {
            assert!((t.coeff - Complex64::new(1.0 / (2.0 * 2f64.sqrt()), 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn phi_minus_psi_plus_phi_plus() {
        let d = decompose(BellTriple::new(PhiMinus, PsiPlus, PhiPlus));
        let expected = sorted(vec![
            (RMinus, PPlus),
            (RPlus, PMinus),
            (SMinus, QPlus),
            (SPlus, QMinus),
            (PMinus, RPlus),
            (PPlus, RMinus),
            (QMinus, SPlus),
            (QPlus, SMinus),
        ]);
        assert_eq!(pairs(&d), expected);
    }

    #[test]
    fn psi_plus_phi_minus_phi_plus() {
        let d = decompose(BellTriple::new(PsiPlus, PhiMinus, PhiPlus));
        let expected = sorted(vec![
            (SMinus, PPlus),
            (SPlus, PMinus),
            (RMinus, QPlus),
            (RPlus, QMinus),
            (QMinus, RPlus),
            (QPlus, RMinus),
            (PMinus, SPlus),
            (PPlus, SMinus),
        ]);
        assert_eq!(pairs(&d), expected);
    }

    #[test]
    fn baseline_examples() {
        assert_eq!(baseline_pairing(BellTriple::default())[&RMinus], RMinus);
        assert_eq!(
            baseline_pairing(BellTriple::new(PhiMinus, PsiPlus, PhiPlus))[&RMinus],
            PPlus
        );
    }

    #[test]
    fn every_triple_reconstructs_with_uniform_weights() {
        let k = 1.0 / (2.0 * 2f64.sqrt());
        for t in BellTriple::all() {
            let d = decompose(t);
            assert_eq!(d.terms.len(), 8, "{t}");
            for term in &d.terms {
                assert!((term.coeff.norm() - k).abs() < PHYSICAL_TOL);
            }
            let total: f64 = d.terms.iter().map(|t| t.coeff.norm_sqr()).sum();
            assert!((total - 1.0).abs() < PHYSICAL_TOL);
            let mut alices: Vec<_> = d.terms.iter().map(|t| t.alice).collect();
            let mut bobs: Vec<_> = d.terms.iter().map(|t| t.bob).collect();
            alices.sort();
            bobs.sort();
            assert_eq!(alices, GhzState::ALL.to_vec());
            assert_eq!(bobs, GhzState::ALL.to_vec());
            assert!(d.reconstruct().approx_eq(&t.joint_state(), PHYSICAL_TOL));
            assert_eq!(baseline_pairing(t).len(), 8);
        }
        assert_eq!(BellTriple::all().count(), 64);
    }

    #[test]
    fn main_scheme_decodes_worked_example() {
        let table = build_decode_table(BellTriple::default(), &EncodingScheme::main()).unwrap();
        assert_eq!(table.code_for(RMinus, PPlus).unwrap().to_string(), "111");
        for g in GhzState::ALL {
            assert_eq!(table.code_for(g, g).unwrap().to_string(), "000");
        }
    }

    #[test]
    fn inverse_inverts_op_map() {
        for scheme in list_schemes() {
            let table = build_decode_table(BellTriple::default(), &scheme).unwrap();
            for g in GhzState::ALL {
                let mut images: Vec<_> = scheme
                    .codes()
                    .map(|c| table.observed(g, c).unwrap())
                    .collect();
                images.sort();
                images.dedup();
                assert_eq!(images.len(), 8);
                for c in scheme.codes() {
                    let o = table.observed(g, c).unwrap();
                    assert_eq!(table.code_for(g, o), Some(c));
                    assert_eq!(table.baseline_for(c, o), Some(g));
                }
            }
        }
    }

    #[test]
    fn export_format() {
        let d = decompose(BellTriple::default());
        let table = build_decode_table(BellTriple::default(), &EncodingScheme::main()).unwrap();
        let text = export_table(&d, &table);
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("triple phi+,phi+,phi+ scheme main"));
        assert_eq!(
            lines.next(),
            Some("term P+ P+ 0.353553390593274 0.000000000000000")
        );
        assert_eq!(
            text.lines().filter(|l| l.starts_with("decode ")).count(),
            64
        );
    }

    #[test]
    fn triple_parsing() {
        let t: BellTriple = "phi-,psi+,phi+".parse().unwrap();
        assert_eq!(t, BellTriple::new(PhiMinus, PsiPlus, PhiPlus));
        assert_eq!(t.to_string().parse::<BellTriple>().unwrap(), t);
        assert!("phi+,phi+".parse::<BellTriple>().is_err());
        assert!("phi+,chi+,phi+".parse::<BellTriple>().is_err());
    }
}
