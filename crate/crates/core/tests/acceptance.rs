//! Acceptance criteria, one line per criterion. Exits non-zero on any failure.

use std::collections::BTreeSet;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use qsdc_swap::bases::{ghz_basis, BellState, GhzState};
use qsdc_swap::encoding::{
    list_schemes, Code, EncodingScheme, GhzBitCode, Message, ALICE_PARTICLES,
};
use qsdc_swap::protocol::{
    run_attack, run_qsdc, Branch, EveConfig, EveStrategy, GroupExchange, PairGroup, ProtocolConfig,
    SimRng, Transcript, TripleChoice,
};
use qsdc_swap::quantum_core::{collapse, outcome_probabilities, PHYSICAL_TOL};
use qsdc_swap::swap_engine::{
    build_decode_table, decompose, BellTriple, DecodeTable, BOB_PARTICLES,
};

use BellState::*;
use GhzState::*;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(cond: bool, ok: String, bad: String) -> Outcome {
    if cond {
        Ok(ok)
    } else {
        Err(bad)
    }
}

fn pairs_of(t: BellTriple) -> BTreeSet<(GhzState, GhzState)> {
    decompose(t)
        .terms
        .iter()
        .map(|t| (t.alice, t.bob))
        .collect()
}

fn c1() -> Outcome {
    let start = Instant::now();
    let d = decompose(BellTriple::default());
    let elapsed = start.elapsed();
    let k = 1.0 / (2.0 * 2f64.sqrt());
    let identity = d.terms.len() == 8 && d.terms.iter().all(|t| t.alice == t.bob);
    let worst = d
        .terms
        .iter()
        .map(|t| (t.coeff.norm() - k).abs())
        .fold(0.0, f64::max);
    check(
        identity && worst < PHYSICAL_TOL && elapsed < Duration::from_secs(1),
        format!("identity pairing, max |coeff| error {worst:.1e}, {elapsed:?}"),
        format!("identity={identity} worst={worst:e} elapsed={elapsed:?}"),
    )
}

fn c2() -> Outcome {
    let expected: BTreeSet<_> = [
        (PPlus, RMinus),
        (PMinus, RPlus),
        (QPlus, SMinus),
        (QMinus, SPlus),
        (RPlus, PMinus),
        (RMinus, PPlus),
        (SPlus, QMinus),
        (SMinus, QPlus),
    ]
    .into();
    let got = pairs_of(BellTriple::new(PhiMinus, PsiPlus, PhiPlus));
    check(
        got == expected,
        "phi-,psi+,phi+ pairs P+R- P-R+ Q+S- Q-S+ and mirrors".into(),
        format!("got {got:?}"),
    )
}

fn c3() -> Outcome {
    let t = BellTriple::new(PsiPlus, PhiMinus, PhiPlus);
    let expected: BTreeSet<_> = [
        (PPlus, SMinus),
        (PMinus, SPlus),
        (QPlus, RMinus),
        (QMinus, RPlus),
        (RPlus, QMinus),
        (RMinus, QPlus),
        (SPlus, PMinus),
        (SMinus, PPlus),
    ]
    .into();
    let state = t.joint_state();
    let alice_basis = ghz_basis(ALICE_PARTICLES);
    let bob_basis = ghz_basis(BOB_PARTICLES);
    let mut seen = BTreeSet::new();
    let mut worst: f64 = 0.0;
    for a in GhzState::ALL {
        let (pa, after) = collapse(&state, &alice_basis, &ALICE_PARTICLES, a.index())
            .map_err(|e| e.to_string())?;
        let pb =
            outcome_probabilities(&after, &bob_basis, &BOB_PARTICLES).map_err(|e| e.to_string())?;
        for b in GhzState::ALL {
            let joint = pa * pb[b.index()];
            if joint > PHYSICAL_TOL {
                seen.insert((a, b));
                worst = worst.max((joint - 0.125).abs());
            }
        }
    }
    check(
        seen == expected && worst < PHYSICAL_TOL,
        format!("8 joint outcomes, each 1/8 within {worst:.1e}"),
        format!("seen {seen:?}, worst {worst:e}"),
    )
}

fn table(triple: BellTriple, scheme: &EncodingScheme) -> Result<DecodeTable, String> {
    build_decode_table(triple, scheme).map_err(|e| e.to_string())
}

fn forced(
    triple: BellTriple,
    scheme: &EncodingScheme,
    table: &DecodeTable,
    code: Code,
    alice: GhzState,
) -> Result<(GhzState, Code, Option<GhzState>), String> {
    let mut rng = SimRng::new(0);
    let mut t = Transcript::new();
    let mut ex = GroupExchange::new(PairGroup::new(0, triple), scheme, table);
    let e = |e: qsdc_swap::protocol::ProtocolError| e.to_string();
    ex.alice_encode(code, &rng, &mut t).map_err(e)?;
    ex.alice_measure(Branch::Forced(alice), &mut rng, &mut t)
        .map_err(e)?;
    ex.alice_announce(&rng, &mut t).map_err(e)?;
    let bob = ex
        .bob_measure(Branch::Sample, &mut rng, &mut t)
        .map_err(e)?;
    ex.bob_request(&rng, &mut t).map_err(e)?;
    ex.alice_reveal(&rng, &mut t).map_err(e)?;
    let decoded = ex.bob_decode(&rng, &mut t).map_err(e)?;
    Ok((bob, decoded, ex.alice_baseline()))
}

fn c4() -> Outcome {
    let code: Code = "111"
        .parse()
        .map_err(|e: qsdc_swap::encoding::EncodingError| e.to_string())?;
    let (bob, decoded, _) = {
        let scheme = EncodingScheme::main();
        forced(
            BellTriple::default(),
            &scheme,
            &table(BellTriple::default(), &scheme)?,
            code,
            PPlus,
        )?
    };
    check(
        bob == RMinus && decoded == code,
        "Alice P+, Bob R-, decoded 111".into(),
        format!("Bob {bob}, decoded {decoded}"),
    )
}

fn c5() -> Outcome {
    let scheme = EncodingScheme::main();
    let m: Message = "110010101001011100"
        .parse()
        .map_err(|e: qsdc_swap::encoding::EncodingError| e.to_string())?;
    let codes = m.groups(3).map_err(|e| e.to_string())?;
    let mut got = Vec::new();
    for c in codes {
        let ops = scheme.encode_group(c).map_err(|e| e.to_string())?;
        got.push(ops.iter().map(|o| o.symbol).collect::<Vec<_>>().join("⊗"));
    }
    let expected = ["σ11⊗σ0", "σ01⊗σ0", "σ10⊗σ1", "σ00⊗σ1", "σ01⊗σ1", "σ10⊗σ0"];
    check(got == expected, got.join(" "), format!("got {got:?}"))
}

fn c6() -> Outcome {
    let bitcode = GhzBitCode::standard();
    let code: Code = "111"
        .parse()
        .map_err(|e: qsdc_swap::encoding::EncodingError| e.to_string())?;
    let (_, decoded, baseline) = {
        let scheme = EncodingScheme::main();
        forced(
            BellTriple::default(),
            &scheme,
            &table(BellTriple::default(), &scheme)?,
            code,
            PPlus,
        )?
    };
    let baseline = baseline.ok_or("no baseline")?;
    let random = bitcode.bits(baseline);
    let key: String = format!("{decoded}{random}");
    check(
        decoded.to_string() == "111" && random.to_string() == "101" && key.len() == 6,
        format!("key 111 + {random} = 6 bits from 3 pairs"),
        format!("certain {decoded}, random {random}"),
    )
}

fn c7() -> Outcome {
    let start = Instant::now();
    let schemes = list_schemes();
    let mut runs = 0usize;
    let mut failures = Vec::new();
    for triple in BellTriple::all() {
        for scheme in &schemes {
            let table = table(triple, scheme)?;
            let codes: Vec<Code> = scheme.codes().collect();
            for &code in &codes {
                for alice in GhzState::ALL {
                    runs += 1;
                    match forced(triple, scheme, &table, code, alice) {
                        Ok((_, d, _)) if d == code => {}
                        other => failures.push(format!(
                            "{triple} {} {code} {alice}: {other:?}",
                            scheme.id()
                        )),
                    }
                }
            }
        }
    }
    let elapsed = start.elapsed();
    check(
        failures.is_empty() && runs == 64 * 17 * 8 * 8 && elapsed < Duration::from_secs(30),
        format!("{runs} round trips exact in {elapsed:.2?}"),
        format!(
            "{} failures of {runs}, {elapsed:?}; first {:?}",
            failures.len(),
            failures.first()
        ),
    )
}

fn c8() -> Outcome {
    let groups = 10_000;
    let mut rng = SimRng::new(2024);
    let bits: Vec<u8> = (0..3 * groups).map(|_| rng.random_range(0..2)).collect();
    let message = Message::from_bits(bits).map_err(|e| e.to_string())?;
    let config = ProtocolConfig {
        triples: TripleChoice::Random,
        ..ProtocolConfig::default()
    };
    let run = run_qsdc(&message, &config, &mut rng).map_err(|e| e.to_string())?;
    let mut counts = [0f64; 8];
    for g in &run.groups {
        counts[g.alice_outcome.index()] += 1.0;
    }
    let expected = groups as f64 / 8.0;
    let chi2: f64 = counts
        .iter()
        .map(|c| (c - expected).powi(2) / expected)
        .sum();
    let p = 1.0 - ChiSquared::new(7.0).map_err(|e| e.to_string())?.cdf(chi2);
    check(
        run.groups.len() == groups && p > 0.001,
        format!("chi2 {chi2:.2} (7 dof), p = {p:.3}"),
        format!("chi2 {chi2}, p {p}"),
    )
}

fn c9() -> Outcome {
    let n = 10_000;
    let eve = EveConfig::new(EveStrategy::InterceptResendRandom, 1.0).map_err(|e| e.to_string())?;
    let full = run_attack(eve, n, &mut SimRng::new(77)).map_err(|e| e.to_string())?;
    let sigma = (0.25f64 * 0.75 / n as f64).sqrt();
    let quiet =
        EveConfig::new(EveStrategy::InterceptResendRandom, 0.0).map_err(|e| e.to_string())?;
    let none = run_attack(quiet, n, &mut SimRng::new(77)).map_err(|e| e.to_string())?;
    check(
        full.pairs_tested == n
            && (full.error_rate - 0.25).abs() <= 3.0 * sigma
            && none.error_rate == 0.0,
        format!(
            "p=1 rate {:.4} (0.25 ± {:.4}), p=0 rate {}",
            full.error_rate,
            3.0 * sigma,
            none.error_rate
        ),
        format!("p=1 rate {}, p=0 rate {}", full.error_rate, none.error_rate),
    )
}

fn c10() -> Outcome {
    let message: Message = "110010101001011100"
        .parse()
        .map_err(|e: qsdc_swap::encoding::EncodingError| e.to_string())?;
    let config = ProtocolConfig {
        triples: TripleChoice::Random,
        eve: EveConfig::new(EveStrategy::InterceptResendRandom, 0.3).map_err(|e| e.to_string())?,
        verify_fraction: 1.0,
        threshold: 1.0,
        ..ProtocolConfig::default()
    };
    let go = || {
        run_qsdc(&message, &config, &mut SimRng::new(31337))
            .map(|r| r.transcript.to_jsonl())
            .map_err(|e| e.to_string())
    };
    let (a, b) = (go()?, go()?);
    check(
        a == b && !a.is_empty(),
        format!("{} transcript bytes identical", a.len()),
        "transcripts differ".into(),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("decomposition of phi+ x3", c1),
        ("phi-,psi+,phi+ pairings", c2),
        ("psi+,phi-,phi+ outcome set", c3),
        ("forced-branch worked example", c4),
        ("encoding of 110010101001011100", c5),
        ("QKD key from one group", c6),
        ("exhaustive round trip", c7),
        ("uniform Alice outcomes", c8),
        ("intercept-resend detection", c9),
        ("replay determinism", c10),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        match f() {
            Ok(detail) => println!("criterion {}: PASS {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {}: FAIL {name}: {detail}", i + 1);
            }
        }
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
