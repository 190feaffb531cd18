//! The `qsdc` command line.
//!
//! Exit status: 0 on success, 1 when a run aborts or the decoded output does
//! not match, 2 on usage errors.

use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::encoding::{EncodingScheme, GhzBitCode, Message, SchemeId};
use crate::protocol::{
    run_attack, run_qkd, run_qsdc, EveConfig, EveStrategy, ProtocolConfig, RunStatus, SimRng,
    TripleChoice, VerificationReport,
};
use crate::swap_engine::{build_decode_table, decompose, export_table, BellTriple};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "qsdc",
    version,
    about = "Secure direct communication by entanglement swapping"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a simulation (qsdc or qkd), or dispatch to tables/attack.
    Run(RunArgs),
    /// Dump swapping decompositions and decode tables.
    Tables(TableArgs),
    /// Measure how often verification catches an intercept-resend attack.
    Attack(AttackArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Qsdc,
    Qkd,
    Tables,
    Attack,
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    #[arg(long, value_enum, default_value = "qsdc")]
    pub mode: Mode,
    /// Bit string to send (qsdc); length must be a multiple of 3.
    #[arg(long)]
    pub message: Option<String>,
    /// Number of key groups (qkd).
    #[arg(long, default_value_t = 1)]
    pub groups: usize,
    /// main, b1, b2, b3, c:<m>,<n>:<x|iy>, d
    #[arg(long, default_value = "main")]
    pub scheme: String,
    /// Bell triple such as phi+,psi+,phi+, or `random`.
    #[arg(long, default_value = "phi+,phi+,phi+")]
    pub triple: String,
    /// Emit tables for all 64 triples (tables mode).
    #[arg(long)]
    pub all: bool,
    /// Eavesdropper: none, z, x, random.
    #[arg(long, default_value = "none")]
    pub eve: String,
    #[arg(long, default_value_t = 1.0)]
    pub eve_probability: f64,
    /// Extra verification groups per message group.
    #[arg(long, default_value_t = 0.0)]
    pub verify_fraction: f64,
    #[arg(long, default_value_t = 0.0)]
    pub threshold: f64,
    /// Tested pairs (attack mode).
    #[arg(long, default_value_t = 10_000)]
    pub pairs: usize,
    #[arg(long, env = "QSDC_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Transcript (or table/report) output file.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct TableArgs {
    #[arg(long, conflicts_with = "all")]
    pub triple: Option<String>,
    #[arg(long)]
    pub all: bool,
    #[arg(long, default_value = "main")]
    pub scheme: String,
    #[arg(long, default_value = "tables.txt")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct AttackArgs {
    /// none, z, x, random
    #[arg(long, default_value = "random")]
    pub strategy: String,
    #[arg(long, default_value_t = 1.0)]
    pub probability: f64,
    #[arg(long, default_value_t = 10_000)]
    pub pairs: usize,
    #[arg(long, env = "QSDC_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Optional JSON report file.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("io: {0}")]
    Io(#[from] io::Error),
    #[error(transparent)]
    Protocol(#[from] crate::protocol::ProtocolError),
}

fn usage(e: impl std::fmt::Display) -> CliError {
    CliError::Usage(e.to_string())
}

/// Validated settings for one invocation.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub mode: Mode,
    pub message: Option<Message>,
    pub n_groups: usize,
    pub scheme: EncodingScheme,
    pub triples: TripleChoice,
    pub all_triples: bool,
    pub eve: EveConfig,
    pub verify_fraction: f64,
    pub threshold: f64,
    pub pairs: usize,
    pub seed: u64,
    pub out: PathBuf,
}

impl RunConfig {
    pub fn from_args(args: &RunArgs) -> Result<Self, CliError> {
        let scheme_id: SchemeId = args.scheme.parse().map_err(usage)?;
        let scheme = EncodingScheme::new(scheme_id).map_err(usage)?;
        let triples = parse_triples(&args.triple)?;
        let strategy: EveStrategy = args.eve.parse().map_err(usage)?;
        let eve = match strategy {
            EveStrategy::None => EveConfig::none(),
            s => EveConfig::new(s, args.eve_probability).map_err(usage)?,
        };
        for (name, p) in [
            ("verify-fraction", args.verify_fraction),
            ("threshold", args.threshold),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(CliError::Usage(format!("{name} {p} is outside [0, 1]")));
            }
        }
        let message = match (args.mode, &args.message) {
            (Mode::Qsdc, None) => return Err(usage("qsdc mode needs --message")),
            (_, Some(m)) => {
                let m: Message = m.parse().map_err(usage)?;
                m.groups(scheme.bits_per_group()).map_err(usage)?;
                Some(m)
            }
            (_, None) => None,
        };
        if args.mode == Mode::Qkd && args.groups == 0 {
            return Err(usage("--groups must be at least 1"));
        }
        if args.mode == Mode::Attack && args.pairs == 0 {
            return Err(usage("--pairs must be at least 1"));
        }
        let default_out = match args.mode {
            Mode::Tables => "tables.txt",
            Mode::Attack => "attack.json",
            Mode::Qsdc | Mode::Qkd => "transcript.jsonl",
        };
        Ok(Self {
            mode: args.mode,
            message,
            n_groups: args.groups,
            scheme,
            triples,
            all_triples: args.all,
            eve,
            verify_fraction: args.verify_fraction,
            threshold: args.threshold,
            pairs: args.pairs,
            seed: args.seed,
            out: args.out.clone().unwrap_or_else(|| default_out.into()),
        })
    }

    fn protocol(&self) -> ProtocolConfig {
        ProtocolConfig {
            scheme: self.scheme.clone(),
            triples: self.triples.clone(),
            eve: self.eve,
            verify_fraction: self.verify_fraction,
            threshold: self.threshold,
        }
    }
}

fn parse_triples(arg: &str) -> Result<TripleChoice, CliError> {
    if arg.trim().eq_ignore_ascii_case("random") {
        return Ok(TripleChoice::Random);
    }
    let t: BellTriple = arg.parse().map_err(usage)?;
    Ok(TripleChoice::Fixed(t))
}

fn bits_str(bits: &[u8]) -> String {
    bits.iter().map(|b| char::from(b'0' + b)).collect()
}

fn verification_line(report: Option<VerificationReport>) -> String {
    match report {
        None => "none".to_string(),
        Some(r) => format!(
            "qber {:.4} ({}/{} mismatches) {}",
            r.qber,
            r.mismatches,
            r.pairs_tested,
            if r.passed { "passed" } else { "failed" }
        ),
    }
}

/// Parses `args` and runs the command, writing the summary to `out`.
/// Returns the process exit status.
pub fn main_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(err, "{}", e.render());
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match dispatch(&cli.command, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "{e}");
            match e {
                CliError::Usage(_) => EXIT_USAGE,
                CliError::Io(_) | CliError::Protocol(_) => EXIT_FAILED,
            }
        }
    }
}

pub fn dispatch(command: &Command, out: &mut dyn Write) -> Result<i32, CliError> {
    match command {
        Command::Run(args) => cmd_run(&RunConfig::from_args(args)?, out),
        Command::Tables(args) => {
            let scheme = EncodingScheme::new(args.scheme.parse().map_err(usage)?).map_err(usage)?;
            let triples = match (&args.triple, args.all) {
                (_, true) => None,
                (Some(t), false) => Some(t.parse::<BellTriple>().map_err(usage)?),
                (None, false) => return Err(usage("tables needs --triple or --all")),
            };
            cmd_tables(triples, &scheme, &args.out, out)
        }
        Command::Attack(args) => {
            let strategy: EveStrategy = args.strategy.parse().map_err(usage)?;
            let eve = EveConfig::new(strategy, args.probability).map_err(usage)?;
            if args.pairs == 0 {
                return Err(usage("--pairs must be at least 1"));
            }
            cmd_attack(eve, args.pairs, args.seed, args.out.as_deref(), out)
        }
    }
}

pub fn cmd_run(config: &RunConfig, out: &mut dyn Write) -> Result<i32, CliError> {
    match config.mode {
        Mode::Tables => {
            let triple = match (&config.triples, config.all_triples) {
                (_, true) => None,
                (TripleChoice::Fixed(t), false) => Some(*t),
                _ => return Err(usage("tables mode needs a fixed --triple or --all")),
            };
            return cmd_tables(triple, &config.scheme, &config.out, out);
        }
        Mode::Attack => {
            return cmd_attack(
                config.eve,
                config.pairs,
                config.seed,
                Some(&config.out),
                out,
            );
        }
        Mode::Qsdc | Mode::Qkd => {}
    }
    let mut rng = SimRng::new(config.seed);
    let protocol = config.protocol();
    let mut summary = String::new();
    let mode = if config.mode == Mode::Qsdc {
        "qsdc"
    } else {
        "qkd"
    };
    let _ = writeln!(summary, "mode: {mode}");
    let _ = writeln!(summary, "scheme: {}", config.scheme.id());
    let _ = writeln!(summary, "seed: {}", config.seed);
    let (transcript, ok) = if config.mode == Mode::Qsdc {
        let message = config.message.as_ref().expect("validated");
        let run = run_qsdc(message, &protocol, &mut rng)?;
        let decoded = run.decoded.as_ref().map(|m| m.to_string());
        let matched = run.decoded.as_ref() == Some(message);
        let _ = writeln!(summary, "bits sent: {message}");
        let _ = writeln!(summary, "decoded: {}", decoded.as_deref().unwrap_or("-"));
        let _ = writeln!(summary, "match: {}", if matched { "yes" } else { "no" });
        let _ = writeln!(
            summary,
            "verification: {}",
            verification_line(run.verification)
        );
        let _ = writeln!(summary, "status: {}", status_name(run.status));
        (
            run.transcript,
            matched && run.status == RunStatus::Completed,
        )
    } else {
        let run = run_qkd(
            config.n_groups,
            &protocol,
            &GhzBitCode::standard(),
            &mut rng,
        )?;
        let equal = run.alice_key == run.bob_key;
        let _ = writeln!(summary, "groups: {}", config.n_groups);
        let _ = writeln!(summary, "key bits per party: {}", run.alice_key.len());
        let _ = writeln!(summary, "alice key: {}", bits_str(&run.alice_key));
        let _ = writeln!(summary, "bob key: {}", bits_str(&run.bob_key));
        let _ = writeln!(summary, "keys equal: {}", if equal { "yes" } else { "no" });
        let _ = writeln!(
            summary,
            "verification: {}",
            verification_line(run.verification)
        );
        let _ = writeln!(summary, "status: {}", status_name(run.status));
        (run.transcript, equal && run.status == RunStatus::Completed)
    };
    fs::write(&config.out, transcript.to_jsonl())?;
    let _ = writeln!(summary, "transcript: {}", config.out.display());
    out.write_all(summary.as_bytes())?;
    Ok(if ok { EXIT_OK } else { EXIT_FAILED })
}

fn status_name(s: RunStatus) -> &'static str {
    match s {
        RunStatus::Completed => "completed",
        RunStatus::Aborted => "aborted",
    }
}

/// Writes decompositions and decode tables for one triple, or all 64 when
/// `triple` is `None`.
pub fn cmd_tables(
    triple: Option<BellTriple>,
    scheme: &EncodingScheme,
    path: &std::path::Path,
    out: &mut dyn Write,
) -> Result<i32, CliError> {
    let triples: Vec<BellTriple> = match triple {
        Some(t) => vec![t],
        None => BellTriple::all().collect(),
    };
    let mut text = String::new();
    for t in &triples {
        let d = decompose(*t);
        let table = build_decode_table(*t, scheme).map_err(crate::protocol::ProtocolError::from)?;
        text.push_str(&export_table(&d, &table));
    }
    fs::write(path, &text)?;
    writeln!(
        out,
        "wrote {} triples ({} term rows) for scheme {} to {}",
        triples.len(),
        triples.len() * 8,
        scheme.id(),
        path.display()
    )?;
    Ok(EXIT_OK)
}

pub fn cmd_attack(
    eve: EveConfig,
    n_pairs: usize,
    seed: u64,
    path: Option<&std::path::Path>,
    out: &mut dyn Write,
) -> Result<i32, CliError> {
    let mut rng = SimRng::new(seed);
    let report = run_attack(eve, n_pairs, &mut rng)?;
    writeln!(out, "strategy: {}", eve.strategy)?;
    writeln!(out, "intercept probability: {}", eve.intercept_probability)?;
    writeln!(out, "pairs tested: {}", report.pairs_tested)?;
    writeln!(out, "mismatches: {}", report.mismatches)?;
    writeln!(out, "detection rate: {:.4}", report.error_rate)?;
    writeln!(
        out,
        "3-sigma interval: [{:.4}, {:.4}]",
        report.ci_low, report.ci_high
    )?;
    writeln!(out, "expected rate: {:.4}", report.expected_rate)?;
    if let Some(path) = path {
        let mut json = serde_json::to_string_pretty(&report).expect("report serializes");
        json.push('\n');
        fs::write(path, json)?;
    }
    Ok(EXIT_OK)
}
