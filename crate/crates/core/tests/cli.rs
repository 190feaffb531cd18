use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn qsdc(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qsdc"))
        .current_dir(dir)
        .env_remove("QSDC_SEED")
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn qsdc_run_decodes_message() {
    let dir = TempDir::new().unwrap();
    let o = qsdc(
        dir.path(),
        &["run", "--mode", "qsdc", "--message", "111", "--seed", "7"],
    );
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    assert!(s.contains("decoded: 111"), "{s}");
    assert!(s.contains("match: yes"), "{s}");
    let transcript = std::fs::read_to_string(dir.path().join("transcript.jsonl")).unwrap();
    for line in transcript.lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        for key in ["seq", "actor", "event", "rng_position"] {
            assert!(v.get(key).is_some(), "{key} missing in {line}");
        }
    }
}

#[test]
fn bad_message_length_is_usage_error() {
    let dir = TempDir::new().unwrap();
    let o = qsdc(dir.path(), &["run", "--mode", "qsdc", "--message", "11"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!dir.path().join("transcript.jsonl").exists());
}

#[test]
fn unknown_scheme_and_triple_are_usage_errors() {
    let dir = TempDir::new().unwrap();
    let o = qsdc(dir.path(), &["run", "--message", "111", "--scheme", "zz"]);
    assert_eq!(o.status.code(), Some(2));
    let o = qsdc(dir.path(), &["tables", "--triple", "phi+,chi-,phi+"]);
    assert_eq!(o.status.code(), Some(2));
    let o = qsdc(dir.path(), &["run", "--bogus-flag"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn qkd_three_groups_give_eighteen_bits() {
    let dir = TempDir::new().unwrap();
    let o = qsdc(dir.path(), &["run", "--mode", "qkd", "--groups", "3"]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    assert!(s.contains("key bits per party: 18"), "{s}");
    assert!(s.contains("keys equal: yes"), "{s}");
    let key = |who: &str| {
        s.lines()
            .find_map(|l| l.strip_prefix(who))
            .unwrap()
            .trim()
            .to_string()
    };
    assert_eq!(key("alice key:").len(), 18);
    assert_eq!(key("alice key:"), key("bob key:"));
}

#[test]
fn tables_for_one_triple() {
    let dir = TempDir::new().unwrap();
    let o = qsdc(
        dir.path(),
        &["tables", "--triple", "phi+,phi+,phi+", "--out", "t.txt"],
    );
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(dir.path().join("t.txt")).unwrap();
    let terms: Vec<&str> = text.lines().filter(|l| l.starts_with("term ")).collect();
    assert_eq!(terms.len(), 8);
    for t in terms {
        let f: Vec<&str> = t.split_whitespace().collect();
        assert_eq!(f[1], f[2], "identity pairing");
        assert!(f[3].starts_with("0.353553"));
    }

    let o = qsdc(
        dir.path(),
        &["tables", "--triple", "phi-,psi+,phi+", "--out", "t7.txt"],
    );
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(dir.path().join("t7.txt")).unwrap();
    assert!(text.contains("term P+ R- "));
    assert!(text.contains("term R- P+ "));
}

#[test]
fn tables_for_all_triples() {
    let dir = TempDir::new().unwrap();
    let o = qsdc(dir.path(), &["tables", "--all"]);
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(dir.path().join("tables.txt")).unwrap();
    let terms: Vec<&str> = text.lines().filter(|l| l.starts_with("term ")).collect();
    assert_eq!(terms.len(), 64 * 8);
    let k = 1.0 / (2.0 * 2f64.sqrt());
    for t in terms {
        let f: Vec<f64> = t
            .split_whitespace()
            .skip(3)
            .map(|x| x.parse().unwrap())
            .collect();
        assert!((f[0].hypot(f[1]) - k).abs() < 1e-9, "{t}");
    }
    // `run --mode tables` reaches the same writer.
    let o = qsdc(
        dir.path(),
        &["run", "--mode", "tables", "--all", "--out", "again.txt"],
    );
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(
        std::fs::read(dir.path().join("again.txt")).unwrap(),
        std::fs::read(dir.path().join("tables.txt")).unwrap()
    );
}

fn rate(s: &str) -> f64 {
    s.lines()
        .find_map(|l| l.strip_prefix("detection rate:"))
        .unwrap()
        .trim()
        .parse()
        .unwrap()
}

#[test]
fn attack_rates() {
    let dir = TempDir::new().unwrap();
    let sigma3 = 3.0 * (0.25f64 * 0.75 / 1e4).sqrt();
    for strategy in ["random", "z"] {
        let o = qsdc(
            dir.path(),
            &[
                "attack",
                "--strategy",
                strategy,
                "--probability",
                "1",
                "--pairs",
                "10000",
                "--seed",
                "5",
            ],
        );
        assert_eq!(o.status.code(), Some(0));
        let r = rate(&stdout(&o));
        assert!((r - 0.25).abs() <= sigma3, "{strategy}: {r}");
    }
    let o = qsdc(
        dir.path(),
        &["attack", "--probability", "0", "--pairs", "3000"],
    );
    assert_eq!(rate(&stdout(&o)), 0.0);
}

#[test]
fn aborted_run_exits_one() {
    let dir = TempDir::new().unwrap();
    let o = qsdc(
        dir.path(),
        &[
            "run",
            "--message",
            &"101".repeat(20),
            "--eve",
            "random",
            "--verify-fraction",
            "1",
            "--seed",
            "3",
        ],
    );
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("status: aborted"));
}

#[test]
fn same_seed_same_bytes_and_env_seed() {
    let dir = TempDir::new().unwrap();
    let args = |out: &'static str| {
        vec![
            "run",
            "--mode",
            "qsdc",
            "--message",
            "110010101001011100",
            "--triple",
            "random",
            "--verify-fraction",
            "0.5",
            "--seed",
            "99",
            "--out",
            out,
        ]
    };
    let a = qsdc(dir.path(), &args("a.jsonl"));
    let b = qsdc(dir.path(), &args("b.jsonl"));
    assert_eq!(a.status.code(), Some(0));
    let summary = |o: &Output| {
        stdout(o)
            .lines()
            .filter(|l| !l.starts_with("transcript:"))
            .collect::<Vec<_>>()
            .join("\n")
    };
    assert_eq!(summary(&a), summary(&b));
    let read = |f: &str| std::fs::read(dir.path().join(f)).unwrap();
    assert_eq!(read("a.jsonl"), read("b.jsonl"));

    let c = Command::new(env!("CARGO_BIN_EXE_qsdc"))
        .current_dir(dir.path())
        .env("QSDC_SEED", "99")
        .args([
            "run",
            "--mode",
            "qsdc",
            "--message",
            "110010101001011100",
            "--triple",
            "random",
            "--verify-fraction",
            "0.5",
            "--out",
            "c.jsonl",
        ])
        .output()
        .unwrap();
    assert_eq!(c.status.code(), Some(0));
    assert_eq!(read("a.jsonl"), read("c.jsonl"));
}
