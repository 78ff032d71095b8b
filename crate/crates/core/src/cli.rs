//! Command-line front end.
//!
//! `run` executes one scenario for one or more seeds, `diff` runs every
//! scenario under both schemes and compares verdict classes, `cost` prints
//! the per-phase hash invocation table.
//!
//! Exit status: 0 when the documented outcome is reproduced, 1 when it is
//! not, 2 on usage errors.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use thiserror::Error;

use crate::baseline::Baseline;
use crate::hash_codec::{HashAlgorithm, HashConfig};
use crate::improved::Improved;
use crate::runtime::cost::{measure, PhaseCosts};
use crate::runtime::scenario::expected_verdict;
use crate::runtime::{
    run_scenario, Outcome, ScenarioError, ScenarioId, ScenarioResult, Transcript,
};
use crate::scheme::SchemeKind;
use crate::AuthError;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error("cost measurement failed: {0}")]
    Cost(#[from] AuthError),
    #[error("io: {0}")]
    Io(#[from] io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Text,
    StructuredLines,
}

#[derive(Debug, Parser)]
#[command(
    name = "smartauth",
    version,
    about = "Smart-card remote authentication scenario harness"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one scenario and check it reproduces its documented outcome.
    Run(RunArgs),
    /// Run every scenario under both schemes and compare verdicts.
    Diff(DiffArgs),
    /// Print per-phase hash invocation counts for an honest run.
    Cost(CostArgs),
}

#[derive(Debug, Clone, clap::Args)]
pub struct RunArgs {
    #[arg(long, default_value = "improved", value_parser = parse_scheme)]
    pub scheme: SchemeKind,
    #[arg(long, default_value = "honest", value_parser = parse_scenario)]
    pub scenario: ScenarioId,
    #[arg(long, env = "SMARTAUTH_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Trial i runs with seed + i.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    pub trials: u64,
    #[arg(long, default_value = "sha256", value_parser = parse_hash)]
    pub hash: HashAlgorithm,
    /// Write transcripts here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = OutputFormat::Text)]
    pub format: OutputFormat,
}

#[derive(Debug, Clone, clap::Args)]
pub struct DiffArgs {
    /// Comma-separated seeds; `a-b` is an inclusive range.
    #[arg(long, value_parser = parse_seed_list, conflicts_with = "trials")]
    pub seeds: Option<SeedList>,
    #[arg(long, env = "SMARTAUTH_SEED", default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    pub trials: u64,
    #[arg(long, default_value = "sha256", value_parser = parse_hash)]
    pub hash: HashAlgorithm,
}

#[derive(Debug, Clone, clap::Args)]
pub struct CostArgs {
    #[arg(long, env = "SMARTAUTH_SEED", default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = "sha256", value_parser = parse_hash)]
    pub hash: HashAlgorithm,
}

fn parse_scheme(s: &str) -> Result<SchemeKind, String> {
    s.parse()
}

fn parse_scenario(s: &str) -> Result<ScenarioId, String> {
    s.parse().map_err(|e: ScenarioError| {
        let known: Vec<_> = ScenarioId::ALL.iter().map(|s| s.name()).collect();
        format!("{e} (expected one of: {})", known.join(", "))
    })
}

fn parse_hash(s: &str) -> Result<HashAlgorithm, String> {
    s.parse()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeedList(pub Vec<u64>);

pub fn parse_seed_list(s: &str) -> Result<SeedList, String> {
    let mut seeds = Vec::new();
    for item in s.split(',').map(str::trim).filter(|i| !i.is_empty()) {
        match item.split_once('-') {
            Some((a, b)) => {
                let a: u64 = a.parse().map_err(|_| format!("bad seed `{a}`"))?;
                let b: u64 = b.parse().map_err(|_| format!("bad seed `{b}`"))?;
                if a > b {
                    return Err(format!("empty seed range `{item}`"));
                }
                seeds.extend(a..=b);
            }
            None => seeds.push(item.parse().map_err(|_| format!("bad seed `{item}`"))?),
        }
    }
    if seeds.is_empty() {
        return Err("no seeds given".into());
    }
    Ok(SeedList(seeds))
}

/// Runs a parsed command, writing the report to `out`. Returns the exit code.
pub fn execute(cli: &Cli, out: &mut dyn Write) -> Result<i32, CliError> {
    match &cli.command {
        Command::Run(args) => cmd_run(args, out),
        Command::Diff(args) => cmd_diff(args, out),
        Command::Cost(args) => cmd_cost(args, out),
    }
}

pub fn cmd_run(args: &RunArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let hash = HashConfig::new(args.hash);
    let mut transcripts = String::new();
    let mut report = String::new();
    let mut results = Vec::new();

    for trial in 0..args.trials {
        let seed = args.seed.wrapping_add(trial);
        let (transcript, result) = run_scenario(args.scheme, args.scenario, seed, hash)?;
        append_transcript(&mut transcripts, args, trial, seed, &transcript);
        describe_trial(&mut report, &result);
        results.push(result);
    }

    let reproduced = results.iter().filter(|r| r.matches_expected()).count();
    let total = results.len();
    let _ = writeln!(
        report,
        "{}",
        summary_line(args.scheme, args.scenario, &results)
    );
    let _ = writeln!(
        report,
        "expected {}: reproduced {reproduced}/{total}",
        expected_verdict(args.scheme, args.scenario)
    );

    match (&args.out, args.format) {
        (Some(path), _) => {
            fs::write(path, &transcripts)?;
            out.write_all(report.as_bytes())?;
        }
        (None, OutputFormat::Text) => {
            out.write_all(transcripts.as_bytes())?;
            out.write_all(report.as_bytes())?;
        }
        (None, OutputFormat::StructuredLines) => {
            // keep stdout to records only
            out.write_all(transcripts.as_bytes())?;
            eprint!("{report}");
        }
    }
    Ok(if reproduced == total { 0 } else { 1 })
}

fn append_transcript(buf: &mut String, args: &RunArgs, trial: u64, seed: u64, t: &Transcript) {
    match args.format {
        OutputFormat::Text => {
            let _ = writeln!(
                buf,
                "== trial {}/{}: scheme={} scenario={} seed={seed} hash={}",
                trial + 1,
                args.trials,
                args.scheme,
                args.scenario,
                args.hash
            );
            buf.push_str(&t.to_text());
        }
        OutputFormat::StructuredLines => {
            if args.trials > 1 {
                let _ = writeln!(buf, "# trial={trial} seed={seed}");
            }
            buf.push_str(&t.to_records());
        }
    }
}

fn describe_trial(buf: &mut String, r: &ScenarioResult) {
    let _ = writeln!(
        buf,
        "seed {}: {} (messages sent {}, hashes client {} server {})",
        r.seed, r.verdict, r.messages_sent, r.client_hashes, r.server_hashes
    );
    if let Some(keys) = &r.session_keys {
        let _ = writeln!(buf, "  client SK: {}", keys.client.to_hex());
        let _ = writeln!(buf, "  server SK: {}", keys.server.to_hex());
        let _ = writeln!(
            buf,
            "  session keys {}",
            if keys.client == keys.server {
                "equal"
            } else {
                "DIFFER"
            }
        );
    }
}

fn summary_line(scheme: SchemeKind, scenario: ScenarioId, results: &[ScenarioResult]) -> String {
    let total = results.len();
    let count = |pred: &dyn Fn(&ScenarioResult) -> bool| results.iter().filter(|r| pred(r)).count();
    match (scenario, scheme) {
        (ScenarioId::WrongPasswordChange, SchemeKind::Baseline) => {
            let corrupted = count(&|r| {
                r.card_changed == Some(true) && r.logins_accepted == 0 && r.logins_rejected > 0
            });
            format!("card corrupted: subsequent logins rejected: {corrupted}/{total}")
        }
        (ScenarioId::WrongPasswordChange, SchemeKind::Improved) => {
            let kept = count(&|r| r.card_changed == Some(false) && r.verdict.is_accept());
            format!("password change refused, card unchanged: subsequent logins accepted: {kept}/{total}")
        }
        (ScenarioId::WrongPassword, _) => {
            let n = count(&|r| r.matches_expected());
            let sent: usize = results.iter().map(|r| r.messages_sent).sum();
            format!("wrong password rejected: {n}/{total}, messages sent in total: {sent}")
        }
        (ScenarioId::StolenCard, SchemeKind::Improved) => {
            let n = count(&|r| r.extraction_matches == Some(true));
            format!("identity key recovered from card contents: {n}/{total}; attacker stopped at biometric gate: {}/{total}",
                count(&|r| r.matches_expected()))
        }
        _ => {
            let mut by_verdict: BTreeMap<String, usize> = BTreeMap::new();
            for r in results {
                *by_verdict.entry(r.verdict.to_string()).or_default() += 1;
            }
            by_verdict
                .into_iter()
                .map(|(v, n)| format!("{v}: {n}/{total}"))
                .collect::<Vec<_>>()
                .join(", ")
        }
    }
}

pub fn cmd_diff(args: &DiffArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let seeds = match &args.seeds {
        Some(list) => list.0.clone(),
        None => (0..args.trials)
            .map(|i| args.seed.wrapping_add(i))
            .collect(),
    };
    let hash = HashConfig::new(args.hash);
    let mut report = String::new();
    let _ = writeln!(
        report,
        "{:<24} {:<14} {:<14} {:>9}  {:<8} status",
        "scenario", "baseline", "improved", "agree", "want"
    );
    let mut all_ok = true;

    for scenario in ScenarioId::ALL {
        let mut agree = 0;
        let mut pairs: BTreeMap<(String, String), usize> = BTreeMap::new();
        let mut outcomes: BTreeMap<(Outcome, Outcome), usize> = BTreeMap::new();
        for &seed in &seeds {
            let (_, b) = run_scenario(SchemeKind::Baseline, scenario, seed, hash)?;
            let (_, i) = run_scenario(SchemeKind::Improved, scenario, seed, hash)?;
            if b.verdict.outcome() == i.verdict.outcome() {
                agree += 1;
            }
            *pairs
                .entry((b.verdict.to_string(), i.verdict.to_string()))
                .or_default() += 1;
            *outcomes
                .entry((b.verdict.outcome(), i.verdict.outcome()))
                .or_default() += 1;
        }
        let n = seeds.len();
        let diverge = scenario.schemes_diverge();
        let ok = if diverge { agree == 0 } else { agree == n };
        all_ok &= ok;
        let (b_out, i_out) = if outcomes.len() == 1 {
            let (b, i) = outcomes.keys().next().expect("one entry");
            (b.name().to_owned(), i.name().to_owned())
        } else {
            ("mixed".to_owned(), "mixed".to_owned())
        };
        let _ = writeln!(
            report,
            "{:<24} {:<14} {:<14} {:>9}  {:<8} {}",
            scenario.name(),
            b_out,
            i_out,
            format!("{agree}/{n}"),
            if diverge { "diverge" } else { "agree" },
            if ok { "ok" } else { "UNEXPECTED" }
        );
        for ((b, i), count) in pairs {
            let _ = writeln!(report, "    {b} | {i}  x{count}");
        }
    }
    let _ = writeln!(
        report,
        "{}",
        if all_ok {
            "schemes diverge exactly on wrong-password and wrong-password-change"
        } else {
            "divergence pattern differs from expectation"
        }
    );
    out.write_all(report.as_bytes())?;
    Ok(if all_ok { 0 } else { 1 })
}

pub fn cost_table(
    seed: u64,
    algorithm: HashAlgorithm,
) -> Result<(PhaseCosts, PhaseCosts), AuthError> {
    let hash = HashConfig::new(algorithm);
    Ok((
        measure::<Baseline>(seed, hash)?,
        measure::<Improved>(seed, hash)?,
    ))
}

pub fn cmd_cost(args: &CostArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let (b, i) = cost_table(args.seed, args.hash)?;
    let digest_len = args.hash.digest_len();
    let mut report = String::new();
    let _ = writeln!(
        report,
        "{:<34} {:>9} {:>9} {:>6}",
        "phase (hash invocations)", "baseline", "improved", "delta"
    );
    let rows: [(&str, u64, u64); 6] = [
        ("registration", b.registration, i.registration),
        ("login (card)", b.login, i.login),
        (
            "authentication (server)",
            b.authentication,
            i.authentication,
        ),
        (
            "response check + key (client)",
            b.verification,
            i.verification,
        ),
        (
            "login + authentication",
            b.login_and_authentication(),
            i.login_and_authentication(),
        ),
        (
            "password change (card)",
            b.password_change,
            i.password_change,
        ),
    ];
    for (name, bv, iv) in rows {
        let _ = writeln!(
            report,
            "{name:<34} {bv:>9} {iv:>9} {:>6}",
            iv as i64 - bv as i64
        );
    }
    let _ = writeln!(
        report,
        "{:<34} {:>9} {:>9} {:>6}",
        "card storage (bytes)",
        b.card_bytes,
        i.card_bytes,
        i.card_bytes as i64 - b.card_bytes as i64
    );
    let _ = writeln!(
        report,
        "convention: client and server combined; biometric template match and registration excluded"
    );
    let _ = writeln!(
        report,
        "absolute counts depend on the convention and are not asserted"
    );

    let delta = i.login_and_authentication() as i64 - b.login_and_authentication() as i64;
    let storage_delta = i.card_bytes as i64 - b.card_bytes as i64;
    let delta_ok = delta == 2;
    let storage_ok = storage_delta == digest_len as i64;
    let _ = writeln!(
        report,
        "login + authentication delta = {delta} (want 2): {}",
        if delta_ok { "ok" } else { "FAIL" }
    );
    let _ = writeln!(
        report,
        "storage delta = {storage_delta} bytes = one {digest_len}-byte digest: {}",
        if storage_ok { "ok" } else { "FAIL" }
    );
    out.write_all(report.as_bytes())?;
    Ok(if delta_ok && storage_ok { 0 } else { 1 })
}
