//! `nonlocal-game-lab` command-line front end.
//!
//! Exit codes: 0 success, 1 failed verification or I/O error, 2 usage error
//! (unknown ids, unsupported game/strategy pairs, mismatched comparisons).

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use num_rational::Ratio;
use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::analysis::{
    classical_value_with, distribution_win_probability, exact_joint_distribution, sample_game,
    total_variation_distance, tv_per_question, AnalysisError, JointDistribution, SearchOptions,
    DEFAULT_SEARCH_CAP,
};
use crate::games::GameSpec;
use crate::strategies::{LhvStrategy, QuantumStrategy, Strategy};
use crate::verify::{run_verification, VerifyError, VerifyOptions};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Threshold below which `compare` reports two distributions as indistinguishable.
pub const COMPARE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Parser)]
#[command(name = "nonlocal-game-lab", version, about = "Play nonlocal games with quantum and local-hidden-variable strategies")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the full invariant suite; exits 1 if any check fails.
    Verify {
        /// Negate the expected eigenvalue of the named check (fault injection).
        #[arg(long, hide = true)]
        inject_fault: Option<String>,
    },
    /// Print exact conditional answer distributions.
    Exact {
        #[arg(long)]
        game: GameId,
        #[arg(long)]
        strategy: StrategyId,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Play seeded Monte-Carlo rounds.
    Simulate {
        #[arg(long)]
        game: GameId,
        #[arg(long)]
        strategy: StrategyId,
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        rounds: u64,
        #[arg(long)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Brute-force the best deterministic (classical) strategy.
    ClassicalValue {
        #[arg(long)]
        game: GameId,
        /// Refuse searches larger than this many strategies.
        #[arg(long, default_value_t = DEFAULT_SEARCH_CAP)]
        cap: u64,
        /// Search on one thread.
        #[arg(long)]
        sequential: bool,
    },
    /// Total variation distance between two strategies' exact distributions.
    Compare {
        #[arg(long)]
        game: GameId,
        #[arg(long = "a")]
        a: StrategyId,
        #[arg(long = "b")]
        b: StrategyId,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GameId {
    Swap,
    Cabello,
    Ghz,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StrategyId {
    Quantum,
    Lhv,
    /// Cabello only: LHV model with separate shared values for x1 and y1.
    LhvFull,
    /// Swap only: Bob's record discarded, Alice and Charlie answer at random.
    RandomBob,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

impl GameId {
    fn name(self) -> &'static str {
        match self {
            GameId::Swap => "swap",
            GameId::Cabello => "cabello",
            GameId::Ghz => "ghz",
        }
    }

    fn spec(self) -> GameSpec {
        match self {
            GameId::Swap => GameSpec::swap(),
            GameId::Cabello => GameSpec::cabello(),
            GameId::Ghz => GameSpec::ghz(),
        }
    }
}

impl StrategyId {
    fn name(self) -> &'static str {
        match self {
            StrategyId::Quantum => "quantum",
            StrategyId::Lhv => "lhv",
            StrategyId::LhvFull => "lhv-full",
            StrategyId::RandomBob => "random-bob",
        }
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("verification failed: {}", .0.join(", "))]
    VerificationFailed(Vec<String>),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            _ => EXIT_FAILURE,
        }
    }
}

impl From<AnalysisError> for CliError {
    fn from(e: AnalysisError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<VerifyError> for CliError {
    fn from(e: VerifyError) -> Self {
        CliError::Usage(e.to_string())
    }
}

/// The game a strategy is played in and the strategy itself. `random-bob`
/// plays the two-player swap game with Bob's record discarded.
pub fn resolve(game: GameId, strategy: StrategyId) -> Result<(GameSpec, Box<dyn Strategy>), CliError> {
    let s: Box<dyn Strategy> = match (game, strategy) {
        (GameId::Swap, StrategyId::Quantum) => Box::new(QuantumStrategy::swap()),
        (GameId::Swap, StrategyId::Lhv) => Box::new(LhvStrategy::swap()),
        (GameId::Swap, StrategyId::RandomBob) => {
            return Ok((GameSpec::swap_discarded(), Box::new(LhvStrategy::random_bob())))
        }
        (GameId::Cabello, StrategyId::Quantum) => Box::new(QuantumStrategy::cabello()),
        (GameId::Cabello, StrategyId::Lhv) => Box::new(LhvStrategy::cabello()),
        (GameId::Cabello, StrategyId::LhvFull) => Box::new(LhvStrategy::cabello_full()),
        (GameId::Ghz, StrategyId::Quantum) => Box::new(QuantumStrategy::ghz()),
        (GameId::Ghz, StrategyId::Lhv) => Box::new(LhvStrategy::ghz()),
        (g, s) => {
            return Err(CliError::Usage(format!(
                "strategy `{}` is not available for game `{}`",
                s.name(),
                g.name()
            )))
        }
    };
    Ok((game.spec(), s))
}

/// Rounds to 12 significant digits.
pub fn round_probability(p: f64) -> f64 {
    format!("{p:.11e}").parse().expect("formatted float parses")
}

#[derive(Debug, Serialize)]
pub struct EntryJson {
    pub answers: Vec<String>,
    pub prob: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub num: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub den: Option<u64>,
}

#[derive(Debug, Serialize)]
pub struct TableJson {
    pub question: Vec<String>,
    pub entries: Vec<EntryJson>,
}

#[derive(Debug, Serialize)]
pub struct TrialJson {
    pub trial: u64,
    pub stream: u64,
    pub question: Vec<String>,
    pub answers: Vec<String>,
    pub win: bool,
}

#[derive(Debug, Serialize)]
pub struct Output {
    pub command: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub game: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub strategy: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub strategies: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub players: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tables: Option<Vec<TableJson>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trials: Option<Vec<TrialJson>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub checks: Option<Value>,
    pub summary: Value,
}

impl Output {
    fn new(command: &'static str, summary: Value) -> Self {
        Output {
            command,
            game: None,
            strategy: None,
            strategies: None,
            players: None,
            tables: None,
            trials: None,
            checks: None,
            summary,
        }
    }
}

fn ratio_fields(r: Option<Ratio<u64>>) -> (Option<u64>, Option<u64>) {
    match r {
        Some(r) => (Some(*r.numer()), Some(*r.denom())),
        None => (None, None),
    }
}

pub fn tables_json(joint: &JointDistribution, game: &GameSpec) -> Vec<TableJson> {
    joint
        .tables
        .iter()
        .map(|t| TableJson {
            question: game.question_labels(&t.questions),
            entries: t
                .entries
                .iter()
                .map(|e| {
                    let (num, den) = ratio_fields(e.exact);
                    EntryJson {
                        answers: game.answer_labels(&e.answers),
                        prob: round_probability(e.probability),
                        num,
                        den,
                    }
                })
                .collect(),
        })
        .collect()
}

fn player_names(game: &GameSpec) -> Vec<String> {
    game.players.iter().map(|p| p.name.clone()).collect()
}

fn write_json(out: &mut dyn Write, value: &impl Serialize) -> Result<(), CliError> {
    serde_json::to_writer_pretty(&mut *out, value)?;
    writeln!(out)?;
    Ok(())
}

fn csv_header(game: &GameSpec, leading: &[&str], trailing: &[&str]) -> Vec<String> {
    leading
        .iter()
        .map(|s| s.to_string())
        .chain(game.players.iter().map(|p| format!("question_{}", p.name)))
        .chain(game.players.iter().map(|p| format!("answer_{}", p.name)))
        .chain(trailing.iter().map(|s| s.to_string()))
        .collect()
}

fn cmd_exact(game_id: GameId, strategy_id: StrategyId, format: Format, out: &mut dyn Write) -> Result<(), CliError> {
    let (game, strategy) = resolve(game_id, strategy_id)?;
    let joint = exact_joint_distribution(strategy.as_ref(), &game)?;
    match format {
        Format::Json => {
            let wp = distribution_win_probability(&joint, &game);
            let (num, den) = ratio_fields(wp.exact);
            let mut output = Output::new(
                "exact",
                json!({
                    "variant": game.id,
                    "win_probability": round_probability(wp.value),
                    "win_num": num,
                    "win_den": den,
                }),
            );
            output.game = Some(game_id.name().into());
            output.strategy = Some(strategy_id.name().into());
            output.players = Some(player_names(&game));
            output.tables = Some(tables_json(&joint, &game));
            write_json(out, &output)
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            w.write_record(csv_header(&game, &[], &["prob", "num", "den"]))?;
            for t in &joint.tables {
                for e in &t.entries {
                    let (num, den) = ratio_fields(e.exact);
                    let mut row = game.question_labels(&t.questions);
                    row.extend(game.answer_labels(&e.answers));
                    row.push(round_probability(e.probability).to_string());
                    row.push(num.map(|n| n.to_string()).unwrap_or_default());
                    row.push(den.map(|d| d.to_string()).unwrap_or_default());
                    w.write_record(row)?;
                }
            }
            w.flush()?;
            Ok(())
        }
    }
}

fn cmd_simulate(
    game_id: GameId,
    strategy_id: StrategyId,
    rounds: u64,
    seed: u64,
    format: Format,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let (game, strategy) = resolve(game_id, strategy_id)?;
    let run = sample_game(strategy.as_ref(), &game, rounds, seed)?;
    match format {
        Format::Json => {
            let exact = exact_joint_distribution(strategy.as_ref(), &game)?;
            let tv = total_variation_distance(&run.empirical, &exact)?;
            let mut output = Output::new(
                "simulate",
                json!({
                    "variant": game.id,
                    "rounds": rounds,
                    "seed": seed,
                    "wins": run.wins,
                    "win_rate": round_probability(run.wins as f64 / rounds as f64),
                    "tv_to_exact": round_probability(tv),
                }),
            );
            output.game = Some(game_id.name().into());
            output.strategy = Some(strategy_id.name().into());
            output.players = Some(player_names(&game));
            output.tables = Some(tables_json(&run.empirical, &game));
            output.trials = Some(
                run.trials
                    .iter()
                    .map(|t| TrialJson {
                        trial: t.trial,
                        stream: t.stream,
                        question: game.question_labels(&t.questions),
                        answers: game.answer_labels(&t.answers),
                        win: t.win,
                    })
                    .collect(),
            );
            write_json(out, &output)
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            w.write_record(csv_header(&game, &["trial"], &["win"]))?;
            for t in &run.trials {
                let mut row = vec![t.trial.to_string()];
                row.extend(game.question_labels(&t.questions));
                row.extend(game.answer_labels(&t.answers));
                row.push(t.win.to_string());
                w.write_record(row)?;
            }
            w.flush()?;
            Ok(())
        }
    }
}

fn cmd_classical_value(game_id: GameId, cap: u64, sequential: bool, out: &mut dyn Write) -> Result<(), CliError> {
    let game = game_id.spec();
    let report = classical_value_with(
        &game,
        SearchOptions {
            cap,
            parallel: !sequential,
        },
    )?;
    let witness: Vec<Value> = game
        .players
        .iter()
        .zip(&report.witness.responses)
        .map(|(p, table)| {
            let responses: serde_json::Map<String, Value> = p
                .questions
                .iter()
                .zip(table)
                .map(|(q, &a)| (q.clone(), json!(p.answers[a])))
                .collect();
            json!({ "player": p.name, "responses": responses })
        })
        .collect();
    let mut output = Output::new(
        "classical-value",
        json!({
            "value": round_probability(*report.value.numer() as f64 / *report.value.denom() as f64),
            "num": report.value.numer(),
            "den": report.value.denom(),
            "strategies_searched": report.strategies_searched,
            "witness_index": report.witness_index,
            "witness": witness,
        }),
    );
    output.game = Some(game_id.name().into());
    output.players = Some(player_names(&game));
    write_json(out, &output)
}

fn cmd_compare(game_id: GameId, a: StrategyId, b: StrategyId, out: &mut dyn Write) -> Result<(), CliError> {
    let (game_a, sa) = resolve(game_id, a)?;
    let (game_b, sb) = resolve(game_id, b)?;
    let pa = exact_joint_distribution(sa.as_ref(), &game_a)?;
    let pb = exact_joint_distribution(sb.as_ref(), &game_b)?;
    let per_q = tv_per_question(&pa, &pb)?;
    let max = per_q.iter().map(|(_, d)| *d).fold(0.0, f64::max);
    let per_question: Vec<Value> = per_q
        .iter()
        .map(|(q, d)| json!({ "question": game_a.question_labels(q), "tv": round_probability(*d) }))
        .collect();
    let mut output = Output::new(
        "compare",
        json!({
            "max_tv": round_probability(max),
            "tolerance": COMPARE_TOLERANCE,
            "verdict": if max <= COMPARE_TOLERANCE { "indistinguishable" } else { "distinguishable" },
            "per_question": per_question,
        }),
    );
    output.game = Some(game_id.name().into());
    output.strategies = Some(vec![a.name().into(), b.name().into()]);
    output.players = Some(player_names(&game_a));
    write_json(out, &output)
}

fn cmd_verify(inject_fault: Option<String>, out: &mut dyn Write) -> Result<(), CliError> {
    let report = run_verification(&VerifyOptions {
        flip_expected_sign: inject_fault,
    })?;
    let failures: Vec<String> = report.failures().into_iter().map(String::from).collect();
    let mut output = Output::new(
        "verify",
        json!({
            "checks": report.checks.len(),
            "passed": report.checks.len() - failures.len(),
            "failed": failures,
            "all_passed": failures.is_empty(),
        }),
    );
    output.checks = Some(serde_json::to_value(&report.checks)?);
    write_json(out, &output)?;
    if failures.is_empty() {
        Ok(())
    } else {
        Err(CliError::VerificationFailed(failures))
    }
}

fn dispatch(command: Command, stdout: &mut dyn Write) -> Result<(), CliError> {
    match command {
        Command::Verify { inject_fault } => cmd_verify(inject_fault, stdout),
        Command::Exact {
            game,
            strategy,
            format,
            out,
        } => with_output(out, stdout, |w| cmd_exact(game, strategy, format, w)),
        Command::Simulate {
            game,
            strategy,
            rounds,
            seed,
            format,
            out,
        } => with_output(out, stdout, |w| cmd_simulate(game, strategy, rounds, seed, format, w)),
        Command::ClassicalValue {
            game,
            cap,
            sequential,
        } => cmd_classical_value(game, cap, sequential, stdout),
        Command::Compare { game, a, b } => cmd_compare(game, a, b, stdout),
    }
}

fn with_output(
    path: Option<PathBuf>,
    stdout: &mut dyn Write,
    f: impl FnOnce(&mut dyn Write) -> Result<(), CliError>,
) -> Result<(), CliError> {
    match path {
        Some(p) => {
            let mut file = io::BufWriter::new(File::create(p)?);
            f(&mut file)?;
            file.flush()?;
            Ok(())
        }
        None => f(stdout),
    }
}

/// Parses `args` (including the program name), runs the command and returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let rendered = e.render().to_string();
            let target: &mut dyn Write = if e.use_stderr() { stderr } else { stdout };
            let _ = target.write_all(rendered.as_bytes());
            return code;
        }
    };
    match dispatch(cli.command, stdout) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}
