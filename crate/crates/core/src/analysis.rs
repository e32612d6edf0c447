//! Exact and sampled joint distributions, win probabilities, the brute-force
//! classical value, and distribution comparison.

use std::collections::BTreeMap;

use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::games::{GameShape, GameSpec};
use crate::strategies::{strategy_count, DeterministicStrategy, Strategy, StrategyOutcome};

/// Default ceiling on the number of deterministic strategies searched.
pub const DEFAULT_SEARCH_CAP: u64 = 100_000_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalysisError {
    #[error("strategy `{strategy}` has shape {strategy_shape:?} but game `{game}` has shape {game_shape:?}")]
    Incompatible {
        strategy: String,
        game: String,
        strategy_shape: GameShape,
        game_shape: GameShape,
    },
    #[error("distributions are over different spaces: {0}")]
    SpaceMismatch(String),
    #[error("search space of {size} strategies exceeds the cap of {cap}")]
    SearchSpaceTooLarge { size: String, cap: u64 },
    #[error("unknown player `{0}`")]
    UnknownPlayer(String),
    #[error("at least one round is required")]
    NoRounds,
}

/// Answer distribution conditioned on one question tuple.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalTable {
    pub questions: Vec<usize>,
    /// Support only, sorted by answer tuple.
    pub entries: Vec<StrategyOutcome<Vec<usize>>>,
}

impl ConditionalTable {
    pub fn probability(&self, answers: &[usize]) -> f64 {
        self.entries
            .iter()
            .find(|e| e.answers == answers)
            .map_or(0.0, |e| e.probability)
    }

    pub fn total(&self) -> f64 {
        self.entries.iter().map(|e| e.probability).sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct JointDistribution {
    pub players: Vec<String>,
    pub shape: GameShape,
    /// One table per question tuple, in the game's question order.
    pub tables: Vec<ConditionalTable>,
}

impl JointDistribution {
    pub fn table(&self, questions: &[usize]) -> Option<&ConditionalTable> {
        self.tables.iter().find(|t| t.questions == questions)
    }
}

fn check_compatible(strategy: &dyn Strategy, game: &GameSpec) -> Result<(), AnalysisError> {
    if strategy.shape() == game.shape() {
        Ok(())
    } else {
        Err(AnalysisError::Incompatible {
            strategy: strategy.id().to_string(),
            game: game.id.to_string(),
            strategy_shape: strategy.shape(),
            game_shape: game.shape(),
        })
    }
}

/// Born-rule tables for quantum strategies, uniform averages over the
/// hidden-variable assignments for LHV strategies.
pub fn exact_joint_distribution(
    strategy: &dyn Strategy,
    game: &GameSpec,
) -> Result<JointDistribution, AnalysisError> {
    check_compatible(strategy, game)?;
    Ok(JointDistribution {
        players: game.players.iter().map(|p| p.name.clone()).collect(),
        shape: game.shape(),
        tables: game
            .question_tuples
            .iter()
            .map(|q| ConditionalTable {
                questions: q.clone(),
                entries: strategy.outcomes(q),
            })
            .collect(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WinProbability {
    pub value: f64,
    /// Present when every probability involved is an exact rational.
    pub exact: Option<Ratio<u64>>,
}

/// Win probability of a distribution under uniformly drawn questions.
pub fn distribution_win_probability(joint: &JointDistribution, game: &GameSpec) -> WinProbability {
    let n = joint.tables.len() as u64;
    let mut value = 0.0;
    let mut exact = Some(Ratio::from_integer(0u64));
    for t in &joint.tables {
        for e in t.entries.iter().filter(|e| game.wins(&t.questions, &e.answers)) {
            value += e.probability;
            exact = exact.zip(e.exact).map(|(acc, p)| acc + p);
        }
    }
    WinProbability {
        value: value / n as f64,
        exact: exact.map(|e| e / n),
    }
}

pub fn win_probability(
    strategy: &dyn Strategy,
    game: &GameSpec,
) -> Result<WinProbability, AnalysisError> {
    let joint = exact_joint_distribution(strategy, game)?;
    Ok(distribution_win_probability(&joint, game))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchOptions {
    pub cap: u64,
    pub parallel: bool,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            cap: DEFAULT_SEARCH_CAP,
            parallel: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalValueReport {
    pub value: Ratio<u64>,
    /// The first strategy in enumeration order attaining `value`.
    pub witness: DeterministicStrategy,
    /// Index of the witness in enumeration order.
    pub witness_index: u64,
    pub strategies_searched: u64,
}

pub fn classical_value(game: &GameSpec) -> Result<ClassicalValueReport, AnalysisError> {
    classical_value_with(game, SearchOptions::default())
}

/// Exhaustive maximum of the win count over every deterministic strategy.
pub fn classical_value_with(
    game: &GameSpec,
    options: SearchOptions,
) -> Result<ClassicalValueReport, AnalysisError> {
    let shape = game.shape();
    let count = match strategy_count(&shape) {
        Some(c) if c <= options.cap => c,
        other => {
            return Err(AnalysisError::SearchSpaceTooLarge {
                size: other.map_or_else(|| "more than 2^64".to_string(), |c| c.to_string()),
                cap: options.cap,
            })
        }
    };
    let wins = |index: u64| -> (u64, u64) {
        let s = DeterministicStrategy::from_index(&shape, index);
        let w = game
            .question_tuples
            .iter()
            .filter(|q| game.wins(q, &s.answers(q)))
            .count() as u64;
        (w, index)
    };
    // More wins first, then the earlier index.
    let better = |a: (u64, u64), b: (u64, u64)| {
        if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) {
            b
        } else {
            a
        }
    };
    let (best, index) = if options.parallel {
        (0..count).into_par_iter().map(wins).reduce_with(better)
    } else {
        (0..count).map(wins).reduce(better)
    }
    .expect("every game has at least one deterministic strategy");
    Ok(ClassicalValueReport {
        value: Ratio::new(best, game.question_tuples.len() as u64),
        witness: DeterministicStrategy::from_index(&shape, index),
        witness_index: index,
        strategies_searched: count,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrialRecord {
    pub trial: u64,
    /// ChaCha stream the trial's randomness was drawn from.
    pub stream: u64,
    pub questions: Vec<usize>,
    pub answers: Vec<usize>,
    pub win: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampleRun {
    pub empirical: JointDistribution,
    pub wins: u64,
    pub trials: Vec<TrialRecord>,
}

/// RNG for one trial: keyed by `seed`, stream selected by the trial index,
/// so each trial is reproducible on its own and independent of scheduling.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

pub fn sample_game(
    strategy: &dyn Strategy,
    game: &GameSpec,
    rounds: u64,
    seed: u64,
) -> Result<SampleRun, AnalysisError> {
    check_compatible(strategy, game)?;
    if rounds == 0 {
        return Err(AnalysisError::NoRounds);
    }
    let trials: Vec<TrialRecord> = (0..rounds)
        .into_par_iter()
        .map(|trial| {
            let mut rng = trial_rng(seed, trial);
            let q = &game.question_tuples[rng.gen_range(0..game.question_tuples.len())];
            let answers = strategy.sample(q, &mut rng);
            TrialRecord {
                trial,
                stream: trial,
                questions: q.clone(),
                win: game.wins(q, &answers),
                answers,
            }
        })
        .collect();

    let mut counts: BTreeMap<&[usize], BTreeMap<&[usize], u64>> = BTreeMap::new();
    for t in &trials {
        *counts
            .entry(&t.questions)
            .or_default()
            .entry(&t.answers)
            .or_default() += 1;
    }
    let tables = game
        .question_tuples
        .iter()
        .map(|q| {
            let per_answer = counts.get(q.as_slice());
            let n: u64 = per_answer.map_or(0, |m| m.values().sum());
            ConditionalTable {
                questions: q.clone(),
                entries: per_answer
                    .into_iter()
                    .flatten()
                    .map(|(a, &c)| StrategyOutcome {
                        answers: a.to_vec(),
                        probability: c as f64 / n as f64,
                        exact: Some(Ratio::new(c, n)),
                    })
                    .collect(),
            }
        })
        .collect();
    let wins = trials.iter().filter(|t| t.win).count() as u64;
    Ok(SampleRun {
        empirical: JointDistribution {
            players: game.players.iter().map(|p| p.name.clone()).collect(),
            shape: game.shape(),
            tables,
        },
        wins,
        trials,
    })
}

/// `½ Σ |p − q|` for every question tuple, in `p`'s order.
pub fn tv_per_question(
    p: &JointDistribution,
    q: &JointDistribution,
) -> Result<Vec<(Vec<usize>, f64)>, AnalysisError> {
    if p.shape != q.shape {
        return Err(AnalysisError::SpaceMismatch(format!(
            "shapes {:?} and {:?}",
            p.shape, q.shape
        )));
    }
    let questions = |d: &JointDistribution| {
        let mut v: Vec<Vec<usize>> = d.tables.iter().map(|t| t.questions.clone()).collect();
        v.sort();
        v
    };
    if questions(p) != questions(q) {
        return Err(AnalysisError::SpaceMismatch(
            "different question tuples".to_string(),
        ));
    }
    Ok(p.tables
        .iter()
        .map(|tp| {
            let tq = q.table(&tp.questions).expect("question sets agree");
            let mut diff: BTreeMap<&[usize], f64> = BTreeMap::new();
            for e in &tp.entries {
                *diff.entry(&e.answers).or_default() += e.probability;
            }
            for e in &tq.entries {
                *diff.entry(&e.answers).or_default() -= e.probability;
            }
            (tp.questions.clone(), 0.5 * diff.values().map(|d| d.abs()).sum::<f64>())
        })
        .collect())
}

/// Largest per-question total variation distance.
pub fn total_variation_distance(
    p: &JointDistribution,
    q: &JointDistribution,
) -> Result<f64, AnalysisError> {
    Ok(tv_per_question(p, q)?
        .into_iter()
        .map(|(_, d)| d)
        .fold(0.0, f64::max))
}

/// One player's answer distribution per question tuple, indexed by answer.
pub fn marginal_distribution(
    joint: &JointDistribution,
    player: &str,
) -> Result<Vec<(Vec<usize>, Vec<f64>)>, AnalysisError> {
    let k = joint
        .players
        .iter()
        .position(|p| p == player)
        .ok_or_else(|| AnalysisError::UnknownPlayer(player.to_string()))?;
    let answers = joint.shape[k].1;
    Ok(joint
        .tables
        .iter()
        .map(|t| {
            let mut m = vec![0.0; answers];
            for e in &t.entries {
                m[e.answers[k]] += e.probability;
            }
            (t.questions.clone(), m)
        })
        .collect())
}

/// Largest deviation of any single-player marginal from uniform.
pub fn max_marginal_deviation(joint: &JointDistribution) -> f64 {
    joint
        .players
        .iter()
        .flat_map(|p| marginal_distribution(joint, p).expect("player is listed"))
        .flat_map(|(_, m)| {
            let u = 1.0 / m.len() as f64;
            m.into_iter().map(move |x| (x - u).abs())
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::TOLERANCE;
    use crate::strategies::{DiscardedQuantum, LhvStrategy, QuantumStrategy};

    fn point_and_uniform() -> (JointDistribution, JointDistribution) {
        let base = |entries| JointDistribution {
            players: vec!["p".into()],
            shape: vec![(1, 4)],
            tables: vec![ConditionalTable {
                questions: vec![0],
                entries,
            }],
        };
        let e = |a: usize, p: f64| StrategyOutcome {
            answers: vec![a],
            probability: p,
            exact: None,
        };
        (
            base(vec![e(0, 1.0)]),
            base((0..4).map(|a| e(a, 0.25)).collect()),
        )
    }

    #[test]
    fn tv_closed_forms() {
        let (point, uniform) = point_and_uniform();
        assert_eq!(total_variation_distance(&point, &point), Ok(0.0));
        assert!((total_variation_distance(&point, &uniform).unwrap() - 0.75).abs() <= TOLERANCE);
    }

    #[test]
    fn tv_rejects_mismatched_spaces() {
        let swap = exact_joint_distribution(&QuantumStrategy::swap(), &GameSpec::swap()).unwrap();
        let discarded =
            exact_joint_distribution(&DiscardedQuantum::swap(), &GameSpec::swap_discarded()).unwrap();
        assert!(matches!(
            total_variation_distance(&swap, &discarded),
            Err(AnalysisError::SpaceMismatch(_))
        ));
    }

    #[test]
    fn swap_tables() {
        let game = GameSpec::swap();
        let quantum = exact_joint_distribution(&QuantumStrategy::swap(), &game).unwrap();
        let lhv = exact_joint_distribution(&LhvStrategy::swap(), &game).unwrap();
        let standard = quantum.table(&[0, 0, 0]).unwrap();
        assert_eq!(standard.entries.len(), 8);
        assert!(standard
            .entries
            .iter()
            .all(|e| (e.probability - 0.125).abs() <= TOLERANCE));
        let lhv_standard = lhv.table(&[0, 0, 0]).unwrap();
        let answers = |t: &ConditionalTable| t.entries.iter().map(|e| e.answers.clone()).collect::<Vec<_>>();
        assert_eq!(answers(standard), answers(lhv_standard));
        assert!(total_variation_distance(&quantum, &lhv).unwrap() <= TOLERANCE);
    }

    #[test]
    fn cabello_lhv_constrained_table() {
        let joint = exact_joint_distribution(&LhvStrategy::cabello(), &GameSpec::cabello()).unwrap();
        let t = joint.table(&[0, 1]).unwrap();
        assert_eq!(t.entries.len(), 8);
        assert!(t.entries.iter().all(|e| e.exact == Some(Ratio::new(1, 8))));
    }

    #[test]
    fn incompatible_pairs_are_rejected() {
        assert!(matches!(
            exact_joint_distribution(&LhvStrategy::swap(), &GameSpec::cabello()),
            Err(AnalysisError::Incompatible { .. })
        ));
        assert!(matches!(
            win_probability(&LhvStrategy::random_bob(), &GameSpec::swap()),
            Err(AnalysisError::Incompatible { .. })
        ));
    }

    #[test]
    fn win_probabilities() {
        let wp = win_probability(&QuantumStrategy::swap(), &GameSpec::swap()).unwrap();
        assert!((wp.value - 1.0).abs() <= TOLERANCE);
        assert_eq!(wp.exact, None);
        let wp = win_probability(&LhvStrategy::cabello(), &GameSpec::cabello()).unwrap();
        assert_eq!(wp.exact, Some(Ratio::from_integer(1)));
        let wp = win_probability(&DiscardedQuantum::swap(), &GameSpec::swap_discarded()).unwrap();
        assert!((wp.value - 1.0).abs() <= TOLERANCE);
        let wp = win_probability(&LhvStrategy::ghz(), &GameSpec::ghz()).unwrap();
        assert_eq!(wp.exact, Some(Ratio::new(3, 4)));
    }

    #[test]
    fn classical_values() {
        let swap = classical_value(&GameSpec::swap()).unwrap();
        assert_eq!(swap.value, Ratio::from_integer(1));
        assert_eq!(swap.strategies_searched, 64);
        let cabello = classical_value(&GameSpec::cabello()).unwrap();
        assert_eq!(cabello.value, Ratio::from_integer(1));
        assert_eq!(cabello.strategies_searched, 4096);
        let ghz = classical_value(&GameSpec::ghz()).unwrap();
        assert_eq!(ghz.value, Ratio::new(3, 4));
        assert_eq!(ghz.strategies_searched, 64);
    }

    #[test]
    fn witnesses_replay_to_the_reported_value() {
        for game in [GameSpec::swap(), GameSpec::cabello(), GameSpec::ghz()] {
            let report = classical_value(&game).unwrap();
            let replay = win_probability(&report.witness, &game).unwrap();
            assert_eq!(replay.exact, Some(report.value), "{}", game.id);
        }
    }

    #[test]
    fn parallel_and_sequential_search_agree() {
        for game in [GameSpec::swap(), GameSpec::cabello(), GameSpec::ghz()] {
            let par = classical_value_with(&game, SearchOptions { cap: DEFAULT_SEARCH_CAP, parallel: true }).unwrap();
            let seq = classical_value_with(&game, SearchOptions { cap: DEFAULT_SEARCH_CAP, parallel: false }).unwrap();
            assert_eq!(par, seq);
        }
    }

    #[test]
    fn search_cap_is_enforced() {
        let err = classical_value_with(&GameSpec::cabello(), SearchOptions { cap: 4095, parallel: false })
            .unwrap_err();
        assert_eq!(
            err,
            AnalysisError::SearchSpaceTooLarge {
                size: "4096".into(),
                cap: 4095
            }
        );
    }

    #[test]
    fn marginals() {
        let quantum = exact_joint_distribution(&QuantumStrategy::swap(), &GameSpec::swap()).unwrap();
        for (_, m) in marginal_distribution(&quantum, "bob").unwrap() {
            assert!(m.iter().all(|p| (p - 0.25).abs() <= TOLERANCE));
        }
        let cabello = exact_joint_distribution(&QuantumStrategy::cabello(), &GameSpec::cabello()).unwrap();
        for (_, m) in marginal_distribution(&cabello, "alice").unwrap() {
            assert!(m.iter().all(|p| (p - 0.25).abs() <= TOLERANCE));
        }
        let lhv = exact_joint_distribution(&LhvStrategy::swap(), &GameSpec::swap()).unwrap();
        let alice = marginal_distribution(&lhv, "alice").unwrap();
        assert_eq!(alice[0].1, vec![0.5, 0.5]);
        assert_eq!(
            marginal_distribution(&lhv, "dave"),
            Err(AnalysisError::UnknownPlayer("dave".into()))
        );
    }

    #[test]
    fn sampling_basics() {
        let game = GameSpec::swap();
        let run = sample_game(&LhvStrategy::swap(), &game, 1, 3).unwrap();
        assert_eq!(run.trials.len(), 1);
        assert_eq!(sample_game(&LhvStrategy::swap(), &game, 0, 3), Err(AnalysisError::NoRounds));
        let a = sample_game(&QuantumStrategy::swap(), &game, 500, 11).unwrap();
        let b = sample_game(&QuantumStrategy::swap(), &game, 500, 11).unwrap();
        assert_eq!(a, b);
        let c = sample_game(&QuantumStrategy::swap(), &game, 500, 12).unwrap();
        assert_ne!(a.trials, c.trials);
    }

    #[test]
    fn trial_streams_are_independent_of_run_length() {
        let game = GameSpec::cabello();
        let short = sample_game(&QuantumStrategy::cabello(), &game, 10, 99).unwrap();
        let long = sample_game(&QuantumStrategy::cabello(), &game, 1000, 99).unwrap();
        assert_eq!(short.trials[..], long.trials[..10]);
    }

    #[test]
    fn sampled_distributions_converge() {
        let cases: Vec<(Box<dyn Strategy>, GameSpec)> = vec![
            (Box::new(QuantumStrategy::swap()), GameSpec::swap()),
            (Box::new(LhvStrategy::swap()), GameSpec::swap()),
            (Box::new(QuantumStrategy::cabello()), GameSpec::cabello()),
            (Box::new(LhvStrategy::cabello()), GameSpec::cabello()),
            (Box::new(LhvStrategy::cabello_full()), GameSpec::cabello()),
            (Box::new(QuantumStrategy::ghz()), GameSpec::ghz()),
            (Box::new(LhvStrategy::ghz()), GameSpec::ghz()),
            (Box::new(DiscardedQuantum::swap()), GameSpec::swap_discarded()),
            (Box::new(LhvStrategy::random_bob()), GameSpec::swap_discarded()),
        ];
        for (strategy, game) in cases {
            let exact = exact_joint_distribution(strategy.as_ref(), &game).unwrap();
            let run = sample_game(strategy.as_ref(), &game, 100_000, 2024).unwrap();
            let tv = total_variation_distance(&run.empirical, &exact).unwrap();
            assert!(tv <= 0.02, "{} / {}: {tv}", game.id, strategy.id());
        }
    }
}
