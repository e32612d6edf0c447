use rand::RngCore;

use super::{Strategy, StrategyOutcome};
use crate::games::{GameShape, GameSpec};
use num_rational::Ratio;

/// One fixed answer per (player, question).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DeterministicStrategy {
    shape: GameShape,
    /// `responses[player][question]` is an answer index.
    pub responses: Vec<Vec<usize>>,
}

/// Number of deterministic strategies, `Π_players answers^questions`; `None` on overflow.
pub fn strategy_count(shape: &GameShape) -> Option<u64> {
    shape.iter().try_fold(1u64, |acc, &(questions, answers)| {
        let per_player = (answers as u64).checked_pow(u32::try_from(questions).ok()?)?;
        acc.checked_mul(per_player)
    })
}

impl DeterministicStrategy {
    pub fn new(shape: GameShape, responses: Vec<Vec<usize>>) -> Self {
        assert_eq!(shape.len(), responses.len(), "one response table per player");
        for (&(nq, na), table) in shape.iter().zip(&responses) {
            assert_eq!(table.len(), nq, "response table must cover every question");
            assert!(table.iter().all(|&a| a < na), "answer index out of range");
        }
        DeterministicStrategy { shape, responses }
    }

    /// Mixed-radix decoding: the first player's first question is the most
    /// significant digit, so index 0 answers 0 everywhere.
    pub fn from_index(shape: &GameShape, mut index: u64) -> Self {
        let mut responses: Vec<Vec<usize>> =
            shape.iter().map(|&(nq, _)| vec![0; nq]).collect();
        for (player, &(nq, na)) in shape.iter().enumerate().rev() {
            for q in (0..nq).rev() {
                responses[player][q] = (index % na as u64) as usize;
                index /= na as u64;
            }
        }
        DeterministicStrategy {
            shape: shape.clone(),
            responses,
        }
    }

    pub fn answers(&self, questions: &[usize]) -> Vec<usize> {
        self.responses
            .iter()
            .zip(questions)
            .map(|(table, &q)| table[q])
            .collect()
    }
}

impl Strategy for DeterministicStrategy {
    fn id(&self) -> &str {
        "deterministic"
    }

    fn shape(&self) -> GameShape {
        self.shape.clone()
    }

    fn outcomes(&self, questions: &[usize]) -> Vec<StrategyOutcome<Vec<usize>>> {
        vec![StrategyOutcome {
            answers: self.answers(questions),
            probability: 1.0,
            exact: Some(Ratio::from_integer(1)),
        }]
    }

    fn sample(&self, questions: &[usize], _rng: &mut dyn RngCore) -> Vec<usize> {
        self.answers(questions)
    }
}

/// Every deterministic strategy for `game`, each exactly once, in index order.
pub fn enumerate_deterministic_strategies(
    game: &GameSpec,
) -> impl Iterator<Item = DeterministicStrategy> {
    let shape = game.shape();
    let count = strategy_count(&shape).expect("strategy space fits in u64");
    (0..count).map(move |i| DeterministicStrategy::from_index(&shape, i))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn counts_match_the_product_formula() {
        assert_eq!(enumerate_deterministic_strategies(&GameSpec::swap()).count(), 64);
        assert_eq!(enumerate_deterministic_strategies(&GameSpec::cabello()).count(), 4096);
        assert_eq!(enumerate_deterministic_strategies(&GameSpec::ghz()).count(), 64);
        assert_eq!(strategy_count(&vec![(64, 4)]), None);
    }

    #[test]
    fn enumeration_has_no_duplicates() {
        let all: HashSet<_> = enumerate_deterministic_strategies(&GameSpec::cabello())
            .map(|s| s.responses)
            .collect();
        assert_eq!(all.len(), 4096);
    }

    #[test]
    fn index_decoding_order() {
        let shape = GameSpec::ghz().shape();
        assert_eq!(
            DeterministicStrategy::from_index(&shape, 0).responses,
            vec![vec![0, 0]; 3]
        );
        assert_eq!(
            DeterministicStrategy::from_index(&shape, 1).responses,
            vec![vec![0, 0], vec![0, 0], vec![0, 1]]
        );
        assert_eq!(
            DeterministicStrategy::from_index(&shape, 63).responses,
            vec![vec![1, 1]; 3]
        );
    }

    #[test]
    fn answers_follow_the_tables() {
        let s = DeterministicStrategy::new(GameSpec::cabello().shape(), vec![vec![3, 1], vec![0, 1, 2, 3]]);
        assert_eq!(s.answers(&[1, 2]), vec![1, 2]);
    }
}
