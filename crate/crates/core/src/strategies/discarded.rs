use std::collections::BTreeMap;

use rand::RngCore;

use super::{QuantumStrategy, Strategy, StrategyOutcome};
use crate::games::{GameShape, GameSpec};

/// The quantum swap strategy seen by Alice and Charlie alone: Bob still
/// measures, but his label is summed out of the answer distribution.
pub struct DiscardedQuantum {
    inner: QuantumStrategy,
}

impl DiscardedQuantum {
    pub fn swap() -> Self {
        DiscardedQuantum {
            inner: QuantumStrategy::swap(),
        }
    }

    fn full_questions(questions: &[usize]) -> [usize; 3] {
        [questions[0], 0, questions[1]]
    }
}

impl Strategy for DiscardedQuantum {
    fn id(&self) -> &str {
        "quantum"
    }

    fn shape(&self) -> GameShape {
        GameSpec::swap_discarded().shape()
    }

    fn outcomes(&self, questions: &[usize]) -> Vec<StrategyOutcome<Vec<usize>>> {
        let mut merged: BTreeMap<Vec<usize>, f64> = BTreeMap::new();
        for o in self.inner.outcomes(&Self::full_questions(questions)) {
            *merged.entry(vec![o.answers[0], o.answers[2]]).or_default() += o.probability;
        }
        merged
            .into_iter()
            .map(|(answers, probability)| StrategyOutcome {
                answers,
                probability,
                exact: None,
            })
            .collect()
    }

    fn sample(&self, questions: &[usize], rng: &mut dyn RngCore) -> Vec<usize> {
        let full = self.inner.sample(&Self::full_questions(questions), rng);
        vec![full[0], full[2]]
    }
}
