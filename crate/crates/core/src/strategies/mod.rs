//! Players for the games in [`crate::games`].
//!
//! Every strategy exposes the same two views of its behaviour: an exact
//! conditional answer distribution per question tuple, and a sampled play
//! driven by a caller-supplied RNG.

mod deterministic;
mod discarded;
mod lhv;
mod quantum;

pub use deterministic::{enumerate_deterministic_strategies, strategy_count, DeterministicStrategy};
pub use discarded::DiscardedQuantum;
pub use lhv::{
    discarded_bob_play, lhv_cabello_play, lhv_cabello_full_play, lhv_swap_play,
    CabelloFullHiddenVariables, CabelloHiddenVariables, DiscardedModel, LhvStrategy,
    SwapHiddenVariables, TABLE2,
};
pub use quantum::{
    quantum_cabello_play, quantum_swap_play, quantum_swap_play_in_order, run_plan_exact,
    run_plan_sampled, QuantumStrategy, Step, StepOutcome, SwapParty,
};

use num_rational::Ratio;
use rand::RngCore;

use crate::games::GameShape;

/// One answer tuple together with its conditional probability.
#[derive(Debug, Clone, PartialEq)]
pub struct StrategyOutcome<A> {
    pub answers: A,
    pub probability: f64,
    /// Exact value when the distribution comes from counting.
    pub exact: Option<Ratio<u64>>,
}

impl<A> StrategyOutcome<A> {
    pub fn map<B>(self, f: impl FnOnce(A) -> B) -> StrategyOutcome<B> {
        StrategyOutcome {
            answers: f(self.answers),
            probability: self.probability,
            exact: self.exact,
        }
    }
}

/// A (possibly randomized) joint strategy over index-encoded questions and answers.
pub trait Strategy: Send + Sync {
    fn id(&self) -> &str;

    /// Per-player `(question count, answer count)` the strategy is built for.
    fn shape(&self) -> GameShape;

    /// Exact answer distribution for one question tuple, support only,
    /// sorted by answer tuple.
    fn outcomes(&self, questions: &[usize]) -> Vec<StrategyOutcome<Vec<usize>>>;

    fn sample(&self, questions: &[usize], rng: &mut dyn RngCore) -> Vec<usize>;
}
