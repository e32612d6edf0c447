use std::collections::BTreeMap;

use rand::{Rng, RngCore};

use super::{Strategy, StrategyOutcome};
use crate::games::{
    decode_cabello, decode_swap, pair_index, Basis, CabelloAnswer, CabelloQuestion, GameShape,
    GameSpec, SwapAnswer, SwapQuestion,
};
use crate::quantum::{
    bell_measurement, cabello_state, ghz_state, measure_observable, swap_state, BellLabel,
    Observable, Sign, StateVector,
};

/// One projective measurement in a plan.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Step {
    Pauli { qubit: usize, observable: Observable },
    Bell { pair: (usize, usize) },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum StepOutcome {
    Sign(Sign),
    Bell(BellLabel),
}

struct Branch {
    outcome: StepOutcome,
    probability: f64,
    post: StateVector,
}

fn branches(state: &StateVector, step: Step) -> Vec<Branch> {
    match step {
        Step::Pauli { qubit, observable } => measure_observable(state, qubit, observable)
            .expect("plans address valid qubits")
            .into_iter()
            .filter(|r| !r.impossible)
            .map(|r| Branch {
                outcome: StepOutcome::Sign(r.outcome),
                probability: r.probability,
                post: r.post_state,
            })
            .collect(),
        Step::Bell { pair } => bell_measurement(state, pair)
            .expect("plans address valid qubit pairs")
            .into_iter()
            .filter(|r| !r.impossible)
            .map(|r| Branch {
                outcome: StepOutcome::Bell(r.outcome),
                probability: r.probability,
                post: r.post_state,
            })
            .collect(),
    }
}

/// Enumerates every possible outcome sequence of `steps` with its probability.
pub fn run_plan_exact(state: &StateVector, steps: &[Step]) -> Vec<(Vec<StepOutcome>, f64)> {
    let Some((&first, rest)) = steps.split_first() else {
        return vec![(vec![], 1.0)];
    };
    let mut out = Vec::new();
    for b in branches(state, first) {
        for (mut tail, p) in run_plan_exact(&b.post, rest) {
            tail.insert(0, b.outcome);
            out.push((tail, b.probability * p));
        }
    }
    out
}

/// Draws one outcome sequence by sequential measurement and collapse.
pub fn run_plan_sampled(state: &StateVector, steps: &[Step], rng: &mut dyn RngCore) -> Vec<StepOutcome> {
    let mut current = state.clone();
    let mut outcomes = Vec::with_capacity(steps.len());
    for &step in steps {
        let mut options = branches(&current, step);
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        let mut chosen = options.len() - 1;
        for (k, b) in options.iter().enumerate() {
            acc += b.probability;
            if u < acc {
                chosen = k;
                break;
            }
        }
        let b = options.swap_remove(chosen);
        outcomes.push(b.outcome);
        current = b.post;
    }
    outcomes
}

/// Answer index for a player's outcome sequence: a sign, a Bell label, or a sign pair.
fn encode_outcomes(outcomes: &[StepOutcome]) -> usize {
    match outcomes {
        [StepOutcome::Sign(s)] => s.index(),
        [StepOutcome::Bell(b)] => b.index(),
        [StepOutcome::Sign(a), StepOutcome::Sign(b)] => pair_index((*a, *b)),
        other => panic!("no answer encoding for outcomes {other:?}"),
    }
}

type Plan = Box<dyn Fn(&[usize]) -> Vec<(usize, Step)> + Send + Sync>;

/// A shared state plus, per question tuple, an ordered list of
/// `(player, measurement)` steps. A player's answer is built from its own
/// step outcomes in plan order.
pub struct QuantumStrategy {
    id: String,
    shape: GameShape,
    state: StateVector,
    plan: Plan,
}

/// Participants of the swap game, used to order measurements.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SwapParty {
    Alice,
    Bob,
    Charlie,
}

impl QuantumStrategy {
    pub fn new(
        id: impl Into<String>,
        shape: GameShape,
        state: StateVector,
        plan: impl Fn(&[usize]) -> Vec<(usize, Step)> + Send + Sync + 'static,
    ) -> Self {
        QuantumStrategy {
            id: id.into(),
            shape,
            state,
            plan: Box::new(plan),
        }
    }

    pub fn state(&self) -> &StateVector {
        &self.state
    }

    pub fn plan(&self, questions: &[usize]) -> Vec<(usize, Step)> {
        (self.plan)(questions)
    }

    /// Bob Bell-measures q0 q1, then Alice (q2) and Charlie (q3) measure Z or X.
    pub fn swap() -> Self {
        Self::swap_in_order([SwapParty::Bob, SwapParty::Alice, SwapParty::Charlie])
    }

    pub fn swap_in_order(order: [SwapParty; 3]) -> Self {
        QuantumStrategy::new("quantum", GameSpec::swap().shape(), swap_state(), move |q| {
            let observable = Basis::ALL[q[0]].observable();
            order
                .iter()
                .map(|party| match party {
                    SwapParty::Alice => (0, Step::Pauli { qubit: 2, observable }),
                    SwapParty::Bob => (1, Step::Bell { pair: (0, 1) }),
                    SwapParty::Charlie => (2, Step::Pauli { qubit: 3, observable }),
                })
                .collect()
        })
    }

    /// Alice measures her question's two observables on q0 q1, Bob his on q2 q3.
    pub fn cabello() -> Self {
        QuantumStrategy::new("quantum", GameSpec::cabello().shape(), cabello_state(), |q| {
            let (question, _) = decode_cabello(q, &[0, 0]);
            let alice = question.alice_q.variables();
            let bob = question.bob_q.variables();
            alice
                .iter()
                .map(|v| (0, v))
                .chain(bob.iter().map(|v| (1, v)))
                .map(|(player, v)| {
                    (
                        player,
                        Step::Pauli {
                            qubit: v.qubit - 1,
                            observable: v.observable,
                        },
                    )
                })
                .collect()
        })
    }

    /// Mermin's strategy on `(|000⟩ + |111⟩)/√2`: X for question 0, Y for 1.
    /// Outcome +1 answers bit 0.
    pub fn ghz() -> Self {
        QuantumStrategy::new("quantum", GameSpec::ghz().shape(), ghz_state(), |q| {
            q.iter()
                .enumerate()
                .map(|(player, &bit)| {
                    let observable = if bit == 0 { Observable::X } else { Observable::Y };
                    (player, Step::Pauli { qubit: player, observable })
                })
                .collect()
        })
    }

    fn answers_from(&self, plan: &[(usize, Step)], outcomes: &[StepOutcome]) -> Vec<usize> {
        (0..self.shape.len())
            .map(|player| {
                let mine: Vec<StepOutcome> = plan
                    .iter()
                    .zip(outcomes)
                    .filter(|((p, _), _)| *p == player)
                    .map(|(_, &o)| o)
                    .collect();
                encode_outcomes(&mine)
            })
            .collect()
    }
}

impl Strategy for QuantumStrategy {
    fn id(&self) -> &str {
        &self.id
    }

    fn shape(&self) -> GameShape {
        self.shape.clone()
    }

    fn outcomes(&self, questions: &[usize]) -> Vec<StrategyOutcome<Vec<usize>>> {
        let plan = self.plan(questions);
        let steps: Vec<Step> = plan.iter().map(|&(_, s)| s).collect();
        let mut merged: BTreeMap<Vec<usize>, f64> = BTreeMap::new();
        for (outcomes, p) in run_plan_exact(&self.state, &steps) {
            *merged.entry(self.answers_from(&plan, &outcomes)).or_default() += p;
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
        let plan = self.plan(questions);
        let steps: Vec<Step> = plan.iter().map(|&(_, s)| s).collect();
        let outcomes = run_plan_sampled(&self.state, &steps, rng);
        self.answers_from(&plan, &outcomes)
    }
}

fn swap_questions(q: SwapQuestion) -> Vec<usize> {
    vec![q.basis.index(), 0, q.basis.index()]
}

pub fn quantum_swap_play(q: SwapQuestion) -> Vec<StrategyOutcome<SwapAnswer>> {
    quantum_swap_play_in_order(q, [SwapParty::Bob, SwapParty::Alice, SwapParty::Charlie])
}

pub fn quantum_swap_play_in_order(
    q: SwapQuestion,
    order: [SwapParty; 3],
) -> Vec<StrategyOutcome<SwapAnswer>> {
    let questions = swap_questions(q);
    QuantumStrategy::swap_in_order(order)
        .outcomes(&questions)
        .into_iter()
        .map(|o| o.map(|a| decode_swap(&questions, &a).1))
        .collect()
}

pub fn quantum_cabello_play(q: CabelloQuestion) -> Vec<StrategyOutcome<CabelloAnswer>> {
    let questions = vec![q.alice_q.index(), q.bob_q.index()];
    QuantumStrategy::cabello()
        .outcomes(&questions)
        .into_iter()
        .map(|o| o.map(|a| decode_cabello(&questions, &a).1))
        .collect()
}
