use std::collections::BTreeMap;

use num_rational::Ratio;
use rand::{Rng, RngCore};

use super::{Strategy, StrategyOutcome};
use crate::games::{
    decode_cabello, decode_swap, encode_cabello_answer, encode_swap_answer, AliceQuestion, Basis,
    BobQuestion, CabelloAnswer, CabelloQuestion, GameShape, GameSpec, SwapAnswer, SwapQuestion,
};
use crate::quantum::{BellLabel, Sign};

/// Shared randomness with uniform weight over `assignments`, and a
/// deterministic local response for each assignment.
pub struct LhvStrategy<H> {
    id: String,
    shape: GameShape,
    assignments: Vec<H>,
    respond: fn(&H, &[usize]) -> Vec<usize>,
}

impl<H> LhvStrategy<H> {
    pub fn new(
        id: impl Into<String>,
        shape: GameShape,
        assignments: Vec<H>,
        respond: fn(&H, &[usize]) -> Vec<usize>,
    ) -> Self {
        assert!(!assignments.is_empty(), "an LHV model needs at least one assignment");
        LhvStrategy {
            id: id.into(),
            shape,
            assignments,
            respond,
        }
    }

    pub fn assignments(&self) -> &[H] {
        &self.assignments
    }

    /// Replaces the enumeration order (or content) of the hidden variables.
    pub fn with_assignments(mut self, assignments: Vec<H>) -> Self {
        assert!(!assignments.is_empty(), "an LHV model needs at least one assignment");
        self.assignments = assignments;
        self
    }

    pub fn respond(&self, hv: &H, questions: &[usize]) -> Vec<usize> {
        (self.respond)(hv, questions)
    }
}

impl<H: Send + Sync> Strategy for LhvStrategy<H> {
    fn id(&self) -> &str {
        &self.id
    }

    fn shape(&self) -> GameShape {
        self.shape.clone()
    }

    fn outcomes(&self, questions: &[usize]) -> Vec<StrategyOutcome<Vec<usize>>> {
        let mut counts: BTreeMap<Vec<usize>, u64> = BTreeMap::new();
        for hv in &self.assignments {
            *counts.entry(self.respond(hv, questions)).or_default() += 1;
        }
        let total = self.assignments.len() as u64;
        counts
            .into_iter()
            .map(|(answers, n)| {
                let exact = Ratio::new(n, total);
                StrategyOutcome {
                    answers,
                    probability: n as f64 / total as f64,
                    exact: Some(exact),
                }
            })
            .collect()
    }

    fn sample(&self, questions: &[usize], rng: &mut dyn RngCore) -> Vec<usize> {
        let hv = &self.assignments[rng.gen_range(0..self.assignments.len())];
        self.respond(hv, questions)
    }
}

fn sign_tuples<const N: usize>() -> impl Iterator<Item = [Sign; N]> {
    (0..1usize << N).map(|i| std::array::from_fn(|k| Sign::from_index((i >> (N - 1 - k)) & 1)))
}

// ---------------------------------------------------------------------------
// Swap game

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SwapHiddenVariables {
    pub lambda_a_std: Sign,
    pub lambda_a_had: Sign,
    pub lambda_c_std: Sign,
    pub lambda_c_had: Sign,
}

impl SwapHiddenVariables {
    pub fn new(a_std: i32, a_had: i32, c_std: i32, c_had: i32) -> Self {
        SwapHiddenVariables {
            lambda_a_std: Sign::of(a_std),
            lambda_a_had: Sign::of(a_had),
            lambda_c_std: Sign::of(c_std),
            lambda_c_had: Sign::of(c_had),
        }
    }

    /// All 16 equally likely assignments.
    pub fn all() -> Vec<Self> {
        sign_tuples::<4>()
            .map(|[a, b, c, d]| SwapHiddenVariables {
                lambda_a_std: a,
                lambda_a_had: b,
                lambda_c_std: c,
                lambda_c_had: d,
            })
            .collect()
    }
}

/// Bob's lookup keyed by `(λa₊·λc₊, λa×·λc×)`.
pub const TABLE2: [((Sign, Sign), BellLabel); 4] = [
    ((Sign::Plus, Sign::Plus), BellLabel::PhiPlus),
    ((Sign::Plus, Sign::Minus), BellLabel::PhiMinus),
    ((Sign::Minus, Sign::Plus), BellLabel::PsiPlus),
    ((Sign::Minus, Sign::Minus), BellLabel::PsiMinus),
];

pub fn lhv_swap_play(hv: SwapHiddenVariables, q: SwapQuestion) -> SwapAnswer {
    let (a, c) = match q.basis {
        Basis::Standard => (hv.lambda_a_std, hv.lambda_c_std),
        Basis::Hadamard => (hv.lambda_a_had, hv.lambda_c_had),
    };
    let key = (
        hv.lambda_a_std * hv.lambda_c_std,
        hv.lambda_a_had * hv.lambda_c_had,
    );
    let b = TABLE2
        .iter()
        .find(|(k, _)| *k == key)
        .map(|&(_, b)| b)
        .expect("the table covers every sign pair");
    SwapAnswer { a, c, b }
}

impl LhvStrategy<SwapHiddenVariables> {
    pub fn swap() -> Self {
        LhvStrategy::new("lhv", GameSpec::swap().shape(), SwapHiddenVariables::all(), |hv, q| {
            let (question, _) = decode_swap(q, &[0, 0, 0]);
            encode_swap_answer(lhv_swap_play(*hv, question))
        })
    }
}

// ---------------------------------------------------------------------------
// Cabello game

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CabelloHiddenVariables {
    pub lambda1: Sign,
    pub lambda2: Sign,
    /// Bob's private coin.
    pub b1: Sign,
}

impl CabelloHiddenVariables {
    pub fn new(lambda1: i32, lambda2: i32, b1: i32) -> Self {
        CabelloHiddenVariables {
            lambda1: Sign::of(lambda1),
            lambda2: Sign::of(lambda2),
            b1: Sign::of(b1),
        }
    }

    /// All 8 equally likely assignments.
    pub fn all() -> Vec<Self> {
        sign_tuples::<3>()
            .map(|[lambda1, lambda2, b1]| CabelloHiddenVariables {
                lambda1,
                lambda2,
                b1,
            })
            .collect()
    }
}

/// Alice answers `(λ1, λ2)` whatever she is asked; Bob answers his coin and
/// a second value derived from it and the shared variables.
pub fn lhv_cabello_play(hv: CabelloHiddenVariables, q: CabelloQuestion) -> CabelloAnswer {
    let CabelloHiddenVariables {
        lambda1: l1,
        lambda2: l2,
        b1,
    } = hv;
    let b2 = match q.bob_q {
        BobQuestion::Q1b => l1 * l2 * b1,
        BobQuestion::Q2b => l1 * b1,
        BobQuestion::Q3b => l1 * l2 * b1,
        BobQuestion::Q4b => -(l1 * b1),
    };
    CabelloAnswer {
        alice: (l1, l2),
        bob: (b1, b2),
    }
}

impl LhvStrategy<CabelloHiddenVariables> {
    pub fn cabello() -> Self {
        LhvStrategy::new(
            "lhv",
            GameSpec::cabello().shape(),
            CabelloHiddenVariables::all(),
            |hv, q| {
                let (question, _) = decode_cabello(q, &[0, 0]);
                encode_cabello_answer(lhv_cabello_play(*hv, question))
            },
        )
    }
}

/// Independent shared values for each of Alice's three observables plus Bob's coin.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CabelloFullHiddenVariables {
    pub x1: Sign,
    pub x2: Sign,
    pub y1: Sign,
    pub coin: Sign,
}

impl CabelloFullHiddenVariables {
    /// All 16 equally likely assignments.
    pub fn all() -> Vec<Self> {
        sign_tuples::<4>()
            .map(|[x1, x2, y1, coin]| CabelloFullHiddenVariables { x1, x2, y1, coin })
            .collect()
    }
}

/// Like [`lhv_cabello_play`] but with `x1` and `y1` carried by separate
/// variables, so the unconstrained question pairs stay uncorrelated and the
/// whole joint distribution matches the quantum one.
pub fn lhv_cabello_full_play(hv: CabelloFullHiddenVariables, q: CabelloQuestion) -> CabelloAnswer {
    let CabelloFullHiddenVariables { x1, x2, y1, coin } = hv;
    let alice = match q.alice_q {
        AliceQuestion::Q1a => (x1, x2),
        AliceQuestion::Q2a => (y1, x2),
    };
    let second = match q.bob_q {
        BobQuestion::Q1b => y1 * x2 * coin,
        BobQuestion::Q2b => x1 * coin,
        BobQuestion::Q3b => x1 * x2 * coin,
        BobQuestion::Q4b => -(y1 * coin),
    };
    CabelloAnswer {
        alice,
        bob: (coin, second),
    }
}

impl LhvStrategy<CabelloFullHiddenVariables> {
    pub fn cabello_full() -> Self {
        LhvStrategy::new(
            "lhv-full",
            GameSpec::cabello().shape(),
            CabelloFullHiddenVariables::all(),
            |hv, q| {
                let (question, _) = decode_cabello(q, &[0, 0]);
                encode_cabello_answer(lhv_cabello_full_play(*hv, question))
            },
        )
    }
}

// ---------------------------------------------------------------------------
// GHZ contrast game

impl LhvStrategy<()> {
    /// Every player answers 1; wins on three of the four promised questions.
    pub fn ghz() -> Self {
        LhvStrategy::new("lhv", GameSpec::ghz().shape(), vec![()], |_, _| vec![1, 1, 1])
    }
}

// ---------------------------------------------------------------------------
// Swap game without Bob

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiscardedModel {
    /// The quantum swap strategy with Bob's label summed out.
    Quantum,
    /// Alice and Charlie answer independent uniform signs.
    LhvRandom,
}

impl LhvStrategy<(Sign, Sign)> {
    pub fn random_bob() -> Self {
        LhvStrategy::new(
            "random-bob",
            GameSpec::swap_discarded().shape(),
            sign_tuples::<2>().map(|[a, c]| (a, c)).collect(),
            |&(a, c), _| vec![a.index(), c.index()],
        )
    }
}

/// Exact distribution of `(a, c)` in the swap game once Bob's record is lost.
pub fn discarded_bob_play(
    q: SwapQuestion,
    model: DiscardedModel,
) -> Vec<StrategyOutcome<(Sign, Sign)>> {
    let questions = [q.basis.index(), q.basis.index()];
    let outcomes = match model {
        DiscardedModel::Quantum => super::discarded::DiscardedQuantum::swap().outcomes(&questions),
        DiscardedModel::LhvRandom => LhvStrategy::random_bob().outcomes(&questions),
    };
    outcomes
        .into_iter()
        .map(|o| o.map(|a| (Sign::from_index(a[0]), Sign::from_index(a[1]))))
        .collect()
}
