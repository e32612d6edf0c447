//! Game definitions: question sets, answer sets and win predicates.
//!
//! Each game has a typed predicate over its domain types and an index-encoded
//! [`GameSpec`] used by the generic strategy and analysis machinery.

use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::quantum::{BellLabel, Observable, Sign};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GameError {
    #[error("questions {0:?} violate the promise r ⊕ s ⊕ t = 0")]
    PromiseViolation([bool; 3]),
    #[error("unknown player `{0}`")]
    UnknownPlayer(String),
}

// ---------------------------------------------------------------------------
// Swap game

/// Measurement basis asked of both Alice and Charlie.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Basis {
    Standard,
    Hadamard,
}

impl Basis {
    pub const ALL: [Basis; 2] = [Basis::Standard, Basis::Hadamard];

    pub fn observable(self) -> Observable {
        match self {
            Basis::Standard => Observable::Z,
            Basis::Hadamard => Observable::X,
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Basis::Standard => "standard",
            Basis::Hadamard => "hadamard",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SwapQuestion {
    pub basis: Basis,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SwapAnswer {
    pub a: Sign,
    pub c: Sign,
    pub b: BellLabel,
}

/// Expected `a·c` when Alice and Charlie share `label` and both measure in `basis`.
pub fn table1_product(label: BellLabel, basis: Basis) -> Sign {
    use BellLabel::*;
    use Sign::*;
    match (label, basis) {
        (PhiPlus, Basis::Standard) => Plus,
        (PhiPlus, Basis::Hadamard) => Plus,
        (PhiMinus, Basis::Standard) => Plus,
        (PhiMinus, Basis::Hadamard) => Minus,
        (PsiPlus, Basis::Standard) => Minus,
        (PsiPlus, Basis::Hadamard) => Plus,
        (PsiMinus, Basis::Standard) => Minus,
        (PsiMinus, Basis::Hadamard) => Minus,
    }
}

pub fn swap_game_predicate(q: SwapQuestion, ans: SwapAnswer) -> bool {
    ans.a * ans.c == table1_product(ans.b, q.basis)
}

// ---------------------------------------------------------------------------
// Cabello game

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AliceQuestion {
    Q1a,
    Q2a,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BobQuestion {
    Q1b,
    Q2b,
    Q3b,
    Q4b,
}

/// A local Pauli outcome named by observable and qubit (1-based, as in `x1`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Variable {
    pub observable: Observable,
    pub qubit: usize,
}

const fn var(observable: Observable, qubit: usize) -> Variable {
    Variable { observable, qubit }
}

pub const X1: Variable = var(Observable::X, 1);
pub const X2: Variable = var(Observable::X, 2);
pub const Y1: Variable = var(Observable::Y, 1);
pub const X3: Variable = var(Observable::X, 3);
pub const Y3: Variable = var(Observable::Y, 3);
pub const Y4: Variable = var(Observable::Y, 4);
pub const Z4: Variable = var(Observable::Z, 4);

impl fmt::Display for Variable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sym = match self.observable {
            Observable::X => 'x',
            Observable::Y => 'y',
            Observable::Z => 'z',
        };
        write!(f, "{sym}{}", self.qubit)
    }
}

impl AliceQuestion {
    pub const ALL: [AliceQuestion; 2] = [AliceQuestion::Q1a, AliceQuestion::Q2a];

    pub fn variables(self) -> [Variable; 2] {
        match self {
            AliceQuestion::Q1a => [X1, X2],
            AliceQuestion::Q2a => [Y1, X2],
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            AliceQuestion::Q1a => "1a",
            AliceQuestion::Q2a => "2a",
        }
    }
}

impl BobQuestion {
    pub const ALL: [BobQuestion; 4] = [
        BobQuestion::Q1b,
        BobQuestion::Q2b,
        BobQuestion::Q3b,
        BobQuestion::Q4b,
    ];

    pub fn variables(self) -> [Variable; 2] {
        match self {
            BobQuestion::Q1b => [X3, Y4],
            BobQuestion::Q2b => [X3, Z4],
            BobQuestion::Q3b => [Y3, Y4],
            BobQuestion::Q4b => [Y3, Z4],
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            BobQuestion::Q1b => "1b",
            BobQuestion::Q2b => "2b",
            BobQuestion::Q3b => "3b",
            BobQuestion::Q4b => "4b",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CabelloQuestion {
    pub alice_q: AliceQuestion,
    pub bob_q: BobQuestion,
}

impl CabelloQuestion {
    pub fn all() -> impl Iterator<Item = CabelloQuestion> {
        AliceQuestion::ALL.into_iter().flat_map(|alice_q| {
            BobQuestion::ALL
                .into_iter()
                .map(move |bob_q| CabelloQuestion { alice_q, bob_q })
        })
    }
}

/// Each pair lists outcomes in the order of the question's variables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CabelloAnswer {
    pub alice: (Sign, Sign),
    pub bob: (Sign, Sign),
}

/// A constraint `Π variables = sign` that the quantum state satisfies with certainty.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ProductConstraint {
    pub name: &'static str,
    pub variables: &'static [Variable],
    pub sign: Sign,
}

/// `x1 = x3 z4`, `y1 = −y3 z4`, `x1 x2 = y3 y4`, `y1 x2 = x3 y4`, written as products.
pub const CABELLO_CONSTRAINTS: [ProductConstraint; 4] = [
    ProductConstraint {
        name: "eq7",
        variables: &[X1, X3, Z4],
        sign: Sign::Plus,
    },
    ProductConstraint {
        name: "eq8",
        variables: &[Y1, Y3, Z4],
        sign: Sign::Minus,
    },
    ProductConstraint {
        name: "eq9",
        variables: &[X1, X2, Y3, Y4],
        sign: Sign::Plus,
    },
    ProductConstraint {
        name: "eq10",
        variables: &[Y1, X2, X3, Y4],
        sign: Sign::Plus,
    },
];

impl ProductConstraint {
    /// Pauli string whose eigenvalue on the Cabello state is `sign` (zero-based qubits).
    pub fn pauli_string(&self) -> Vec<(usize, Observable)> {
        self.variables
            .iter()
            .map(|v| (v.qubit - 1, v.observable))
            .collect()
    }
}

/// Constraints whose variables are all fixed by the question pair.
pub fn applicable_constraints(q: CabelloQuestion) -> Vec<&'static ProductConstraint> {
    let asked: Vec<Variable> = q
        .alice_q
        .variables()
        .into_iter()
        .chain(q.bob_q.variables())
        .collect();
    CABELLO_CONSTRAINTS
        .iter()
        .filter(|c| c.variables.iter().all(|v| asked.contains(v)))
        .collect()
}

pub fn cabello_game_predicate(q: CabelloQuestion, ans: CabelloAnswer) -> bool {
    let [a1, a2] = q.alice_q.variables();
    let [b1, b2] = q.bob_q.variables();
    let values = [
        (a1, ans.alice.0),
        (a2, ans.alice.1),
        (b1, ans.bob.0),
        (b2, ans.bob.1),
    ];
    let value_of = |v: &Variable| {
        values
            .iter()
            .find(|(w, _)| w == v)
            .map(|&(_, s)| s)
            .expect("applicable constraints only use asked variables")
    };
    applicable_constraints(q).iter().all(|c| {
        c.variables
            .iter()
            .map(value_of)
            .fold(Sign::Plus, |acc, s| acc * s)
            == c.sign
    })
}

// ---------------------------------------------------------------------------
// GHZ contrast game

pub fn ghz_contrast_game_predicate(
    questions: [bool; 3],
    answers: [bool; 3],
) -> Result<bool, GameError> {
    let [r, s, t] = questions;
    if r ^ s ^ t {
        return Err(GameError::PromiseViolation(questions));
    }
    let [a, b, c] = answers;
    Ok((a ^ b ^ c) == (r | s | t))
}

// ---------------------------------------------------------------------------
// Index encoding

/// Index of an ordered sign pair: `(+,+)=0, (+,−)=1, (−,+)=2, (−,−)=3`.
pub fn pair_index(p: (Sign, Sign)) -> usize {
    2 * p.0.index() + p.1.index()
}

pub fn pair_from_index(i: usize) -> (Sign, Sign) {
    (Sign::from_index(i / 2), Sign::from_index(i % 2))
}

fn pair_label(i: usize) -> String {
    let (a, b) = pair_from_index(i);
    format!("{a}{b}")
}

/// Question and answer alphabets of one player.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Player {
    pub name: String,
    pub questions: Vec<String>,
    pub answers: Vec<String>,
}

/// Per-player `(question count, answer count)`; two strategies or distributions
/// are comparable only when their shapes agree.
pub type GameShape = Vec<(usize, usize)>;

/// A finite game over index-encoded questions and answers.
///
/// Questions are drawn uniformly from `question_tuples`; each tuple holds one
/// question index per player.
#[derive(Clone)]
pub struct GameSpec {
    pub id: &'static str,
    pub players: Vec<Player>,
    pub question_tuples: Vec<Vec<usize>>,
    predicate: fn(&[usize], &[usize]) -> bool,
}

impl fmt::Debug for GameSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GameSpec")
            .field("id", &self.id)
            .field("players", &self.players)
            .field("question_tuples", &self.question_tuples)
            .finish()
    }
}

fn signs() -> Vec<String> {
    Sign::ALL.iter().map(ToString::to_string).collect()
}

fn labels<const N: usize>(items: [&str; N]) -> Vec<String> {
    items.iter().map(|s| s.to_string()).collect()
}

pub fn decode_swap(q: &[usize], a: &[usize]) -> (SwapQuestion, SwapAnswer) {
    (
        SwapQuestion {
            basis: Basis::ALL[q[0]],
        },
        SwapAnswer {
            a: Sign::from_index(a[0]),
            b: BellLabel::from_index(a[1]),
            c: Sign::from_index(a[2]),
        },
    )
}

pub fn encode_swap_answer(ans: SwapAnswer) -> Vec<usize> {
    vec![ans.a.index(), ans.b.index(), ans.c.index()]
}

pub fn decode_cabello(q: &[usize], a: &[usize]) -> (CabelloQuestion, CabelloAnswer) {
    (
        CabelloQuestion {
            alice_q: AliceQuestion::ALL[q[0]],
            bob_q: BobQuestion::ALL[q[1]],
        },
        CabelloAnswer {
            alice: pair_from_index(a[0]),
            bob: pair_from_index(a[1]),
        },
    )
}

pub fn encode_cabello_answer(ans: CabelloAnswer) -> Vec<usize> {
    vec![pair_index(ans.alice), pair_index(ans.bob)]
}

fn as_bits(v: &[usize]) -> [bool; 3] {
    [v[0] == 1, v[1] == 1, v[2] == 1]
}

impl GameSpec {
    /// Players (alice, bob, charlie). Alice and Charlie share one basis
    /// question; Bob has a single null question and answers a Bell label.
    pub fn swap() -> GameSpec {
        GameSpec {
            id: "swap",
            players: vec![
                Player {
                    name: "alice".into(),
                    questions: labels(["standard", "hadamard"]),
                    answers: signs(),
                },
                Player {
                    name: "bob".into(),
                    questions: labels(["null"]),
                    answers: BellLabel::ALL.iter().map(|b| b.name().to_string()).collect(),
                },
                Player {
                    name: "charlie".into(),
                    questions: labels(["standard", "hadamard"]),
                    answers: signs(),
                },
            ],
            question_tuples: Basis::ALL.iter().map(|b| vec![b.index(), 0, b.index()]).collect(),
            predicate: |q, a| {
                let (q, a) = decode_swap(q, a);
                swap_game_predicate(q, a)
            },
        }
    }

    /// The swap game after Bob's record is discarded: Alice and Charlie only,
    /// and every answer pair is accepted.
    pub fn swap_discarded() -> GameSpec {
        let mut players = GameSpec::swap().players;
        players.remove(1);
        GameSpec {
            id: "swap-discarded",
            players,
            question_tuples: Basis::ALL.iter().map(|b| vec![b.index(), b.index()]).collect(),
            predicate: |_, _| true,
        }
    }

    /// Players (alice, bob); answers are ordered sign pairs.
    pub fn cabello() -> GameSpec {
        let pairs: Vec<String> = (0..4).map(pair_label).collect();
        GameSpec {
            id: "cabello",
            players: vec![
                Player {
                    name: "alice".into(),
                    questions: AliceQuestion::ALL.iter().map(|q| q.name().into()).collect(),
                    answers: pairs.clone(),
                },
                Player {
                    name: "bob".into(),
                    questions: BobQuestion::ALL.iter().map(|q| q.name().into()).collect(),
                    answers: pairs,
                },
            ],
            question_tuples: CabelloQuestion::all()
                .map(|q| vec![q.alice_q.index(), q.bob_q.index()])
                .collect(),
            predicate: |q, a| {
                let (q, a) = decode_cabello(q, a);
                cabello_game_predicate(q, a)
            },
        }
    }

    /// Three players with bit questions under the promise `r ⊕ s ⊕ t = 0`.
    pub fn ghz() -> GameSpec {
        let player = |name: &str| Player {
            name: name.into(),
            questions: labels(["0", "1"]),
            answers: labels(["0", "1"]),
        };
        let question_tuples = (0..8usize)
            .map(|i| vec![(i >> 2) & 1, (i >> 1) & 1, i & 1])
            .filter(|q| q.iter().sum::<usize>() % 2 == 0)
            .collect();
        GameSpec {
            id: "ghz",
            players: vec![player("alice"), player("bob"), player("charlie")],
            question_tuples,
            predicate: |q, a| {
                ghz_contrast_game_predicate(as_bits(q), as_bits(a))
                    .expect("question tuples satisfy the promise")
            },
        }
    }

    pub fn wins(&self, questions: &[usize], answers: &[usize]) -> bool {
        (self.predicate)(questions, answers)
    }

    pub fn shape(&self) -> GameShape {
        self.players
            .iter()
            .map(|p| (p.questions.len(), p.answers.len()))
            .collect()
    }

    pub fn player_index(&self, name: &str) -> Result<usize, GameError> {
        self.players
            .iter()
            .position(|p| p.name == name)
            .ok_or_else(|| GameError::UnknownPlayer(name.to_string()))
    }

    pub fn question_labels(&self, questions: &[usize]) -> Vec<String> {
        self.players
            .iter()
            .zip(questions)
            .map(|(p, &q)| p.questions[q].clone())
            .collect()
    }

    pub fn answer_labels(&self, answers: &[usize]) -> Vec<String> {
        self.players
            .iter()
            .zip(answers)
            .map(|(p, &a)| p.answers[a].clone())
            .collect()
    }

    /// Every answer tuple in lexicographic index order.
    pub fn answer_tuples(&self) -> Vec<Vec<usize>> {
        let mut out = vec![vec![]];
        for p in &self.players {
            out = out
                .into_iter()
                .flat_map(|prefix| {
                    (0..p.answers.len()).map(move |a| {
                        let mut t = prefix.clone();
                        t.push(a);
                        t
                    })
                })
                .collect();
        }
        out
    }
}
