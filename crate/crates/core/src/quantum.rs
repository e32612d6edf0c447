//! Exact state-vector arithmetic for systems of at most four qubits.
//!
//! Qubits are addressed by zero-based index. Index 0 is the most significant
//! position of the computational basis index, so the basis string `|q0 q1 q2 q3⟩`
//! reads left to right exactly as it is written.

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest supported register.
pub const MAX_QUBITS: usize = 4;

/// Equality tolerance for amplitudes, probabilities and expectation values.
pub const TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuantumError {
    #[error("a {0}-qubit register exceeds the {MAX_QUBITS}-qubit limit")]
    TooManyQubits(usize),
    #[error("amplitude vector of length {0} does not describe 1..={MAX_QUBITS} qubits")]
    BadLength(usize),
    #[error("amplitude {0} is not finite")]
    NonFinite(usize),
    #[error("state is not normalized: squared norm {0}")]
    NotNormalized(f64),
    #[error("qubit {index} is out of range for a {num_qubits}-qubit state")]
    InvalidQubit { index: usize, num_qubits: usize },
    #[error("qubit {0} is used more than once")]
    DuplicateQubit(usize),
}

/// A measurement outcome of a ±1-valued observable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub const ALL: [Sign; 2] = [Sign::Plus, Sign::Minus];

    pub fn value(self) -> i8 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }

    /// Maps any nonzero integer to its sign.
    pub fn of(v: i32) -> Sign {
        if v < 0 {
            Sign::Minus
        } else {
            Sign::Plus
        }
    }

    pub fn index(self) -> usize {
        match self {
            Sign::Plus => 0,
            Sign::Minus => 1,
        }
    }

    pub fn from_index(i: usize) -> Sign {
        Sign::ALL[i]
    }
}

impl std::ops::Mul for Sign {
    type Output = Sign;

    fn mul(self, rhs: Sign) -> Sign {
        if self == rhs {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }
}

impl std::ops::Neg for Sign {
    type Output = Sign;

    fn neg(self) -> Sign {
        self * Sign::Minus
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sign::Plus => "+1",
            Sign::Minus => "-1",
        })
    }
}

/// The four maximally entangled two-qubit states.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BellLabel {
    PsiMinus,
    PsiPlus,
    PhiMinus,
    PhiPlus,
}

impl BellLabel {
    pub const ALL: [BellLabel; 4] = [
        BellLabel::PsiMinus,
        BellLabel::PsiPlus,
        BellLabel::PhiMinus,
        BellLabel::PhiPlus,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> BellLabel {
        BellLabel::ALL[i]
    }

    pub fn name(self) -> &'static str {
        match self {
            BellLabel::PsiMinus => "psi_minus",
            BellLabel::PsiPlus => "psi_plus",
            BellLabel::PhiMinus => "phi_minus",
            BellLabel::PhiPlus => "phi_plus",
        }
    }

    /// Amplitudes on the two-qubit basis `(00, 01, 10, 11)`.
    pub fn amplitudes(self) -> [Complex64; 4] {
        let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
        let z = Complex64::new(0.0, 0.0);
        match self {
            BellLabel::PsiMinus => [z, h, -h, z],
            BellLabel::PsiPlus => [z, h, h, z],
            BellLabel::PhiMinus => [h, z, z, -h],
            BellLabel::PhiPlus => [h, z, z, h],
        }
    }
}

impl fmt::Display for BellLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Single-qubit Pauli observables, each with spectrum {+1, −1}.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Observable {
    X,
    Y,
    Z,
}

impl Observable {
    pub const ALL: [Observable; 3] = [Observable::X, Observable::Y, Observable::Z];

    /// Row-major 2×2 matrix in the `{|0⟩, |1⟩}` basis.
    pub fn matrix(self) -> [[Complex64; 2]; 2] {
        let o = Complex64::new(0.0, 0.0);
        let one = Complex64::new(1.0, 0.0);
        let i = Complex64::new(0.0, 1.0);
        match self {
            Observable::X => [[o, one], [one, o]],
            // i(|1⟩⟨0| − |0⟩⟨1|)
            Observable::Y => [[o, -i], [i, o]],
            Observable::Z => [[one, o], [o, -one]],
        }
    }

    /// Projector onto the eigenspace with eigenvalue `sign`: (I ± O)/2.
    pub fn projector(self, sign: Sign) -> [[Complex64; 2]; 2] {
        let m = self.matrix();
        let s = f64::from(sign.value());
        let mut p = [[Complex64::new(0.0, 0.0); 2]; 2];
        for r in 0..2 {
            for c in 0..2 {
                let id = if r == c { 1.0 } else { 0.0 };
                p[r][c] = (Complex64::new(id, 0.0) + m[r][c] * s) * 0.5;
            }
        }
        p
    }
}

impl fmt::Display for Observable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

/// A normalized pure state on 1 to 4 qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    num_qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    /// Validates length, finiteness and normalization (within [`TOLERANCE`]).
    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self, QuantumError> {
        let len = amplitudes.len();
        if !len.is_power_of_two() || len < 2 {
            return Err(QuantumError::BadLength(len));
        }
        let num_qubits = len.trailing_zeros() as usize;
        if num_qubits > MAX_QUBITS {
            return Err(QuantumError::TooManyQubits(num_qubits));
        }
        if let Some(i) = amplitudes
            .iter()
            .position(|a| !a.re.is_finite() || !a.im.is_finite())
        {
            return Err(QuantumError::NonFinite(i));
        }
        let norm = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>();
        if (norm - 1.0).abs() > TOLERANCE {
            return Err(QuantumError::NotNormalized(norm));
        }
        Ok(StateVector {
            num_qubits,
            amplitudes,
        })
    }

    /// Like [`StateVector::from_amplitudes`] with real coefficients.
    pub fn from_real(amplitudes: &[f64]) -> Result<Self, QuantumError> {
        Self::from_amplitudes(
            amplitudes
                .iter()
                .map(|&a| Complex64::new(a, 0.0))
                .collect(),
        )
    }

    /// The computational basis state `|index⟩`.
    pub fn basis(num_qubits: usize, index: usize) -> Result<Self, QuantumError> {
        if num_qubits == 0 || num_qubits > MAX_QUBITS {
            return Err(QuantumError::TooManyQubits(num_qubits));
        }
        let dim = 1 << num_qubits;
        if index >= dim {
            return Err(QuantumError::InvalidQubit {
                index,
                num_qubits,
            });
        }
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); dim];
        amplitudes[index] = Complex64::new(1.0, 0.0);
        Ok(StateVector {
            num_qubits,
            amplitudes,
        })
    }

    /// Scales an unnormalized nonzero vector to unit norm.
    fn normalized(num_qubits: usize, mut amplitudes: Vec<Complex64>) -> Self {
        let norm = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        for a in &mut amplitudes {
            *a /= norm;
        }
        StateVector {
            num_qubits,
            amplitudes,
        }
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn amplitude(&self, index: usize) -> Complex64 {
        self.amplitudes[index]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> Complex64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// Largest componentwise distance to `other`; infinite when sizes differ.
    pub fn max_distance(&self, other: &StateVector) -> f64 {
        if self.dim() != other.dim() {
            return f64::INFINITY;
        }
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// `self ⊗ right`; `self` keeps the leading (most significant) qubits.
    pub fn tensor(&self, right: &StateVector) -> Result<StateVector, QuantumError> {
        let n = self.num_qubits + right.num_qubits;
        if n > MAX_QUBITS {
            return Err(QuantumError::TooManyQubits(n));
        }
        let amplitudes = self
            .amplitudes
            .iter()
            .flat_map(|l| right.amplitudes.iter().map(move |r| l * r))
            .collect();
        Ok(StateVector {
            num_qubits: n,
            amplitudes,
        })
    }

    fn check_qubit(&self, index: usize) -> Result<(), QuantumError> {
        if index >= self.num_qubits {
            Err(QuantumError::InvalidQubit {
                index,
                num_qubits: self.num_qubits,
            })
        } else {
            Ok(())
        }
    }

    fn check_distinct(&self, qubits: &[usize]) -> Result<(), QuantumError> {
        for (k, &q) in qubits.iter().enumerate() {
            self.check_qubit(q)?;
            if qubits[..k].contains(&q) {
                return Err(QuantumError::DuplicateQubit(q));
            }
        }
        Ok(())
    }

    /// Bit mask of `qubit` within a basis index.
    fn mask(&self, qubit: usize) -> usize {
        1 << (self.num_qubits - 1 - qubit)
    }

    /// Reorders qubits: qubit `k` of the result is qubit `order[k]` of `self`.
    pub fn permute_qubits(&self, order: &[usize]) -> Result<StateVector, QuantumError> {
        if order.len() != self.num_qubits {
            return Err(QuantumError::BadLength(order.len()));
        }
        self.check_distinct(order)?;
        let n = self.num_qubits;
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); self.dim()];
        for (old, amp) in self.amplitudes.iter().enumerate() {
            let mut new = 0;
            for (k, &src) in order.iter().enumerate() {
                if old & self.mask(src) != 0 {
                    new |= 1 << (n - 1 - k);
                }
            }
            amplitudes[new] = *amp;
        }
        Ok(StateVector {
            num_qubits: n,
            amplitudes,
        })
    }

    /// Applies a 2×2 operator to one qubit without renormalizing.
    fn apply_single(&self, qubit: usize, m: &[[Complex64; 2]; 2]) -> Vec<Complex64> {
        let mask = self.mask(qubit);
        let mut out = self.amplitudes.clone();
        for i0 in (0..self.dim()).filter(|i| i & mask == 0) {
            let i1 = i0 | mask;
            let (a0, a1) = (self.amplitudes[i0], self.amplitudes[i1]);
            out[i0] = m[0][0] * a0 + m[0][1] * a1;
            out[i1] = m[1][0] * a0 + m[1][1] * a1;
        }
        out
    }

    /// Applies a tensor product of Pauli observables; unassigned qubits see identity.
    pub fn apply_pauli_string(
        &self,
        assignment: &[(usize, Observable)],
    ) -> Result<StateVector, QuantumError> {
        let qubits: Vec<usize> = assignment.iter().map(|&(q, _)| q).collect();
        self.check_distinct(&qubits)?;
        let mut state = self.clone();
        for &(q, obs) in assignment {
            state.amplitudes = state.apply_single(q, &obs.matrix());
        }
        Ok(state)
    }

    /// Reduced density matrix on `keep` (in the given order), row-major.
    pub fn reduced_density_matrix(
        &self,
        keep: &[usize],
    ) -> Result<Vec<Vec<Complex64>>, QuantumError> {
        self.check_distinct(keep)?;
        let k = keep.len();
        let sub = |index: usize| -> usize {
            keep.iter()
                .enumerate()
                .filter(|(_, &q)| index & self.mask(q) != 0)
                .map(|(pos, _)| 1 << (k - 1 - pos))
                .sum()
        };
        let keep_mask: usize = keep.iter().map(|&q| self.mask(q)).sum();
        let mut rho = vec![vec![Complex64::new(0.0, 0.0); 1 << k]; 1 << k];
        for i in 0..self.dim() {
            for j in 0..self.dim() {
                if i & !keep_mask == j & !keep_mask {
                    rho[sub(i)][sub(j)] += self.amplitudes[i] * self.amplitudes[j].conj();
                }
            }
        }
        Ok(rho)
    }
}

impl fmt::Display for StateVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, a) in self.amplitudes.iter().enumerate() {
            if a.norm() <= TOLERANCE {
                continue;
            }
            if !first {
                f.write_str(" + ")?;
            }
            first = false;
            write!(
                f,
                "({:.6}{:+.6}i)|{:0width$b}⟩",
                a.re,
                a.im,
                i,
                width = self.num_qubits
            )?;
        }
        Ok(())
    }
}

/// One branch of a projective measurement.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementResult<O> {
    pub outcome: O,
    pub probability: f64,
    /// Normalized projected state; equals the input state when `impossible`.
    pub post_state: StateVector,
    /// The branch has probability below [`TOLERANCE`].
    pub impossible: bool,
}

fn branch<O>(outcome: O, input: &StateVector, projected: Vec<Complex64>) -> MeasurementResult<O> {
    let probability: f64 = projected.iter().map(|a| a.norm_sqr()).sum();
    if probability < TOLERANCE {
        MeasurementResult {
            outcome,
            probability,
            post_state: input.clone(),
            impossible: true,
        }
    } else {
        MeasurementResult {
            outcome,
            probability,
            post_state: StateVector::normalized(input.num_qubits, projected),
            impossible: false,
        }
    }
}

pub fn bell_state(label: BellLabel) -> StateVector {
    StateVector {
        num_qubits: 2,
        amplitudes: label.amplitudes().to_vec(),
    }
}

pub fn tensor_product(left: &StateVector, right: &StateVector) -> Result<StateVector, QuantumError> {
    left.tensor(right)
}

/// The entanglement-swapping register `½ Σ_b |b⟩_{q0 q1} |b⟩_{q2 q3}` with
/// qubits ordered (Bob₁, Bob₂, Alice, Charlie).
pub fn swap_state() -> StateVector {
    let mut amplitudes = vec![Complex64::new(0.0, 0.0); 16];
    for label in BellLabel::ALL {
        let bob = bell_state(label);
        let term = bob.tensor(&bob).expect("two Bell pairs fit in four qubits");
        for (acc, a) in amplitudes.iter_mut().zip(term.amplitudes()) {
            *acc += a * 0.5;
        }
    }
    StateVector {
        num_qubits: 4,
        amplitudes,
    }
}

/// `½(|0000⟩ + |0101⟩ + |1010⟩ − |1111⟩)`; Alice holds q0, q1 and Bob q2, q3.
pub fn cabello_state() -> StateVector {
    let mut amps = [0.0; 16];
    amps[0b0000] = 0.5;
    amps[0b0101] = 0.5;
    amps[0b1010] = 0.5;
    amps[0b1111] = -0.5;
    StateVector::from_real(&amps).expect("normalized by construction")
}

/// `(|000⟩ + |111⟩)/√2`.
pub fn ghz_state() -> StateVector {
    let mut amps = [0.0; 8];
    amps[0] = FRAC_1_SQRT_2;
    amps[7] = FRAC_1_SQRT_2;
    StateVector::from_real(&amps).expect("normalized by construction")
}

/// Projective measurement of `obs` on one qubit. Returns the `+1` branch first.
pub fn measure_observable(
    state: &StateVector,
    qubit: usize,
    obs: Observable,
) -> Result<[MeasurementResult<Sign>; 2], QuantumError> {
    state.check_qubit(qubit)?;
    Ok(Sign::ALL.map(|s| {
        let projected = state.apply_single(qubit, &obs.projector(s));
        branch(s, state, projected)
    }))
}

/// Bell-basis measurement on qubits `(first, second)`; branches follow [`BellLabel::ALL`].
pub fn bell_measurement(
    state: &StateVector,
    pair: (usize, usize),
) -> Result<[MeasurementResult<BellLabel>; 4], QuantumError> {
    let (p, q) = pair;
    state.check_distinct(&[p, q])?;
    let (mp, mq) = (state.mask(p), state.mask(q));
    Ok(BellLabel::ALL.map(|label| {
        let bell = label.amplitudes();
        let mut projected = vec![Complex64::new(0.0, 0.0); state.dim()];
        for rest in (0..state.dim()).filter(|i| i & (mp | mq) == 0) {
            let idx = [rest, rest | mq, rest | mp, rest | mp | mq];
            let overlap: Complex64 = idx
                .iter()
                .zip(&bell)
                .map(|(&i, b)| b.conj() * state.amplitudes[i])
                .sum();
            for (&i, b) in idx.iter().zip(&bell) {
                projected[i] = overlap * b;
            }
        }
        branch(label, state, projected)
    }))
}

/// `⟨ψ| ⊗_q O_q |ψ⟩` for the given qubit → observable assignment.
pub fn pauli_string_expectation(
    state: &StateVector,
    assignment: &[(usize, Observable)],
) -> Result<f64, QuantumError> {
    let applied = state.apply_pauli_string(assignment)?;
    Ok(state.inner(&applied).re)
}

/// `‖(P − λI)|ψ⟩‖` for a Pauli string `P`; zero iff `ψ` is an eigenvector with eigenvalue `λ`.
pub fn eigen_residual(
    state: &StateVector,
    assignment: &[(usize, Observable)],
    eigenvalue: f64,
) -> Result<f64, QuantumError> {
    let applied = state.apply_pauli_string(assignment)?;
    Ok(applied
        .amplitudes()
        .iter()
        .zip(state.amplitudes())
        .map(|(p, s)| (p - s * eigenvalue).norm_sqr())
        .sum::<f64>()
        .sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const H: f64 = FRAC_1_SQRT_2;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= TOLERANCE
    }

    fn real_parts(s: &StateVector) -> Vec<f64> {
        s.amplitudes().iter().map(|a| a.re).collect()
    }

    #[test]
    fn bell_states_match_their_definitions() {
        assert_eq!(real_parts(&bell_state(BellLabel::PsiMinus)), [0.0, H, -H, 0.0]);
        assert_eq!(real_parts(&bell_state(BellLabel::PhiPlus)), [H, 0.0, 0.0, H]);
        for label in BellLabel::ALL {
            assert!(close(bell_state(label).norm_sqr(), 1.0));
        }
    }

    #[test]
    fn tensor_of_basis_states() {
        let zero = StateVector::basis(1, 0).unwrap();
        assert_eq!(zero.tensor(&zero).unwrap(), StateVector::basis(2, 0).unwrap());
    }

    #[test]
    fn tensor_of_two_singlets() {
        let psi = bell_state(BellLabel::PsiMinus);
        let s = tensor_product(&psi, &psi).unwrap();
        let mut expected = [0.0; 16];
        expected[0b0101] = 0.5;
        expected[0b0110] = -0.5;
        expected[0b1001] = -0.5;
        expected[0b1010] = 0.5;
        for (a, e) in real_parts(&s).iter().zip(expected) {
            assert!(close(*a, e));
        }
    }

    #[test]
    fn tensor_rejects_oversized_register() {
        let ghz = ghz_state();
        assert_eq!(
            ghz.tensor(&bell_state(BellLabel::PhiPlus)),
            Err(QuantumError::TooManyQubits(5))
        );
    }

    #[test]
    fn from_amplitudes_validates() {
        assert_eq!(StateVector::from_real(&[1.0, 1.0]), Err(QuantumError::NotNormalized(2.0)));
        assert_eq!(StateVector::from_real(&[1.0, 0.0, 0.0]), Err(QuantumError::BadLength(3)));
        assert_eq!(StateVector::from_real(&[f64::NAN, 0.0]), Err(QuantumError::NonFinite(0)));
        assert_eq!(
            StateVector::from_real(&[0.0; 32]),
            Err(QuantumError::TooManyQubits(5))
        );
    }

    #[test]
    fn swap_state_expansion() {
        let s = swap_state();
        assert!(close(s.amplitude(0b0000).re, 0.5));
        assert!(close(s.amplitude(0b0110).norm(), 0.0));
        for i in [0b0000, 0b0101, 0b1010, 0b1111] {
            assert!(close(s.amplitude(i).re, 0.5));
        }
        assert!(close(s.norm_sqr(), 1.0));
    }

    #[test]
    fn cabello_state_terms() {
        let s = cabello_state();
        assert!(close(s.amplitude(0b0101).re, 0.5));
        assert!(close(s.amplitude(0b1111).re, -0.5));
        assert_eq!(s.amplitude(0b0001).norm(), 0.0);
    }

    #[test]
    fn z_on_zero_is_deterministic() {
        let zero = StateVector::basis(1, 0).unwrap();
        let [plus, minus] = measure_observable(&zero, 0, Observable::Z).unwrap();
        assert!(close(plus.probability, 1.0));
        assert!(minus.impossible);
        assert_eq!(minus.post_state, zero);
    }

    #[test]
    fn x_on_zero_is_unbiased() {
        let zero = StateVector::basis(1, 0).unwrap();
        for r in measure_observable(&zero, 0, Observable::X).unwrap() {
            assert!(close(r.probability, 0.5));
            assert!(!r.impossible);
        }
    }

    #[test]
    fn z_on_phi_plus_collapses() {
        let [plus, minus] =
            measure_observable(&bell_state(BellLabel::PhiPlus), 0, Observable::Z).unwrap();
        assert!(close(plus.probability, 0.5));
        assert!(close(minus.probability, 0.5));
        assert!(plus.post_state.max_distance(&StateVector::basis(2, 0b00).unwrap()) <= TOLERANCE);
        assert!(minus.post_state.max_distance(&StateVector::basis(2, 0b11).unwrap()) <= TOLERANCE);
    }

    #[test]
    fn measure_rejects_bad_qubit() {
        assert_eq!(
            measure_observable(&cabello_state(), 4, Observable::X).unwrap_err(),
            QuantumError::InvalidQubit {
                index: 4,
                num_qubits: 4
            }
        );
    }

    #[test]
    fn hadamard_then_z_equals_x() {
        // H maps |0⟩ → |+⟩; measuring Z after H has the statistics of X before it.
        let h = Complex64::new(H, 0.0);
        let had = [[h, h], [h, -h]];
        for label in BellLabel::ALL {
            let s = bell_state(label);
            let rotated = StateVector::from_amplitudes(s.apply_single(1, &had)).unwrap();
            let via_h = measure_observable(&rotated, 1, Observable::Z).unwrap();
            let direct = measure_observable(&s, 1, Observable::X).unwrap();
            for (a, b) in via_h.iter().zip(&direct) {
                assert!(close(a.probability, b.probability));
            }
        }
    }

    #[test]
    fn bell_measurement_on_swap_state_teleports_label() {
        let s = swap_state();
        for r in bell_measurement(&s, (0, 1)).unwrap() {
            assert!(close(r.probability, 0.25));
            let rho = r.post_state.reduced_density_matrix(&[2, 3]).unwrap();
            let fidelity: f64 = {
                let b = bell_state(r.outcome);
                let mut acc = Complex64::new(0.0, 0.0);
                for i in 0..4 {
                    for j in 0..4 {
                        acc += b.amplitude(i).conj() * rho[i][j] * b.amplitude(j);
                    }
                }
                acc.re
            };
            assert!(close(fidelity, 1.0));
        }
    }

    #[test]
    fn bell_measurement_on_eigenstate() {
        let results = bell_measurement(&bell_state(BellLabel::PhiPlus), (0, 1)).unwrap();
        for r in &results {
            if r.outcome == BellLabel::PhiPlus {
                assert!(close(r.probability, 1.0));
            } else {
                assert!(r.impossible);
            }
        }
    }

    #[test]
    fn bell_measurement_across_two_singlets() {
        let psi = bell_state(BellLabel::PsiMinus);
        let s = psi.tensor(&psi).unwrap();
        for r in bell_measurement(&s, (0, 2)).unwrap() {
            assert!(close(r.probability, 0.25));
        }
    }

    #[test]
    fn bell_measurement_rejects_duplicate() {
        assert_eq!(
            bell_measurement(&swap_state(), (1, 1)).unwrap_err(),
            QuantumError::DuplicateQubit(1)
        );
    }

    #[test]
    fn pauli_expectations() {
        use Observable::*;
        let c = cabello_state();
        assert!(close(pauli_string_expectation(&c, &[(0, X), (2, X), (3, Z)]).unwrap(), 1.0));
        assert!(close(pauli_string_expectation(&c, &[(0, Y), (2, Y), (3, Z)]).unwrap(), -1.0));
        let phi = bell_state(BellLabel::PhiPlus);
        assert!(close(pauli_string_expectation(&phi, &[(0, Z), (1, Z)]).unwrap(), 1.0));
        assert_eq!(
            pauli_string_expectation(&phi, &[(0, Z), (0, X)]).unwrap_err(),
            QuantumError::DuplicateQubit(0)
        );
    }

    #[test]
    fn observables_are_involutions() {
        for obs in Observable::ALL {
            let m = obs.matrix();
            for r in 0..2 {
                for c in 0..2 {
                    let sq: Complex64 = (0..2).map(|k| m[r][k] * m[k][c]).sum();
                    let id = if r == c { 1.0 } else { 0.0 };
                    assert!((sq - Complex64::new(id, 0.0)).norm() <= TOLERANCE);
                    assert!((m[r][c] - m[c][r].conj()).norm() <= TOLERANCE);
                }
            }
        }
    }

    #[test]
    fn swap_state_is_two_phi_plus_pairs_after_reordering() {
        // (B1, B2, A, C) → (B1, A, B2, C)
        let reordered = swap_state().permute_qubits(&[0, 2, 1, 3]).unwrap();
        let phi = bell_state(BellLabel::PhiPlus);
        assert!(reordered.max_distance(&phi.tensor(&phi).unwrap()) <= TOLERANCE);
    }

    fn max_off_quarter_identity(rho: &[Vec<Complex64>]) -> f64 {
        let mut worst: f64 = 0.0;
        for (i, row) in rho.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                let target = if i == j { 0.25 } else { 0.0 };
                worst = worst.max((v - Complex64::new(target, 0.0)).norm());
            }
        }
        worst
    }

    #[test]
    fn singlet_pairs_and_swap_state_share_entanglement_structure() {
        // Bob shares ψ⁻ with Alice (B1, A) and ψ⁻ with Charlie (B2, C); reorder to (B1, B2, A, C).
        let psi = bell_state(BellLabel::PsiMinus);
        let singlets = psi.tensor(&psi).unwrap().permute_qubits(&[0, 2, 1, 3]).unwrap();
        for s in [singlets, swap_state()] {
            // ρ_{q0q1} = M M† = ¼I forces all four Schmidt coefficients to ½.
            let bob = s.reduced_density_matrix(&[0, 1]).unwrap();
            let remote = s.reduced_density_matrix(&[2, 3]).unwrap();
            assert!(max_off_quarter_identity(&bob) <= TOLERANCE);
            assert!(max_off_quarter_identity(&remote) <= TOLERANCE);
        }
    }

    fn arb_state(max_qubits: usize) -> impl Strategy<Value = StateVector> {
        (1..=max_qubits)
            .prop_flat_map(|n| prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1 << n))
            .prop_filter_map("zero vector", |v| {
                let amps: Vec<Complex64> = v.into_iter().map(|(r, i)| Complex64::new(r, i)).collect();
                let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
                (norm > 1e-3).then(|| {
                    StateVector::from_amplitudes(amps.into_iter().map(|a| a / norm).collect())
                        .unwrap()
                })
            })
    }

    fn arb_observable() -> impl Strategy<Value = Observable> {
        prop::sample::select(Observable::ALL.to_vec())
    }

    proptest! {
        #[test]
        fn branch_probabilities_sum_to_one(s in arb_state(4), q in 0usize..4, obs in arb_observable()) {
            let q = q % s.num_qubits();
            let branches = measure_observable(&s, q, obs).unwrap();
            let total: f64 = branches.iter().map(|b| b.probability).sum();
            prop_assert!((total - 1.0).abs() <= TOLERANCE);
            for b in &branches {
                prop_assert!((b.post_state.norm_sqr() - 1.0).abs() <= TOLERANCE);
            }
        }

        #[test]
        fn remeasurement_is_repeatable(s in arb_state(4), q in 0usize..4, obs in arb_observable()) {
            let q = q % s.num_qubits();
            for b in measure_observable(&s, q, obs).unwrap().iter().filter(|b| !b.impossible) {
                let again = measure_observable(&b.post_state, q, obs).unwrap();
                let same = again.iter().find(|r| r.outcome == b.outcome).unwrap();
                prop_assert!((same.probability - 1.0).abs() <= 1e-9);
            }
        }

        #[test]
        fn bell_probabilities_sum_to_one(s in arb_state(4), p in 0usize..4, q in 0usize..4) {
            prop_assume!(s.num_qubits() >= 2);
            let (p, q) = (p % s.num_qubits(), q % s.num_qubits());
            prop_assume!(p != q);
            let total: f64 = bell_measurement(&s, (p, q)).unwrap().iter().map(|b| b.probability).sum();
            prop_assert!((total - 1.0).abs() <= TOLERANCE);
        }

        #[test]
        fn tensor_preserves_norm(a in arb_state(2), b in arb_state(2)) {
            let t = a.tensor(&b).unwrap();
            prop_assert!((t.norm_sqr() - 1.0).abs() <= TOLERANCE);
        }
    }
}
