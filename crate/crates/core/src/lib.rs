//! Nonlocal games played with exact quantum strategies and with local
//! hidden-variable models.
//!
//! * [`quantum`]: state vectors on up to four qubits, Pauli and Bell-basis measurements.
//! * [`games`]: the entanglement-swapping game, Cabello's game and a GHZ contrast game.
//! * [`strategies`]: quantum, LHV and deterministic players.
//! * [`analysis`]: exact distributions, sampling, classical value, comparisons.
//! * [`cli`]: the `nonlocal-game-lab` command-line front end.

pub mod analysis;
pub mod cli;
pub mod games;
pub mod quantum;
pub mod strategies;
pub mod verify;
