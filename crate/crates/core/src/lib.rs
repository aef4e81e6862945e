//! Optimal eavesdropping on the four-state BB84 protocol.
//!
//! The crate covers symmetric incoherent (single-qubit) and two-qubit
//! coherent attacks: their parametrization by probe-state inner products,
//! Eve's optimal measurements, numerical optimization of the coherent family,
//! a Monte Carlo simulator that replays the full protocol against an explicit
//! isometry, and the ancilla construction that turns any attack into a
//! symmetric one with the same averaged performance.

pub mod attack_file;
pub mod coherent;
pub mod error;
pub mod incoherent;
pub mod nelder_mead;
pub mod optimizer;
pub mod oracle;
pub mod protocol;
pub mod pyramid;
pub mod quantum;
pub mod symmetrizer;

pub use error::{Error, Result};
