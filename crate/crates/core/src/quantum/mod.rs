//! Entropies, Gram-matrix feasibility and explicit probe-state realization.
//!
//! All quantities are real: every inner product appearing in a symmetric
//! attack is real, so probe states are realized with real coordinates.

mod entropy;
mod gram;

pub use entropy::{binary_entropy, mutual_information, shannon_entropy};
pub use gram::{is_psd, min_eigenvalue, realize_gram, GramMatrix, StateSet, DEFAULT_PSD_TOL};
