//! Protocol-level linear algebra shared by the simulator and the symmetrizer:
//! basis changes on Alice's message space, probe matrices `E_ij`, and Eve's
//! block-structured projective measurements.

use std::f64::consts::FRAC_1_SQRT_2;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::quantum::{GramMatrix, StateSet};

const ORTHONORMAL_TOL: f64 = 1e-10;

/// Number of messages `2^n` for `n` qubits.
pub fn message_count(n: usize) -> usize {
    1 << n
}

/// Number of basis settings (each qubit in `z` or `x`): also `2^n`.
pub fn setting_count(n: usize) -> usize {
    1 << n
}

/// Embeds a single-qubit operator acting on qubit `q` of an `n`-qubit message.
pub fn single_qubit_op(n: usize, q: usize, op: [[f64; 2]; 2]) -> DMatrix<f64> {
    let dim = message_count(n);
    DMatrix::from_fn(dim, dim, |i, j| {
        if (i ^ j) & !(1 << q) != 0 {
            0.0
        } else {
            op[(i >> q) & 1][(j >> q) & 1]
        }
    })
}

pub const HADAMARD: [[f64; 2]; 2] = [[FRAC_1_SQRT_2, FRAC_1_SQRT_2], [FRAC_1_SQRT_2, -FRAC_1_SQRT_2]];
pub const PAULI_X: [[f64; 2]; 2] = [[0.0, 1.0], [1.0, 0.0]];
pub const PAULI_Z: [[f64; 2]; 2] = [[1.0, 0.0], [0.0, -1.0]];

/// Basis change `W_b` for setting `b`: Hadamard on every qubit whose bit in
/// `b` is set (that qubit is prepared and measured in the `x` basis).
/// Column `i` is Alice's state `|i>_b` written in the `z` basis.
pub fn basis_change(n: usize, setting: usize) -> DMatrix<f64> {
    let dim = message_count(n);
    let mut w = DMatrix::identity(dim, dim);
    for q in 0..n {
        if (setting >> q) & 1 == 1 {
            w = single_qubit_op(n, q, HADAMARD) * w;
        }
    }
    w
}

/// Eve's probe states `|E_ij>` for an `n`-qubit attack, stored at `i * 2^n + j`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeMatrix {
    n: usize,
    states: StateSet,
}

impl ProbeMatrix {
    pub fn new(n: usize, states: StateSet) -> Result<Self> {
        let m = message_count(n);
        if !(1..=2).contains(&n) {
            return Err(Error::DimensionMismatch(format!(
                "only 1 or 2 qubits supported, got {n}"
            )));
        }
        if states.count() != m * m {
            return Err(Error::DimensionMismatch(format!(
                "{n}-qubit attack needs {} probe states, got {}",
                m * m,
                states.count()
            )));
        }
        Ok(Self { n, states })
    }

    pub fn qubits(&self) -> usize {
        self.n
    }

    pub fn probe_dim(&self) -> usize {
        self.states.dim()
    }

    pub fn states(&self) -> &StateSet {
        &self.states
    }

    pub fn get(&self, i: usize, j: usize) -> &DVector<f64> {
        self.states.vector(i * message_count(self.n) + j)
    }

    pub fn gram(&self) -> GramMatrix {
        self.states.gram()
    }

    /// Probe matrix of the attack `T U T`: `E'_ij = sum_ac T_ai T_jc E_ac`.
    /// With `T = W_b` this gives the probe states seen when Alice and Bob use
    /// basis setting `b`.
    pub fn conjugate(&self, t: &DMatrix<f64>) -> ProbeMatrix {
        let m = message_count(self.n);
        let dim = self.probe_dim();
        let mut out = Vec::with_capacity(m * m);
        for i in 0..m {
            for j in 0..m {
                let mut v = DVector::zeros(dim);
                for a in 0..m {
                    let tai = t[(a, i)];
                    if tai == 0.0 {
                        continue;
                    }
                    for c in 0..m {
                        let coef = tai * t[(j, c)];
                        if coef != 0.0 {
                            v.axpy(coef, self.get(a, c), 1.0);
                        }
                    }
                }
                out.push(v);
            }
        }
        ProbeMatrix {
            n: self.n,
            states: StateSet::new(dim, out).expect("dimensions preserved"),
        }
    }

    pub fn in_setting(&self, setting: usize) -> ProbeMatrix {
        self.conjugate(&basis_change(self.n, setting))
    }

    /// Largest deviation of `sum_j <E_ij|E_kj>` from `delta_ik`: zero for an isometry.
    pub fn isometry_defect(&self) -> f64 {
        let m = message_count(self.n);
        let mut worst = 0.0f64;
        for i in 0..m {
            for k in 0..m {
                let s: f64 = (0..m).map(|j| self.get(i, j).dot(self.get(k, j))).sum();
                let target = if i == k { 1.0 } else { 0.0 };
                worst = worst.max((s - target).abs());
            }
        }
        worst
    }

    /// Direct sum `(E ⊕ E') / sqrt 2` on the doubled probe space.
    pub fn ancilla_sum(&self, other: &ProbeMatrix) -> ProbeMatrix {
        let p = self.probe_dim();
        let q = other.probe_dim();
        let vectors = self
            .states
            .vectors()
            .iter()
            .zip(other.states.vectors())
            .map(|(a, b)| DVector::from_fn(p + q, |r, _| FRAC_1_SQRT_2 * if r < p { a[r] } else { b[r - p] }))
            .collect();
        ProbeMatrix {
            n: self.n,
            states: StateSet::new(p + q, vectors).expect("consistent dims"),
        }
    }
}

/// An orthonormal basis of a coordinate block `[offset, offset + dim)` of the
/// probe space. Row `r` of `basis` is a measurement vector; `guesses[r]` is the
/// message Eve announces on that outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementBlock {
    pub offset: usize,
    pub basis: DMatrix<f64>,
    pub guesses: Vec<usize>,
}

/// A complete projective measurement for one basis setting, block diagonal
/// over the probe coordinates. Outcomes are numbered consecutively across blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct SettingMeasurement {
    blocks: Vec<MeasurementBlock>,
}

impl SettingMeasurement {
    /// Checks that the blocks tile `[0, probe_dim)` and are orthonormal.
    pub fn new(blocks: Vec<MeasurementBlock>, probe_dim: usize, messages: usize) -> Result<Self> {
        let mut cursor = 0;
        for b in &blocks {
            let d = b.basis.nrows();
            if b.offset != cursor || b.basis.ncols() != d || b.guesses.len() != d {
                return Err(Error::DimensionMismatch(
                    "measurement blocks do not tile the probe space".into(),
                ));
            }
            if let Some(g) = b.guesses.iter().find(|&&g| g >= messages) {
                return Err(Error::Domain(format!("guess {g} is not a message index")));
            }
            let defect = (&b.basis * b.basis.transpose() - DMatrix::identity(d, d)).amax();
            if defect > ORTHONORMAL_TOL {
                return Err(Error::Consistency(format!(
                    "measurement block at offset {} not orthonormal (defect {defect:e})",
                    b.offset
                )));
            }
            cursor += d;
        }
        if cursor != probe_dim {
            return Err(Error::DimensionMismatch(format!(
                "measurement covers {cursor} of {probe_dim} probe dimensions"
            )));
        }
        Ok(Self { blocks })
    }

    /// A single full-space block.
    pub fn full(basis: DMatrix<f64>, guesses: Vec<usize>, messages: usize) -> Result<Self> {
        let dim = basis.nrows();
        Self::new(
            vec![MeasurementBlock {
                offset: 0,
                basis,
                guesses,
            }],
            dim,
            messages,
        )
    }

    pub fn blocks(&self) -> &[MeasurementBlock] {
        &self.blocks
    }

    pub fn outcome_count(&self) -> usize {
        self.blocks.iter().map(|b| b.guesses.len()).sum()
    }

    pub fn guess(&self, outcome: usize) -> usize {
        let mut k = outcome;
        for b in &self.blocks {
            if k < b.guesses.len() {
                return b.guesses[k];
            }
            k -= b.guesses.len();
        }
        panic!("outcome {outcome} out of range")
    }

    /// Unnormalized outcome weights `|<v_o|psi>|^2`; they sum to `|psi|^2`.
    pub fn weights(&self, psi: &DVector<f64>) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.outcome_count());
        for b in &self.blocks {
            let d = b.basis.nrows();
            let local = psi.rows(b.offset, d);
            let amp = &b.basis * local;
            out.extend(amp.iter().map(|x| x * x));
        }
        out
    }

    /// Blocks of `self` followed by blocks of `other` shifted by `shift`.
    pub fn stacked(&self, other: &SettingMeasurement, shift: usize) -> SettingMeasurement {
        let mut blocks = self.blocks.clone();
        blocks.extend(other.blocks.iter().map(|b| MeasurementBlock {
            offset: b.offset + shift,
            ..b.clone()
        }));
        SettingMeasurement { blocks }
    }

    pub fn relabeled(&self, map: impl Fn(usize) -> usize) -> SettingMeasurement {
        let blocks = self
            .blocks
            .iter()
            .map(|b| MeasurementBlock {
                guesses: b.guesses.iter().map(|&g| map(g)).collect(),
                ..b.clone()
            })
            .collect();
        SettingMeasurement { blocks }
    }
}

/// Joint distribution of Bob's result and Eve's outcome when Alice sends
/// message `i` in basis setting `b`: `table[j][o]`.
pub fn outcome_table(in_setting: &ProbeMatrix, measurement: &SettingMeasurement, i: usize) -> Vec<Vec<f64>> {
    let m = message_count(in_setting.qubits());
    (0..m).map(|j| measurement.weights(in_setting.get(i, j))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basis_change_is_involutive() {
        for n in 1..=2 {
            for b in 0..setting_count(n) {
                let w = basis_change(n, b);
                let dim = message_count(n);
                assert!((&w * &w - DMatrix::<f64>::identity(dim, dim)).amax() < 1e-15);
            }
        }
    }

    #[test]
    fn qubit_ordering_matches_message_index() {
        // Flipping qubit 1 (the second qubit) maps message 0 to message 2.
        let x2 = single_qubit_op(2, 1, PAULI_X);
        assert_eq!(x2[(2, 0)], 1.0);
        assert_eq!(x2[(1, 0)], 0.0);
    }

    #[test]
    fn measurement_validation() {
        let ok = SettingMeasurement::full(DMatrix::identity(2, 2), vec![0, 1], 2);
        assert!(ok.is_ok());
        let bad = SettingMeasurement::full(DMatrix::from_element(2, 2, 1.0), vec![0, 1], 2);
        assert!(matches!(bad, Err(Error::Consistency(_))));
        let short = SettingMeasurement::new(
            vec![MeasurementBlock {
                offset: 0,
                basis: DMatrix::identity(1, 1),
                guesses: vec![0],
            }],
            2,
            2,
        );
        assert!(matches!(short, Err(Error::DimensionMismatch(_))));
    }
}
