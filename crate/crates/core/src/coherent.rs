//! Symmetric two-qubit (coherent) attacks.
//!
//! Messages are indexed `i = b1 + 2*b2` where `b1`, `b2` are the bits of the
//! first and second qubit. The probe state `|E_ij>` accompanies Alice's
//! message `i` and Bob's result `j`; states with different error syndromes
//! `i XOR j` are orthogonal. Within a syndrome set the four states form a
//! pyramid whose overlaps depend only on the XOR of the message indices.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::incoherent::IncoherentParams;
use crate::pyramid::{pyramid_solve, PyramidSolution};
use crate::quantum::{shannon_entropy, GramMatrix, DEFAULT_PSD_TOL};

/// Tolerance on the five linear relations.
pub const RELATION_TOL: f64 = 1e-9;

/// Human-readable forms of the five linear relations, in order.
pub const RELATIONS: [&str; 5] = ["A+2B+C=1", "B-C=B3+C1", "A-B=A1+B1", "A1-A2=B2+B3", "B1-C2=B2+C1"];

/// The ten inner products of a symmetric two-qubit attack, unvalidated.
#[allow(non_snake_case)]
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoherentScalars {
    pub A: f64,
    pub A1: f64,
    pub A2: f64,
    pub B: f64,
    pub B1: f64,
    pub B2: f64,
    pub B3: f64,
    pub C: f64,
    pub C1: f64,
    pub C2: f64,
}

/// One syndrome set: its probability and the overlaps `<E_0|E_x>` for
/// `x = 1, 2, 3` (XOR distance between message indices).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SetBlock {
    pub weight: f64,
    pub xor_overlaps: [f64; 3],
}

impl SetBlock {
    /// Eigenvalues of the 4x4 in-set Gram block (Hadamard characters).
    pub fn eigenvalues(&self) -> [f64; 4] {
        let w = self.weight;
        let [x1, x2, x3] = self.xor_overlaps;
        [w + x1 + x2 + x3, w + x1 - x2 - x3, w - x1 + x2 - x3, w - x1 - x2 + x3]
    }

    /// Normalized cosines in pyramid order `(k1, k2, k3)`, i.e. XOR distance
    /// `(1, 3, 2)`. `None` for a set that never occurs.
    pub fn cosines(&self) -> Option<[f64; 3]> {
        (self.weight > 0.0).then(|| {
            let [x1, x2, x3] = self.xor_overlaps;
            [x1 / self.weight, x3 / self.weight, x2 / self.weight]
        })
    }

    /// The nearest block (in eigenvalue terms) with negative eigenvalues set
    /// to zero. Feasible blocks come back unchanged up to rounding.
    pub fn clipped(&self) -> SetBlock {
        let [l0, l1, l2, l3] = self.eigenvalues().map(|l| l.max(0.0));
        SetBlock {
            weight: 0.25 * (l0 + l1 + l2 + l3),
            xor_overlaps: [
                0.25 * (l0 + l1 - l2 - l3),
                0.25 * (l0 - l1 + l2 - l3),
                0.25 * (l0 - l1 - l2 + l3),
            ],
        }
    }

    pub fn pyramid(&self) -> Result<Option<PyramidSolution>> {
        self.cosines().map(|[k1, k2, k3]| pyramid_solve(k1, k2, k3)).transpose()
    }
}

impl CoherentScalars {
    /// Signed residuals `lhs - rhs` of the five relations.
    pub fn relation_residuals(&self) -> [f64; 5] {
        let s = self;
        [
            s.A + 2.0 * s.B + s.C - 1.0,
            (s.B - s.C) - (s.B3 + s.C1),
            (s.A - s.B) - (s.A1 + s.B1),
            (s.A1 - s.A2) - (s.B2 + s.B3),
            (s.B1 - s.C2) - (s.B2 + s.C1),
        ]
    }

    /// Syndrome sets `S_0 .. S_3`.
    pub fn blocks(&self) -> [SetBlock; 4] {
        let s = self;
        [
            SetBlock {
                weight: s.A,
                xor_overlaps: [s.A1, s.A1, s.A2],
            },
            SetBlock {
                weight: s.B,
                xor_overlaps: [s.B1, s.B3, s.B2],
            },
            SetBlock {
                weight: s.B,
                xor_overlaps: [s.B3, s.B1, s.B2],
            },
            SetBlock {
                weight: s.C,
                xor_overlaps: [s.C1, s.C1, s.C2],
            },
        ]
    }

    /// Smallest eigenvalue of the 16x16 Gram, read off the in-set blocks.
    pub fn min_block_eigenvalue(&self) -> f64 {
        self.blocks()
            .iter()
            .flat_map(|b| b.eigenvalues())
            .fold(f64::INFINITY, f64::min)
    }

    /// Largest violation of any feasibility constraint (0 when feasible):
    /// negative set probability, negative block eigenvalue, or relation residual.
    pub fn violation(&self) -> f64 {
        let weights = [self.A, self.B, self.C].iter().fold(0.0f64, |v, &w| v.max(-w));
        let eig = (-self.min_block_eigenvalue()).max(0.0);
        let rel = self.relation_residuals().iter().fold(0.0f64, |v, r| v.max(r.abs()));
        weights.max(eig).max(rel)
    }

    fn check(&self, psd_tol: f64) -> Result<()> {
        let named = [
            ("A", self.A),
            ("A1", self.A1),
            ("A2", self.A2),
            ("B", self.B),
            ("B1", self.B1),
            ("B2", self.B2),
            ("B3", self.B3),
            ("C", self.C),
            ("C1", self.C1),
            ("C2", self.C2),
        ];
        if let Some((name, v)) = named.iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::Domain(format!("{name} = {v} is not finite")));
        }
        for (k, r) in self.relation_residuals().iter().enumerate() {
            if r.abs() > RELATION_TOL {
                return Err(Error::Infeasible(format!(
                    "relation {} ({}) violated, residual {r:e}",
                    k + 1,
                    RELATIONS[k]
                )));
            }
        }
        for (name, w) in [("A", self.A), ("B", self.B), ("C", self.C)] {
            if w < -psd_tol {
                return Err(Error::Infeasible(format!("negative set probability {name} = {w}")));
            }
        }
        for (m, block) in self.blocks().iter().enumerate() {
            let low = block.eigenvalues().into_iter().fold(f64::INFINITY, f64::min);
            if low < -psd_tol {
                return Err(Error::Infeasible(format!(
                    "Gram block of syndrome set S{m} not PSD (minimum eigenvalue {low:e})"
                )));
            }
        }
        Ok(())
    }
}

/// A validated symmetric two-qubit attack.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoherentParams {
    scalars: CoherentScalars,
}

impl CoherentParams {
    /// Validates ten scalars against the relations and PSD constraints.
    pub fn from_scalars(scalars: CoherentScalars) -> Result<Self> {
        scalars.check(DEFAULT_PSD_TOL)?;
        Ok(Self { scalars })
    }

    /// Solves the remaining five scalars from the free chart `(B, C, A1, B2, C1)`.
    #[allow(non_snake_case)]
    pub fn from_free(B: f64, C: f64, A1: f64, B2: f64, C1: f64) -> Result<Self> {
        Self::from_scalars(solve_free(B, C, A1, B2, C1))
    }

    pub fn identity() -> Self {
        Self::from_free(0.0, 0.0, 1.0, 0.0, 0.0).expect("identity attack is feasible")
    }

    pub fn scalars(&self) -> &CoherentScalars {
        &self.scalars
    }

    /// The free-chart coordinates `(B, C, A1, B2, C1)`.
    pub fn free(&self) -> [f64; 5] {
        let s = &self.scalars;
        [s.B, s.C, s.A1, s.B2, s.C1]
    }
}

/// Fills in `A, B3, B1, A2, C2` from the free chart. The relations are
/// triangular in this order, so the solution is unique.
#[allow(non_snake_case)]
pub fn solve_free(B: f64, C: f64, A1: f64, B2: f64, C1: f64) -> CoherentScalars {
    let A = 1.0 - 2.0 * B - C;
    let B3 = B - C - C1;
    let B1 = A - B - A1;
    let A2 = A1 - B2 - B3;
    let C2 = B1 - B2 - C1;
    CoherentScalars {
        A,
        A1,
        A2,
        B,
        B1,
        B2,
        B3,
        C,
        C1,
        C2,
    }
}

/// Per-qubit disturbance `1 - (A + B)`.
pub fn disturbance(p: &CoherentParams) -> f64 {
    1.0 - (p.scalars.A + p.scalars.B)
}

/// Normalized overlaps per syndrome set in pyramid order.
///
/// `S0 -> (A1, A2, A1)/A`, `S1, S2 -> (B1, B2, B3)/B`, `S3 -> (C1, C2, C1)/C`;
/// `None` marks a set of probability zero.
pub fn set_overlaps(p: &CoherentParams) -> [Option<[f64; 3]>; 4] {
    let s = &p.scalars;
    let norm = |w: f64, k: [f64; 3]| (w > 0.0).then(|| k.map(|x| x / w));
    [
        norm(s.A, [s.A1, s.A2, s.A1]),
        norm(s.B, [s.B1, s.B2, s.B3]),
        norm(s.B, [s.B1, s.B2, s.B3]),
        norm(s.C, [s.C1, s.C2, s.C1]),
    ]
}

/// Set probabilities and pyramid solutions of the four syndrome sets.
pub fn set_pyramids(p: &CoherentParams) -> Result<[(f64, Option<PyramidSolution>); 4]> {
    let blocks = p.scalars.blocks();
    let mut out = [(0.0, None); 4];
    for (slot, block) in out.iter_mut().zip(blocks.iter()) {
        *slot = (block.weight, block.pyramid()?);
    }
    Ok(out)
}

/// Probability that Eve identifies both qubits: `sum_j P_j a_j^2`.
pub fn eve_pair_success(p: &CoherentParams) -> Result<f64> {
    Ok(set_pyramids(p)?
        .iter()
        .filter_map(|(w, s)| s.map(|s| w * s.success()))
        .sum())
}

/// Mutual information (bits) between Alice's two-qubit message and Eve's
/// (set, cartesian outcome) result: `sum_j P_j (2 - H(a^2, b^2, c^2, d^2))`.
pub fn eve_pair_information(p: &CoherentParams) -> Result<f64> {
    let mut total = 0.0;
    for (w, s) in set_pyramids(p)? {
        if let Some(s) = s {
            total += w * (2.0 - shannon_entropy(&s.probabilities())?);
        }
    }
    Ok(total)
}

/// Probability that Bob receives both qubits correctly.
pub fn bob_pair_success(p: &CoherentParams) -> f64 {
    p.scalars.A
}

/// Pair figures of merit for one coherent attack.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairMetrics {
    pub disturbance: f64,
    pub eve_pair_success: f64,
    pub eve_pair_information: f64,
    pub bob_pair_success: f64,
}

pub fn pair_metrics(p: &CoherentParams) -> Result<PairMetrics> {
    Ok(PairMetrics {
        disturbance: disturbance(p),
        eve_pair_success: eve_pair_success(p)?,
        eve_pair_information: eve_pair_information(p)?,
        bob_pair_success: bob_pair_success(p),
    })
}

/// Two independent copies of a single-qubit attack, seen as a coherent one.
pub fn product_embedding(q: &IncoherentParams) -> CoherentParams {
    let (f, d, f1, d1) = (q.f(), q.disturbance(), q.f1(), q.d1());
    let scalars = CoherentScalars {
        A: f * f,
        A1: f * f1,
        A2: f1 * f1,
        B: f * d,
        B1: f * d1,
        B2: f1 * d1,
        B3: f1 * d,
        C: d * d,
        C1: d * d1,
        C2: d1 * d1,
    };
    CoherentParams { scalars }
}

/// Gram matrix over `|E_ij>` indexed `4 i + j`.
pub fn gram16(p: &CoherentParams) -> GramMatrix {
    gram16_unchecked(&p.scalars)
}

/// Gram layout for arbitrary scalars, without feasibility checks.
pub fn gram16_unchecked(s: &CoherentScalars) -> GramMatrix {
    let blocks = s.blocks();
    let m = DMatrix::from_fn(16, 16, |r, c| {
        let (i, j, k, l) = (r / 4, r % 4, c / 4, c % 4);
        if i ^ j != k ^ l {
            return 0.0;
        }
        let block = &blocks[i ^ j];
        match i ^ k {
            0 => block.weight,
            x => block.xor_overlaps[x - 1],
        }
    });
    GramMatrix::new(m).unwrap_or_else(|_| GramMatrix::identity(16))
}
