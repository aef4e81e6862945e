//! Brute-force verification of the analytic results.
//!
//! An attack is realized as an explicit isometry from Alice's message space
//! into probe ⊗ message space, Eve's optimal measurement is rebuilt
//! numerically from the realized probe states, and the protocol is replayed
//! shot by shot with a seeded generator.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coherent::{self, CoherentParams};
use crate::error::{Error, Result};
use crate::incoherent::{self, IncoherentParams};
use crate::protocol::{message_count, outcome_table, setting_count, ProbeMatrix, SettingMeasurement};
use crate::quantum::{mutual_information, realize_gram, GramMatrix, StateSet, DEFAULT_PSD_TOL};

const ISOMETRY_TOL: f64 = 1e-10;
const SUPPORT_TOL: f64 = 1e-12;
const PARTITIONS: u64 = 16;

/// A symmetric attack from either family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SymmetricAttack {
    Incoherent(IncoherentParams),
    Coherent(CoherentParams),
}

impl SymmetricAttack {
    pub fn qubits(&self) -> usize {
        match self {
            Self::Incoherent(_) => 1,
            Self::Coherent(_) => 2,
        }
    }

    pub fn gram(&self) -> GramMatrix {
        match self {
            Self::Incoherent(p) => incoherent::gram4(p),
            Self::Coherent(p) => coherent::gram16(p),
        }
    }

    /// Analytic per-qubit disturbance, Bob success, Eve success and Eve
    /// information (all per message: pair quantities for two qubits).
    pub fn analytic(&self) -> Result<AnalyticMetrics> {
        Ok(match self {
            Self::Incoherent(p) => {
                let m = incoherent::metrics(p);
                AnalyticMetrics {
                    disturbance: m.disturbance,
                    bob_success: m.bob_success,
                    eve_success: m.eve_success,
                    eve_information: m.eve_information,
                }
            }
            Self::Coherent(p) => {
                let m = coherent::pair_metrics(p)?;
                AnalyticMetrics {
                    disturbance: m.disturbance,
                    bob_success: m.bob_pair_success,
                    eve_success: m.eve_pair_success,
                    eve_information: m.eve_pair_information,
                }
            }
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalyticMetrics {
    pub disturbance: f64,
    pub bob_success: f64,
    pub eve_success: f64,
    pub eve_information: f64,
}

/// An attack as an explicit isometry plus Eve's measurement for every basis setting.
#[derive(Debug, Clone)]
pub struct RealizedAttack {
    n: usize,
    /// Column `i` is `sum_j |E_ij> ⊗ |j>`, row index `probe * 2^n + j`.
    isometry: DMatrix<f64>,
    probe_dim: usize,
    eve_basis: Vec<SettingMeasurement>,
}

impl RealizedAttack {
    pub fn qubits(&self) -> usize {
        self.n
    }

    pub fn probe_dim(&self) -> usize {
        self.probe_dim
    }

    pub fn isometry(&self) -> &DMatrix<f64> {
        &self.isometry
    }

    pub fn eve_basis(&self) -> &[SettingMeasurement] {
        &self.eve_basis
    }

    /// Probe states `|E_ij> = (1 ⊗ <j|) U |i>` read back from the isometry.
    pub fn probes(&self) -> ProbeMatrix {
        let m = message_count(self.n);
        let vectors = (0..m * m)
            .map(|ij| {
                let (i, j) = (ij / m, ij % m);
                DVector::from_fn(self.probe_dim, |r, _| self.isometry[(r * m + j, i)])
            })
            .collect();
        ProbeMatrix::new(self.n, StateSet::new(self.probe_dim, vectors).expect("dims")).expect("count")
    }

    /// Largest deviation of `U^T U` from the identity.
    pub fn isometry_defect(&self) -> f64 {
        let m = message_count(self.n);
        (self.isometry.transpose() * &self.isometry - DMatrix::identity(m, m)).amax()
    }
}

/// Realizes a symmetric attack and constructs Eve's measurement.
///
/// Probe states come from the Gram matrix; the probe space is padded to
/// `4^n` coordinates so that, for every basis setting, the square-root
/// measurement of each syndrome set can be completed to an orthonormal basis.
/// On a set whose states form a pyramid this is the cartesian basis.
pub fn build_isometry(attack: &SymmetricAttack) -> Result<RealizedAttack> {
    let n = attack.qubits();
    let m = message_count(n);
    let full = m * m;
    let realized = realize_gram(&attack.gram(), DEFAULT_PSD_TOL)?;
    if realized.dim() > full {
        return Err(Error::Consistency(format!(
            "realized probe dimension {} exceeds {full}",
            realized.dim()
        )));
    }
    let probes = ProbeMatrix::new(n, realized.padded(full))?;
    let mut isometry = DMatrix::zeros(full * m, m);
    for i in 0..m {
        for j in 0..m {
            let e = probes.get(i, j);
            for r in 0..full {
                isometry[(r * m + j, i)] = e[r];
            }
        }
    }
    let eve_basis = (0..setting_count(n))
        .map(|b| syndrome_measurement(&probes.in_setting(b)))
        .collect::<Result<Vec<_>>>()?;
    let attack = RealizedAttack {
        n,
        isometry,
        probe_dim: full,
        eve_basis,
    };
    let defect = attack.isometry_defect();
    if defect > ISOMETRY_TOL {
        return Err(Error::Consistency(format!(
            "isometry columns not orthonormal (defect {defect:e})"
        )));
    }
    Ok(attack)
}

/// Eve first resolves the syndrome set `m = i XOR j`, then applies the
/// square-root measurement to the states `E_{k, k^m}`; outcome `k` of set
/// `m` is numbered `m * 2^n + k` and guesses message `k`.
fn syndrome_measurement(probes: &ProbeMatrix) -> Result<SettingMeasurement> {
    let m = message_count(probes.qubits());
    let dim = probes.probe_dim();
    // Per set: eigenvectors of the in-set Gram, and the orthonormal support
    // vectors Psi u_r / sqrt(l_r) (None for null directions).
    let mut sets = Vec::with_capacity(m);
    let mut support: Vec<DVector<f64>> = Vec::new();
    for s in 0..m {
        let psi: Vec<&DVector<f64>> = (0..m).map(|k| probes.get(k, k ^ s)).collect();
        let g = DMatrix::from_fn(m, m, |a, b| psi[a].dot(psi[b]));
        let eig = SymmetricEigen::new(g);
        let mut dirs = Vec::with_capacity(m);
        for r in 0..m {
            let l = eig.eigenvalues[r];
            if l > SUPPORT_TOL {
                let mut f = DVector::zeros(dim);
                for (k, v) in psi.iter().enumerate() {
                    f.axpy(eig.eigenvectors[(k, r)] / l.sqrt(), *v, 1.0);
                }
                support.push(f.clone());
                dirs.push(Some(f));
            } else {
                dirs.push(None);
            }
        }
        sets.push((eig.eigenvectors, dirs));
    }
    let mut spare = orthonormal_complement(&support, dim)?.into_iter();
    let mut basis = DMatrix::zeros(m * m, dim);
    let mut guesses = Vec::with_capacity(m * m);
    for (s, (u, dirs)) in sets.into_iter().enumerate() {
        let dirs: Vec<DVector<f64>> = dirs
            .into_iter()
            .map(|d| {
                d.or_else(|| spare.next())
                    .ok_or_else(|| Error::Consistency("probe space too small".into()))
            })
            .collect::<Result<_>>()?;
        for k in 0..m {
            let mut e = DVector::zeros(dim);
            for (r, dir) in dirs.iter().enumerate() {
                e.axpy(u[(k, r)], dir, 1.0);
            }
            basis.set_row(s * m + k, &e.transpose());
            guesses.push(k);
        }
    }
    SettingMeasurement::full(basis, guesses, m)
}

/// Gram–Schmidt completion of an orthonormal family to a basis of `R^dim`.
fn orthonormal_complement(family: &[DVector<f64>], dim: usize) -> Result<Vec<DVector<f64>>> {
    let mut accepted: Vec<DVector<f64>> = family.to_vec();
    let mut out = Vec::new();
    for axis in 0..dim {
        if accepted.len() == dim {
            break;
        }
        let mut v = DVector::zeros(dim);
        v[axis] = 1.0;
        for _ in 0..2 {
            for a in &accepted {
                let c = a.dot(&v);
                v.axpy(-c, a, 1.0);
            }
        }
        let norm = v.norm();
        if norm > 1e-6 {
            v /= norm;
            accepted.push(v.clone());
            out.push(v);
        }
    }
    if accepted.len() != dim {
        return Err(Error::Consistency(format!(
            "support family of {} vectors is not orthonormal in R^{dim}",
            family.len()
        )));
    }
    Ok(out)
}

/// Empirical probability with its standard error `sqrt(p(1-p)/trials)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub std_err: f64,
    pub trials: u64,
}

impl Estimate {
    fn from_counts(hits: f64, trials: u64, denominator: u64) -> Self {
        let value = if trials == 0 { 0.0 } else { hits / trials as f64 };
        let std_err = if denominator == 0 {
            0.0
        } else {
            (value * (1.0 - value) / denominator as f64).sqrt()
        };
        Self { value, std_err, trials }
    }

    /// `(value - expected) / std_err`; zero when both agree exactly.
    pub fn z_score(&self, expected: f64) -> f64 {
        let diff = self.value - expected;
        if self.std_err > 0.0 {
            diff / self.std_err
        } else if diff.abs() < 1e-12 {
            0.0
        } else {
            diff.signum() * f64::INFINITY
        }
    }
}

/// Aggregated outcome of a Monte Carlo run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub seed: u64,
    pub shots: u64,
    pub qubits: usize,
    /// Per-qubit error rate between Alice and Bob (sifted rounds only).
    pub disturbance: Estimate,
    /// Bob receives the whole message correctly.
    pub bob_success: Estimate,
    /// Eve's guess equals the whole message.
    pub eve_success: Estimate,
    /// Plug-in estimate of `I(message; basis, Eve outcome)` in bits.
    pub eve_information: f64,
    /// Per-qubit error rate restricted to qubits Alice prepared in `z` / `x`.
    pub disturbance_by_basis: [Estimate; 2],
    /// Eve's success conditioned on the first qubit's bit value 0 / 1.
    pub eve_success_by_bit: [Estimate; 2],
    /// Joint counts of (first qubit failed, second qubit failed); two-qubit runs only.
    pub failure_joint_counts: [[u64; 2]; 2],
    /// Largest deviation of a joint-state norm from 1 before measurement.
    pub max_norm_deviation: f64,
}

#[derive(Debug, Clone, Default)]
struct Tally {
    qubit_errors: u64,
    bob_ok: u64,
    eve_ok: u64,
    basis_errors: [u64; 2],
    basis_trials: [u64; 2],
    bit_ok: [u64; 2],
    bit_trials: [u64; 2],
    failures: [[u64; 2]; 2],
    joint: Vec<Vec<u64>>,
}

impl Tally {
    fn merge(mut self, other: &Tally) -> Tally {
        self.qubit_errors += other.qubit_errors;
        self.bob_ok += other.bob_ok;
        self.eve_ok += other.eve_ok;
        for k in 0..2 {
            self.basis_errors[k] += other.basis_errors[k];
            self.basis_trials[k] += other.basis_trials[k];
            self.bit_ok[k] += other.bit_ok[k];
            self.bit_trials[k] += other.bit_trials[k];
            for l in 0..2 {
                self.failures[k][l] += other.failures[k][l];
            }
        }
        if self.joint.is_empty() {
            self.joint = other.joint.clone();
        } else {
            for (row, o) in self.joint.iter_mut().zip(&other.joint) {
                for (a, b) in row.iter_mut().zip(o) {
                    *a += b;
                }
            }
        }
        self
    }
}

/// Cumulative distribution over `(j, outcome)` for each `(setting, message)`.
struct Sampler {
    outcomes: usize,
    cdf: Vec<Vec<f64>>,
    guesses: Vec<Vec<usize>>,
}

/// Replays `shots` rounds of the protocol against `attack`.
///
/// Each round Alice draws a uniform message and a uniform basis per qubit;
/// only sifted rounds are simulated, so Bob measures in Alice's basis and
/// Eve, who waits for the basis announcement, uses the matching measurement.
/// Shots are split into fixed partitions with their own ChaCha stream, so the
/// result depends only on `(seed, shots)`.
pub fn simulate(attack: &RealizedAttack, shots: u64, seed: u64) -> SimulationReport {
    let n = attack.n;
    let m = message_count(n);
    let probes = attack.probes();
    let mut max_norm_deviation = 0.0f64;
    let mut cdf = Vec::new();
    let mut guesses = Vec::new();
    let outcomes = attack.eve_basis[0].outcome_count();
    for b in 0..setting_count(n) {
        let in_setting = probes.in_setting(b);
        let meas = &attack.eve_basis[b];
        guesses.push((0..outcomes).map(|o| meas.guess(o)).collect());
        for i in 0..m {
            let norm: f64 = (0..m).map(|j| in_setting.get(i, j).norm_squared()).sum();
            max_norm_deviation = max_norm_deviation.max((norm - 1.0).abs());
            let table = outcome_table(&in_setting, meas, i);
            let mut acc = 0.0;
            let row: Vec<f64> = table
                .iter()
                .flatten()
                .map(|w| {
                    acc += w;
                    acc
                })
                .collect();
            cdf.push(row.into_iter().map(|c| c / acc).collect::<Vec<f64>>());
        }
    }
    let sampler = Sampler { outcomes, cdf, guesses };

    let tally = (0..PARTITIONS)
        .into_par_iter()
        .map(|part| {
            let count = shots / PARTITIONS + u64::from(part < shots % PARTITIONS);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(part);
            run_partition(&sampler, n, count, &mut rng)
        })
        .collect::<Vec<_>>()
        .iter()
        .fold(Tally::default(), |acc, t| acc.merge(t));

    let qubit_trials = shots * n as u64;
    let joint: Vec<Vec<f64>> = tally
        .joint
        .iter()
        .map(|r| r.iter().map(|&c| c as f64).collect())
        .collect();
    SimulationReport {
        seed,
        shots,
        qubits: n,
        disturbance: Estimate::from_counts(tally.qubit_errors as f64, qubit_trials, shots),
        bob_success: Estimate::from_counts(tally.bob_ok as f64, shots, shots),
        eve_success: Estimate::from_counts(tally.eve_ok as f64, shots, shots),
        eve_information: if joint.is_empty() {
            0.0
        } else {
            mutual_information(&joint)
        },
        disturbance_by_basis: [0, 1].map(|k| {
            Estimate::from_counts(
                tally.basis_errors[k] as f64,
                tally.basis_trials[k],
                tally.basis_trials[k],
            )
        }),
        eve_success_by_bit: [0, 1]
            .map(|k| Estimate::from_counts(tally.bit_ok[k] as f64, tally.bit_trials[k], tally.bit_trials[k])),
        failure_joint_counts: if n == 2 { tally.failures } else { [[0; 2]; 2] },
        max_norm_deviation,
    }
}

fn run_partition(sampler: &Sampler, n: usize, shots: u64, rng: &mut ChaCha8Rng) -> Tally {
    let m = message_count(n);
    let mut t = Tally {
        joint: vec![vec![0; setting_count(n) * sampler.outcomes]; m],
        ..Tally::default()
    };
    for _ in 0..shots {
        let b = rng.random_range(0..setting_count(n));
        let i = rng.random_range(0..m);
        let cdf = &sampler.cdf[b * m + i];
        let u: f64 = rng.random();
        let pick = cdf.partition_point(|&c| c <= u).min(cdf.len() - 1);
        let (j, o) = (pick / sampler.outcomes, pick % sampler.outcomes);
        let guess = sampler.guesses[b][o];

        let mut failed = [false; 2];
        for (q, slot) in failed.iter_mut().enumerate().take(n) {
            let err = ((i ^ j) >> q) & 1 == 1;
            *slot = err;
            let basis = (b >> q) & 1;
            t.basis_trials[basis] += 1;
            t.basis_errors[basis] += u64::from(err);
            t.qubit_errors += u64::from(err);
        }
        t.failures[usize::from(failed[0])][usize::from(failed[1])] += 1;
        t.bob_ok += u64::from(j == i);
        let ok = guess == i;
        t.eve_ok += u64::from(ok);
        t.bit_trials[i & 1] += 1;
        t.bit_ok[i & 1] += u64::from(ok);
        t.joint[i][b * sampler.outcomes + o] += 1;
    }
    t
}
