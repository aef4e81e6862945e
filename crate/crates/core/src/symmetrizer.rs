//! Turning an arbitrary attack into a symmetric one.
//!
//! For a protocol operation `T` (an involution mapping Alice's state set onto
//! itself) the attack with probe matrix `(E ⊗ |0> + T E T ⊗ |1>) / sqrt 2`
//! is invariant under `T`. Eve reads the ancilla first and, on `|1>`,
//! measures as if Alice had prepared `T|alpha>`. Every average over Alice's
//! states is unchanged.

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::error::{Error, Result};
use crate::oracle::RealizedAttack;
use crate::protocol::{
    basis_change, message_count, outcome_table, setting_count, single_qubit_op, ProbeMatrix, SettingMeasurement,
    HADAMARD, PAULI_X, PAULI_Z,
};
use crate::quantum::{mutual_information, realize_gram, GramMatrix, StateSet, DEFAULT_PSD_TOL};

const ISOMETRY_TOL: f64 = 1e-10;

/// Attack with arbitrary probe states and Eve measurements.
#[derive(Debug, Clone)]
pub struct RawAttack {
    n: usize,
    gram: GramMatrix,
    probes: ProbeMatrix,
    /// One complete projective measurement per basis setting.
    measurement: Vec<SettingMeasurement>,
}

impl RawAttack {
    pub fn new(probes: ProbeMatrix, measurement: Vec<SettingMeasurement>) -> Result<Self> {
        let n = probes.qubits();
        if measurement.len() != setting_count(n) {
            return Err(Error::DimensionMismatch(format!(
                "{n}-qubit attack needs {} setting measurements, got {}",
                setting_count(n),
                measurement.len()
            )));
        }
        let dim = probes.probe_dim();
        for meas in &measurement {
            let covered: usize = meas.blocks().iter().map(|b| b.basis.nrows()).sum();
            if covered != dim {
                return Err(Error::DimensionMismatch(format!(
                    "measurement covers {covered} of {dim} probe dimensions"
                )));
            }
        }
        let defect = probes.isometry_defect();
        if defect > ISOMETRY_TOL {
            return Err(Error::Infeasible(format!(
                "probe states do not come from an isometry (defect {defect:e})"
            )));
        }
        Ok(Self {
            n,
            gram: probes.gram(),
            probes,
            measurement,
        })
    }

    /// Realizes a Gram matrix and gives Eve, in every setting, the
    /// coordinate basis of the realization with maximum-likelihood guesses.
    pub fn from_gram(n: usize, gram: &GramMatrix) -> Result<Self> {
        let states = realize_gram(gram, DEFAULT_PSD_TOL)?;
        let probes = ProbeMatrix::new(n, states)?;
        let m = message_count(n);
        let dim = probes.probe_dim();
        let measurement = (0..setting_count(n))
            .map(|b| {
                let in_setting = probes.in_setting(b);
                let guesses = (0..dim)
                    .map(|r| {
                        let score = |i: usize| (0..m).map(|j| in_setting.get(i, j)[r].powi(2)).sum::<f64>();
                        (0..m).fold(0, |best, i| if score(i) > score(best) + 1e-15 { i } else { best })
                    })
                    .collect();
                SettingMeasurement::full(DMatrix::identity(dim, dim), guesses, m)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(probes, measurement)
    }

    pub fn from_realized(r: &RealizedAttack) -> Result<Self> {
        Self::new(r.probes(), r.eve_basis().to_vec())
    }

    pub fn qubits(&self) -> usize {
        self.n
    }

    pub fn gram(&self) -> &GramMatrix {
        &self.gram
    }

    pub fn probes(&self) -> &ProbeMatrix {
        &self.probes
    }

    pub fn measurement(&self) -> &[SettingMeasurement] {
        &self.measurement
    }

    pub fn probe_dim(&self) -> usize {
        self.probes.probe_dim()
    }
}

/// Random attack: an isometry with orthonormal columns drawn from a uniform
/// matrix via QR, and in every setting a random orthonormal basis with random
/// guesses. Generally symmetric under none of the generators.
pub fn random_attack<R: Rng + ?Sized>(n: usize, probe_dim: usize, rng: &mut R) -> Result<RawAttack> {
    let m = message_count(n);
    if probe_dim == 0 {
        return Err(Error::Domain("probe dimension must be positive".into()));
    }
    fn uniform<R: Rng + ?Sized>(rng: &mut R, r: usize, c: usize) -> DMatrix<f64> {
        DMatrix::from_fn(r, c, |_, _| rng.random_range(-1.0..1.0))
    }
    let columns = uniform(rng, probe_dim * m, m).qr().q();
    let states = (0..m)
        .flat_map(|i| (0..m).map(move |j| (i, j)))
        .map(|(i, j)| DVector::from_fn(probe_dim, |r, _| columns[(j * probe_dim + r, i)]))
        .collect();
    let probes = ProbeMatrix::new(n, StateSet::new(probe_dim, states)?)?;
    let measurement = (0..setting_count(n))
        .map(|_| {
            let basis = uniform(rng, probe_dim, probe_dim).qr().q();
            let guesses = (0..probe_dim).map(|_| rng.random_range(0..m)).collect();
            SettingMeasurement::full(basis, guesses, m)
        })
        .collect::<Result<Vec<_>>>()?;
    RawAttack::new(probes, measurement)
}

/// The protocol operations used as symmetry generators.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TransformKind {
    /// `|0> <-> |1>` on qubit `q` in the `z` basis.
    BitFlip(usize),
    /// `|0> <-> |1>` on qubit `q` in the `x` basis (phase flip in `z`).
    PhaseFlip(usize),
    /// `z <-> x` on qubit `q`.
    BasisSwap(usize),
    /// Exchange of the two qubits.
    Exchange,
}

impl std::fmt::Display for TransformKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::BitFlip(q) => write!(f, "bit-flip[{q}]"),
            Self::PhaseFlip(q) => write!(f, "phase-flip[{q}]"),
            Self::BasisSwap(q) => write!(f, "basis-swap[{q}]"),
            Self::Exchange => write!(f, "exchange"),
        }
    }
}

/// A protocol involution on the `2^n`-dimensional message space.
#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolTransform {
    kind: TransformKind,
    n: usize,
    matrix: DMatrix<f64>,
}

impl ProtocolTransform {
    pub fn new(kind: TransformKind, n: usize) -> Result<Self> {
        if !(1..=2).contains(&n) {
            return Err(Error::DimensionMismatch(format!(
                "only 1 or 2 qubits supported, got {n}"
            )));
        }
        let qubit_ok = |q: usize| {
            if q < n {
                Ok(q)
            } else {
                Err(Error::DimensionMismatch(format!(
                    "qubit {q} out of range for {n} qubits"
                )))
            }
        };
        let matrix = match kind {
            TransformKind::BitFlip(q) => single_qubit_op(n, qubit_ok(q)?, PAULI_X),
            TransformKind::PhaseFlip(q) => single_qubit_op(n, qubit_ok(q)?, PAULI_Z),
            TransformKind::BasisSwap(q) => single_qubit_op(n, qubit_ok(q)?, HADAMARD),
            TransformKind::Exchange => {
                if n != 2 {
                    return Err(Error::DimensionMismatch("qubit exchange needs two qubits".into()));
                }
                DMatrix::from_fn(4, 4, |i, j| if i == ((j & 1) << 1 | j >> 1) { 1.0 } else { 0.0 })
            }
        };
        Ok(Self { kind, n, matrix })
    }

    pub fn kind(&self) -> TransformKind {
        self.kind
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn qubits(&self) -> usize {
        self.n
    }

    /// Image `(setting', message')` of Alice's state `|i>_b`, matched up to sign.
    pub fn state_map(&self, setting: usize, message: usize) -> Result<(usize, usize)> {
        let m = message_count(self.n);
        let w = basis_change(self.n, setting);
        let image = &self.matrix * w.column(message);
        for b in 0..setting_count(self.n) {
            let wb = basis_change(self.n, b);
            for i in 0..m {
                let overlap = wb.column(i).dot(&image);
                if (overlap.abs() - 1.0).abs() < 1e-12 {
                    return Ok((b, i));
                }
            }
        }
        Err(Error::Consistency(format!(
            "{} does not preserve Alice's state set",
            self.kind
        )))
    }

    /// Checks `T^2 = 1` and that every state of Alice is mapped into the set.
    pub fn verify(&self) -> Result<()> {
        let m = message_count(self.n);
        let sq = &self.matrix * &self.matrix;
        if (sq - DMatrix::<f64>::identity(m, m)).amax() > 1e-12 {
            return Err(Error::Consistency(format!("{} is not an involution", self.kind)));
        }
        for b in 0..setting_count(self.n) {
            for i in 0..m {
                self.state_map(b, i)?;
            }
        }
        Ok(())
    }
}

/// The generators used for full symmetrization, in application order.
///
/// Sequential symmetrization averages over the product set of
/// `{1, T_k} ... {1, T_1}`; this order makes that product set the whole
/// symmetry group, each element once.
pub fn generators(n: usize) -> Result<Vec<ProtocolTransform>> {
    let mut kinds = Vec::new();
    for q in 0..n {
        kinds.extend([
            TransformKind::BitFlip(q),
            TransformKind::PhaseFlip(q),
            TransformKind::BasisSwap(q),
        ]);
    }
    if n == 2 {
        kinds.push(TransformKind::Exchange);
    }
    kinds.into_iter().map(|k| ProtocolTransform::new(k, n)).collect()
}

fn check_dims(t: &ProtocolTransform, a: &RawAttack) -> Result<()> {
    if t.n != a.n {
        return Err(Error::DimensionMismatch(format!(
            "{}-qubit transform applied to a {}-qubit attack",
            t.n, a.n
        )));
    }
    Ok(())
}

/// The attack `T U T`: probe matrix `T E T`, with Eve's measurement in
/// setting `b` taken from setting `T(b)` and guesses mapped back through `T`.
pub fn apply_transform(t: &ProtocolTransform, a: &RawAttack) -> Result<RawAttack> {
    check_dims(t, a)?;
    let m = message_count(a.n);
    let probes = a.probes.conjugate(&t.matrix);
    let mut measurement = Vec::with_capacity(setting_count(a.n));
    for b in 0..setting_count(a.n) {
        let (image, _) = t.state_map(b, 0)?;
        // Old guess g (a message in setting `image`) corresponds to the new message T(g).
        let back: Vec<usize> = (0..m)
            .map(|g| t.state_map(image, g).map(|(_, i)| i))
            .collect::<Result<_>>()?;
        measurement.push(a.measurement[image].relabeled(|g| back[g]));
    }
    Ok(RawAttack {
        n: a.n,
        gram: probes.gram(),
        probes,
        measurement,
    })
}

/// One ancilla-doubling step: the output is symmetric under `t` and has the
/// same averaged disturbance, success and information as `a`.
pub fn symmetrize_step(a: &RawAttack, t: &ProtocolTransform) -> Result<RawAttack> {
    let mirrored = apply_transform(t, a)?;
    let probes = a.probes.ancilla_sum(&mirrored.probes);
    let shift = a.probe_dim();
    let measurement = a
        .measurement
        .iter()
        .zip(&mirrored.measurement)
        .map(|(orig, mirr)| orig.stacked(mirr, shift))
        .collect();
    Ok(RawAttack {
        n: a.n,
        gram: probes.gram(),
        probes,
        measurement,
    })
}

/// Applies [`symmetrize_step`] for every generator in turn.
pub fn symmetrize_fully(a: &RawAttack) -> Result<RawAttack> {
    generators(a.n)?
        .iter()
        .try_fold(a.clone(), |acc, t| symmetrize_step(&acc, t))
}

/// True iff the Gram matrices of `a` and `T a T` agree entrywise within `tol`.
pub fn is_symmetric(a: &RawAttack, t: &ProtocolTransform, tol: f64) -> Result<bool> {
    let image = apply_transform(t, a)?;
    Ok(a.gram.max_abs_diff(&image.gram) <= tol)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    /// Per-qubit probability that Bob's bit differs from Alice's.
    Disturbance,
    /// Probability that Eve's guess equals Alice's whole message.
    EveSuccess,
    /// `I(message; Eve outcome)` for uniform messages, averaged over settings.
    EveInformation,
}

/// Exact average of a metric over all `4^n` states of Alice, by enumeration.
pub fn averaged_metric(a: &RawAttack, metric: Metric) -> f64 {
    let n = a.n;
    let m = message_count(n);
    let settings = setting_count(n);
    let mut total = 0.0;
    for b in 0..settings {
        let in_setting = a.probes.in_setting(b);
        let meas = &a.measurement[b];
        let tables: Vec<Vec<Vec<f64>>> = (0..m).map(|i| outcome_table(&in_setting, meas, i)).collect();
        total += match metric {
            Metric::Disturbance => {
                (0..m)
                    .map(|i| {
                        (0..m)
                            .map(|j| in_setting.get(i, j).norm_squared() * (i ^ j).count_ones() as f64 / n as f64)
                            .sum::<f64>()
                    })
                    .sum::<f64>()
                    / m as f64
            }
            Metric::EveSuccess => {
                tables
                    .iter()
                    .enumerate()
                    .map(|(i, table)| {
                        table
                            .iter()
                            .flat_map(|row| row.iter().enumerate())
                            .filter(|(o, _)| meas.guess(*o) == i)
                            .map(|(_, w)| w)
                            .sum::<f64>()
                    })
                    .sum::<f64>()
                    / m as f64
            }
            Metric::EveInformation => {
                let joint: Vec<Vec<f64>> = tables
                    .iter()
                    .map(|table| {
                        let mut row = vec![0.0; meas.outcome_count()];
                        for bob in table {
                            for (o, w) in bob.iter().enumerate() {
                                row[o] += w;
                            }
                        }
                        row
                    })
                    .collect();
                mutual_information(&joint)
            }
        };
    }
    total / settings as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::incoherent::{optimal_attack, IncoherentParams};
    use crate::oracle::{build_isometry, SymmetricAttack};
    use crate::quantum::StateSet;
    use nalgebra::DVector;

    fn symmetric(p: IncoherentParams) -> RawAttack {
        RawAttack::from_realized(&build_isometry(&SymmetricAttack::Incoherent(p)).unwrap()).unwrap()
    }

    /// Eve copies the z-basis bit into an orthogonal probe and does nothing else.
    fn z_copier() -> RawAttack {
        let e = |k: usize| DVector::from_fn(2, |r, _| if r == k { 1.0 } else { 0.0 });
        let zero = DVector::zeros(2);
        let states = StateSet::new(2, vec![e(0), zero.clone(), zero, e(1)]).unwrap();
        let probes = ProbeMatrix::new(1, states).unwrap();
        let z = SettingMeasurement::full(DMatrix::identity(2, 2), vec![0, 1], 2).unwrap();
        RawAttack::new(probes, vec![z.clone(), z]).unwrap()
    }

    #[test]
    fn generators_are_protocol_involutions() {
        for n in 1..=2 {
            for t in generators(n).unwrap() {
                t.verify().unwrap();
            }
        }
        assert!(ProtocolTransform::new(TransformKind::Exchange, 1).is_err());
        assert!(ProtocolTransform::new(TransformKind::BitFlip(1), 1).is_err());
    }

    #[test]
    fn symmetric_attack_is_fixed_by_every_generator() {
        let a = symmetric(optimal_attack(0.25).unwrap());
        for t in generators(1).unwrap() {
            assert!(is_symmetric(&a, &t, 1e-12).unwrap(), "{}", t.kind());
        }
        let id = symmetric(IncoherentParams::identity());
        let flipped = apply_transform(&ProtocolTransform::new(TransformKind::BitFlip(0), 1).unwrap(), &id).unwrap();
        assert!(flipped.gram().max_abs_diff(id.gram()) < 1e-15);
    }

    #[test]
    fn z_copier_metrics_and_symmetrization() {
        let a = z_copier();
        assert!((averaged_metric(&a, Metric::Disturbance) - 0.25).abs() < 1e-15);
        let swap = ProtocolTransform::new(TransformKind::BasisSwap(0), 1).unwrap();
        assert!(!is_symmetric(&a, &swap, 1e-9).unwrap());
        let s = symmetrize_step(&a, &swap).unwrap();
        assert!(is_symmetric(&s, &swap, 1e-12).unwrap());
        for metric in [Metric::Disturbance, Metric::EveSuccess, Metric::EveInformation] {
            let before = averaged_metric(&a, metric);
            assert!((averaged_metric(&s, metric) - before).abs() < 1e-12, "{metric:?}");
            let twice = symmetrize_step(&s, &swap).unwrap();
            assert!((averaged_metric(&twice, metric) - before).abs() < 1e-12);
        }
    }

    #[test]
    fn averaged_metric_of_symmetric_attacks_matches_analytic() {
        let id = symmetric(IncoherentParams::identity());
        assert!(averaged_metric(&id, Metric::Disturbance).abs() < 1e-15);
        let p = optimal_attack(0.25).unwrap();
        let a = symmetric(p);
        assert!((averaged_metric(&a, Metric::Disturbance) - 0.25).abs() < 1e-12);
        assert!((averaged_metric(&a, Metric::EveSuccess) - crate::incoherent::eve_success(&p)).abs() < 1e-12);
        assert!((averaged_metric(&a, Metric::EveInformation) - crate::incoherent::eve_information(&p)).abs() < 1e-12);
    }

    #[test]
    fn basis_swap_is_an_involution_on_attacks() {
        let a = z_copier();
        let swap = ProtocolTransform::new(TransformKind::BasisSwap(0), 1).unwrap();
        let twice = apply_transform(&swap, &apply_transform(&swap, &a).unwrap()).unwrap();
        assert!(twice.gram().max_abs_diff(a.gram()) < 1e-12);
        assert_eq!(twice.measurement(), a.measurement());
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let t = ProtocolTransform::new(TransformKind::Exchange, 2).unwrap();
        assert!(matches!(
            apply_transform(&t, &z_copier()),
            Err(Error::DimensionMismatch(_))
        ));
    }
}
