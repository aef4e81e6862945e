//! Command implementations behind the `eavesdrop` binary. Each command
//! returns its rendered output so it can be tested without a process.

pub mod table;

use eavesdrop_core::attack_file::AttackSpec;
use eavesdrop_core::incoherent::{self, optimal_attack};
use eavesdrop_core::optimizer::{points_on_grid, sweep_curves, Objective, OptimizationOptions};
use eavesdrop_core::oracle::{build_isometry, simulate};
use eavesdrop_core::symmetrizer::{averaged_metric, generators, is_symmetric, symmetrize_fully, Metric, RawAttack};
use eavesdrop_core::Error;

pub use table::{format_number, Cell, Format, Table};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("internal consistency: {0}")]
    Consistency(String),
    #[error("i/o: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Io(_) => 1,
            CliError::Infeasible(_) => 2,
            CliError::Consistency(_) => 3,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Domain(_) | Error::Parse(_) => CliError::Usage(e.to_string()),
            Error::Infeasible(_) | Error::Geometry { .. } => CliError::Infeasible(e.to_string()),
            Error::Optimization { .. } | Error::Consistency(_) | Error::DimensionMismatch(_) => {
                CliError::Consistency(e.to_string())
            }
        }
    }
}

/// Output of a command that reports a verdict through its exit code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Report {
    pub text: String,
    pub exit_code: i32,
}

fn check_range(d_min: f64, d_max: f64, steps: usize) -> Result<(), CliError> {
    if !(0.0 <= d_min && d_min < d_max && d_max <= 0.5) {
        return Err(CliError::Usage(format!(
            "need 0 <= d-min < d-max <= 0.5, got d-min={d_min} d-max={d_max}"
        )));
    }
    if steps < 2 {
        return Err(CliError::Usage(format!("need --steps >= 2, got {steps}")));
    }
    Ok(())
}

fn grid(d_min: f64, d_max: f64, steps: usize) -> Vec<f64> {
    eavesdrop_core::optimizer::disturbance_grid(d_min, d_max, steps)
}

/// Optimal incoherent attack against the disturbance:
/// `D, I_e_opt, I_b, I_sum, P_e_opt, P_b`.
pub fn cmd_incoherent(d_min: f64, d_max: f64, steps: usize, format: Format) -> Result<String, CliError> {
    check_range(d_min, d_max, steps)?;
    let mut t = Table::new(&["D", "I_e_opt", "I_b", "I_sum", "P_e_opt", "P_b"]);
    for d in grid(d_min, d_max, steps) {
        let p = optimal_attack(d)?;
        let ie = incoherent::eve_information(&p);
        let (ib, pb) = incoherent::bob_metrics(d)?;
        t.push(vec![
            d.into(),
            ie.into(),
            ib.into(),
            (ie + ib).into(),
            incoherent::eve_success(&p).into(),
            pb.into(),
        ]);
    }
    t.render(format)
}

/// Coherent optimum against the disturbance for one objective.
///
/// `steps = 1` is accepted when `d_min == d_max` and evaluates that single point.
pub fn cmd_coherent(
    d_min: f64,
    d_max: f64,
    steps: usize,
    objective: Objective,
    opts: &OptimizationOptions,
    format: Format,
) -> Result<String, CliError> {
    let points = if steps == 1 && d_min == d_max {
        if !(0.0..=0.5).contains(&d_min) {
            return Err(CliError::Usage(format!("disturbance {d_min} outside [0, 0.5]")));
        }
        opts.validate()?;
        points_on_grid(&[d_min], opts)
    } else {
        check_range(d_min, d_max, steps)?;
        sweep_curves(d_min, d_max, steps, opts)?
    };
    let objective_name = match objective {
        Objective::Success => "success",
        Objective::Information => "information",
    };
    let mut t = match objective {
        Objective::Success => Table::new(&[
            "D",
            "P1",
            "P2",
            "relative_gain",
            "Pb1",
            "Pb2",
            "bob_relative_gain",
            "B",
            "C",
            "A1",
            "B2",
            "C1",
            "monotonicity_violation",
            "error",
        ]),
        Objective::Information => Table::new(&["D", "I1", "I2", "I_gain", "B", "C", "A1", "B2", "C1", "error"]),
    }
    .meta("seed", opts.seed)
    .meta("objective", objective_name)
    .meta("restarts", opts.restarts);
    for p in &points {
        let error = Cell::from(p.error.clone().unwrap_or_default());
        let row: Vec<Cell> = match objective {
            Objective::Success => [
                p.disturbance,
                p.p1,
                p.p2,
                p.relative_gain,
                p.pb1,
                p.pb2,
                p.bob_relative_gain,
            ]
            .into_iter()
            .chain(p.success_params)
            .map(Cell::from)
            .chain([p.monotonicity_violation.into(), error])
            .collect(),
            Objective::Information => [p.disturbance, p.i1, p.i2, p.i2 - p.i1]
                .into_iter()
                .chain(p.information_params)
                .map(Cell::from)
                .chain([error])
                .collect(),
        };
        t.push(row);
    }
    t.render(format)
}

/// Monte Carlo run of a symmetric attack file against its analytic metrics.
pub fn cmd_simulate(attack: &str, shots: u64, seed: u64, format: Format) -> Result<String, CliError> {
    if shots == 0 {
        return Err(CliError::Usage("--shots must be at least 1".into()));
    }
    let spec = AttackSpec::parse(attack)?;
    let symmetric = spec.symmetric()?.ok_or_else(|| {
        CliError::Usage("simulate needs an incoherent or coherent attack; run symmetrize on raw attacks".into())
    })?;
    let analytic = symmetric.analytic()?;
    let realized = build_isometry(&symmetric)?;
    let r = simulate(&realized, shots, seed);
    let f = r.failure_joint_counts;
    let mut t = Table::new(&["metric", "empirical", "std_err", "analytic", "z_score"])
        .meta("seed", seed)
        .meta("shots", shots)
        .meta("qubits", r.qubits)
        .meta(
            "failure_joint_counts",
            format!("{} {} {} {}", f[0][0], f[0][1], f[1][0], f[1][1]),
        )
        .meta("max_norm_deviation", format_number(r.max_norm_deviation));
    let estimates = [
        ("disturbance", r.disturbance, analytic.disturbance),
        ("disturbance_z_basis", r.disturbance_by_basis[0], analytic.disturbance),
        ("disturbance_x_basis", r.disturbance_by_basis[1], analytic.disturbance),
        ("bob_success", r.bob_success, analytic.bob_success),
        ("eve_success", r.eve_success, analytic.eve_success),
        ("eve_success_bit0", r.eve_success_by_bit[0], analytic.eve_success),
        ("eve_success_bit1", r.eve_success_by_bit[1], analytic.eve_success),
    ];
    for (name, e, expected) in estimates {
        t.push(vec![
            name.into(),
            e.value.into(),
            e.std_err.into(),
            expected.into(),
            e.z_score(expected).into(),
        ]);
    }
    t.push(vec![
        "eve_information".into(),
        r.eve_information.into(),
        f64::NAN.into(),
        analytic.eve_information.into(),
        f64::NAN.into(),
    ]);
    t.render(format)
}

/// Relation residuals and minimum Gram eigenvalue; exit code 0 iff feasible.
pub fn cmd_validate(attack: &str, format: Format) -> Result<Report, CliError> {
    let spec = AttackSpec::parse(attack)?;
    let v = spec.validate();
    let mut t = Table::new(&["check", "value"]);
    for (name, r) in &v.residuals {
        t.push(vec![format!("residual {name}").into(), (*r).into()]);
    }
    t.push(vec!["min_eigenvalue".into(), v.min_eigenvalue.into()]);
    t.push(vec!["feasible".into(), v.feasible().into()]);
    if let Some(msg) = &v.violation {
        t.push(vec!["violation".into(), msg.clone().into()]);
    }
    Ok(Report {
        text: t.render(format)?,
        exit_code: if v.feasible() { 0 } else { 2 },
    })
}

/// Symmetrizes an attack file over every protocol generator and compares
/// averaged metrics and symmetry before and after.
pub fn cmd_symmetrize(attack: &str, format: Format) -> Result<String, CliError> {
    let spec = AttackSpec::parse(attack)?;
    let raw = match spec.symmetric()? {
        Some(s) => RawAttack::from_realized(&build_isometry(&s)?)?,
        None => RawAttack::from_gram(spec.qubits(), &spec.gram()?)?,
    };
    let sym = symmetrize_fully(&raw)?;
    let mut t = Table::new(&["quantity", "before", "after"]).meta("qubits", raw.qubits());
    t.push(vec![
        "probe_dim".into(),
        (raw.probe_dim() as u64).into(),
        (sym.probe_dim() as u64).into(),
    ]);
    for (name, metric) in [
        ("disturbance", Metric::Disturbance),
        ("eve_success", Metric::EveSuccess),
        ("eve_information", Metric::EveInformation),
    ] {
        let (before, after) = (averaged_metric(&raw, metric), averaged_metric(&sym, metric));
        if (before - after).abs() > 1e-9 {
            return Err(CliError::Consistency(format!(
                "{name} changed from {before} to {after}"
            )));
        }
        t.push(vec![name.into(), before.into(), after.into()]);
    }
    for g in generators(raw.qubits())? {
        t.push(vec![
            format!("symmetric {}", g.kind()).into(),
            is_symmetric(&raw, &g, 1e-9)?.into(),
            is_symmetric(&sym, &g, 1e-9)?.into(),
        ]);
    }
    t.render(format)
}
