//! Numerical maximization of Eve's pair success and pair information over the
//! symmetric coherent family at fixed disturbance.
//!
//! With the disturbance fixed to `D = B + C`, the free chart reduces to
//! `(B, A1, B2, C1)` with `C = D - B`. The feasible region is a polytope (the
//! set probabilities and all in-set Gram eigenvalues are linear in the chart),
//! and infeasible trial points are penalized by their largest violation.

use std::cell::RefCell;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coherent::{self, product_embedding, solve_free, CoherentParams, CoherentScalars, SetBlock};
use crate::error::{Error, Result};
use crate::incoherent::{self, optimal_attack};
use crate::nelder_mead::{self, SimplexOptions};
use crate::quantum::shannon_entropy;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimizationOptions {
    pub restarts: usize,
    pub max_iterations: usize,
    pub seed: u64,
    pub feasibility_penalty: f64,
    pub convergence_tol: f64,
}

impl Default for OptimizationOptions {
    fn default() -> Self {
        Self {
            restarts: 32,
            max_iterations: 2000,
            seed: 42,
            feasibility_penalty: 1e3,
            convergence_tol: 1e-8,
        }
    }
}

impl OptimizationOptions {
    pub fn validate(&self) -> Result<()> {
        if self.restarts == 0 || self.max_iterations == 0 {
            return Err(Error::Domain("restarts and max_iterations must be at least 1".into()));
        }
        if !(self.convergence_tol > 0.0 && self.feasibility_penalty > 0.0) {
            return Err(Error::Domain("tolerance and penalty must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Objective {
    Success,
    Information,
}

impl Objective {
    fn exact(self, p: &CoherentParams) -> Result<f64> {
        match self {
            Objective::Success => coherent::eve_pair_success(p),
            Objective::Information => coherent::eve_pair_information(p),
        }
    }

    /// Objective on the eigenvalue-clipped blocks; continuous across the boundary.
    fn clipped(self, s: &CoherentScalars) -> f64 {
        s.blocks()
            .iter()
            .map(|b| {
                let c = b.clipped();
                set_value(self, &c).unwrap_or(0.0)
            })
            .sum()
    }
}

fn set_value(objective: Objective, block: &SetBlock) -> Result<f64> {
    Ok(match block.pyramid()? {
        None => 0.0,
        Some(sol) => match objective {
            Objective::Success => block.weight * sol.success(),
            Objective::Information => {
                let p = sol.probabilities();
                let total: f64 = p.iter().sum();
                block.weight * (2.0 - shannon_entropy(&p.map(|x| x / total))?)
            }
        },
    })
}

/// Free-chart point `(B, A1, B2, C1)` of the product of two optimal
/// single-qubit attacks.
fn product_point(d: f64) -> Result<[f64; 4]> {
    let [b, _, a1, b2, c1] = product_embedding(&optimal_attack(d)?).free();
    Ok([b, a1, b2, c1])
}

fn scalars_at(d: f64, x: &[f64]) -> CoherentScalars {
    solve_free(x[0], d - x[0], x[1], x[2], x[3])
}

#[derive(Debug, Clone)]
struct Candidate {
    value: f64,
    x: [f64; 4],
}

fn search(d: f64, objective: Objective, opts: &OptimizationOptions, restart: usize) -> Option<Candidate> {
    let best: RefCell<Option<Candidate>> = RefCell::new(None);
    let record = |x: &[f64], value: f64| {
        let mut slot = best.borrow_mut();
        if slot.as_ref().is_none_or(|c| value > c.value) {
            *slot = Some(Candidate {
                value,
                x: [x[0], x[1], x[2], x[3]],
            });
        }
    };
    let f = |x: &[f64]| -> f64 {
        let s = scalars_at(d, x);
        let violation = s.violation();
        if violation == 0.0 {
            if let Ok(v) = CoherentParams::from_scalars(s).and_then(|p| objective.exact(&p)) {
                record(x, v);
                return -v;
            }
        }
        -objective.clipped(&s) + opts.feasibility_penalty * violation
    };

    let x0 = product_point(d).ok()?;
    let scale = [0.5 * d, 0.2, 0.3 * d, 0.3 * d];
    let start = if restart == 0 {
        x0
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        rng.set_stream(restart as u64);
        let mut shrink = 1.0;
        let mut chosen = x0;
        for _ in 0..64 {
            let trial: [f64; 4] = std::array::from_fn(|k| x0[k] + shrink * scale[k] * rng.random_range(-1.0..=1.0));
            if scalars_at(d, &trial).violation() == 0.0 {
                chosen = trial;
                break;
            }
            shrink *= 0.8;
        }
        chosen
    };
    f(&x0);

    let simplex = SimplexOptions {
        max_iterations: opts.max_iterations,
        f_tol: 1e-4 * opts.convergence_tol,
    };
    let mut point = start.to_vec();
    let mut steps: Vec<f64> = [0.1 * d, 0.05, 0.05 * d, 0.05 * d]
        .iter()
        .map(|s| s.max(1e-9))
        .collect();
    for _ in 0..3 {
        let r = nelder_mead::minimize(f, &point, &steps, &simplex);
        point = r.x;
        steps.iter_mut().for_each(|s| *s *= 0.1);
    }
    best.into_inner()
}

fn maximize(d: f64, objective: Objective, opts: &OptimizationOptions) -> Result<(CoherentParams, f64)> {
    if !(0.0..=0.5).contains(&d) {
        return Err(Error::Domain(format!("disturbance {d} outside [0, 1/2]")));
    }
    opts.validate()?;
    if d == 0.0 {
        // Zero disturbance leaves a single feasible point: no interaction.
        let p = CoherentParams::identity();
        return Ok((p, objective.exact(&p)?));
    }
    let best = (0..opts.restarts)
        .into_par_iter()
        .map(|k| search(d, objective, opts, k))
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .fold(None::<Candidate>, |acc, c| match acc {
            Some(a) if a.value >= c.value => Some(a),
            _ => Some(c),
        })
        .ok_or_else(|| Error::Optimization {
            disturbance: d,
            reason: format!("no feasible point in {} restarts", opts.restarts),
        })?;
    let params = CoherentParams::from_scalars(scalars_at(d, &best.x))?;
    Ok((params, best.value))
}

/// Maximizes the probability that Eve guesses both qubits at disturbance `d`.
pub fn maximize_pair_success(d: f64, opts: &OptimizationOptions) -> Result<(CoherentParams, f64)> {
    maximize(d, Objective::Success, opts)
}

/// Maximizes Eve's pair information at disturbance `d`.
pub fn maximize_pair_information(d: f64, opts: &OptimizationOptions) -> Result<(CoherentParams, f64)> {
    maximize(d, Objective::Information, opts)
}

/// Incoherent baseline and coherent optimum at one disturbance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub disturbance: f64,
    /// Eve's pair success for two optimal incoherent attacks.
    pub p1: f64,
    /// Eve's optimal coherent pair success.
    pub p2: f64,
    pub i1: f64,
    pub i2: f64,
    /// Bob's pair success under the incoherent / success-optimal coherent attack.
    pub pb1: f64,
    pub pb2: f64,
    /// `(P2 - P1) / P1`.
    pub relative_gain: f64,
    /// `(Pb2 - Pb1) / Pb1`.
    pub bob_relative_gain: f64,
    /// Free-chart `(B, C, A1, B2, C1)` of the success and information optima.
    pub success_params: [f64; 5],
    pub information_params: [f64; 5],
    /// Set when P2 decreased relative to the previous grid point.
    pub monotonicity_violation: bool,
    pub error: Option<String>,
}

impl CurvePoint {
    fn failed(d: f64, err: &Error) -> Self {
        Self {
            disturbance: d,
            p1: f64::NAN,
            p2: f64::NAN,
            i1: f64::NAN,
            i2: f64::NAN,
            pb1: f64::NAN,
            pb2: f64::NAN,
            relative_gain: f64::NAN,
            bob_relative_gain: f64::NAN,
            success_params: [f64::NAN; 5],
            information_params: [f64::NAN; 5],
            monotonicity_violation: false,
            error: Some(err.to_string()),
        }
    }
}

/// Runs both maximizations and the incoherent baselines at `d`.
pub fn curve_point(d: f64, opts: &OptimizationOptions) -> CurvePoint {
    compute_point(d, opts).unwrap_or_else(|e| CurvePoint::failed(d, &e))
}

fn compute_point(d: f64, opts: &OptimizationOptions) -> Result<CurvePoint> {
    let single = optimal_attack(d)?;
    let ps = incoherent::eve_success(&single);
    let p1 = ps * ps;
    let i1 = 2.0 * incoherent::eve_information(&single);
    let pb1 = (1.0 - d) * (1.0 - d);
    let (sp, p2) = maximize_pair_success(d, opts)?;
    let (ip, i2) = maximize_pair_information(d, opts)?;
    let pb2 = coherent::bob_pair_success(&sp);
    Ok(CurvePoint {
        disturbance: d,
        p1,
        p2,
        i1,
        i2,
        pb1,
        pb2,
        relative_gain: (p2 - p1) / p1,
        bob_relative_gain: (pb2 - pb1) / pb1,
        success_params: sp.free(),
        information_params: ip.free(),
        monotonicity_violation: false,
        error: None,
    })
}

/// Evenly spaced disturbance grid with both endpoints.
pub fn disturbance_grid(d_min: f64, d_max: f64, steps: usize) -> Vec<f64> {
    if steps == 1 {
        return vec![d_min];
    }
    (0..steps)
        .map(|k| {
            if k + 1 == steps {
                d_max
            } else {
                d_min + (d_max - d_min) * k as f64 / (steps - 1) as f64
            }
        })
        .collect()
}

/// Curve data over `steps` evenly spaced disturbances in `[d_min, d_max]`.
pub fn sweep_curves(d_min: f64, d_max: f64, steps: usize, opts: &OptimizationOptions) -> Result<Vec<CurvePoint>> {
    if !(0.0 <= d_min && d_min < d_max && d_max <= 0.5) {
        return Err(Error::Domain(format!(
            "need 0 <= d_min < d_max <= 1/2, got [{d_min}, {d_max}]"
        )));
    }
    if steps < 2 {
        return Err(Error::Domain(format!("need at least 2 grid points, got {steps}")));
    }
    opts.validate()?;
    Ok(points_on_grid(&disturbance_grid(d_min, d_max, steps), opts))
}

/// Curve points on an explicit grid, flagging decreases of P2.
pub fn points_on_grid(grid: &[f64], opts: &OptimizationOptions) -> Vec<CurvePoint> {
    let mut points: Vec<CurvePoint> = grid.par_iter().map(|&d| curve_point(d, opts)).collect();
    for k in 1..points.len() {
        let prev = points[k - 1].p2;
        points[k].monotonicity_violation = points[k].p2 < prev - opts.convergence_tol;
    }
    points
}
