//! Downhill simplex minimization over plain slices, backed by `argmin`.

use argmin::core::{CostFunction, Executor, State, TerminationReason, TerminationStatus};
use argmin::solver::neldermead::NelderMead;

/// Settings for a single simplex run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimplexOptions {
    pub max_iterations: usize,
    /// Stop once the standard deviation of objective values across the simplex drops below this.
    pub f_tol: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimplexResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

struct Objective<F>(F);

impl<F: Fn(&[f64]) -> f64> CostFunction for Objective<F> {
    type Param = Vec<f64>;
    type Output = f64;

    fn cost(&self, x: &Vec<f64>) -> Result<f64, argmin::core::Error> {
        Ok((self.0)(x))
    }
}

/// Minimizes `f` from `x0` with an axis-aligned initial simplex of the given
/// per-coordinate step sizes.
pub fn minimize<F>(f: F, x0: &[f64], steps: &[f64], opts: &SimplexOptions) -> SimplexResult
where
    F: Fn(&[f64]) -> f64,
{
    assert_eq!(steps.len(), x0.len());
    let mut vertices = vec![x0.to_vec()];
    for (k, step) in steps.iter().enumerate() {
        let mut x = x0.to_vec();
        x[k] += step;
        vertices.push(x);
    }
    let fallback = |f: &F| SimplexResult {
        x: x0.to_vec(),
        value: f(x0),
        iterations: 0,
        converged: false,
    };
    let solver = match NelderMead::new(vertices).with_sd_tolerance(opts.f_tol.max(0.0)) {
        Ok(s) => s,
        Err(_) => return fallback(&f),
    };
    let run = Executor::new(Objective(f), solver)
        .configure(|state| state.max_iters(opts.max_iterations as u64))
        .run();
    match run {
        Ok(result) => {
            let state = result.state();
            SimplexResult {
                x: state.get_best_param().cloned().unwrap_or_else(|| x0.to_vec()),
                value: state.get_best_cost(),
                iterations: state.get_iter() as usize,
                converged: matches!(
                    state.get_termination_status(),
                    TerminationStatus::Terminated(TerminationReason::SolverConverged)
                ),
            }
        }
        Err(_) => SimplexResult {
            x: x0.to_vec(),
            value: f64::NAN,
            iterations: 0,
            converged: false,
        },
    }
}
