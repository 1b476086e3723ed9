//! Space-dependent Godunov scheme for `q_t + (V_eps(o(x) - q) q)_x = 0`.

mod flux;
mod solver;

pub use flux::{godunov_flux, FluxEval};
pub use solver::{stable_dt, step, GodunovSolver, StepReport, WAVE_SPEED_SAFETY};

use crate::evolution::{evolve_with, Evolution, EvolveFailure};
use crate::model::{project_to_cells, validate_scenario, Scenario};
use crate::{Error, Scalar};

/// Projects the initial datum and runs the inviscid scheme through every
/// snapshot time up to `t_end`.
///
/// Scenarios with assumption violations are refused unless `force` is set.
pub fn evolve<T: Scalar>(scenario: &Scenario<T>, force: bool) -> Result<Evolution<T>, EvolveFailure<T>> {
    let fail = |error| EvolveFailure { time: T::zero(), snapshots: Vec::new(), error };
    let violations = validate_scenario(scenario);
    if !violations.is_empty() && !force {
        return Err(fail(Error::Inadmissible(violations.len())));
    }
    let initial = project_to_cells(|x| scenario.initial.eval(x), &scenario.grid).map_err(fail)?;
    let mut solver =
        GodunovSolver::new(scenario.grid, &scenario.obstacle, scenario.velocity, scenario.cfl).map_err(fail)?;
    evolve_with(&mut solver, initial, &scenario.snapshot_times, scenario.t_end)
}
