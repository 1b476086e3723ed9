//! Time loop shared by the inviscid and viscous solvers: lands exactly on
//! every snapshot time and accumulates run statistics.

use std::fmt;
use std::time::{Duration, Instant};

use crate::error::{Error, Result};
use crate::model::{CellField, Grid};
use crate::Scalar;

/// Per-step bookkeeping returned by a [`TimeStepper`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepStats<T> {
    pub dt: T,
    pub max_wave_speed: T,
    /// Mass entering through the left edge, `dt * F_{-1/2}`.
    pub boundary_inflow: T,
    /// Mass leaving through the right edge, `dt * F_{n-1/2}`.
    pub boundary_outflow: T,
    /// `dx * sum |q^{n+1} - q^n|`.
    pub variation: T,
}

pub trait TimeStepper<T: Scalar> {
    fn grid(&self) -> &Grid<T>;

    /// Advances `state` in place by at most `dt_cap`.
    fn advance(&mut self, state: &mut CellField<T>, dt_cap: T) -> Result<StepStats<T>>;
}

#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotSummary<T> {
    /// Steps taken since `t = 0`.
    pub steps: usize,
    /// Largest wave speed seen since the previous snapshot.
    pub max_wave_speed: T,
    /// Smallest CFL step since the previous snapshot (the final landing step excluded).
    pub min_dt: T,
    /// Cumulative `inflow - outflow` through the domain edges.
    pub boundary_net_inflow: T,
    /// `dx * sum |q^{n+1} - q^n|` per unit time since the previous snapshot.
    pub time_variation_rate: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot<T> {
    pub time: T,
    pub field: CellField<T>,
    pub summary: SnapshotSummary<T>,
}

#[derive(Debug, Clone)]
pub struct Evolution<T> {
    pub snapshots: Vec<Snapshot<T>>,
    pub steps: usize,
    pub wall_time: Duration,
    pub boundary_net_inflow: T,
    pub final_state: CellField<T>,
}

impl<T: Scalar> Evolution<T> {
    pub fn snapshot_at(&self, t: T) -> Option<&Snapshot<T>> {
        self.snapshots.iter().find(|s| s.time == t)
    }
}

/// A failed run: the error, when it happened, and the snapshots taken before.
#[derive(Debug, Clone)]
pub struct EvolveFailure<T> {
    pub time: T,
    pub snapshots: Vec<Snapshot<T>>,
    pub error: Error,
}

impl<T: Scalar> fmt::Display for EvolveFailure<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "evolution failed at t = {}: {}", self.time, self.error)
    }
}

impl<T: Scalar> std::error::Error for EvolveFailure<T> {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        Some(&self.error)
    }
}

/// Runs `stepper` from `initial` (taken at `t = 0`) to `t_end`, recording a
/// snapshot at each of the sorted `snapshot_times`.
pub fn evolve_with<T, S>(
    stepper: &mut S,
    initial: CellField<T>,
    snapshot_times: &[T],
    t_end: T,
) -> std::result::Result<Evolution<T>, EvolveFailure<T>>
where
    T: Scalar,
    S: TimeStepper<T> + ?Sized,
{
    let started = Instant::now();
    let mut state = initial;
    state.time = T::zero();
    let mut snapshots = Vec::with_capacity(snapshot_times.len());
    let mut steps = 0usize;
    let mut net = T::zero();
    let mut window = Window::<T>::new();

    if let Err(error) = state.check_finite() {
        return Err(EvolveFailure { time: T::zero(), snapshots, error });
    }

    let mut targets: Vec<T> = snapshot_times.to_vec();
    if targets.last().map_or(true, |&t| t < t_end) {
        targets.push(t_end);
    }
    let n_requested = snapshot_times.len();
    let mut window_start = T::zero();

    for (k, &target) in targets.iter().enumerate() {
        while state.time < target {
            let cap = target - state.time;
            match stepper.advance(&mut state, cap) {
                Ok(stats) => {
                    steps += 1;
                    net = net + stats.boundary_inflow - stats.boundary_outflow;
                    if stats.dt >= cap {
                        state.time = target;
                    } else {
                        window.min_dt = window.min_dt.min(stats.dt);
                    }
                    window.max_speed = window.max_speed.max(stats.max_wave_speed);
                    window.variation = window.variation + stats.variation;
                }
                Err(error) => {
                    return Err(EvolveFailure { time: state.time, snapshots, error });
                }
            }
        }
        if k < n_requested {
            let span = state.time - window_start;
            let rate = if span > T::zero() { window.variation / span } else { T::zero() };
            snapshots.push(Snapshot {
                time: target,
                field: state.clone(),
                summary: SnapshotSummary {
                    steps,
                    max_wave_speed: window.max_speed,
                    min_dt: window.min_dt,
                    boundary_net_inflow: net,
                    time_variation_rate: rate,
                },
            });
            window = Window::new();
            window_start = state.time;
        }
    }

    Ok(Evolution {
        snapshots,
        steps,
        wall_time: started.elapsed(),
        boundary_net_inflow: net,
        final_state: state,
    })
}

struct Window<T> {
    max_speed: T,
    min_dt: T,
    variation: T,
}

impl<T: Scalar> Window<T> {
    fn new() -> Self {
        Self { max_speed: T::zero(), min_dt: T::infinity(), variation: T::zero() }
    }
}
