use crate::error::{Error, Result};
use crate::evolution::{StepStats, TimeStepper};
use crate::godunov::FluxEval;
use crate::model::{CellField, Grid, Obstacle};
use crate::velocity::VelocityModel;
use crate::Scalar;

/// Safety factor applied to the sampled wave speed on nondegenerate interfaces.
pub const WAVE_SPEED_SAFETY: f64 = 1.2;
/// Interior sample points per interface for the wave-speed estimate.
const SPEED_SAMPLES: usize = 5;

/// Outcome of one explicit step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepReport<T> {
    pub dt_used: T,
    pub max_wave_speed: T,
    /// `F_{i-1/2}` for `i = 0..=n_cells`, interface 0 being the left domain edge.
    pub interface_fluxes: Vec<T>,
    pub post_state: CellField<T>,
}

/// Space-dependent first-order Godunov scheme with adaptive CFL steps.
///
/// Flux evaluators (including the flux maximizer) are built once per
/// interface since the obstacle does not change in time.
#[derive(Debug, Clone)]
pub struct GodunovSolver<T> {
    grid: Grid<T>,
    cfl: T,
    faces: Vec<FluxEval<T>>,
    /// `o` at the center of each stored cell (ghosts copy their neighbor).
    cell_bounds: Vec<T>,
    fluxes: Vec<T>,
    /// Lower admissible state; `None` leaves negative states unchecked.
    lower_bound: Option<T>,
}

impl<T: Scalar> GodunovSolver<T> {
    pub fn new(grid: Grid<T>, obstacle: &Obstacle<T>, model: VelocityModel<T>, cfl: T) -> Result<Self> {
        if !(cfl > T::zero() && cfl < T::one()) {
            return Err(Error::InvalidInput(format!("cfl must lie in (0, 1), got {cfl}")));
        }
        let faces = grid
            .interfaces()
            .map(|x| FluxEval::new(obstacle.eval(x), model))
            .collect::<Result<Vec<_>>>()?;
        let n = grid.n_cells();
        let cell_bounds = (0..grid.storage_len())
            .map(|k| obstacle.eval(grid.center(k.saturating_sub(grid.n_ghost()).min(n - 1))))
            .collect();
        Ok(Self {
            grid,
            cfl,
            cell_bounds,
            fluxes: vec![T::zero(); faces.len()],
            faces,
            lower_bound: Some(T::zero()),
        })
    }

    /// Accept states below zero; the viscous problem only satisfies a relaxed
    /// minimum principle.
    pub(crate) fn allow_negative_states(mut self) -> Self {
        self.lower_bound = None;
        self
    }

    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    pub fn cfl(&self) -> T {
        self.cfl
    }

    pub fn faces(&self) -> &[FluxEval<T>] {
        &self.faces
    }

    /// Fluxes of the most recent step.
    pub fn fluxes(&self) -> &[T] {
        &self.fluxes
    }

    fn check_grid(&self, state: &CellField<T>) -> Result<()> {
        if state.grid() != &self.grid {
            return Err(Error::GridMismatch);
        }
        Ok(())
    }

    /// Local wave-speed estimate over the states between `a` and `b`.
    #[inline]
    fn interface_speed(face: &FluxEval<T>, a: T, b: T) -> T {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let ends = face.flux_deriv(lo).abs().max(face.flux_deriv(hi).abs());
        if hi <= lo {
            return ends;
        }
        let step = (hi - lo) / T::from_usize_lossy(SPEED_SAMPLES + 1);
        let mut m = ends;
        for k in 1..=SPEED_SAMPLES {
            m = m.max(face.flux_deriv(lo + step * T::from_usize_lossy(k)).abs());
        }
        m * T::lit(WAVE_SPEED_SAFETY)
    }

    /// Validates one state against the bound of its own cell and returns it
    /// clamped to the interface range `[0, o(x_{i+1/2})]`. Past the interface
    /// bound the flux vanishes, so clamping equals extending `f` by zero.
    #[inline]
    fn admit(&self, q: T, face: &FluxEval<T>, storage: usize) -> Result<T> {
        let tol = T::roundoff_tol();
        let upper = self.cell_bounds[storage];
        let lower = self.lower_bound.unwrap_or(T::neg_infinity());
        if q >= lower - tol && q <= upper + tol {
            return Ok(q.min(face.obstacle()).max(lower));
        }
        let g = self.grid.n_ghost();
        Err(if q.is_finite() {
            Error::StateOutOfBounds {
                cell: storage.saturating_sub(g).min(self.grid.n_cells() - 1),
                value: q.as_f64(),
                lower: lower.as_f64(),
                upper: upper.as_f64(),
            }
        } else {
            Error::NonFinite { location: format!("storage index {storage}"), value: q.as_f64() }
        })
    }

    /// Maximum local wave speed, floored at the free-stream speed 1.
    pub fn max_wave_speed(&self, state: &CellField<T>) -> Result<T> {
        self.check_grid(state)?;
        let v = state.values();
        let g = self.grid.n_ghost();
        let mut lambda = T::one();
        for (j, face) in self.faces.iter().enumerate() {
            let ql = self.admit(v[g + j - 1], face, g + j - 1)?;
            let qr = self.admit(v[g + j], face, g + j)?;
            lambda = lambda.max(Self::interface_speed(face, ql, qr));
        }
        Ok(lambda)
    }

    pub fn stable_dt(&self, state: &CellField<T>) -> Result<T> {
        Ok(self.cfl * self.grid.dx() / self.max_wave_speed(state)?)
    }

    /// Fills `self.fluxes` and returns the maximum wave speed.
    pub(crate) fn compute_fluxes(&mut self, state: &CellField<T>) -> Result<T> {
        self.check_grid(state)?;
        let v = state.values();
        let g = self.grid.n_ghost();
        let mut lambda = T::one();
        for j in 0..self.faces.len() {
            let face = &self.faces[j];
            let ql = self.admit(v[g + j - 1], face, g + j - 1)?;
            let qr = self.admit(v[g + j], face, g + j)?;
            if ql != qr || ql != T::zero() {
                lambda = lambda.max(Self::interface_speed(face, ql, qr));
            }
            self.fluxes[j] = face.riemann(ql, qr);
        }
        Ok(lambda)
    }

    /// Conservative update with the stored fluxes.
    pub(crate) fn apply_fluxes(&self, state: &mut CellField<T>, dt: T) -> T {
        let ratio = dt / self.grid.dx();
        let dx = self.grid.dx();
        let g = self.grid.n_ghost();
        let mut variation = T::zero();
        let values = state.values_mut();
        for (i, w) in self.fluxes.windows(2).enumerate() {
            let delta = ratio * (w[1] - w[0]);
            values[g + i] = values[g + i] - delta;
            variation = variation + delta.abs() * dx;
        }
        state.fill_ghosts();
        state.time = state.time + dt;
        variation
    }

    pub(crate) fn stats(&self, dt: T, lambda: T, variation: T) -> StepStats<T> {
        let n = self.fluxes.len() - 1;
        StepStats {
            dt,
            max_wave_speed: lambda,
            boundary_inflow: self.fluxes[0] * dt,
            boundary_outflow: self.fluxes[n] * dt,
            variation,
        }
    }

    /// One step with a prescribed `dt`, bypassing the CFL choice.
    pub fn advance_fixed(&mut self, state: &mut CellField<T>, dt: T) -> Result<StepStats<T>> {
        let lambda = self.compute_fluxes(state)?;
        let variation = self.apply_fluxes(state, dt);
        Ok(self.stats(dt, lambda, variation))
    }
}

impl<T: Scalar> TimeStepper<T> for GodunovSolver<T> {
    fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    fn advance(&mut self, state: &mut CellField<T>, dt_cap: T) -> Result<StepStats<T>> {
        let lambda = self.compute_fluxes(state)?;
        let dt = (self.cfl * self.grid.dx() / lambda).min(dt_cap);
        let variation = self.apply_fluxes(state, dt);
        Ok(self.stats(dt, lambda, variation))
    }
}

/// Largest step honoring the CFL condition for `state`.
pub fn stable_dt<T: Scalar>(
    state: &CellField<T>,
    obstacle: &Obstacle<T>,
    model: &VelocityModel<T>,
    cfl: T,
) -> Result<T> {
    GodunovSolver::new(*state.grid(), obstacle, *model, cfl)?.stable_dt(state)
}

/// One CFL-limited Godunov step from `state`.
pub fn step<T: Scalar>(
    state: &CellField<T>,
    obstacle: &Obstacle<T>,
    model: &VelocityModel<T>,
    cfl: T,
) -> Result<StepReport<T>> {
    let mut solver = GodunovSolver::new(*state.grid(), obstacle, *model, cfl)?;
    let mut post = state.clone();
    let stats = solver.advance(&mut post, T::infinity())?;
    Ok(StepReport {
        dt_used: stats.dt,
        max_wave_speed: stats.max_wave_speed,
        interface_fluxes: solver.fluxes.clone(),
        post_state: post,
    })
}
