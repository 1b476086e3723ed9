//! Viscous approximation `q_t + (V_eps(o - q) q)_x = nu (q - o)_xx` with a
//! mollified initial datum.

use crate::error::{Error, Result};
use crate::evolution::{evolve_with, Evolution, EvolveFailure, StepStats, TimeStepper};
use crate::godunov::{GodunovSolver, StepReport};
use crate::model::{project_to_cells, validate_scenario, CellField, Grid, InitialDatum, Obstacle, Scenario};
use crate::velocity::VelocityModel;
use crate::Scalar;

/// Explicit diffusion limit `dt <= PARABOLIC_SAFETY * dx^2 / nu`. The step
/// combines it harmonically with the hyperbolic limit, which keeps
/// `lambda dt/dx + 2 nu dt/dx^2 < 1`.
pub const PARABOLIC_SAFETY: f64 = 0.4;

/// Smallest mollifier width, in cells, that still resolves the kernel.
pub const MOLLIFIER_FLOOR_CELLS: f64 = 2.0;

#[derive(Debug, Clone, PartialEq)]
pub struct ViscousConfig<T> {
    pub nu: T,
    pub mollifier_width: T,
    pub base: Scenario<T>,
}

impl<T: Scalar> ViscousConfig<T> {
    /// Couples the mollifier width to `nu`, raised to the resolvable floor
    /// `2 dx` where `nu` is smaller.
    pub fn new(nu: T, base: Scenario<T>) -> Result<Self> {
        if !(nu.is_finite() && nu > T::zero()) {
            return Err(Error::InvalidInput(format!("viscosity must be positive, got {nu}")));
        }
        let width = nu.max(mollifier_floor(&base.grid));
        Ok(Self { nu, mollifier_width: width, base })
    }

    /// Uses an explicit mollifier width; widths below the floor are rejected.
    pub fn with_mollifier_width(nu: T, width: T, base: Scenario<T>) -> Result<Self> {
        let mut cfg = Self::new(nu, base)?;
        check_width(width, &cfg.base.grid)?;
        cfg.mollifier_width = width;
        Ok(cfg)
    }
}

pub fn mollifier_floor<T: Scalar>(grid: &Grid<T>) -> T {
    T::lit(MOLLIFIER_FLOOR_CELLS) * grid.dx()
}

fn check_width<T: Scalar>(width: T, grid: &Grid<T>) -> Result<()> {
    let floor = mollifier_floor(grid);
    if !(width >= floor) {
        return Err(Error::InvalidInput(format!(
            "mollifier width {width} is below the floor 2*dx = {floor}"
        )));
    }
    Ok(())
}

/// Standard bump `exp(1 / (z^2 - 1))` on `(-1, 1)`, unnormalized.
fn bump<T: Scalar>(z: T) -> T {
    let z2 = z * z;
    if z2 >= T::one() {
        T::zero()
    } else {
        (T::one() / (z2 - T::one())).exp()
    }
}

/// Discrete convolution of the projected datum with the standard mollifier
/// of radius `width`, normalized to unit discrete sum.
pub fn mollify<T: Scalar>(q0: &InitialDatum<T>, width: T, grid: &Grid<T>) -> Result<CellField<T>> {
    check_width(width, grid)?;
    let projected = project_to_cells(|x| q0.eval(x), grid)?;
    let reach = (width / grid.dx()).floor().to_usize().unwrap_or(0);
    let mut kernel: Vec<T> = (0..=2 * reach)
        .map(|k| {
            let offset = T::from_usize_lossy(k) - T::from_usize_lossy(reach);
            bump(offset * grid.dx() / width)
        })
        .collect();
    let total: T = kernel.iter().copied().sum();
    kernel.iter_mut().for_each(|w| *w = *w / total);

    let src = projected.interior();
    let n = src.len() as isize;
    let out: Vec<T> = (0..n)
        .map(|i| {
            kernel
                .iter()
                .enumerate()
                .map(|(k, &w)| {
                    let j = (i + k as isize - reach as isize).clamp(0, n - 1);
                    w * src[j as usize]
                })
                .sum()
        })
        .collect();
    CellField::from_interior(*grid, &out, T::zero())
}

/// Godunov convection plus centered diffusion of `q - o`, with `o''` taken
/// analytically at cell centers.
#[derive(Debug, Clone)]
pub struct ViscousSolver<T> {
    inner: GodunovSolver<T>,
    nu: T,
    curvature: Vec<T>,
    increments: Vec<T>,
}

impl<T: Scalar> ViscousSolver<T> {
    pub fn new(grid: Grid<T>, obstacle: &Obstacle<T>, model: VelocityModel<T>, nu: T, cfl: T) -> Result<Self> {
        if !(nu.is_finite() && nu >= T::zero()) {
            return Err(Error::InvalidInput(format!("viscosity must be nonnegative, got {nu}")));
        }
        Ok(Self {
            inner: GodunovSolver::new(grid, obstacle, model, cfl)?.allow_negative_states(),
            nu,
            curvature: grid.centers().map(|x| obstacle.deriv2(x)).collect(),
            increments: vec![T::zero(); grid.n_cells()],
        })
    }

    pub fn nu(&self) -> T {
        self.nu
    }

    pub fn fluxes(&self) -> &[T] {
        self.inner.fluxes()
    }

    /// `1 / (1/dt_hyperbolic + 1/dt_parabolic)`.
    fn combined_dt(&self, lambda: T) -> T {
        let dx = self.inner.grid().dx();
        let rate = lambda / (self.inner.cfl() * dx) + self.nu / (T::lit(PARABOLIC_SAFETY) * dx * dx);
        rate.recip()
    }
}

impl<T: Scalar> TimeStepper<T> for ViscousSolver<T> {
    fn grid(&self) -> &Grid<T> {
        self.inner.grid()
    }

    fn advance(&mut self, state: &mut CellField<T>, dt_cap: T) -> Result<StepStats<T>> {
        let lambda = self.inner.compute_fluxes(state)?;
        let grid = *self.inner.grid();
        let dx = grid.dx();
        let dt = self.combined_dt(lambda).min(dt_cap);
        let ratio = dt / dx;
        let diff = self.nu * dt / (dx * dx);
        let source = self.nu * dt;
        let g = grid.n_ghost();
        let v = state.values();
        let fluxes = self.inner.fluxes();
        for (i, inc) in self.increments.iter_mut().enumerate() {
            let k = g + i;
            let laplace = v[k + 1] - T::lit(2.0) * v[k] + v[k - 1];
            *inc = -ratio * (fluxes[i + 1] - fluxes[i]) + diff * laplace - source * self.curvature[i];
        }
        let mut variation = T::zero();
        for (q, &inc) in state.interior_mut().iter_mut().zip(&self.increments) {
            *q = *q + inc;
            variation = variation + inc.abs() * dx;
        }
        state.fill_ghosts();
        state.time = state.time + dt;
        let n = fluxes.len() - 1;
        Ok(StepStats {
            dt,
            max_wave_speed: lambda,
            boundary_inflow: fluxes[0] * dt,
            boundary_outflow: fluxes[n] * dt,
            variation,
        })
    }
}

/// One viscous step limited by both the hyperbolic CFL and the parabolic bound.
pub fn viscous_step<T: Scalar>(
    state: &CellField<T>,
    obstacle: &Obstacle<T>,
    model: &VelocityModel<T>,
    nu: T,
    cfl: T,
) -> Result<StepReport<T>> {
    let mut solver = ViscousSolver::new(*state.grid(), obstacle, *model, nu, cfl)?;
    let mut post = state.clone();
    let stats = solver.advance(&mut post, T::infinity())?;
    Ok(StepReport {
        dt_used: stats.dt,
        max_wave_speed: stats.max_wave_speed,
        interface_fluxes: solver.fluxes().to_vec(),
        post_state: post,
    })
}

/// Mollifies the initial datum and runs the viscous scheme.
pub fn evolve_viscous<T: Scalar>(
    config: &ViscousConfig<T>,
    force: bool,
) -> std::result::Result<Evolution<T>, EvolveFailure<T>> {
    let fail = |error| EvolveFailure { time: T::zero(), snapshots: Vec::new(), error };
    let base = &config.base;
    let violations = validate_scenario(base);
    if !violations.is_empty() && !force {
        return Err(fail(Error::Inadmissible(violations.len())));
    }
    let initial = mollify(&base.initial, config.mollifier_width, &base.grid).map_err(fail)?;
    let mut solver =
        ViscousSolver::new(base.grid, &base.obstacle, base.velocity, config.nu, base.cfl).map_err(fail)?;
    evolve_with(&mut solver, initial, &base.snapshot_times, base.t_end)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{builtin_initial, builtin_obstacle, Table};

    fn grid() -> Grid<f64> {
        Grid::with_spacing(-4.0, 8.0, 1e-2, 1).unwrap()
    }

    #[test]
    fn constant_datum_is_unchanged() {
        let g = grid();
        let c = InitialDatum::tabulated(Table::new(vec![-10.0, 10.0], vec![0.3, 0.3]).unwrap());
        let m = mollify(&c, 0.1, &g).unwrap();
        assert!(m.values().iter().all(|&v| (v - 0.3).abs() < 1e-15));
    }

    #[test]
    fn mass_is_preserved() {
        let g = grid();
        for name in ["q1", "q2", "q3"] {
            let q0 = builtin_initial(name).unwrap();
            let p = project_to_cells(|x| q0.eval(x), &g).unwrap();
            let m = mollify(&q0, 0.07, &g).unwrap();
            let (a, b) = (p.interior().iter().sum::<f64>(), m.interior().iter().sum::<f64>());
            assert!((a - b).abs() <= 1e-12 * a, "{name}");
        }
    }

    #[test]
    fn indicator_transitions_stay_within_the_kernel_radius() {
        let g = Grid::<f64>::with_spacing(-4.0, 8.0, 1e-3, 1).unwrap();
        let q3 = builtin_initial("q3").unwrap();
        let width = 0.05f64;
        let m = mollify(&q3, width, &g).unwrap();
        for (i, &v) in m.interior().iter().enumerate() {
            assert!((0.0..=1.0 + 1e-15).contains(&v));
            if v > 1e-14 && v < 1.0 - 1e-14 {
                let x = g.center(i);
                let d = (x + 1.5).abs().min((x + 1.0).abs());
                assert!(d <= width + g.dx(), "x = {x} lies {d} from a jump");
            }
        }
        // nontrivial smoothing actually happened
        let layer = m.interior().iter().filter(|&&v| v > 1e-3 && v < 1.0 - 1e-3).count();
        assert!(layer as f64 * g.dx() > width);
    }

    #[test]
    fn unresolvable_width_is_rejected() {
        let g = grid();
        let q1 = builtin_initial::<f64>("q1").unwrap();
        let err = mollify(&q1, 0.015, &g).unwrap_err();
        assert!(err.to_string().contains("floor"));
    }

    #[test]
    fn obstacle_is_diffusion_neutral() {
        let g = Grid::<f64>::with_spacing(-1.0, 1.0, 1e-2, 1).unwrap();
        let o = builtin_obstacle("o1").unwrap();
        let model = VelocityModel::exponential(0.05).unwrap();
        // q = o - c on a window: the discrete (q - o)'' is the stencil error of o only
        let f = project_to_cells(|x| (o.eval(x) - 0.2) * ((x.abs() < 0.5) as i32 as f64), &g).unwrap();
        let dt = 0.5 * crate::godunov::step(&f, &o, &model, 0.45).unwrap().dt_used;
        let advance = |nu: f64| {
            let mut post = f.clone();
            let stats = ViscousSolver::new(g, &o, model, nu, 0.45).unwrap().advance(&mut post, dt).unwrap();
            assert_eq!(stats.dt, dt);
            post
        };
        let (post, inviscid) = (advance(1e-3), advance(0.0));
        for i in 0..g.n_cells() {
            let x = g.center(i);
            if x.abs() < 0.45 {
                let diff = post.interior()[i] - inviscid.interior()[i];
                assert!(diff.abs() < 1e-3 * dt * 1e-2, "x = {x}: {diff}");
            }
        }
    }

    #[test]
    fn diffusive_part_vanishes_linearly_in_nu() {
        let g = Grid::with_spacing(-4.0, 8.0, 1e-2, 1).unwrap();
        let o = builtin_obstacle("o1").unwrap();
        let model = VelocityModel::exponential(1.0 / 64.0).unwrap();
        let q1 = builtin_initial("q1").unwrap();
        let f = project_to_cells(|x| q1.eval(x), &g).unwrap();
        let base = crate::godunov::step(&f, &o, &model, 0.45).unwrap();
        assert_eq!(base.dt_used, ViscousSolver::new(g, &o, model, 0.0, 0.45).unwrap().advance(&mut f.clone(), 1.0).unwrap().dt);
        let dt = 0.5 * base.dt_used;
        let advance = |nu: f64| {
            let mut post = f.clone();
            ViscousSolver::new(g, &o, model, nu, 0.45).unwrap().advance(&mut post, dt).unwrap();
            post
        };
        let inviscid = advance(0.0);
        let deviation = |nu: f64| {
            advance(nu)
                .interior()
                .iter()
                .zip(inviscid.interior())
                .map(|(a, b)| (a - b).abs())
                .sum::<f64>()
        };
        let (d1, d2) = (deviation(1e-4), deviation(5e-5));
        assert!((d1 / d2 - 2.0).abs() < 1e-8, "{d1} {d2}");
        assert_eq!(deviation(0.0), 0.0);
    }

    #[test]
    fn combined_step_stays_monotone() {
        let g = Grid::<f64>::with_spacing(-2.0, 1.5, 2e-3, 1).unwrap();
        let o = builtin_obstacle("o1").unwrap();
        let model = VelocityModel::exponential(1.0 / 64.0).unwrap();
        let f = project_to_cells(|x| builtin_initial::<f64>("q1").unwrap().eval(x), &g).unwrap();
        for nu in [1e-4, 1e-3, 4e-3, 1e-1] {
            let mut s = ViscousSolver::new(g, &o, model, nu, 0.45).unwrap();
            let stats = s.advance(&mut f.clone(), f64::INFINITY).unwrap();
            let sum = stats.max_wave_speed * stats.dt / g.dx() + 2.0 * nu * stats.dt / (g.dx() * g.dx());
            assert!(sum < 0.81, "nu={nu}: {sum}");
            assert!(stats.dt <= PARABOLIC_SAFETY * g.dx() * g.dx() / nu);
        }
    }

    #[test]
    fn floor_clamps_the_coupled_width() {
        let s = Scenario::new(
            builtin_obstacle("o1").unwrap(),
            builtin_initial("q1").unwrap(),
            VelocityModel::exponential(1.0 / 64.0).unwrap(),
            Grid::<f64>::with_spacing(-4.0, 8.0, 2e-3, 1).unwrap(),
            1.0,
            0.45,
            vec![1.0],
        )
        .unwrap();
        let c = ViscousConfig::new(1e-3, s.clone()).unwrap();
        assert!((c.mollifier_width - 4e-3).abs() < 1e-15);
        assert_eq!(ViscousConfig::new(8e-3, s.clone()).unwrap().mollifier_width, 8e-3);
        assert!(ViscousConfig::with_mollifier_width(1e-3, 1e-3, s.clone()).is_err());
        assert!(ViscousConfig::new(0.0, s).is_err());
    }
}
