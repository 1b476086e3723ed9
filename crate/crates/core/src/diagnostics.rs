//! Measured functionals: mass, total variation, one-sided Lipschitz slopes,
//! bound checks and L1 distances.

use crate::error::{Error, Result};
use crate::limit::obstacle_violation;
use crate::model::{CellField, Grid, InitialDatum, Obstacle};
use crate::velocity::VelocityModel;
use crate::Scalar;

/// `dx * sum q_i` over interior cells.
pub fn mass<T: Scalar>(state: &CellField<T>) -> T {
    state.interior().iter().copied().sum::<T>() * state.grid().dx()
}

/// `q_i - o(x_i)` on interior cells.
fn gap<T: Scalar>(state: &CellField<T>, obstacle: &Obstacle<T>) -> Vec<T> {
    let g = state.grid();
    state.interior().iter().enumerate().map(|(i, &q)| q - obstacle.eval(g.center(i))).collect()
}

/// `sum |Delta(q - o)|` over interior interfaces.
pub fn total_variation<T: Scalar>(state: &CellField<T>, obstacle: &Obstacle<T>) -> T {
    gap(state, obstacle).windows(2).map(|w| (w[1] - w[0]).abs()).sum()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OslSlopes<T> {
    /// `min (g_{i+1} - g_i) / dx` for `g = q - o`.
    pub min_slope_q_minus_o: T,
    /// `max (v_{i+1} - v_i) / dx` for `v = V_eps(o - q)`.
    pub max_slope_velocity: T,
}

/// Velocity `V_eps(o - q)` at interior cell centers; separations below zero
/// (roundoff) are treated as contact.
pub fn velocity_field<T: Scalar>(state: &CellField<T>, obstacle: &Obstacle<T>, model: &VelocityModel<T>) -> Vec<T> {
    let g = state.grid();
    state
        .interior()
        .iter()
        .enumerate()
        .map(|(i, &q)| model.value_unchecked((obstacle.eval(g.center(i)) - q).max(T::zero())))
        .collect()
}

pub fn osl_slopes<T: Scalar>(state: &CellField<T>, obstacle: &Obstacle<T>, model: &VelocityModel<T>) -> OslSlopes<T> {
    let dx = state.grid().dx();
    let min_slope = gap(state, obstacle)
        .windows(2)
        .map(|w| (w[1] - w[0]) / dx)
        .fold(T::infinity(), T::min);
    let max_slope = velocity_field(state, obstacle, model)
        .windows(2)
        .map(|w| (w[1] - w[0]) / dx)
        .fold(T::neg_infinity(), T::max);
    OslSlopes { min_slope_q_minus_o: min_slope, max_slope_velocity: max_slope }
}

/// `dx * sum |a_i - b_i|` over interior cells.
pub fn l1_distance<T: Scalar>(a: &CellField<T>, b: &CellField<T>) -> Result<T> {
    if a.grid() != b.grid() {
        return Err(Error::GridMismatch);
    }
    let s: T = a.interior().iter().zip(b.interior()).map(|(x, y)| (*x - *y).abs()).sum();
    Ok(s * a.grid().dx())
}

/// One row of measured diagnostics for a snapshot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagnosticsRecord<T> {
    pub time: T,
    pub mass: T,
    pub tv_q_minus_o: T,
    pub min_q: T,
    pub max_q_minus_o: T,
    pub osl_min_slope_q_minus_o: T,
    pub osl_max_slope_velocity: T,
    pub violation_l2: T,
}

impl<T: Scalar> DiagnosticsRecord<T> {
    pub fn measure(state: &CellField<T>, obstacle: &Obstacle<T>, model: &VelocityModel<T>) -> Self {
        let slopes = osl_slopes(state, obstacle, model);
        Self {
            time: state.time,
            mass: mass(state),
            tv_q_minus_o: total_variation(state, obstacle),
            min_q: state.interior().iter().copied().fold(T::infinity(), T::min),
            max_q_minus_o: gap(state, obstacle).into_iter().fold(T::neg_infinity(), T::max),
            osl_min_slope_q_minus_o: slopes.min_slope_q_minus_o,
            osl_max_slope_velocity: slopes.max_slope_velocity,
            violation_l2: obstacle_violation(state, obstacle),
        }
    }

    pub fn is_finite(&self) -> bool {
        [
            self.time,
            self.mass,
            self.tv_q_minus_o,
            self.min_q,
            self.max_q_minus_o,
            self.osl_min_slope_q_minus_o,
            self.osl_max_slope_velocity,
            self.violation_l2,
        ]
        .iter()
        .all(|v| v.is_finite())
    }
}

/// Sampled sup-norms of the obstacle and its derivatives on a grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObstacleNorms<T> {
    pub inf: T,
    pub sup_deriv: T,
    pub sup_deriv2: T,
    /// `dx * sum |o''(x_i)|`
    pub l1_deriv2: T,
}

impl<T: Scalar> ObstacleNorms<T> {
    pub fn sample(obstacle: &Obstacle<T>, grid: &Grid<T>) -> Self {
        let mut n = Self {
            inf: T::infinity(),
            sup_deriv: T::zero(),
            sup_deriv2: T::zero(),
            l1_deriv2: T::zero(),
        };
        for x in grid.centers() {
            let (o, d1, d2) = obstacle.jet(x);
            n.inf = n.inf.min(o);
            n.sup_deriv = n.sup_deriv.max(d1.abs());
            n.sup_deriv2 = n.sup_deriv2.max(d2.abs());
            n.l1_deriv2 = n.l1_deriv2 + d2.abs() * grid.dx();
        }
        n
    }
}

/// Lower bound shape for the slope of `q - o` at time `t`:
/// `min(-2 |o'|, initial min slope of q0 - o) - t |o''|`.
pub fn osl_lower_bound<T: Scalar>(norms: &ObstacleNorms<T>, initial_min_slope: T, t: T) -> T {
    (-T::lit(2.0) * norms.sup_deriv).min(initial_min_slope) - t * norms.sup_deriv2
}

/// Reference constants of the velocity OSL estimate, evaluated for a model's
/// unit-scale constants. Logged only; they are not certified bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OslReference<T> {
    pub k0: T,
    pub c0: T,
    pub v: T,
    pub c1: T,
    pub c2: T,
}

pub fn osl_reference<T: Scalar>(
    model: &VelocityModel<T>,
    obstacle: &Obstacle<T>,
    initial: &InitialDatum<T>,
    grid: &Grid<T>,
    t_end: T,
) -> Option<OslReference<T>> {
    let consts = model.constants();
    let (v21_plus, v) = (consts.v21_plus?, consts.ratio_bound?);
    if v21_plus >= T::zero() {
        return None;
    }
    let norms = ObstacleNorms::sample(obstacle, grid);
    let q0 = CellField::from_interior(
        *grid,
        &grid.centers().map(|x| initial.eval(x)).collect::<Vec<_>>(),
        T::zero(),
    )
    .ok()?;
    let c0 = gap(&q0, obstacle).into_iter().map(|g| -g).fold(T::infinity(), T::min);
    let initial_slope = osl_slopes(&q0, obstacle, model).min_slope_q_minus_o;
    let two = T::lit(2.0);
    let vp = consts.deriv_bound;
    let denom = v21_plus * norms.inf;
    let a = (v + two * vp) * norms.sup_deriv / denom;
    let radicand = a * a + two * vp * (-norms.sup_deriv2 - T::one()) / denom;
    Some(OslReference {
        k0: norms.inf / two,
        c0,
        v,
        c1: radicand.max(T::zero()).sqrt() + two * a,
        c2: -osl_lower_bound(&norms, initial_slope, t_end),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{builtin_initial, builtin_obstacle, project_to_cells};

    fn grid() -> Grid<f64> {
        Grid::with_spacing(-4.0, 8.0, 0.5, 1).unwrap()
    }

    #[test]
    fn mass_of_indicator_and_zero() {
        let g = grid();
        let q3 = builtin_initial("q3").unwrap();
        let p = project_to_cells(|x| q3.eval(x), &g).unwrap();
        assert!((mass(&p) - 0.5).abs() <= g.dx());
        assert_eq!(mass(&CellField::zeros(g)), 0.0);
    }

    #[test]
    fn total_variation_cases() {
        let g = grid();
        let c = Obstacle::constant(1.5).unwrap();
        let flat = project_to_cells(|_| 0.4, &g).unwrap();
        assert_eq!(total_variation(&flat, &c), 0.0);
        let q3 = builtin_initial("q3").unwrap();
        let p = project_to_cells(|x| q3.eval(x), &g).unwrap();
        assert!((total_variation(&p, &c) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn linear_profile_has_uniform_slope() {
        let g = grid();
        let c = Obstacle::constant(100.0).unwrap();
        let m = VelocityModel::exponential(0.1).unwrap();
        let p = project_to_cells(|x| 0.25 * x + 2.0, &g).unwrap();
        let s = osl_slopes(&p, &c, &m);
        assert!((s.min_slope_q_minus_o - 0.25).abs() < 1e-12);
    }

    #[test]
    fn l1_distance_cases() {
        let g = grid();
        let q1 = builtin_initial("q1").unwrap();
        let a = project_to_cells(|x| q1.eval(x), &g).unwrap();
        assert_eq!(l1_distance(&a, &a).unwrap(), 0.0);
        let b = project_to_cells(|x| q1.eval(x) + 0.125, &g).unwrap();
        assert!((l1_distance(&a, &b).unwrap() - 0.125 * 12.0).abs() < 1e-12);
        let other = CellField::zeros(Grid::new(-4.0, 8.0, 10, 1).unwrap());
        assert_eq!(l1_distance(&a, &other), Err(Error::GridMismatch));
    }

    #[test]
    fn record_is_finite_and_reproducible() {
        let g = grid();
        let o = builtin_obstacle("o1").unwrap();
        let q1 = builtin_initial("q1").unwrap();
        let m = VelocityModel::exponential(1.0 / 64.0).unwrap();
        let p = project_to_cells(|x| q1.eval(x), &g).unwrap();
        let r = DiagnosticsRecord::measure(&p, &o, &m);
        assert!(r.is_finite());
        assert!(r.max_q_minus_o < 0.0);
        assert_eq!(r, DiagnosticsRecord::measure(&p, &o, &m));
    }

    #[test]
    fn reference_constants_for_the_exponential_model() {
        let g = Grid::with_spacing(-4.0, 8.0, 1e-3, 1).unwrap();
        let o = builtin_obstacle("o1").unwrap();
        let q1 = builtin_initial("q1").unwrap();
        let m = VelocityModel::<f64>::exponential(1.0 / 64.0).unwrap();
        let r = osl_reference(&m, &o, &q1, &g, 1.0).unwrap();
        assert!((r.k0 - 0.25).abs() < 1e-6);
        assert_eq!(r.v, 1.0);
        assert!(r.c0 > 0.0 && r.c1.is_finite() && r.c2 > 0.0);
        let tanh = VelocityModel::new(crate::velocity::VelocityKind::Tanh, 0.1).unwrap();
        assert!(osl_reference(&tanh, &o, &q1, &g, 1.0).is_none());
    }
}
