use obstacle_core::diagnostics::mass;
use obstacle_core::evolution::TimeStepper;
use obstacle_core::godunov::{evolve, godunov_flux, FluxEval, GodunovSolver};
use obstacle_core::limit::{gamma_r_speed, limit_velocity_profile, optimal_velocity, CoincidenceRegion, ContactKind, Interval};
use obstacle_core::model::{builtin_initial, builtin_obstacle, project_to_cells, CellField, Grid, Scenario};
use obstacle_core::velocity::{VelocityKind, VelocityModel};
use obstacle_core::viscous::{evolve_viscous, ViscousConfig};
use proptest::prelude::*;

const SAMPLES: usize = 10_000;

fn reference_velocity(kind: VelocityKind, eps: f64, s: f64) -> f64 {
    let s = s.max(0.0);
    match kind {
        VelocityKind::Exponential => -(-s / eps).exp_m1(),
        VelocityKind::Tanh => 0.5 * ((s / eps).tanh() + 1.0),
        VelocityKind::ClippedLinear => (s / eps).clamp(0.0, 1.0),
    }
}

/// Extremum of `f` over `[a, b]` by dense sampling, then dense sampling
/// again between the neighbours of the best sample.
fn sampled_extremum(f: impl Fn(f64) -> f64, a: f64, b: f64, maximize: bool) -> f64 {
    let better = |x: f64, y: f64| if maximize { x > y } else { x < y };
    let scan = |a: f64, b: f64| {
        let h = (b - a) / SAMPLES as f64;
        let (mut best_k, mut best) = (0, f(a));
        for k in 1..=SAMPLES {
            let v = f(a + h * k as f64);
            if better(v, best) {
                best_k = k;
                best = v;
            }
        }
        (a + h * best_k as f64, h, best)
    };
    if a == b {
        return f(a);
    }
    let (x, h, coarse) = scan(a, b);
    let (_, _, fine) = scan((x - h).max(a), (x + h).min(b));
    if better(fine, coarse) {
        fine
    } else {
        coarse
    }
}

fn kind_strategy() -> impl Strategy<Value = VelocityKind> {
    prop::sample::select(VelocityKind::ALL.to_vec())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn godunov_flux_matches_a_sampled_extremum(
        kind in kind_strategy(),
        k in 2.0f64..10.0,
        o in 0.05f64..3.0,
        a in 0.0f64..=1.0,
        b in 0.0f64..=1.0,
    ) {
        let eps = 2f64.powf(-k);
        let model = VelocityModel::new(kind, eps).unwrap();
        let fe = FluxEval::new(o, model).unwrap();
        let (ql, qr) = (a * o, b * o);
        let f = |q: f64| reference_velocity(kind, eps, o - q) * q;
        let oracle = if ql <= qr {
            sampled_extremum(f, ql, qr, false)
        } else {
            sampled_extremum(f, qr, ql, true)
        };
        let got = godunov_flux(ql, qr, &fe).unwrap();
        prop_assert!((got - oracle).abs() <= 1e-6, "{kind:?} eps={eps} o={o} ql={ql} qr={qr}: {got} vs {oracle}");
    }
}

fn admissible_state(grid: &Grid<f64>, fractions: &[f64]) -> CellField<f64> {
    let o = builtin_obstacle::<f64>("o1").unwrap();
    let values: Vec<f64> = grid.centers().zip(fractions).map(|(x, f)| f * o.eval(x)).collect();
    CellField::from_interior(*grid, &values, 0.0).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn one_step_preserves_ordering(
        base in prop::collection::vec(0.0f64..0.95, 40),
        bump in prop::collection::vec(0.0f64..0.3, 40),
        k in 3.0f64..9.0,
    ) {
        let grid = Grid::new(-2.0, 1.5, 40, 1).unwrap();
        let o = builtin_obstacle::<f64>("o1").unwrap();
        let model = VelocityModel::exponential(2f64.powf(-k)).unwrap();
        let upper: Vec<f64> = base.iter().zip(&bump).map(|(a, b)| (a + b).min(0.99)).collect();
        let mut lo = admissible_state(&grid, &base);
        let mut hi = admissible_state(&grid, &upper);
        let mut solver = GodunovSolver::new(grid, &o, model, 0.45).unwrap();
        let dt = solver.stable_dt(&lo).unwrap().min(solver.stable_dt(&hi).unwrap());
        let (sa, sb) = (solver.advance(&mut lo, dt).unwrap(), solver.advance(&mut hi, dt).unwrap());
        prop_assert_eq!(sa.dt, sb.dt);
        for (i, (a, b)) in lo.interior().iter().zip(hi.interior()).enumerate() {
            prop_assert!(a <= b, "cell {}: {} > {}", i, a, b);
        }
    }

    #[test]
    fn projection_is_linear(a in -3.0f64..3.0, b in -3.0f64..3.0, n in 8usize..200) {
        let grid = Grid::new(-4.0, 8.0, n, 1).unwrap();
        let o = builtin_obstacle::<f64>("o2").unwrap();
        let q = builtin_initial::<f64>("q2").unwrap();
        let combined = project_to_cells(|x| a * o.eval(x) + b * q.eval(x), &grid).unwrap();
        let po = project_to_cells(|x| o.eval(x), &grid).unwrap();
        let pq = project_to_cells(|x| q.eval(x), &grid).unwrap();
        let sum = po.combine(a, &pq, b).unwrap();
        for (x, y) in combined.interior().iter().zip(sum.interior()) {
            prop_assert!((x - y).abs() <= 1e-13 * (1.0 + x.abs()), "{} vs {}", x, y);
        }
    }

    #[test]
    fn velocity_increases_as_eps_shrinks(kind in kind_strategy(), s in 1e-6f64..2.0) {
        let values: Vec<f64> = (5..=10)
            .map(|k| VelocityModel::new(kind, 2f64.powi(-k)).unwrap().value(s).unwrap())
            .collect();
        for w in values.windows(2) {
            prop_assert!(w[0] <= w[1], "{:?}", values);
        }
    }

    #[test]
    fn smooth_contact_is_faster_than_free_transport(o_prime in -50.0f64..-1e-3, excess in 1e-6f64..50.0) {
        let speed = gamma_r_speed(o_prime - excess, o_prime, ContactKind::Smooth).unwrap();
        prop_assert!(speed > 1.0);
    }

    #[test]
    fn limit_profile_agrees_with_the_optimal_velocity(
        cuts in prop::collection::btree_set(0usize..600, 2..12),
        n in 50usize..600,
    ) {
        let grid = Grid::new(-4.0, 8.0, n, 1).unwrap();
        let o = builtin_obstacle::<f64>("o2").unwrap();
        let pts: Vec<f64> = cuts.iter().map(|&c| -4.0 + 12.0 * c as f64 / 600.0).collect();
        let intervals: Vec<Interval<f64>> = pts
            .chunks_exact(2)
            .map(|p| Interval::new(p[0], p[1]).unwrap())
            .collect();
        let region = CoincidenceRegion::from_intervals(0.0, intervals.clone(), 0.95).unwrap();
        let profile = limit_velocity_profile(&o, &region, &grid).unwrap();
        for (&x, &v) in profile.x.iter().zip(&profile.v) {
            prop_assert_eq!(v.to_bits(), optimal_velocity(&o, &intervals, x).to_bits());
        }
    }

    #[test]
    fn limit_velocity_is_positive_and_bounded_where_the_obstacle_decreases(a in -3.9f64..-0.2, w in 0.01f64..3.0) {
        let o = builtin_obstacle::<f64>("o1").unwrap();
        let b = (a + w).min(-0.01);
        prop_assume!(b > a);
        let grid = Grid::new(-4.0, 8.0, 600, 1).unwrap();
        let region = CoincidenceRegion::from_intervals(0.0, vec![Interval::new(a, b).unwrap()], 0.95).unwrap();
        let profile = limit_velocity_profile(&o, &region, &grid).unwrap();
        prop_assert!(profile.v.iter().all(|&v| v > 0.0 && v <= 1.0));
        prop_assert!(!profile.outside_hypotheses[0]);
    }
}

fn desk_scenario<T: obstacle_core::Scalar>(dx: T, t_end: T) -> Scenario<T> {
    Scenario::new(
        builtin_obstacle("o1").unwrap(),
        builtin_initial("q1").unwrap(),
        VelocityModel::exponential(T::lit(1.0 / 32.0)).unwrap(),
        Grid::with_spacing(T::lit(-2.0), T::lit(1.5), dx, 1).unwrap(),
        t_end,
        T::lit(0.45),
        vec![T::zero(), t_end],
    )
    .unwrap()
}

#[test]
fn single_precision_run_respects_the_obstacle() {
    let s = desk_scenario::<f32>(1e-2, 0.5);
    let ev = evolve(&s, true).unwrap();
    let fin = &ev.final_state;
    let grid = *fin.grid();
    let o = &s.obstacle;
    for (x, &q) in grid.centers().zip(fin.interior()) {
        assert!(q.is_finite() && q >= -1e-6 && q < o.eval(x), "x={x} q={q}");
    }
    let m0 = mass(&ev.snapshots[0].field);
    let drift = (mass(fin) - m0 - ev.boundary_net_inflow).abs();
    assert!(drift <= 1e-4 * m0, "drift {drift}");
}

#[test]
fn viscous_mass_drift_is_bounded_by_obstacle_curvature() {
    let base = desk_scenario::<f64>(1e-2, 0.5);
    let grid = base.grid;
    let curvature_l1: f64 = grid.centers().map(|x| base.obstacle.deriv2(x).abs()).sum::<f64>() * grid.dx();
    for nu in [4e-2, 1e-2] {
        let cfg = ViscousConfig::new(nu, base.clone()).unwrap();
        let ev = evolve_viscous(&cfg, true).unwrap();
        let drift = mass(&ev.final_state) - mass(&ev.snapshots[0].field) - ev.boundary_net_inflow;
        let bound = base.t_end * nu * curvature_l1;
        assert!(drift.abs() <= 2.0 * bound, "nu={nu}: drift {drift}, bound {bound}");
        assert!(drift.abs() > 0.0);
    }
}
