use crate::error::{Error, Result};
use crate::model::{Grid, InitialDatum, Obstacle};
use crate::velocity::VelocityModel;
use crate::Scalar;

/// One experiment: data, regularization, grid and output times.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario<T> {
    pub obstacle: Obstacle<T>,
    pub initial: InitialDatum<T>,
    pub velocity: VelocityModel<T>,
    pub grid: Grid<T>,
    pub t_end: T,
    pub cfl: T,
    pub snapshot_times: Vec<T>,
}

impl<T: Scalar> Scenario<T> {
    pub const DEFAULT_CFL: f64 = 0.45;

    pub fn new(
        obstacle: Obstacle<T>,
        initial: InitialDatum<T>,
        velocity: VelocityModel<T>,
        grid: Grid<T>,
        t_end: T,
        cfl: T,
        snapshot_times: Vec<T>,
    ) -> Result<Self> {
        if !(t_end.is_finite() && t_end >= T::zero()) {
            return Err(Error::InvalidInput(format!("t_end must be nonnegative, got {t_end}")));
        }
        if !(cfl > T::zero() && cfl < T::one()) {
            return Err(Error::InvalidInput(format!("cfl must lie in (0, 1), got {cfl}")));
        }
        if snapshot_times.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidInput("snapshot times must be strictly increasing".into()));
        }
        if let Some(t) = snapshot_times.iter().find(|&&t| !(t >= T::zero() && t <= t_end)) {
            return Err(Error::InvalidInput(format!("snapshot time {t} outside [0, {t_end}]")));
        }
        Ok(Self { obstacle, initial, velocity, grid, t_end, cfl, snapshot_times })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Severity {
    Warning,
    Error,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViolationKind {
    NegativeInitialDatum,
    /// `q0 < o` fails.
    StrictSeparation,
    NonPositiveObstacle,
    /// Obstacle still varying at a domain edge, so its limit is not resolved.
    ObstacleNotFlatAtEdge,
    /// Datum known to lack the regularity the theory assumes.
    IrregularData,
}

/// One violated standing assumption over a contiguous run of sample points.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation<T> {
    pub kind: ViolationKind,
    pub severity: Severity,
    /// `[first, last]` offending sample positions.
    pub location: (T, T),
    /// Worst offending value (e.g. `q0 - o`, `-q0`, `o`).
    pub worst: T,
}

const EDGE_SLOPE_TOL: f64 = 1e-2;

/// Checks the standing assumptions at cell centers and interfaces.
///
/// Data the theory explicitly excludes (`o3`, `q3`) only produce warnings.
pub fn validate_scenario<T: Scalar>(s: &Scenario<T>) -> Vec<Violation<T>> {
    let irregular = !s.obstacle.is_regular() || !s.initial.is_regular();
    let severity = if irregular { Severity::Warning } else { Severity::Error };

    let grid = &s.grid;
    let half = grid.dx() * T::lit(0.5);
    let samples: Vec<T> = (0..=2 * grid.n_cells())
        .map(|k| grid.x_min() + half * T::from_usize_lossy(k))
        .collect();

    let mut out = Vec::new();
    let mut scan = |kind: ViolationKind, bad: &dyn Fn(T) -> Option<T>| {
        let mut run: Option<(T, T, T)> = None;
        for &x in &samples {
            match (bad(x), run.as_mut()) {
                (Some(w), Some(r)) => {
                    r.1 = x;
                    r.2 = r.2.max(w);
                }
                (Some(w), None) => run = Some((x, x, w)),
                (None, Some(_)) => {
                    let (a, b, w) = run.take().unwrap();
                    out.push(Violation { kind, severity, location: (a, b), worst: w });
                }
                (None, None) => {}
            }
        }
        if let Some((a, b, w)) = run {
            out.push(Violation { kind, severity, location: (a, b), worst: w });
        }
    };

    let (o, q0) = (&s.obstacle, &s.initial);
    scan(ViolationKind::NegativeInitialDatum, &|x| {
        let v = q0.eval(x);
        (v < T::zero()).then_some(-v)
    });
    scan(ViolationKind::StrictSeparation, &|x| {
        let gap = q0.eval(x) - o.eval(x);
        (gap >= T::zero()).then_some(gap)
    });
    scan(ViolationKind::NonPositiveObstacle, &|x| {
        let v = o.eval(x);
        (v <= T::zero()).then_some(-v)
    });

    for x in [grid.x_min(), grid.x_max()] {
        let slope = o.deriv(x).abs();
        if slope > T::lit(EDGE_SLOPE_TOL) {
            out.push(Violation {
                kind: ViolationKind::ObstacleNotFlatAtEdge,
                severity: Severity::Warning,
                location: (x, x),
                worst: slope,
            });
        }
    }
    if irregular {
        out.push(Violation {
            kind: ViolationKind::IrregularData,
            severity: Severity::Warning,
            location: (grid.x_min(), grid.x_max()),
            worst: T::zero(),
        });
    }
    out
}
