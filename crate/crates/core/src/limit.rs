//! The `eps -> 0` limit: coincidence-region detection, the limit velocity,
//! boundary-curve speeds, front tracking and characteristics.

use crate::error::{Error, Result};
use crate::evolution::Snapshot;
use crate::model::{CellField, Grid, Obstacle};
use crate::velocity::VelocityModel;
use crate::Scalar;

pub const DEFAULT_THRESHOLD: f64 = 0.95;
pub const DEFAULT_TRACE_OFFSET: usize = 3;
/// Cells spanned by the one-sided slope stencil right of `gamma_R`.
pub const SLOPE_STENCIL: usize = 3;
/// Minimum interval width, in cells.
pub const MIN_INTERVAL_CELLS: usize = 2;
const DEGENERATE_TRACE: f64 = 1e-9;

/// Maximal run of marked cells `first..=last`, spanning `[a, b]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval<T> {
    pub a: T,
    pub b: T,
    pub first: usize,
    pub last: usize,
}

impl<T: Scalar> Interval<T> {
    pub fn new(a: T, b: T) -> Result<Self> {
        if !(a < b) {
            return Err(Error::InvalidInput(format!("interval [{a}, {b}] is empty")));
        }
        Ok(Self { a, b, first: 0, last: 0 })
    }

    pub fn width(&self) -> T {
        self.b - self.a
    }

    pub fn contains(&self, x: T) -> bool {
        x >= self.a && x <= self.b
    }
}

/// Approximate contact set `{q = o}` at one time.
#[derive(Debug, Clone, PartialEq)]
pub struct CoincidenceRegion<T> {
    pub time: T,
    /// Sorted, disjoint.
    pub intervals: Vec<Interval<T>>,
    pub threshold: T,
}

impl<T: Scalar> CoincidenceRegion<T> {
    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    /// Region from explicit intervals; they must be sorted and disjoint.
    pub fn from_intervals(time: T, intervals: Vec<Interval<T>>, threshold: T) -> Result<Self> {
        if intervals.windows(2).any(|w| w[0].b >= w[1].a) {
            return Err(Error::InvalidInput("intervals must be sorted and disjoint".into()));
        }
        Ok(Self { time, intervals, threshold })
    }

    /// Copy with each right edge moved to its refined position
    /// (see [`refine_right_edge`]).
    pub fn refined(&self, state: &CellField<T>, obstacle: &Obstacle<T>, model: &VelocityModel<T>) -> Self {
        let mut out = self.clone();
        let n = out.intervals.len();
        for j in 0..n {
            let limit = if j + 1 < n { out.intervals[j + 1].a } else { state.grid().x_max() };
            let edge = refine_right_edge(state, obstacle, model, &self.intervals[j], DEFAULT_TRACE_OFFSET, limit);
            out.intervals[j].b = edge.position;
        }
        out
    }
}

pub fn detect_coincidence<T: Scalar>(
    state: &CellField<T>,
    obstacle: &Obstacle<T>,
    model: &VelocityModel<T>,
    threshold: T,
) -> Result<CoincidenceRegion<T>> {
    if !(threshold > T::zero() && threshold < T::one()) {
        return Err(Error::InvalidInput(format!("threshold must lie in (0, 1), got {threshold}")));
    }
    let grid = state.grid();
    let mut intervals = Vec::new();
    let mut run: Option<usize> = None;
    let n = grid.n_cells();
    for (i, &q) in state.interior().iter().enumerate() {
        let s = (obstacle.eval(grid.center(i)) - q).max(T::zero());
        let marked = model.value_unchecked(s) <= threshold;
        match (marked, run) {
            (true, None) => run = Some(i),
            (false, Some(start)) => {
                push_run(&mut intervals, grid, start, i - 1);
                run = None;
            }
            _ => {}
        }
    }
    if let Some(start) = run {
        push_run(&mut intervals, grid, start, n - 1);
    }
    Ok(CoincidenceRegion { time: state.time, intervals, threshold })
}

fn push_run<T: Scalar>(out: &mut Vec<Interval<T>>, grid: &Grid<T>, first: usize, last: usize) {
    if last + 1 - first >= MIN_INTERVAL_CELLS {
        out.push(Interval {
            a: grid.interface(first),
            b: grid.interface(last + 1),
            first,
            last,
        });
    }
}

/// Right edge of the contact set located from the limit profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RefinedEdge<T> {
    pub position: T,
    /// Estimate of `o(gamma_R)`: `V o` averaged over the cells just inside
    /// the detected edge.
    pub level: T,
    /// The search stopped at a local minimum of `o`.
    pub at_minimum: bool,
}

/// On a contact interval `V* o = o(gamma_R)`. The detected edge `b` stops
/// where `V` reaches the threshold, short of `gamma_R`. Starting at `b`, march
/// right while `o` decreases and return the first point where `o` drops to
/// the estimated level, or the local minimum of `o` if it is reached first.
pub fn refine_right_edge<T: Scalar>(
    state: &CellField<T>,
    obstacle: &Obstacle<T>,
    model: &VelocityModel<T>,
    interval: &Interval<T>,
    trace_offset: usize,
    limit: T,
) -> RefinedEdge<T> {
    let grid = state.grid();
    let q = state.interior();
    let lo = interval.last.saturating_sub(trace_offset.max(1) - 1).max(interval.first);
    let level = (lo..=interval.last)
        .map(|i| {
            let o = obstacle.eval(grid.center(i));
            model.value_unchecked((o - q[i]).max(T::zero())) * o
        })
        .sum::<T>()
        / T::from_usize_lossy(interval.last + 1 - lo);
    let h = grid.dx() * T::lit(0.25);
    let mut x = interval.b;
    let mut ox = obstacle.eval(x);
    let edge = |position, at_minimum| RefinedEdge { position, level, at_minimum };
    if ox <= level {
        return edge(x, false);
    }
    while x + h <= limit {
        let xn = x + h;
        let on = obstacle.eval(xn);
        if on > ox {
            return edge(x, true);
        }
        if on <= level {
            let (mut l, mut r) = (x, xn);
            for _ in 0..60 {
                let m = T::lit(0.5) * (l + r);
                if obstacle.eval(m) > level {
                    l = m;
                } else {
                    r = m;
                }
            }
            return edge(T::lit(0.5) * (l + r), false);
        }
        x = xn;
        ox = on;
    }
    edge(x, false)
}

/// Limit velocity sampled at cell centers.
#[derive(Debug, Clone, PartialEq)]
pub struct LimitVelocity<T> {
    pub x: Vec<T>,
    pub v: Vec<T>,
    /// Per interval: `o` fails to be strictly decreasing on it, so the
    /// profile is computed outside the setting where it is proven.
    pub outside_hypotheses: Vec<bool>,
}

/// `V*(x) = o(b_j)/o(x)` on `[a_j, b_j]`, `1` elsewhere, at the centers of `grid`.
pub fn limit_velocity_profile<T: Scalar>(
    obstacle: &Obstacle<T>,
    region: &CoincidenceRegion<T>,
    grid: &Grid<T>,
) -> Result<LimitVelocity<T>> {
    let x: Vec<T> = grid.centers().collect();
    let mut v = vec![T::one(); x.len()];
    let mut outside = Vec::with_capacity(region.intervals.len());
    for iv in &region.intervals {
        let ob = obstacle.eval(iv.b);
        check_positive(obstacle, iv, grid.dx())?;
        let mut decreasing = true;
        for (xi, vi) in x.iter().zip(v.iter_mut()) {
            if iv.contains(*xi) {
                *vi = ob / obstacle.eval(*xi);
                decreasing &= obstacle.deriv(*xi) < T::zero();
            }
        }
        outside.push(!decreasing);
    }
    Ok(LimitVelocity { x, v, outside_hypotheses: outside })
}

fn check_positive<T: Scalar>(obstacle: &Obstacle<T>, iv: &Interval<T>, dx: T) -> Result<()> {
    let n = ((iv.width() / dx).ceil().to_usize().unwrap_or(0)).max(1);
    for k in 0..=n {
        let x = iv.a + iv.width() * T::from_usize_lossy(k) / T::from_usize_lossy(n);
        let o = obstacle.eval(x);
        if !(o > T::zero()) {
            return Err(Error::NonPositiveObstacle { x: x.as_f64(), value: o.as_f64() });
        }
    }
    Ok(())
}

/// Pointwise optimal velocity on a family of contact intervals:
/// `o(b)/o(x)` for `x` in some `[a, b]`, otherwise `1`.
pub fn optimal_velocity<T: Scalar>(obstacle: &Obstacle<T>, intervals: &[Interval<T>], x: T) -> T {
    match intervals.iter().find(|iv| iv.contains(x)) {
        Some(iv) => obstacle.eval(iv.b) / obstacle.eval(x),
        None => T::one(),
    }
}

/// Speed of the left boundary curve: `(o(gamma_R) - q^L)/(o(gamma_L) - q^L)`.
pub fn gamma_l_speed<T: Scalar>(o_at_l: T, o_at_r: T, ql_trace: T) -> Result<T> {
    let gap = o_at_l - ql_trace;
    if gap.abs() < T::lit(DEGENERATE_TRACE) {
        return Err(Error::DegenerateTrace { gap: gap.as_f64() });
    }
    Ok((o_at_r - ql_trace) / gap)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ContactKind {
    Jump,
    Smooth,
}

impl ContactKind {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Jump => "jump",
            Self::Smooth => "smooth",
        }
    }
}

/// Speed of the right boundary curve: `1` behind a jump, otherwise
/// `q_x^R/(q_x^R - o')`, which needs `q_x^R < o' < 0`.
pub fn gamma_r_speed<T: Scalar>(qx_r: T, o_prime_at_r: T, kind: ContactKind) -> Result<T> {
    match kind {
        ContactKind::Jump => Ok(T::one()),
        ContactKind::Smooth => {
            if qx_r < o_prime_at_r && o_prime_at_r < T::zero() {
                Ok(qx_r / (qx_r - o_prime_at_r))
            } else {
                Err(Error::InapplicableRegime { qx: qx_r.as_f64(), o_prime: o_prime_at_r.as_f64() })
            }
        }
    }
}

/// How the right edge touches the outside state.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RightContact {
    Jump,
    Smooth,
    /// Edge parked at a local minimum of the obstacle.
    Stationary,
}

impl RightContact {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Jump => "jump",
            Self::Smooth => "smooth",
            Self::Stationary => "stationary",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrontOptions<T> {
    pub threshold: T,
    pub trace_offset: usize,
    /// Which interval to follow, counted from the left.
    pub interval: usize,
    /// Move `gamma_R` to the point the limit profile places it.
    pub refine_right: bool,
    /// `o(gamma_R) - q^R` above this classifies the contact as a jump.
    /// `None` uses `4 eps ln(1/(1 - threshold))`, a few boundary-layer widths.
    pub jump_gap: Option<T>,
}

impl<T: Scalar> Default for FrontOptions<T> {
    fn default() -> Self {
        Self {
            threshold: T::lit(DEFAULT_THRESHOLD),
            trace_offset: DEFAULT_TRACE_OFFSET,
            interval: 0,
            refine_right: true,
            jump_gap: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrontSample<T> {
    pub time: T,
    pub gamma_l: T,
    pub gamma_r: T,
    /// Right edge as detected, before refinement.
    pub gamma_r_detected: T,
    pub q_l: Option<T>,
    pub q_r: Option<T>,
    pub qx_r: Option<T>,
    pub contact: RightContact,
    pub speed_l_measured: Option<T>,
    pub speed_l_predicted: Option<T>,
    pub speed_r_measured: Option<T>,
    pub speed_r_predicted: Option<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrontState<T> {
    pub samples: Vec<FrontSample<T>>,
    /// The followed interval disappeared before the last snapshot.
    pub truncated: bool,
    /// Times at which the number of intervals dropped.
    pub merge_events: Vec<T>,
    pub options: FrontOptions<T>,
}

impl<T: Scalar> FrontState<T> {
    pub fn gamma_l(&self) -> Vec<(T, T)> {
        self.samples.iter().map(|s| (s.time, s.gamma_l)).collect()
    }

    pub fn gamma_r(&self) -> Vec<(T, T)> {
        self.samples.iter().map(|s| (s.time, s.gamma_r)).collect()
    }
}

fn traces<T: Scalar>(
    state: &CellField<T>,
    obstacle: &Obstacle<T>,
    model: &VelocityModel<T>,
    iv: &Interval<T>,
    limit: T,
    opts: &FrontOptions<T>,
) -> FrontSample<T> {
    let grid = state.grid();
    let q = state.interior();
    let n = grid.n_cells();
    let k = opts.trace_offset;
    let (gamma_r, at_minimum) = if opts.refine_right {
        let e = refine_right_edge(state, obstacle, model, iv, k, limit);
        (e.position, e.at_minimum)
    } else {
        (iv.b, false)
    };
    let q_l = iv.first.checked_sub(k).map(|i| q[i]);
    // first cell fully right of gamma_R
    let jr = grid.locate(gamma_r).map(|j| if grid.center(j) < gamma_r { j + 1 } else { j });
    let (q_r, qx_r) = match jr.map(|j| j + k) {
        Some(j) if j + SLOPE_STENCIL < n => {
            let qx = (q[j + SLOPE_STENCIL] - q[j]) / (T::from_usize_lossy(SLOPE_STENCIL) * grid.dx());
            (Some(q[j]), Some(qx))
        }
        Some(j) if j < n => (Some(q[j]), None),
        _ => (None, None),
    };
    let (o_r, o_prime_r) = {
        let (o, d, _) = obstacle.jet(gamma_r);
        (o, d)
    };
    let jump_gap = opts
        .jump_gap
        .unwrap_or_else(|| T::lit(4.0) * model.epsilon() * (T::one() / (T::one() - opts.threshold)).ln());
    let contact = if at_minimum || o_prime_r >= T::zero() {
        RightContact::Stationary
    } else if q_r.is_some_and(|v| o_r - v > jump_gap) {
        RightContact::Jump
    } else {
        RightContact::Smooth
    };
    let speed_l_predicted = q_l.and_then(|ql| gamma_l_speed(obstacle.eval(iv.a), o_r, ql).ok());
    let speed_r_predicted = match contact {
        RightContact::Stationary => Some(T::zero()),
        RightContact::Jump => Some(T::one()),
        RightContact::Smooth => qx_r.and_then(|qx| gamma_r_speed(qx, o_prime_r, ContactKind::Smooth).ok()),
    };
    FrontSample {
        time: state.time,
        gamma_l: iv.a,
        gamma_r,
        gamma_r_detected: iv.b,
        q_l,
        q_r,
        qx_r,
        contact,
        speed_l_measured: None,
        speed_l_predicted,
        speed_r_measured: None,
        speed_r_predicted,
    }
}

/// Follows one contact interval through a sequence of states ordered in time.
/// Leading states without the interval are skipped; once it has appeared, its
/// disappearance truncates the track.
pub fn track_fronts<'a, T, I>(
    states: I,
    obstacle: &Obstacle<T>,
    model: &VelocityModel<T>,
    opts: FrontOptions<T>,
) -> Result<FrontState<T>>
where
    T: Scalar,
    I: IntoIterator<Item = &'a CellField<T>>,
{
    let mut samples: Vec<FrontSample<T>> = Vec::new();
    let mut merge_events = Vec::new();
    let mut truncated = false;
    let mut last_count: Option<usize> = None;
    for state in states {
        let region = detect_coincidence(state, obstacle, model, opts.threshold)?;
        let count = region.intervals.len();
        if let Some(prev) = last_count {
            if count < prev && count > 0 {
                merge_events.push(state.time);
            }
        }
        let Some(iv) = region.intervals.get(opts.interval) else {
            if !samples.is_empty() {
                truncated = true;
                break;
            }
            continue;
        };
        last_count = Some(count);
        let limit = region
            .intervals
            .get(opts.interval + 1)
            .map_or(state.grid().x_max(), |next| next.a);
        samples.push(traces(state, obstacle, model, iv, limit, &opts));
    }
    if samples.len() < 2 {
        return Err(Error::InvalidInput(format!(
            "front tracking needs at least 2 states with a contact interval, found {}",
            samples.len()
        )));
    }
    let l: Vec<_> = samples.iter().map(|s| (s.time, s.gamma_l)).collect();
    let r: Vec<_> = samples.iter().map(|s| (s.time, s.gamma_r)).collect();
    let (dl, dr) = (time_derivative(&l), time_derivative(&r));
    for (s, (a, b)) in samples.iter_mut().zip(dl.into_iter().zip(dr)) {
        s.speed_l_measured = a;
        s.speed_r_measured = b;
    }
    Ok(FrontState { samples, truncated, merge_events, options: opts })
}

/// Convenience wrapper over evolution snapshots.
pub fn track_snapshot_fronts<T: Scalar>(
    snapshots: &[Snapshot<T>],
    obstacle: &Obstacle<T>,
    model: &VelocityModel<T>,
    opts: FrontOptions<T>,
) -> Result<FrontState<T>> {
    track_fronts(snapshots.iter().map(|s| &s.field), obstacle, model, opts)
}

/// Central differences inside, one-sided at the ends.
fn time_derivative<T: Scalar>(curve: &[(T, T)]) -> Vec<Option<T>> {
    let n = curve.len();
    (0..n)
        .map(|k| {
            let (lo, hi) = (k.saturating_sub(1), (k + 1).min(n - 1));
            let dt = curve[hi].0 - curve[lo].0;
            (dt > T::zero()).then(|| (curve[hi].1 - curve[lo].1) / dt)
        })
        .collect()
}

/// Velocity field `v(t, x)` for characteristic integration.
pub trait VelocityField<T> {
    fn velocity(&self, t: T, x: T) -> T;
    /// Spatial extent; leaving it ends the integration.
    fn extent(&self) -> (T, T);
    /// Integration step.
    fn step(&self) -> T;
}

/// Velocity sampled at cell centers at a sequence of times, interpolated
/// linearly in `t` and `x` with constant extension.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledVelocity<T> {
    grid: Grid<T>,
    times: Vec<T>,
    values: Vec<Vec<T>>,
}

impl<T: Scalar> SampledVelocity<T> {
    pub fn new(grid: Grid<T>, times: Vec<T>, values: Vec<Vec<T>>) -> Result<Self> {
        if times.is_empty() || times.len() != values.len() {
            return Err(Error::InvalidInput("need one velocity profile per sample time".into()));
        }
        if times.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidInput("sample times must be strictly increasing".into()));
        }
        if values.iter().any(|v| v.len() != grid.n_cells()) {
            return Err(Error::GridMismatch);
        }
        Ok(Self { grid, times, values })
    }

    /// `V_eps(o - q)` of each snapshot.
    pub fn from_snapshots(snapshots: &[Snapshot<T>], obstacle: &Obstacle<T>, model: &VelocityModel<T>) -> Result<Self> {
        let grid = *snapshots
            .first()
            .ok_or_else(|| Error::InvalidInput("no snapshots".into()))?
            .field
            .grid();
        let values = snapshots
            .iter()
            .map(|s| crate::diagnostics::velocity_field(&s.field, obstacle, model))
            .collect();
        Self::new(grid, snapshots.iter().map(|s| s.time).collect(), values)
    }

    fn at(&self, k: usize, x: T) -> T {
        let g = &self.grid;
        let u = (x - g.center(0)) / g.dx();
        let v = &self.values[k];
        if u <= T::zero() {
            return v[0];
        }
        let i = u.floor().to_usize().unwrap_or(usize::MAX);
        if i + 1 >= v.len() {
            return v[v.len() - 1];
        }
        let w = u - T::from_usize_lossy(i);
        v[i] + w * (v[i + 1] - v[i])
    }
}

impl<T: Scalar> VelocityField<T> for SampledVelocity<T> {
    fn velocity(&self, t: T, x: T) -> T {
        let n = self.times.len();
        if n == 1 || t <= self.times[0] {
            return self.at(0, x);
        }
        if t >= self.times[n - 1] {
            return self.at(n - 1, x);
        }
        let k = self.times.partition_point(|&s| s <= t) - 1;
        let w = (t - self.times[k]) / (self.times[k + 1] - self.times[k]);
        let (a, b) = (self.at(k, x), self.at(k + 1, x));
        a + w * (b - a)
    }

    fn extent(&self) -> (T, T) {
        (self.grid.x_min(), self.grid.x_max())
    }

    fn step(&self) -> T {
        self.grid.dx() * T::lit(0.5)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CharacteristicEnd<T> {
    pub position: T,
    pub time: T,
    /// Left the field's extent before `t1`; `position` and `time` are at exit.
    pub exited: bool,
}

/// Solves `x' = v(t, x)`, `x(t0) = x0` up to `t1` with classical RK4.
pub fn integrate_characteristic<T: Scalar, F: VelocityField<T>>(
    v: &F,
    t0: T,
    x0: T,
    t1: T,
) -> Result<CharacteristicEnd<T>> {
    let (lo, hi) = v.extent();
    if !(x0 >= lo && x0 <= hi) {
        return Err(Error::InvalidInput(format!("start {x0} outside [{lo}, {hi}]")));
    }
    let h0 = v.step();
    if !(h0 > T::zero()) || !t0.is_finite() || !t1.is_finite() {
        return Err(Error::InvalidInput("invalid integration span or step".into()));
    }
    let span = t1 - t0;
    let steps = (span.abs() / h0).ceil().to_usize().unwrap_or(0).max(1);
    let h = span / T::from_usize_lossy(steps);
    let half = T::lit(0.5);
    let sixth = T::one() / T::lit(6.0);
    let two = T::lit(2.0);
    let mut x = x0;
    for k in 0..steps {
        let t = t0 + h * T::from_usize_lossy(k);
        let k1 = v.velocity(t, x);
        let k2 = v.velocity(t + half * h, x + half * h * k1);
        let k3 = v.velocity(t + half * h, x + half * h * k2);
        let k4 = v.velocity(t + h, x + h * k3);
        let xn = x + h * sixth * (k1 + two * k2 + two * k3 + k4);
        if !xn.is_finite() {
            return Err(Error::NonFinite { location: "characteristic".into(), value: xn.as_f64() });
        }
        if xn < lo || xn > hi {
            let edge = if xn < lo { lo } else { hi };
            let frac = (edge - x) / (xn - x);
            return Ok(CharacteristicEnd { position: edge, time: t + frac * h, exited: true });
        }
        x = xn;
    }
    Ok(CharacteristicEnd { position: x, time: t1, exited: false })
}

/// `dx * sum ((q_i - o(x_i))^+)^2`.
pub fn obstacle_violation<T: Scalar>(state: &CellField<T>, obstacle: &Obstacle<T>) -> T {
    let g = state.grid();
    let s: T = state
        .interior()
        .iter()
        .enumerate()
        .map(|(i, &q)| {
            let e = (q - obstacle.eval(g.center(i))).max(T::zero());
            e * e
        })
        .sum();
    s * g.dx()
}
