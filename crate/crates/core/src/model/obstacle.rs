use std::str::FromStr;

use crate::error::{Error, Result};
use crate::model::Table;
use crate::Scalar;

/// Which obstacle profile an [`Obstacle`] evaluates.
#[derive(Debug, Clone, PartialEq)]
pub enum ObstacleKind<T> {
    /// `-exp(-x^2) + 3/2`
    O1,
    /// Two Gaussian stalactites at `x = -1/2` and `x = 0`.
    O2,
    /// `min(max(|x|, 1/2), 3/2)`; not differentiable.
    O3,
    /// `3/2 - tanh(x)/2`: smooth, strictly decreasing, finite limits.
    MonotoneDecreasing,
    Constant(T),
    Tabulated(Table<T>),
}

/// Analytic upper bound `o(x)` on the density, with first and second derivatives.
#[derive(Debug, Clone, PartialEq)]
pub struct Obstacle<T> {
    kind: ObstacleKind<T>,
}

/// Catalog names accepted by [`builtin_obstacle`].
pub const BUILTIN_OBSTACLES: [&str; 4] = ["o1", "o2", "o3", "monotone_decreasing_test"];

pub fn builtin_obstacle<T: Scalar>(name: &str) -> Result<Obstacle<T>> {
    let kind = match name {
        "o1" => ObstacleKind::O1,
        "o2" => ObstacleKind::O2,
        "o3" => ObstacleKind::O3,
        "monotone_decreasing_test" => ObstacleKind::MonotoneDecreasing,
        other => {
            return Err(Error::InvalidInput(format!(
                "unknown obstacle '{other}', expected one of {BUILTIN_OBSTACLES:?}"
            )))
        }
    };
    Ok(Obstacle { kind })
}

impl<T: Scalar> FromStr for Obstacle<T> {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        builtin_obstacle(s)
    }
}

#[inline]
fn gaussian<T: Scalar>(x: T, center: T, rate: T) -> (T, T, T) {
    let d = x - center;
    let g = (-rate * d * d).exp();
    let two = T::lit(2.0);
    (g, -two * rate * d * g, (T::lit(4.0) * rate * rate * d * d - two * rate) * g)
}

impl<T: Scalar> Obstacle<T> {
    pub fn new(kind: ObstacleKind<T>) -> Result<Self> {
        if let ObstacleKind::Constant(c) = kind {
            if !(c.is_finite() && c > T::zero()) {
                return Err(Error::InvalidInput(format!("constant obstacle must be positive, got {c}")));
            }
        }
        Ok(Self { kind })
    }

    pub fn constant(value: T) -> Result<Self> {
        Self::new(ObstacleKind::Constant(value))
    }

    pub fn tabulated(table: Table<T>) -> Self {
        Self { kind: ObstacleKind::Tabulated(table) }
    }

    pub fn kind(&self) -> &ObstacleKind<T> {
        &self.kind
    }

    pub fn name(&self) -> String {
        match &self.kind {
            ObstacleKind::O1 => "o1".into(),
            ObstacleKind::O2 => "o2".into(),
            ObstacleKind::O3 => "o3".into(),
            ObstacleKind::MonotoneDecreasing => "monotone_decreasing_test".into(),
            ObstacleKind::Constant(c) => format!("constant({c})"),
            ObstacleKind::Tabulated(_) => "tabulated".into(),
        }
    }

    /// False for profiles lacking the smoothness the theory assumes.
    pub fn is_regular(&self) -> bool {
        !matches!(self.kind, ObstacleKind::O3 | ObstacleKind::Tabulated(_))
    }

    /// Value, first and second derivative at `x`.
    pub fn jet(&self, x: T) -> (T, T, T) {
        let half = T::lit(0.5);
        let three_halves = T::lit(1.5);
        match &self.kind {
            ObstacleKind::O1 => {
                let (g, g1, g2) = gaussian(x, T::zero(), T::one());
                (three_halves - g, -g1, -g2)
            }
            ObstacleKind::O2 => {
                let twenty = T::lit(20.0);
                let (a, a1, a2) = gaussian(x, -half, twenty);
                let (b, b1, b2) = gaussian(x, T::zero(), twenty);
                let w = T::lit(2.0 / 3.0);
                (three_halves - w * a - b, -w * a1 - b1, -w * a2 - b2)
            }
            ObstacleKind::O3 => {
                let ax = x.abs();
                let v = ax.max(half).min(three_halves);
                let d = if ax > half && ax < three_halves { x.signum() } else { T::zero() };
                (v, d, T::zero())
            }
            ObstacleKind::MonotoneDecreasing => {
                let th = x.tanh();
                let sech2 = T::one() - th * th;
                (three_halves - half * th, -half * sech2, sech2 * th)
            }
            ObstacleKind::Constant(c) => (*c, T::zero(), T::zero()),
            ObstacleKind::Tabulated(t) => (t.eval(x), t.slope(x), t.curvature(x)),
        }
    }

    #[inline]
    pub fn eval(&self, x: T) -> T {
        match &self.kind {
            ObstacleKind::O1 => T::lit(1.5) - (-x * x).exp(),
            _ => self.jet(x).0,
        }
    }

    pub fn deriv(&self, x: T) -> T {
        self.jet(x).1
    }

    pub fn deriv2(&self, x: T) -> T {
        self.jet(x).2
    }
}
