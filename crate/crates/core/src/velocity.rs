//! Smooth regularizations `V_eps` of the Heaviside function.
//!
//! Each model maps a separation `s = o - q >= 0` to a speed in `[0, 1]`.
//! Only the exponential kind satisfies every structural assumption of the
//! theory; the other two are kept because they are simulated alongside it.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VelocityKind {
    /// `1 - exp(-s/eps)`
    Exponential,
    /// `(tanh(s/eps) + 1) / 2`; `V(0) = 1/2`.
    Tanh,
    /// `min(max(s/eps, 0), 1)`; kink at `s = eps`.
    ClippedLinear,
}

impl VelocityKind {
    pub const ALL: [VelocityKind; 3] = [Self::Exponential, Self::Tanh, Self::ClippedLinear];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Exponential => "exponential",
            Self::Tanh => "tanh",
            Self::ClippedLinear => "clipped_linear",
        }
    }

    /// Whether the kind meets the smooth-Heaviside assumptions (`V(0) = 0`,
    /// smoothness, `V''/V'` bounded away from zero).
    pub fn satisfies_assumptions(self) -> bool {
        matches!(self, Self::Exponential)
    }
}

impl fmt::Display for VelocityKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for VelocityKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::InvalidInput(format!("unknown velocity kind '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VelocityModel<T> {
    kind: VelocityKind,
    epsilon: T,
}

/// Structural constants at unit scale (`eps = 1`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelConstants<T> {
    /// `inf V''/V'`; `None` where the ratio is undefined.
    pub v21_minus: Option<T>,
    /// `sup V''/V'`.
    pub v21_plus: Option<T>,
    /// `sup |V''/V'|`.
    pub ratio_bound: Option<T>,
    /// `sup |V'|` on `[0, inf)`.
    pub deriv_bound: T,
}

impl<T: Scalar> VelocityModel<T> {
    pub fn new(kind: VelocityKind, epsilon: T) -> Result<Self> {
        if !(epsilon.is_finite() && epsilon > T::zero()) {
            return Err(Error::InvalidInput(format!("epsilon must be positive, got {epsilon}")));
        }
        Ok(Self { kind, epsilon })
    }

    pub fn exponential(epsilon: T) -> Result<Self> {
        Self::new(VelocityKind::Exponential, epsilon)
    }

    pub fn kind(&self) -> VelocityKind {
        self.kind
    }

    pub fn epsilon(&self) -> T {
        self.epsilon
    }

    #[inline]
    fn check(s: T) -> Result<()> {
        if s < T::zero() || s.is_nan() {
            Err(Error::NegativeSeparation { separation: s.as_f64() })
        } else {
            Ok(())
        }
    }

    pub fn value(&self, s: T) -> Result<T> {
        Self::check(s)?;
        Ok(self.value_unchecked(s))
    }

    pub fn deriv(&self, s: T) -> Result<T> {
        Self::check(s)?;
        Ok(self.value_and_deriv(s).1)
    }

    pub fn deriv2(&self, s: T) -> Result<T> {
        Self::check(s)?;
        let z = s / self.epsilon;
        let e2 = self.epsilon * self.epsilon;
        Ok(match self.kind {
            VelocityKind::Exponential => -(-z).exp() / e2,
            VelocityKind::Tanh => {
                let th = z.tanh();
                -th * (T::one() - th * th) / e2
            }
            VelocityKind::ClippedLinear => T::zero(),
        })
    }

    /// `value` without the sign check; callers guarantee `s >= 0`.
    #[inline]
    pub fn value_unchecked(&self, s: T) -> T {
        let z = s / self.epsilon;
        match self.kind {
            VelocityKind::Exponential => -(-z).exp_m1(),
            VelocityKind::Tanh => (z.tanh() + T::one()) * T::lit(0.5),
            VelocityKind::ClippedLinear => z.max(T::zero()).min(T::one()),
        }
    }

    /// Value and first derivative from a single transcendental evaluation.
    #[inline]
    pub fn value_and_deriv(&self, s: T) -> (T, T) {
        let z = s / self.epsilon;
        match self.kind {
            VelocityKind::Exponential => {
                let e = (-z).exp();
                (T::one() - e, e / self.epsilon)
            }
            VelocityKind::Tanh => {
                let th = z.tanh();
                let half = T::lit(0.5);
                ((th + T::one()) * half, (T::one() - th * th) * half / self.epsilon)
            }
            VelocityKind::ClippedLinear => {
                // left derivative at the kink
                let d = if z <= T::one() { T::one() / self.epsilon } else { T::zero() };
                (z.max(T::zero()).min(T::one()), d)
            }
        }
    }

    /// `sup V_eps'` on `[threshold, inf)`. `V_eps'` is nonincreasing for every kind.
    pub fn lip_on_tail(&self, threshold: T) -> T {
        self.value_and_deriv(threshold.max(T::zero())).1
    }

    pub fn constants(&self) -> ModelConstants<T> {
        match self.kind {
            VelocityKind::Exponential => ModelConstants {
                v21_minus: Some(-T::one()),
                v21_plus: Some(-T::one()),
                ratio_bound: Some(T::one()),
                deriv_bound: T::one(),
            },
            // V''/V' = -2 tanh(z) on [0, inf)
            VelocityKind::Tanh => ModelConstants {
                v21_minus: Some(T::lit(-2.0)),
                v21_plus: Some(T::zero()),
                ratio_bound: Some(T::lit(2.0)),
                deriv_bound: T::lit(0.5),
            },
            VelocityKind::ClippedLinear => ModelConstants {
                v21_minus: None,
                v21_plus: None,
                ratio_bound: None,
                deriv_bound: T::one(),
            },
        }
    }
}

/// Pointwise limit of the regularizations as `eps -> 0`, for the kinds with
/// `V(0) = 0`: zero at contact, one at any positive separation.
pub fn pointwise_limit<T: Scalar>(s: T) -> T {
    if s > T::zero() {
        T::one()
    } else {
        T::zero()
    }
}
