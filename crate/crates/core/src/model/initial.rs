use std::str::FromStr;

use crate::error::{Error, Result};
use crate::model::Table;
use crate::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub enum InitialKind<T> {
    /// `chi_[-1.5,-1](x) - x chi_(-1,0](x)`
    Q1,
    /// Two smooth quartic bumps centered at `x = -1` and `x = 1`.
    Q2,
    /// `chi_[-1.5,-1](x)`; discontinuous, no one-sided Lipschitz bound.
    Q3,
    Tabulated(Table<T>),
}

/// Initial density `q0(x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct InitialDatum<T> {
    kind: InitialKind<T>,
}

pub const BUILTIN_INITIAL: [&str; 3] = ["q1", "q2", "q3"];

pub fn builtin_initial<T: Scalar>(name: &str) -> Result<InitialDatum<T>> {
    let kind = match name {
        "q1" => InitialKind::Q1,
        "q2" => InitialKind::Q2,
        "q3" => InitialKind::Q3,
        other => {
            return Err(Error::InvalidInput(format!(
                "unknown initial datum '{other}', expected one of {BUILTIN_INITIAL:?}"
            )))
        }
    };
    Ok(InitialDatum { kind })
}

impl<T: Scalar> FromStr for InitialDatum<T> {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        builtin_initial(s)
    }
}

impl<T: Scalar> InitialDatum<T> {
    pub fn tabulated(table: Table<T>) -> Self {
        Self { kind: InitialKind::Tabulated(table) }
    }

    pub fn kind(&self) -> &InitialKind<T> {
        &self.kind
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            InitialKind::Q1 => "q1",
            InitialKind::Q2 => "q2",
            InitialKind::Q3 => "q3",
            InitialKind::Tabulated(_) => "tabulated",
        }
    }

    /// False for data without the one-sided Lipschitz bound the theory assumes.
    pub fn is_regular(&self) -> bool {
        !matches!(self.kind, InitialKind::Q3)
    }

    pub fn eval(&self, x: T) -> T {
        let plateau = |x: T| {
            if x >= T::lit(-1.5) && x <= -T::one() {
                T::one()
            } else {
                T::zero()
            }
        };
        match &self.kind {
            InitialKind::Q1 => {
                let ramp = if x > -T::one() && x <= T::zero() { -x } else { T::zero() };
                plateau(x) + ramp
            }
            InitialKind::Q2 => {
                let bump = |c: T| {
                    let d = x - c;
                    let b = (T::one() - T::lit(3.0) * d * d).max(T::zero());
                    b * b
                };
                bump(-T::one()) + bump(T::one())
            }
            InitialKind::Q3 => plateau(x),
            InitialKind::Tabulated(t) => t.eval(x),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(name: &str) -> InitialDatum<f64> {
        builtin_initial(name).unwrap()
    }

    #[test]
    fn catalog_values() {
        assert_eq!(q("q1").eval(-1.25), 1.0);
        assert_eq!(q("q1").eval(-0.5), 0.5);
        assert_eq!(q("q1").eval(-1.0), 1.0);
        assert_eq!(q("q1").eval(0.0), 0.0);
        assert_eq!(q("q1").eval(0.1), 0.0);
        assert_eq!(q("q2").eval(-1.0), 1.0);
        assert_eq!(q("q2").eval(0.0), 0.0);
        assert_eq!(q("q3").eval(-1.0), 1.0);
        assert_eq!(q("q3").eval(-0.99), 0.0);
        assert!(builtin_initial::<f64>("q9").is_err());
    }

    #[test]
    fn catalog_is_nonnegative_and_bounded_by_one() {
        for name in BUILTIN_INITIAL {
            let d = q(name);
            for k in 0..=12000 {
                let v = d.eval(-4.0 + 1e-3 * k as f64);
                assert!((0.0..=1.0).contains(&v), "{name}: {v}");
            }
        }
    }
}
