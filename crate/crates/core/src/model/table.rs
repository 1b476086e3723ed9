use crate::error::{Error, Result};
use crate::Scalar;

/// Piecewise-linear function through sorted sample points, extended by
/// constants beyond the first and last node.
#[derive(Debug, Clone, PartialEq)]
pub struct Table<T> {
    xs: Vec<T>,
    ys: Vec<T>,
}

impl<T: Scalar> Table<T> {
    pub fn new(xs: Vec<T>, ys: Vec<T>) -> Result<Self> {
        if xs.len() != ys.len() || xs.len() < 2 {
            return Err(Error::InvalidInput(format!(
                "table needs at least two (x, y) pairs of equal length, got {} and {}",
                xs.len(),
                ys.len()
            )));
        }
        if xs.iter().chain(&ys).any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("table contains non-finite entries".into()));
        }
        if xs.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidInput("table abscissae must be strictly increasing".into()));
        }
        Ok(Self { xs, ys })
    }

    /// Samples `f` at `n` equispaced nodes on `[a, b]`.
    pub fn sample<F: Fn(T) -> T>(f: F, a: T, b: T, n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidInput("table needs at least two nodes".into()));
        }
        let h = (b - a) / T::from_usize_lossy(n - 1);
        let xs: Vec<T> = (0..n).map(|k| a + h * T::from_usize_lossy(k)).collect();
        let ys = xs.iter().map(|&x| f(x)).collect();
        Self::new(xs, ys)
    }

    pub fn xs(&self) -> &[T] {
        &self.xs
    }

    pub fn ys(&self) -> &[T] {
        &self.ys
    }

    /// Index `k` of the segment `[x_k, x_{k+1}]` containing `x`, or `None`
    /// outside the table.
    fn segment(&self, x: T) -> Option<usize> {
        let n = self.xs.len();
        if x < self.xs[0] || x > self.xs[n - 1] {
            return None;
        }
        let k = self.xs.partition_point(|&xi| xi <= x);
        Some(k.saturating_sub(1).min(n - 2))
    }

    pub fn eval(&self, x: T) -> T {
        let n = self.xs.len();
        match self.segment(x) {
            None if x < self.xs[0] => self.ys[0],
            None => self.ys[n - 1],
            Some(k) => {
                let w = (x - self.xs[k]) / (self.xs[k + 1] - self.xs[k]);
                self.ys[k] + w * (self.ys[k + 1] - self.ys[k])
            }
        }
    }

    pub fn slope(&self, x: T) -> T {
        match self.segment(x) {
            None => T::zero(),
            Some(k) => (self.ys[k + 1] - self.ys[k]) / (self.xs[k + 1] - self.xs[k]),
        }
    }

    /// Second derivative from nodal second differences, linearly interpolated.
    pub fn curvature(&self, x: T) -> T {
        let n = self.xs.len();
        if n < 3 {
            return T::zero();
        }
        let nodal = |k: usize| -> T {
            if k == 0 || k == n - 1 {
                return T::zero();
            }
            let (h0, h1) = (self.xs[k] - self.xs[k - 1], self.xs[k + 1] - self.xs[k]);
            let d0 = (self.ys[k] - self.ys[k - 1]) / h0;
            let d1 = (self.ys[k + 1] - self.ys[k]) / h1;
            T::lit(2.0) * (d1 - d0) / (h0 + h1)
        };
        match self.segment(x) {
            None => T::zero(),
            Some(k) => {
                let w = (x - self.xs[k]) / (self.xs[k + 1] - self.xs[k]);
                nodal(k) + w * (nodal(k + 1) - nodal(k))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interpolates_and_extends() {
        let t = Table::new(vec![0.0, 1.0, 3.0], vec![1.0, 3.0, 2.0]).unwrap();
        assert_eq!(t.eval(-1.0), 1.0);
        assert_eq!(t.eval(0.5), 2.0);
        assert_eq!(t.eval(2.0), 2.5);
        assert_eq!(t.eval(5.0), 2.0);
        assert_eq!(t.slope(0.5), 2.0);
        assert_eq!(t.slope(2.0), -0.5);
        assert_eq!(t.slope(4.0), 0.0);
    }

    #[test]
    fn curvature_of_sampled_parabola() {
        let t = Table::sample(|x: f64| x * x, -1.0, 1.0, 201).unwrap();
        assert!((t.curvature(0.1234) - 2.0).abs() < 1e-9);
    }

    #[test]
    fn rejects_bad_tables() {
        assert!(Table::new(vec![0.0], vec![1.0]).is_err());
        assert!(Table::new(vec![0.0, 0.0], vec![1.0, 2.0]).is_err());
        assert!(Table::new(vec![0.0, 1.0], vec![1.0, f64::NAN]).is_err());
    }
}
