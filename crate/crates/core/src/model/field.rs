use crate::error::{Error, Result};
use crate::model::Grid;
use crate::Scalar;

/// Cell averages of the density at one time instant, ghost cells included.
#[derive(Debug, Clone, PartialEq)]
pub struct CellField<T> {
    grid: Grid<T>,
    values: Vec<T>,
    pub time: T,
}

// 3-point Gauss-Legendre rule on [-1, 1].
const GAUSS_NODES: [f64; 3] = [-0.774_596_669_241_483_4, 0.0, 0.774_596_669_241_483_4];
const GAUSS_WEIGHTS: [f64; 3] = [5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0];

impl<T: Scalar> CellField<T> {
    pub fn zeros(grid: Grid<T>) -> Self {
        Self {
            grid,
            values: vec![T::zero(); grid.storage_len()],
            time: T::zero(),
        }
    }

    /// Builds a field from interior values and fills the ghosts.
    pub fn from_interior(grid: Grid<T>, interior: &[T], time: T) -> Result<Self> {
        if interior.len() != grid.n_cells() {
            return Err(Error::InvalidInput(format!(
                "expected {} interior values, got {}",
                grid.n_cells(),
                interior.len()
            )));
        }
        if let Some((i, v)) = interior.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFinite {
                location: format!("cell {i}"),
                value: v.as_f64(),
            });
        }
        let mut field = Self::zeros(grid);
        field.values[grid.interior()].copy_from_slice(interior);
        field.time = time;
        field.fill_ghosts();
        Ok(field)
    }

    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    /// All values including ghosts.
    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [T] {
        &mut self.values
    }

    pub fn interior(&self) -> &[T] {
        &self.values[self.grid.interior()]
    }

    pub fn interior_mut(&mut self) -> &mut [T] {
        let r = self.grid.interior();
        &mut self.values[r]
    }

    /// Zero-gradient extrapolation into every ghost layer.
    pub fn fill_ghosts(&mut self) {
        let g = self.grid.n_ghost();
        let n = self.grid.n_cells();
        let left = self.values[g];
        let right = self.values[g + n - 1];
        self.values[..g].fill(left);
        self.values[g + n..].fill(right);
    }

    pub fn check_finite(&self) -> Result<()> {
        match self.values.iter().position(|v| !v.is_finite()) {
            None => Ok(()),
            Some(k) => Err(Error::NonFinite {
                location: format!("storage index {k} at t = {}", self.time),
                value: self.values[k].as_f64(),
            }),
        }
    }

    /// Elementwise `a * self + b * other` on the same grid.
    pub fn combine(&self, a: T, other: &Self, b: T) -> Result<Self> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&x, &y)| a * x + b * y)
            .collect();
        Ok(Self { grid: self.grid, values, time: self.time })
    }
}

/// Cell averages of `f` by 3-point Gauss-Legendre quadrature on each cell.
pub fn project_to_cells<T, F>(f: F, grid: &Grid<T>) -> Result<CellField<T>>
where
    T: Scalar,
    F: Fn(T) -> T,
{
    let half = grid.dx() * T::lit(0.5);
    let mut interior = Vec::with_capacity(grid.n_cells());
    for i in 0..grid.n_cells() {
        let c = grid.center(i);
        let mut acc = T::zero();
        for (node, w) in GAUSS_NODES.iter().zip(GAUSS_WEIGHTS) {
            let x = c + half * T::lit(*node);
            let v = f(x);
            if !v.is_finite() {
                return Err(Error::InvalidInput(format!("non-finite sample f({x}) = {v}")));
            }
            acc = acc + T::lit(w) * v;
        }
        interior.push(acc * T::lit(0.5));
    }
    CellField::from_interior(*grid, &interior, T::zero())
}
