use std::ops::Range;

use crate::error::{Error, Result};
use crate::Scalar;

/// Uniform cell partition of `[x_min, x_max]` with ghost layers on both sides.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid<T> {
    x_min: T,
    x_max: T,
    n_cells: usize,
    n_ghost: usize,
    dx: T,
}

impl<T: Scalar> Grid<T> {
    pub const MIN_CELLS: usize = 8;

    pub fn new(x_min: T, x_max: T, n_cells: usize, n_ghost: usize) -> Result<Self> {
        if !(x_min.is_finite() && x_max.is_finite()) || x_max <= x_min {
            return Err(Error::InvalidInput(format!(
                "grid bounds must be finite with x_min < x_max, got [{x_min}, {x_max}]"
            )));
        }
        if n_cells < Self::MIN_CELLS {
            return Err(Error::InvalidInput(format!(
                "grid needs at least {} cells, got {n_cells}",
                Self::MIN_CELLS
            )));
        }
        if n_ghost == 0 {
            return Err(Error::InvalidInput("grid needs at least one ghost cell".into()));
        }
        let dx = (x_max - x_min) / T::from_usize_lossy(n_cells);
        Ok(Self { x_min, x_max, n_cells, n_ghost, dx })
    }

    /// Grid whose cell count is the nearest integer to `(x_max - x_min) / dx`.
    /// The effective spacing is recomputed from that count.
    pub fn with_spacing(x_min: T, x_max: T, dx: T, n_ghost: usize) -> Result<Self> {
        if !(dx.is_finite() && dx > T::zero()) {
            return Err(Error::InvalidInput(format!("dx must be positive, got {dx}")));
        }
        let n = ((x_max - x_min) / dx).round();
        let n = n.to_usize().ok_or_else(|| {
            Error::InvalidInput(format!("cannot partition [{x_min}, {x_max}] with dx = {dx}"))
        })?;
        Self::new(x_min, x_max, n, n_ghost)
    }

    pub fn x_min(&self) -> T {
        self.x_min
    }

    pub fn x_max(&self) -> T {
        self.x_max
    }

    pub fn n_cells(&self) -> usize {
        self.n_cells
    }

    pub fn n_ghost(&self) -> usize {
        self.n_ghost
    }

    pub fn dx(&self) -> T {
        self.dx
    }

    pub fn length(&self) -> T {
        self.x_max - self.x_min
    }

    /// Storage length including both ghost layers.
    pub fn storage_len(&self) -> usize {
        self.n_cells + 2 * self.n_ghost
    }

    /// Storage indices of the interior cells.
    pub fn interior(&self) -> Range<usize> {
        self.n_ghost..self.n_ghost + self.n_cells
    }

    /// Center of interior cell `i` (0-based, ghosts excluded).
    #[inline]
    pub fn center(&self, i: usize) -> T {
        self.x_min + (T::from_usize_lossy(i) + T::lit(0.5)) * self.dx
    }

    /// Interface `i`, for `i = 0..=n_cells`.
    #[inline]
    pub fn interface(&self, i: usize) -> T {
        self.x_min + T::from_usize_lossy(i) * self.dx
    }

    pub fn centers(&self) -> impl Iterator<Item = T> + '_ {
        (0..self.n_cells).map(move |i| self.center(i))
    }

    pub fn interfaces(&self) -> impl Iterator<Item = T> + '_ {
        (0..=self.n_cells).map(move |i| self.interface(i))
    }

    /// Interior cell containing `x`, if any.
    pub fn locate(&self, x: T) -> Option<usize> {
        if !(x >= self.x_min && x <= self.x_max) {
            return None;
        }
        let i = ((x - self.x_min) / self.dx).floor().to_usize()?;
        Some(i.min(self.n_cells - 1))
    }
}
