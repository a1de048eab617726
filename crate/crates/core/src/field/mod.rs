//! Uniform Cartesian grids, cell-centered fields, discrete operators and quadrature.

mod ops;

use alloc::vec::Vec;

pub use ops::{
    cumulative_trapezoid, divergence, divergence_tensor, gradient, gradient_vector, integrate,
    integrate_time, korn_poincare_field_check, symmetric_gradient, traceless_field, traceless_part,
    KornRatio,
};

use crate::linalg::{Tensor, Vector};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FieldError {
    #[error("invalid grid: {0}")]
    Grid(&'static str),
    #[error("expected {expected} values, got {got}")]
    Length { expected: usize, got: usize },
    #[error("fields live on different grids")]
    GridMismatch,
    #[error("time {t} does not increase past {previous}")]
    TimeOrder { previous: f64, t: f64 },
    #[error("time series must start at t = 0, got {0}")]
    FirstTime(f64),
    #[error("tensor does not fit dimension {0}")]
    Dimension(usize),
    #[error("field does not vanish on the boundary: cell {cell}, extrapolated value {value}")]
    BoundaryValue { cell: usize, value: f64 },
    #[error("operation requires a no-slip/no-flux grid")]
    NeedsWalls,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryKind {
    NoSlipNoFlux,
    Periodic,
}

/// Rectangle `[0, L_x] × [0, L_y]` (or `[0, L]`) split into equal cells.
///
/// In one dimension the second axis is a single cell of unit length, so cell volumes and
/// indices work unchanged.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    dim: usize,
    extents: [f64; 2],
    cells: [usize; 2],
    boundary: BoundaryKind,
}

impl Grid {
    pub fn new(dim: usize, extents: &[f64], cells: &[usize], boundary: BoundaryKind) -> Result<Self, FieldError> {
        if dim != 1 && dim != 2 {
            return Err(FieldError::Grid("dimension must be 1 or 2"));
        }
        if extents.len() != dim || cells.len() != dim {
            return Err(FieldError::Grid("extents and cells need one entry per axis"));
        }
        let mut g = Grid { dim, extents: [1.0; 2], cells: [1; 2], boundary };
        for a in 0..dim {
            if !(extents[a] > 0.0 && extents[a].is_finite()) {
                return Err(FieldError::Grid("extents must be positive and finite"));
            }
            if cells[a] < 4 {
                return Err(FieldError::Grid("at least 4 cells per axis"));
            }
            g.extents[a] = extents[a];
            g.cells[a] = cells[a];
        }
        Ok(g)
    }

    pub fn line(length: f64, cells: usize, boundary: BoundaryKind) -> Result<Self, FieldError> {
        Grid::new(1, &[length], &[cells], boundary)
    }

    pub fn rect(extents: [f64; 2], cells: [usize; 2], boundary: BoundaryKind) -> Result<Self, FieldError> {
        Grid::new(2, &extents, &cells, boundary)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn extents(&self) -> [f64; 2] {
        self.extents
    }

    pub fn cells(&self) -> [usize; 2] {
        self.cells
    }

    pub fn boundary(&self) -> BoundaryKind {
        self.boundary
    }

    pub fn h(&self) -> [f64; 2] {
        [
            self.extents[0] / self.cells[0] as f64,
            self.extents[1] / self.cells[1] as f64,
        ]
    }

    /// Smallest spacing over the active axes.
    pub fn min_h(&self) -> f64 {
        let h = self.h();
        if self.dim == 1 {
            h[0]
        } else {
            h[0].min(h[1])
        }
    }

    pub fn len(&self) -> usize {
        self.cells[0] * self.cells[1]
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn cell_volume(&self) -> f64 {
        let h = self.h();
        h[0] * h[1]
    }

    pub fn volume(&self) -> f64 {
        self.extents[0] * self.extents[1]
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.cells[0] + i
    }

    #[inline]
    pub fn coords(&self, idx: usize) -> (usize, usize) {
        (idx % self.cells[0], idx / self.cells[0])
    }

    /// Cell center; the second coordinate is 0.5 in one dimension.
    pub fn center(&self, idx: usize) -> [f64; 2] {
        let (i, j) = self.coords(idx);
        let h = self.h();
        [(i as f64 + 0.5) * h[0], (j as f64 + 0.5) * h[1]]
    }

    /// Same domain with every active axis refined by `factor`.
    pub fn refined(&self, factor: usize) -> Grid {
        let mut g = *self;
        for a in 0..self.dim {
            g.cells[a] *= factor;
        }
        g
    }

    pub fn same_shape(&self, other: &Grid) -> bool {
        self.dim == other.dim
            && self.cells == other.cells
            && self.boundary == other.boundary
            && self.extents == other.extents
    }
}

/// Cell-centered values on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Field<T> {
    grid: Grid,
    values: Vec<T>,
}

pub type ScalarField = Field<f64>;
pub type VectorField = Field<Vector>;
pub type TensorField = Field<Tensor>;

impl<T: Clone> Field<T> {
    pub fn new(grid: Grid, values: Vec<T>) -> Result<Self, FieldError> {
        if values.len() != grid.len() {
            return Err(FieldError::Length { expected: grid.len(), got: values.len() });
        }
        Ok(Field { grid, values })
    }

    pub fn constant(grid: Grid, value: T) -> Self {
        Field { grid, values: alloc::vec![value; grid.len()] }
    }

    pub fn from_fn<F: FnMut([f64; 2]) -> T>(grid: Grid, mut f: F) -> Self {
        let values = (0..grid.len()).map(|k| f(grid.center(k))).collect();
        Field { grid, values }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [T] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn map<U: Clone, F: FnMut(&T) -> U>(&self, f: F) -> Field<U> {
        Field { grid: self.grid, values: self.values.iter().map(f).collect() }
    }
}

impl<T: Clone + Default> Field<T> {
    pub fn zeros(grid: Grid) -> Self {
        Field::constant(grid, T::default())
    }
}

/// Values at strictly increasing times starting at `t = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries<T> {
    times: Vec<f64>,
    values: Vec<T>,
}

impl<T> Default for TimeSeries<T> {
    fn default() -> Self {
        TimeSeries { times: Vec::new(), values: Vec::new() }
    }
}

impl<T> TimeSeries<T> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_parts(times: Vec<f64>, values: Vec<T>) -> Result<Self, FieldError> {
        if times.len() != values.len() {
            return Err(FieldError::Length { expected: times.len(), got: values.len() });
        }
        let mut ts = TimeSeries::new();
        for (t, v) in times.into_iter().zip(values) {
            ts.push(t, v)?;
        }
        Ok(ts)
    }

    pub fn push(&mut self, t: f64, value: T) -> Result<(), FieldError> {
        match self.times.last() {
            None if t != 0.0 => return Err(FieldError::FirstTime(t)),
            Some(&prev) if !(t > prev) => return Err(FieldError::TimeOrder { previous: prev, t }),
            _ => {}
        }
        self.times.push(t);
        self.values.push(value);
        Ok(())
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> Option<(f64, &T)> {
        self.times.last().map(|&t| (t, self.values.last().unwrap()))
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, &T)> {
        self.times.iter().copied().zip(self.values.iter())
    }

    pub fn map<U, F: FnMut(&T) -> U>(&self, f: F) -> TimeSeries<U> {
        TimeSeries { times: self.times.clone(), values: self.values.iter().map(f).collect() }
    }

    pub fn into_parts(self) -> (Vec<f64>, Vec<T>) {
        (self.times, self.values)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_validation() {
        assert!(Grid::line(1.0, 3, BoundaryKind::Periodic).is_err());
        assert!(Grid::line(0.0, 8, BoundaryKind::Periodic).is_err());
        let g = Grid::rect([2.0, 1.0], [8, 4], BoundaryKind::NoSlipNoFlux).unwrap();
        assert_eq!(g.h(), [0.25, 0.25]);
        assert_eq!(g.len(), 32);
        assert_eq!(g.center(g.index(1, 2)), [0.375, 0.625]);
    }

    #[test]
    fn time_series_ordering() {
        let mut ts = TimeSeries::new();
        assert!(ts.push(0.1, 1.0).is_err());
        ts.push(0.0, 1.0).unwrap();
        assert!(ts.push(0.0, 2.0).is_err());
        ts.push(0.5, 2.0).unwrap();
        assert_eq!(ts.len(), 2);
    }
}
