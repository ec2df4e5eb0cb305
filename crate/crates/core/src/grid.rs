//! Periodic square grid, scalar fields on it, and the 3-point centered
//! difference operators every fluid update is built from.
//!
//! Nodes are stored row-major in `y`: the flat index of `(ix, iy)` is
//! `iy * n + ix`. All index arithmetic wraps periodically.

use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec<T> {
    n: usize,
    box_length: T,
    spacing: T,
}

impl<T: Real> GridSpec<T> {
    /// `n x n` grid on the periodic box `[0, 2pi)^2`.
    pub fn new(n: usize) -> Result<Self> {
        Self::with_box(n, T::TAU())
    }

    pub fn with_box(n: usize, box_length: T) -> Result<Self> {
        if n < 4 || n % 2 != 0 {
            return Err(Error::Domain(format!(
                "grid size must be even and >= 4, got {n}"
            )));
        }
        if !(box_length > T::zero()) || !box_length.is_finite() {
            return Err(Error::Domain(format!(
                "box length must be positive and finite, got {box_length}"
            )));
        }
        Ok(Self {
            n,
            box_length,
            spacing: box_length / T::from_usize_lossy(n),
        })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn box_length(&self) -> T {
        self.box_length
    }

    /// Node spacing `h = box_length / n`.
    #[inline]
    pub fn spacing(&self) -> T {
        self.spacing
    }

    /// Number of nodes `G = n^2`.
    #[inline]
    pub fn len(&self) -> usize {
        self.n * self.n
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn index(&self, ix: usize, iy: usize) -> usize {
        iy * self.n + ix
    }

    /// Flat index of `(ix + sx, iy + sy)` with periodic wrap.
    #[inline]
    pub fn shifted(&self, node: usize, sx: isize, sy: isize) -> usize {
        let n = self.n as isize;
        let ix = (node % self.n) as isize;
        let iy = (node / self.n) as isize;
        let jx = (ix + sx).rem_euclid(n) as usize;
        let jy = (iy + sy).rem_euclid(n) as usize;
        jy * self.n + jx
    }

    /// Physical coordinate of grid line `i`.
    #[inline]
    pub fn coord(&self, i: usize) -> T {
        T::from_usize_lossy(i) * self.spacing
    }

    /// `(ix, iy)` of a flat node index.
    #[inline]
    pub fn coords_of(&self, node: usize) -> (usize, usize) {
        (node % self.n, node / self.n)
    }

    fn check_same(&self, other: &Self) -> Result<()> {
        if self.n != other.n || self.box_length != other.box_length {
            return Err(Error::Dimension(format!(
                "grid mismatch: n={} vs n={}",
                self.n, other.n
            )));
        }
        Ok(())
    }
}

/// Node nearest to a physical point, rounding half away from zero and
/// wrapping periodically.
pub fn nearest_node<T: Real>(p: (T, T), grid: &GridSpec<T>) -> (usize, usize) {
    let n = grid.n() as i64;
    let h = grid.spacing();
    let snap = |c: T| -> usize {
        let k = (c / h).round().to_i64().unwrap_or(0);
        k.rem_euclid(n) as usize
    };
    (snap(p.0), snap(p.1))
}

/// Scalar field sampled on every node of a [`GridSpec`].
#[derive(Debug, Clone, PartialEq)]
pub struct Field2D<T> {
    grid: GridSpec<T>,
    values: Vec<T>,
}

impl<T: Real> Field2D<T> {
    pub fn zeros(grid: GridSpec<T>) -> Self {
        Self::constant(grid, T::zero())
    }

    pub fn constant(grid: GridSpec<T>, c: T) -> Self {
        Self {
            values: vec![c; grid.len()],
            grid,
        }
    }

    pub fn from_values(grid: GridSpec<T>, values: Vec<T>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Dimension(format!(
                "field needs {} values, got {}",
                grid.len(),
                values.len()
            )));
        }
        Ok(Self { grid, values })
    }

    /// Samples `f(x, y)` at the physical node coordinates.
    pub fn from_fn(grid: GridSpec<T>, mut f: impl FnMut(T, T) -> T) -> Self {
        let n = grid.n();
        let mut values = Vec::with_capacity(grid.len());
        for iy in 0..n {
            let y = grid.coord(iy);
            for ix in 0..n {
                values.push(f(grid.coord(ix), y));
            }
        }
        Self { grid, values }
    }

    #[inline]
    pub fn grid(&self) -> &GridSpec<T> {
        &self.grid
    }

    #[inline]
    pub fn values(&self) -> &[T] {
        &self.values
    }

    #[inline]
    pub fn values_mut(&mut self) -> &mut [T] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    #[inline]
    pub fn at(&self, ix: usize, iy: usize) -> T {
        self.values[self.grid.index(ix, iy)]
    }

    #[inline]
    pub fn set(&mut self, ix: usize, iy: usize, v: T) {
        let k = self.grid.index(ix, iy);
        self.values[k] = v;
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Self {
            grid: self.grid,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_map(&self, other: &Self, f: impl Fn(T, T) -> T) -> Result<Self> {
        self.grid.check_same(&other.grid)?;
        Ok(Self {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn scale(&self, s: T) -> Self {
        self.map(|v| v * s)
    }

    pub fn sum(&self) -> T {
        self.values.iter().copied().sum()
    }

    pub fn mean(&self) -> T {
        self.sum() / T::from_usize_lossy(self.values.len())
    }

    pub fn max_abs(&self) -> T {
        self.values
            .iter()
            .fold(T::zero(), |m, &v| if v.abs() > m { v.abs() } else { m })
    }

    /// Root mean square over nodes.
    pub fn rms(&self) -> T {
        let ss: T = self.values.iter().map(|&v| v * v).sum();
        (ss / T::from_usize_lossy(self.values.len())).sqrt()
    }

    pub fn dx(&self) -> Self {
        dx(self)
    }

    pub fn dy(&self) -> Self {
        dy(self)
    }
}

fn centered<T: Real>(f: &Field2D<T>, sx: isize, sy: isize) -> Field2D<T> {
    let grid = *f.grid();
    let two_h = grid.spacing() + grid.spacing();
    let v = f.values();
    let values = (0..grid.len())
        .map(|k| (v[grid.shifted(k, sx, sy)] - v[grid.shifted(k, -sx, -sy)]) / two_h)
        .collect();
    Field2D { grid, values }
}

/// Centered difference along `x`: `(f[ix+1] - f[ix-1]) / 2h`.
pub fn dx<T: Real>(f: &Field2D<T>) -> Field2D<T> {
    centered(f, 1, 0)
}

/// Centered difference along `y`.
pub fn dy<T: Real>(f: &Field2D<T>) -> Field2D<T> {
    centered(f, 0, 1)
}

/// `dx(vx) + dy(vy)`.
pub fn divergence<T: Real>(vx: &Field2D<T>, vy: &Field2D<T>) -> Result<Field2D<T>> {
    dx(vx).zip_map(&dy(vy), |a, b| a + b)
}
