//! Periodic space-time lattice and the fields living on it.
//!
//! Fields carry one x-axis and one y-axis; arrays are indexed `[y, x]` for a
//! single slice and `[t, y, x]` for space-time data.

use ndarray::{Array2, Array3, ArrayView2, ArrayViewMut2, Axis};

use crate::error::{Error, Result};
use crate::scalar::{from_usize, lit, to_f64, Real};

/// Torus `[-lx, lx) x [-ly, ly)` sampled at `nx x ny` points, with time
/// horizon `t_end` split into `nt` uniform steps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec<T> {
    pub lx: T,
    pub ly: T,
    pub nx: usize,
    pub ny: usize,
    pub t_end: T,
    pub nt: usize,
}

impl<T: Real> GridSpec<T> {
    pub fn new(lx: T, ly: T, nx: usize, ny: usize, t_end: T, nt: usize) -> Result<Self> {
        let g = GridSpec { lx, ly, nx, ny, t_end, nt };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        let mut bad = Vec::new();
        if !(self.lx > T::zero() && self.lx.is_finite()) {
            bad.push(format!("Lx must be positive, got {}", self.lx));
        }
        if !(self.ly > T::zero() && self.ly.is_finite()) {
            bad.push(format!("Ly must be positive, got {}", self.ly));
        }
        if !self.nx.is_power_of_two() || self.nx < 4 {
            bad.push(format!("Nx must be a power of two >= 4, got {}", self.nx));
        }
        if !self.ny.is_power_of_two() || self.ny < 4 {
            bad.push(format!("Ny must be a power of two >= 4, got {}", self.ny));
        }
        if !(self.t_end > T::zero() && self.t_end.is_finite()) {
            bad.push(format!("T must be positive, got {}", self.t_end));
        }
        if self.nt == 0 {
            bad.push("Nt must be at least 1".to_string());
        }
        if bad.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidGrid(bad.join("; ")))
        }
    }

    pub fn dx(&self) -> T {
        self.lx * lit(2.0) / from_usize(self.nx)
    }

    pub fn dy(&self) -> T {
        self.ly * lit(2.0) / from_usize(self.ny)
    }

    pub fn dt(&self) -> T {
        self.t_end / from_usize(self.nt)
    }

    pub fn x(&self, i: usize) -> T {
        -self.lx + self.dx() * from_usize(i)
    }

    pub fn y(&self, j: usize) -> T {
        -self.ly + self.dy() * from_usize(j)
    }

    pub fn t(&self, k: usize) -> T {
        self.t_end * from_usize(k) / from_usize(self.nt)
    }

    pub fn cell_area(&self) -> T {
        self.dx() * self.dy()
    }

    pub fn area(&self) -> T {
        self.lx * self.ly * lit(4.0)
    }

    /// Same spatial lattice with a different time discretization.
    pub fn with_time(&self, t_end: T, nt: usize) -> Self {
        GridSpec { t_end, nt, ..*self }
    }

    pub fn same_space(&self, other: &Self) -> bool {
        self.nx == other.nx && self.ny == other.ny && self.lx == other.lx && self.ly == other.ly
    }

    pub(crate) fn check_same(&self, other: &Self) -> Result<()> {
        if self.same_space(other) && self.nt == other.nt && self.t_end == other.t_end {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!(
                "{}x{} L=({}, {}) T={} Nt={} vs {}x{} L=({}, {}) T={} Nt={}",
                self.nx,
                self.ny,
                to_f64(self.lx),
                to_f64(self.ly),
                to_f64(self.t_end),
                self.nt,
                other.nx,
                other.ny,
                to_f64(other.lx),
                to_f64(other.ly),
                to_f64(other.t_end),
                other.nt
            )))
        }
    }

    /// Wraps a point into the fundamental cell.
    pub fn wrap(&self, x: T, y: T) -> (T, T) {
        (wrap_axis(x, self.lx), wrap_axis(y, self.ly))
    }
}

pub(crate) fn wrap_axis<T: Real>(x: T, l: T) -> T {
    let period = l + l;
    let mut r = (x + l) % period;
    if r < T::zero() {
        r += period;
    }
    r - l
}

/// Field on one time slice.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField<T> {
    pub grid: GridSpec<T>,
    pub data: Array2<T>,
}

impl<T: Real> ScalarField<T> {
    pub fn zeros(grid: GridSpec<T>) -> Self {
        ScalarField { grid, data: Array2::zeros((grid.ny, grid.nx)) }
    }

    pub fn from_fn(grid: GridSpec<T>, f: impl Fn(T, T) -> T) -> Self {
        let data = Array2::from_shape_fn((grid.ny, grid.nx), |(j, i)| f(grid.x(i), grid.y(j)));
        ScalarField { grid, data }
    }

    pub fn from_array(grid: GridSpec<T>, data: Array2<T>) -> Result<Self> {
        let expected = vec![grid.ny, grid.nx];
        if data.shape() != expected.as_slice() {
            return Err(Error::ShapeMismatch { expected, found: data.shape().to_vec() });
        }
        Ok(ScalarField { grid, data })
    }

    pub fn sup_norm(&self) -> T {
        sup_abs(self.data.view())
    }

    /// Riemann-sum L^p norm over the torus.
    pub fn lp_norm(&self, p: T) -> T {
        lp_norm_2d(self.data.view(), p, self.grid.cell_area())
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        ScalarField { grid: self.grid, data: self.data.mapv(f) }
    }
}

/// Field on all `nt + 1` time nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct SpaceTimeField<T> {
    pub grid: GridSpec<T>,
    pub data: Array3<T>,
}

impl<T: Real> SpaceTimeField<T> {
    pub fn zeros(grid: GridSpec<T>) -> Self {
        SpaceTimeField { grid, data: Array3::zeros((grid.nt + 1, grid.ny, grid.nx)) }
    }

    pub fn from_fn(grid: GridSpec<T>, f: impl Fn(T, T, T) -> T) -> Self {
        let data = Array3::from_shape_fn((grid.nt + 1, grid.ny, grid.nx), |(k, j, i)| {
            f(grid.t(k), grid.x(i), grid.y(j))
        });
        SpaceTimeField { grid, data }
    }

    /// Repeats one slice at every time node.
    pub fn constant_in_time(slice: &ScalarField<T>, t_end: T, nt: usize) -> Self {
        let grid = slice.grid.with_time(t_end, nt);
        let mut data = Array3::zeros((nt + 1, grid.ny, grid.nx));
        for mut s in data.axis_iter_mut(Axis(0)) {
            s.assign(&slice.data);
        }
        SpaceTimeField { grid, data }
    }

    pub fn from_array(grid: GridSpec<T>, data: Array3<T>) -> Result<Self> {
        let expected = vec![grid.nt + 1, grid.ny, grid.nx];
        if data.shape() != expected.as_slice() {
            return Err(Error::ShapeMismatch { expected, found: data.shape().to_vec() });
        }
        Ok(SpaceTimeField { grid, data })
    }

    pub fn slice(&self, k: usize) -> ArrayView2<'_, T> {
        self.data.index_axis(Axis(0), k)
    }

    pub fn slice_mut(&mut self, k: usize) -> ArrayViewMut2<'_, T> {
        self.data.index_axis_mut(Axis(0), k)
    }

    pub fn slice_field(&self, k: usize) -> ScalarField<T> {
        ScalarField { grid: self.grid, data: self.slice(k).to_owned() }
    }

    pub fn sup_norm(&self) -> T {
        self.data.iter().fold(T::zero(), |m, &v| m.max(v.abs()))
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|v| v.is_zero())
    }

    pub fn scaled(&self, c: T) -> Self {
        SpaceTimeField { grid: self.grid, data: self.data.mapv(|v| v * c) }
    }

    pub fn sub(&self, other: &Self) -> Self {
        SpaceTimeField { grid: self.grid, data: &self.data - &other.data }
    }

    /// `u(T - t)`: reverses the time axis.
    pub fn time_reversed(&self) -> Self {
        let mut data = self.data.clone();
        data.invert_axis(Axis(0));
        SpaceTimeField { grid: self.grid, data: data.as_standard_layout().to_owned() }
    }
}

/// A list of space-time components on a common grid.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField<T> {
    pub grid: GridSpec<T>,
    pub components: Vec<SpaceTimeField<T>>,
}

impl<T: Real> VectorField<T> {
    pub fn new(components: Vec<SpaceTimeField<T>>) -> Result<Self> {
        let first = components
            .first()
            .ok_or_else(|| Error::InvalidGrid("vector field needs a component".into()))?;
        let grid = first.grid;
        for c in &components[1..] {
            grid.check_same(&c.grid)?;
        }
        Ok(VectorField { grid, components })
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn sup_norm(&self) -> T {
        self.components.iter().fold(T::zero(), |m, c| m.max(c.sup_norm()))
    }
}

pub(crate) fn sup_abs<T: Real>(a: ArrayView2<'_, T>) -> T {
    a.iter().fold(T::zero(), |m, &v| m.max(v.abs()))
}

pub(crate) fn lp_norm_2d<T: Real>(a: ArrayView2<'_, T>, p: T, cell: T) -> T {
    if p.is_infinite() {
        return sup_abs(a);
    }
    let s: T = a.iter().map(|v| v.abs().powf(p)).sum();
    (s * cell).powf(p.recip())
}
