//! Off-lattice evaluation of periodic fields.

use ndarray::ArrayView2;

use crate::grid::{GridSpec, SpaceTimeField};
use crate::scalar::{from_usize, lit, Real};

/// Spatial interpolation scheme. Time is always interpolated linearly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Interp {
    /// Bilinear on the lattice cell.
    #[default]
    Multilinear,
    /// Separable Catmull–Rom cubic on a 4x4 stencil; `C¹` and third-order.
    Cubic,
}

#[inline]
fn locate<T: Real>(x: T, l: T, n: usize) -> (usize, T) {
    let h = l * lit(2.0) / from_usize(n);
    let s = (x + l) / h;
    let fl = s.floor();
    let frac = s - fl;
    let i = fl.to_i64().unwrap_or(0).rem_euclid(n as i64) as usize;
    (i, frac)
}

#[inline]
fn catmull_rom<T: Real>(p: [T; 4], s: T) -> T {
    let half: T = lit(0.5);
    let two: T = lit(2.0);
    let three: T = lit(3.0);
    let four: T = lit(4.0);
    let five: T = lit(5.0);
    let [p0, p1, p2, p3] = p;
    half * (two * p1
        + (p2 - p0) * s
        + (two * p0 - five * p1 + four * p2 - p3) * s * s
        + (three * (p1 - p2) + p3 - p0) * s * s * s)
}

/// Evaluates a periodic slice (indexed `[y, x]`) at `(x, y)`.
pub fn sample_slice<T: Real>(a: ArrayView2<'_, T>, grid: &GridSpec<T>, x: T, y: T, how: Interp) -> T {
    let (nx, ny) = (grid.nx, grid.ny);
    let (i, sx) = locate(x, grid.lx, nx);
    let (j, sy) = locate(y, grid.ly, ny);
    match how {
        Interp::Multilinear => {
            let i1 = (i + 1) % nx;
            let j1 = (j + 1) % ny;
            let one = T::one();
            (one - sy) * ((one - sx) * a[[j, i]] + sx * a[[j, i1]])
                + sy * ((one - sx) * a[[j1, i]] + sx * a[[j1, i1]])
        }
        Interp::Cubic => {
            let ix = |o: i64| (i as i64 + o).rem_euclid(nx as i64) as usize;
            let jy = |o: i64| (j as i64 + o).rem_euclid(ny as i64) as usize;
            let mut rows = [T::zero(); 4];
            for (r, oy) in (-1..=2).enumerate() {
                let jj = jy(oy);
                rows[r] = catmull_rom([a[[jj, ix(-1)]], a[[jj, ix(0)]], a[[jj, ix(1)]], a[[jj, ix(2)]]], sx);
            }
            catmull_rom(rows, sy)
        }
    }
}

impl<T: Real> SpaceTimeField<T> {
    /// Value at `(t, x, y)`; `t` is clamped to `[0, T]`.
    pub fn eval(&self, t: T, x: T, y: T, how: Interp) -> T {
        let g = &self.grid;
        let s = (t / g.dt()).max(T::zero()).min(from_usize(g.nt));
        let k = s.floor().to_usize().unwrap_or(0).min(g.nt.saturating_sub(1));
        let w = s - from_usize(k);
        let a = sample_slice(self.slice(k), g, x, y, how);
        if w.is_zero() || g.nt == 0 {
            return a;
        }
        let b = sample_slice(self.slice(k + 1), g, x, y, how);
        a + (b - a) * w
    }
}
