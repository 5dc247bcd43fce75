//! Two-dimensional FFT on the periodic lattice and Fourier multipliers.

use std::sync::Arc;

use ndarray::{Array2, ArrayView2};
use num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::grid::GridSpec;
use crate::scalar::{from_usize, Real};

/// Forward/inverse 2-D transforms for one lattice shape.
///
/// The plans are shareable across threads; scratch is allocated per call.
#[derive(Clone)]
pub struct Spectral2<T: Real> {
    nx: usize,
    ny: usize,
    kx: Vec<T>,
    ky: Vec<T>,
    fx: Arc<dyn Fft<T>>,
    fy: Arc<dyn Fft<T>>,
    ix: Arc<dyn Fft<T>>,
    iy: Arc<dyn Fft<T>>,
}

impl<T: Real> std::fmt::Debug for Spectral2<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Spectral2").field("nx", &self.nx).field("ny", &self.ny).finish()
    }
}

/// Angular wavenumbers for `n` points on a period of length `2 l`.
pub fn wavenumbers<T: Real>(n: usize, l: T) -> Vec<T> {
    let base = T::PI() / l;
    (0..n)
        .map(|i| {
            let m = if i < n / 2 { i as i64 } else { i as i64 - n as i64 };
            base * T::from_i64(m).unwrap()
        })
        .collect()
}

impl<T: Real> Spectral2<T> {
    pub fn new(grid: &GridSpec<T>) -> Self {
        let mut planner = FftPlanner::new();
        Spectral2 {
            nx: grid.nx,
            ny: grid.ny,
            kx: wavenumbers(grid.nx, grid.lx),
            ky: wavenumbers(grid.ny, grid.ly),
            fx: planner.plan_fft_forward(grid.nx),
            fy: planner.plan_fft_forward(grid.ny),
            ix: planner.plan_fft_inverse(grid.nx),
            iy: planner.plan_fft_inverse(grid.ny),
        }
    }

    pub fn kx(&self) -> &[T] {
        &self.kx
    }

    pub fn ky(&self) -> &[T] {
        &self.ky
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.ny, self.nx)
    }

    /// True for the unpaired Nyquist index along an axis of length `n`.
    pub fn is_nyquist(i: usize, n: usize) -> bool {
        i == n / 2
    }

    pub fn forward(&self, a: ArrayView2<'_, T>) -> Array2<Complex<T>> {
        let mut c = a.mapv(|v| Complex::new(v, T::zero()));
        self.transform(&mut c, &*self.fx, &*self.fy);
        c
    }

    /// Inverse transform, normalized, keeping the real part.
    pub fn inverse_real(&self, mut c: Array2<Complex<T>>) -> Array2<T> {
        self.transform(&mut c, &*self.ix, &*self.iy);
        let scale = from_usize::<T>(self.nx * self.ny).recip();
        c.mapv(|z| z.re * scale)
    }

    fn transform(&self, c: &mut Array2<Complex<T>>, fx: &dyn Fft<T>, fy: &dyn Fft<T>) {
        let scratch_len = fx.get_inplace_scratch_len().max(fy.get_inplace_scratch_len());
        let mut scratch = vec![Complex::new(T::zero(), T::zero()); scratch_len];
        {
            let buf = c.as_slice_mut().expect("standard layout");
            fx.process_with_scratch(buf, &mut scratch);
        }
        let mut col = vec![Complex::new(T::zero(), T::zero()); self.ny];
        for i in 0..self.nx {
            for j in 0..self.ny {
                col[j] = c[[j, i]];
            }
            fy.process_with_scratch(&mut col, &mut scratch);
            for j in 0..self.ny {
                c[[j, i]] = col[j];
            }
        }
    }

    /// Multiplies the spectrum by `m(kx, ky, i, j)` and transforms back.
    pub fn apply(
        &self,
        a: ArrayView2<'_, T>,
        m: impl Fn(T, T, usize, usize) -> Complex<T>,
    ) -> Array2<T> {
        let mut c = self.forward(a);
        self.multiply(&mut c, m);
        self.inverse_real(c)
    }

    pub fn multiply(&self, c: &mut Array2<Complex<T>>, m: impl Fn(T, T, usize, usize) -> Complex<T>) {
        for ((j, i), z) in c.indexed_iter_mut() {
            *z *= m(self.kx[i], self.ky[j], i, j);
        }
    }

    /// Spectral partial derivative along x; the Nyquist mode is dropped.
    pub fn deriv_x(&self, a: ArrayView2<'_, T>) -> Array2<T> {
        let nx = self.nx;
        self.apply(a, |kx, _, i, _| {
            if Self::is_nyquist(i, nx) {
                Complex::new(T::zero(), T::zero())
            } else {
                Complex::new(T::zero(), kx)
            }
        })
    }

    pub fn deriv_y(&self, a: ArrayView2<'_, T>) -> Array2<T> {
        let ny = self.ny;
        self.apply(a, |_, ky, _, j| {
            if Self::is_nyquist(j, ny) {
                Complex::new(T::zero(), T::zero())
            } else {
                Complex::new(T::zero(), ky)
            }
        })
    }

    /// Both first derivatives from a single forward transform.
    pub fn gradient(&self, a: ArrayView2<'_, T>) -> (Array2<T>, Array2<T>) {
        let spec = self.forward(a);
        let (nx, ny) = (self.nx, self.ny);
        let mut cx = spec.clone();
        let mut cy = spec;
        self.multiply(&mut cx, |kx, _, i, _| {
            if Self::is_nyquist(i, nx) {
                Complex::new(T::zero(), T::zero())
            } else {
                Complex::new(T::zero(), kx)
            }
        });
        self.multiply(&mut cy, |_, ky, _, j| {
            if Self::is_nyquist(j, ny) {
                Complex::new(T::zero(), T::zero())
            } else {
                Complex::new(T::zero(), ky)
            }
        });
        (self.inverse_real(cx), self.inverse_real(cy))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::ScalarField;

    #[test]
    fn round_trip() {
        let g = GridSpec::new(std::f64::consts::PI, 1.5, 32, 16, 1.0, 1).unwrap();
        let f = ScalarField::from_fn(g, |x, y| (x * 0.3).sin() + y * y * 0.1 + 0.5);
        let s = Spectral2::new(&g);
        let back = s.inverse_real(s.forward(f.data.view()));
        let err = (&back - &f.data).iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(err < 1e-13);
    }

    #[test]
    fn derivative_of_trig_mode() {
        let g = GridSpec::new(std::f64::consts::PI, std::f64::consts::PI, 32, 32, 1.0, 1).unwrap();
        let f = ScalarField::from_fn(g, |x, y| (3.0 * x).sin() * (2.0 * y).cos());
        let s = Spectral2::new(&g);
        let (dx, dy) = s.gradient(f.data.view());
        for ((j, i), v) in dx.indexed_iter() {
            let (x, y) = (g.x(i), g.y(j));
            assert!((v - 3.0 * (3.0 * x).cos() * (2.0 * y).cos()).abs() < 1e-12);
            assert!((dy[[j, i]] + 2.0 * (3.0 * x).sin() * (2.0 * y).sin()).abs() < 1e-12);
        }
    }

    #[test]
    fn wavenumber_layout() {
        let k = wavenumbers::<f64>(8, std::f64::consts::PI);
        assert_eq!(k, vec![0.0, 1.0, 2.0, 3.0, -4.0, -3.0, -2.0, -1.0]);
    }
}
