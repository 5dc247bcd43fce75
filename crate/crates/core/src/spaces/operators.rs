//! Fractional Laplacians, Bessel-potential norms and mixed space-time norms.

use ndarray::{Array2, ArrayView2};
use num_complex::Complex;

use crate::error::{Error, Result};
use crate::grid::{lp_norm_2d, ScalarField, SpaceTimeField};
use crate::scalar::{from_usize, lit, Real};
use crate::spaces::conditions::RegularityIndices;
use crate::spectral::Spectral2;

/// Coordinates a spectral multiplier acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Block {
    X,
    Y,
    Both,
}

fn block_modulus<T: Real>(block: Block, kx: T, ky: T) -> T {
    match block {
        Block::X => kx.abs(),
        Block::Y => ky.abs(),
        Block::Both => (kx * kx + ky * ky).sqrt(),
    }
}

/// `Δ^{r/2} f`, i.e. multiplication by `|ξ|^r`; the zero mode maps to zero.
pub fn frac_laplacian<T: Real>(field: &ScalarField<T>, r: T, block: Block) -> Result<ScalarField<T>> {
    if !(r > T::zero() && r <= lit(2.0)) {
        return Err(Error::OutOfRange { name: "r", detail: format!("order must lie in (0,2], got {r}") });
    }
    let sp = Spectral2::new(&field.grid);
    Ok(ScalarField { grid: field.grid, data: frac_laplacian_array(&sp, field.data.view(), r, block) })
}

pub(crate) fn frac_laplacian_array<T: Real>(
    sp: &Spectral2<T>,
    a: ArrayView2<'_, T>,
    r: T,
    block: Block,
) -> Array2<T> {
    sp.apply(a, |kx, ky, _, _| {
        let m = block_modulus(block, kx, ky);
        let v = if m.is_zero() { T::zero() } else { m.powf(r) };
        Complex::new(v, T::zero())
    })
}

/// `‖f‖_p + ‖Δ^{r/2} f‖_p` on the torus. For `r = 0` the second term is
/// the norm of `f` minus its mean.
pub fn bessel_norm<T: Real>(field: &ScalarField<T>, r: T, p: T, block: Block) -> Result<T> {
    if r < T::zero() || r > lit(2.0) {
        return Err(Error::OutOfRange { name: "r", detail: format!("order must lie in [0,2], got {r}") });
    }
    let cell = field.grid.cell_area();
    let base = lp_norm_2d(field.data.view(), p, cell);
    let sp = Spectral2::new(&field.grid);
    let lifted = sp.apply(field.data.view(), |kx, ky, _, _| {
        let m = block_modulus(block, kx, ky);
        let v = if m.is_zero() { T::zero() } else { m.powf(r) };
        Complex::new(v, T::zero())
    });
    Ok(base + lp_norm_2d(lifted.view(), p, cell))
}

/// Per-row x-norm of one slice, then `L^p` in y.
fn slice_mixed_norm<T: Real>(
    sp: &Spectral2<T>,
    a: ArrayView2<'_, T>,
    beta: Option<T>,
    p: T,
    dx: T,
    dy: T,
) -> T {
    let lifted = beta.map(|b| frac_laplacian_array(sp, a, b, Block::X));
    let row_norm = |row: ndarray::ArrayView1<'_, T>| -> T {
        if p.is_infinite() {
            row.iter().fold(T::zero(), |m, &v| m.max(v.abs()))
        } else {
            (row.iter().map(|v| v.abs().powf(p)).sum::<T>() * dx).powf(p.recip())
        }
    };
    let per_row: Vec<T> = a
        .rows()
        .into_iter()
        .enumerate()
        .map(|(j, row)| {
            let mut n = row_norm(row);
            if let Some(l) = &lifted {
                n += row_norm(l.row(j));
            }
            n
        })
        .collect();
    if p.is_infinite() {
        per_row.into_iter().fold(T::zero(), T::max)
    } else {
        (per_row.into_iter().map(|v| v.powf(p)).sum::<T>() * dy).powf(p.recip())
    }
}

/// Norm in `L^q(0,T; L^p_y(H^β_p,x))` (with `β` when `with_beta`, plain
/// `L^q L^p` otherwise). The time integral is the trapezoid rule over the
/// slice norms.
pub fn mixed_norm<T: Real>(field: &SpaceTimeField<T>, idx: &RegularityIndices<T>, with_beta: bool) -> T {
    mixed_norm_with(field, if with_beta { Some(idx.beta) } else { None }, idx.p, idx.q)
}

pub fn mixed_norm_with<T: Real>(field: &SpaceTimeField<T>, beta: Option<T>, p: T, q: T) -> T {
    let g = field.grid;
    let sp = Spectral2::new(&g);
    let slices: Vec<T> = (0..=g.nt)
        .map(|k| slice_mixed_norm(&sp, field.slice(k), beta, p, g.dx(), g.dy()))
        .collect();
    time_norm(&slices, g.dt(), q)
}

/// Trapezoid `L^q` norm of equally spaced samples.
pub fn time_norm<T: Real>(samples: &[T], dt: T, q: T) -> T {
    if q.is_infinite() {
        return samples.iter().fold(T::zero(), |m, &v| m.max(v.abs()));
    }
    let n = samples.len();
    if n < 2 {
        return T::zero();
    }
    let half: T = lit(0.5);
    let s: T = samples
        .iter()
        .enumerate()
        .map(|(k, v)| {
            let w = if k == 0 || k == n - 1 { half } else { T::one() };
            w * v.abs().powf(q)
        })
        .sum();
    (s * dt).powf(q.recip())
}

/// Central finite-difference gradient, one-sided on the lattice boundary.
/// The domain is treated as a box, not a torus.
pub fn fd_gradient<T: Real>(field: &ScalarField<T>) -> (Array2<T>, Array2<T>) {
    let (ny, nx) = field.data.dim();
    let (dx, dy) = (field.grid.dx(), field.grid.dy());
    let a = &field.data;
    let two: T = lit(2.0);
    let gx = Array2::from_shape_fn((ny, nx), |(j, i)| {
        if i == 0 {
            (a[[j, 1]] - a[[j, 0]]) / dx
        } else if i == nx - 1 {
            (a[[j, i]] - a[[j, i - 1]]) / dx
        } else {
            (a[[j, i + 1]] - a[[j, i - 1]]) / (two * dx)
        }
    });
    let gy = Array2::from_shape_fn((ny, nx), |(j, i)| {
        if j == 0 {
            (a[[1, i]] - a[[0, i]]) / dy
        } else if j == ny - 1 {
            (a[[j, i]] - a[[j - 1, i]]) / dy
        } else {
            (a[[j + 1, i]] - a[[j - 1, i]]) / (two * dy)
        }
    });
    (gx, gy)
}

/// `L²` norm computed from the spectrum (Parseval).
pub fn l2_norm_spectral<T: Real>(field: &ScalarField<T>) -> T {
    let sp = Spectral2::new(&field.grid);
    let c = sp.forward(field.data.view());
    let n = from_usize::<T>(field.grid.nx * field.grid.ny);
    let s: T = c.iter().map(|z| z.norm_sqr()).sum();
    (s * field.grid.cell_area() / n).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;
    use approx::assert_relative_eq;

    fn grid() -> GridSpec<f64> {
        GridSpec::new(std::f64::consts::PI, std::f64::consts::PI, 32, 32, 1.0, 8).unwrap()
    }

    #[test]
    fn eigenmode_scaling() {
        let g = grid();
        let f = ScalarField::from_fn(g, |x, _| (2.0 * x).cos());
        let l = frac_laplacian(&f, 1.5, Block::X).unwrap();
        for (a, b) in l.data.iter().zip(f.data.iter()) {
            assert!((a - 2f64.powf(1.5) * b).abs() < 1e-12);
        }
        assert!(frac_laplacian(&f, 2.5, Block::X).is_err());
    }

    #[test]
    fn constant_annihilated() {
        let f = ScalarField::from_fn(grid(), |_, _| 3.0);
        let l = frac_laplacian(&f, 0.5, Block::Both).unwrap();
        assert!(l.sup_norm() < 1e-13);
    }

    #[test]
    fn cos_mode_bessel_norm() {
        let g = grid();
        let f = ScalarField::from_fn(g, |x, y| 0.5 * (x + 2.0 * y).cos());
        let k = 5f64.sqrt();
        let v = bessel_norm(&f, 1.0, 2.0, Block::Both).unwrap();
        let l2 = 0.5 * (g.area() / 2.0).sqrt();
        assert_relative_eq!(v, l2 * (1.0 + k), epsilon = 1e-12);
    }

    #[test]
    fn mixed_norm_of_constant() {
        let g = grid();
        let f = SpaceTimeField::from_fn(g, |_, _, _| 2.0);
        let idx = RegularityIndices { alpha: 1.5, beta: 0.3, p: 3.0, q: 4.0, d1: 1, d2: 1 };
        let expect = 2.0 * g.area().powf(1.0 / 3.0) * 1.0f64.powf(0.25);
        assert_relative_eq!(mixed_norm(&f, &idx, true), expect, epsilon = 1e-12);
        assert_relative_eq!(mixed_norm(&f, &idx, false), expect, epsilon = 1e-12);
    }
}
