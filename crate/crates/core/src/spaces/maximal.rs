//! Discrete Hardy–Littlewood maximal function and the pointwise Lipschitz
//! inequality it controls.

use ndarray::Array2;
use rand::Rng;
use rayon::prelude::*;

use crate::grid::ScalarField;
use crate::scalar::{from_usize, Real};
use crate::spaces::operators::fd_gradient;

/// Sup over centred lattice balls of the average of `|f|`.
///
/// Radii run over integer multiples of `min(dx, dy)` up to the smaller
/// half-width of the domain. Balls are clipped to the lattice box (no
/// periodic wrap) and averaged over the points they contain.
pub fn maximal_function<T: Real>(field: &ScalarField<T>) -> ScalarField<T> {
    let g = field.grid;
    let data = maximal_array(&field.data.mapv(|v| v.abs()), g.dx(), g.dy(), g.lx.min(g.ly));
    ScalarField { grid: g, data }
}

pub(crate) fn maximal_array<T: Real>(a: &Array2<T>, dx: T, dy: T, half_width: T) -> Array2<T> {
    let (ny, nx) = a.dim();
    let h = dx.min(dy);
    let max_m = (half_width / h).floor().to_usize().unwrap_or(0);
    // prefix[j][i] = sum of a[j][..i]
    let prefix: Vec<Vec<T>> = a
        .rows()
        .into_iter()
        .map(|row| {
            let mut p = Vec::with_capacity(nx + 1);
            let mut s = T::zero();
            p.push(s);
            for &v in row {
                s += v;
                p.push(s);
            }
            p
        })
        .collect();
    let rows: Vec<Vec<T>> = (0..ny)
        .into_par_iter()
        .map(|j| {
            (0..nx)
                .map(|i| {
                    let mut best = a[[j, i]];
                    for m in 1..=max_m {
                        let r = h * from_usize::<T>(m);
                        let r2 = r * r;
                        let jr = (r / dy).floor().to_usize().unwrap_or(0);
                        let mut sum = T::zero();
                        let mut count = 0usize;
                        let j_lo = j.saturating_sub(jr);
                        let j_hi = (j + jr).min(ny - 1);
                        for (jj, row) in prefix.iter().enumerate().take(j_hi + 1).skip(j_lo) {
                            let oy = dy * from_usize::<T>(jj.abs_diff(j));
                            let rem = r2 - oy * oy;
                            if rem < T::zero() {
                                continue;
                            }
                            let w = (rem.sqrt() / dx + T::from_f64(1e-9).unwrap()).floor().to_usize().unwrap_or(0);
                            let lo = i.saturating_sub(w);
                            let hi = (i + w).min(nx - 1);
                            sum = sum + row[hi + 1] - row[lo];
                            count += hi + 1 - lo;
                        }
                        let avg = sum / from_usize(count);
                        if avg > best {
                            best = avg;
                        }
                    }
                    best
                })
                .collect()
        })
        .collect();
    Array2::from_shape_fn((ny, nx), |(j, i)| rows[j][i])
}

/// Result of [`check_pointwise_lipschitz`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LipschitzCheck<T> {
    /// Largest `|f(x) - f(y)| / (|x - y| (M|∇f|(x) + M|∇f|(y)))`.
    pub worst: T,
    /// Pairs actually evaluated (coincident points are skipped).
    pub evaluated: usize,
}

/// Two lattice points `((i1, j1), (i2, j2))`.
pub type LatticePair = ((usize, usize), (usize, usize));

/// Measures the constant in `|f(x) - f(y)| ≤ C |x - y| (M|∇f|(x) + M|∇f|(y))`
/// over the given lattice index pairs `((i1, j1), (i2, j2))`.
pub fn check_pointwise_lipschitz<T: Real>(
    field: &ScalarField<T>,
    pairs: &[LatticePair],
) -> LipschitzCheck<T> {
    let g = field.grid;
    let (gx, gy) = fd_gradient(field);
    let grad = Array2::from_shape_fn(gx.dim(), |ij| (gx[ij] * gx[ij] + gy[ij] * gy[ij]).sqrt());
    let mg = maximal_array(&grad, g.dx(), g.dy(), g.lx.min(g.ly));
    let mut worst = T::zero();
    let mut evaluated = 0;
    for &((i1, j1), (i2, j2)) in pairs {
        if (i1, j1) == (i2, j2) {
            continue;
        }
        let ddx = g.x(i1) - g.x(i2);
        let ddy = g.y(j1) - g.y(j2);
        let dist = (ddx * ddx + ddy * ddy).sqrt();
        let num = (field.data[[j1, i1]] - field.data[[j2, i2]]).abs();
        let den = dist * (mg[[j1, i1]] + mg[[j2, i2]]);
        evaluated += 1;
        if num.is_zero() {
            continue;
        }
        let ratio = if den.is_zero() { T::infinity() } else { num / den };
        worst = worst.max(ratio);
    }
    LipschitzCheck { worst, evaluated }
}

/// Uniformly random lattice index pairs.
pub fn random_pairs<R: Rng + ?Sized>(nx: usize, ny: usize, n: usize, rng: &mut R) -> Vec<LatticePair> {
    (0..n)
        .map(|_| {
            (
                (rng.random_range(0..nx), rng.random_range(0..ny)),
                (rng.random_range(0..nx), rng.random_range(0..ny)),
            )
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;
    use crate::noise::NoiseStream;

    fn grid(n: usize) -> GridSpec<f64> {
        GridSpec::new(2.0, 2.0, n, n, 1.0, 1).unwrap()
    }

    #[test]
    fn constant_is_fixed_point() {
        let f = ScalarField::from_fn(grid(16), |_, _| 1.5);
        let m = maximal_function(&f);
        assert!(m.data.iter().all(|v| (v - 1.5).abs() < 1e-14));
    }

    #[test]
    fn dominates_modulus() {
        let f = ScalarField::from_fn(grid(32), |x, y| (3.0 * x).sin() * y);
        let m = maximal_function(&f);
        for (a, b) in m.data.iter().zip(f.data.iter()) {
            assert!(*a >= b.abs());
        }
    }

    #[test]
    fn linear_field_ratio_is_half() {
        let f = ScalarField::from_fn(grid(32), |x, y| 0.7 * x - 0.2 * y);
        let pairs = random_pairs(32, 32, 200, &mut NoiseStream::new(5, 0));
        let c = check_pointwise_lipschitz(&f, &pairs);
        let along_x: Vec<_> = pairs.iter().map(|&((i1, j), (i2, _))| ((i1, j), (i2, j))).collect();
        let c_x = check_pointwise_lipschitz(&ScalarField::from_fn(grid(32), |x, _| 0.7 * x), &along_x);
        assert!((c_x.worst - 0.5).abs() < 1e-12);
        assert!(c.worst <= 0.5 + 1e-12);
        let z = check_pointwise_lipschitz(&ScalarField::from_fn(grid(32), |_, _| 1.0), &pairs);
        assert_eq!(z.worst, 0.0);
    }
}
