//! Spectral solver for the degenerate Kolmogorov equation
//! `∂_t u = L₀u + F·∇_x u + G·∇_y u + f`, `u(0) = 0`, on the periodic lattice,
//! where `L₀` has symbol `-(|ξ_x|^α + |ξ_y|²/2)`.
//!
//! The drift-free problem is integrated mode by mode with an exponential
//! integrator that is exact for sources linear in time on each step; the
//! drift is handled by Picard iteration of the mild formulation.

use ndarray::{Array2, Array3, Axis};
use num_complex::Complex;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{sup_abs, GridSpec, SpaceTimeField};
use crate::kernels::mixed_symbol;
use crate::scalar::{lit, to_f64, Real};
use crate::spaces::conditions::{require, RegularityIndices};
use crate::spaces::operators::{frac_laplacian_array, mixed_norm_with, Block};
use crate::spectral::Spectral2;

/// Drift `B = (F, G)` sampled on the lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct DriftSpec<T> {
    pub tag: String,
    /// x-block component `F`.
    pub f: SpaceTimeField<T>,
    /// y-block component `G`.
    pub g: SpaceTimeField<T>,
}

impl<T: Real> DriftSpec<T> {
    pub fn new(tag: impl Into<String>, f: SpaceTimeField<T>, g: SpaceTimeField<T>) -> Result<Self> {
        f.grid.check_same(&g.grid)?;
        Ok(DriftSpec { tag: tag.into(), f, g })
    }

    pub fn zero(grid: GridSpec<T>) -> Self {
        DriftSpec { tag: "zero".into(), f: SpaceTimeField::zeros(grid), g: SpaceTimeField::zeros(grid) }
    }

    pub fn grid(&self) -> GridSpec<T> {
        self.f.grid
    }

    pub fn is_zero(&self) -> bool {
        self.f.is_zero() && self.g.is_zero()
    }

    /// `‖F‖ + ‖G‖` in `L^q(L^p_y(H^β_{p,x}))`.
    pub fn norm(&self, idx: &RegularityIndices<T>) -> T {
        mixed_norm_with(&self.f, Some(idx.beta), idx.p, idx.q)
            + mixed_norm_with(&self.g, Some(idx.beta), idx.p, idx.q)
    }

    pub fn sup_norm(&self) -> T {
        self.f.sup_norm().max(self.g.sup_norm())
    }

    pub fn scaled(&self, c: T) -> Self {
        DriftSpec { tag: self.tag.clone(), f: self.f.scaled(c), g: self.g.scaled(c) }
    }

    pub fn time_reversed(&self) -> Self {
        DriftSpec { tag: self.tag.clone(), f: self.f.time_reversed(), g: self.g.time_reversed() }
    }
}

/// Per-iteration diagnostics of [`picard_solve`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterateRecord {
    pub iteration: usize,
    /// Mixed `L^q L^p` norm of `u_n - u_{n-1}`.
    pub diff_norm: f64,
    /// `diff_n / diff_{n-1}`; absent for the first iterate.
    pub ratio: Option<f64>,
    pub grad_x_sup: f64,
    pub grad_y_sup: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PideSolution<T> {
    pub u: SpaceTimeField<T>,
    pub iterates: Vec<IterateRecord>,
    pub indices: RegularityIndices<T>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PicardOptions {
    /// Absolute tolerance on the mixed norm of successive differences.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for PicardOptions {
    fn default() -> Self {
        PicardOptions { tol: 1e-10, max_iter: 100 }
    }
}

/// Exponential-integrator weights per Fourier mode.
struct Integrator<T: Real> {
    sp: Spectral2<T>,
    grid: GridSpec<T>,
    decay: Array2<T>,
    wa: Array2<T>,
    wb: Array2<T>,
}

/// `(e^{-z}, (1-(1+z)e^{-z})/z², (z-1+e^{-z})/z²)`.
fn weights(z: f64) -> (f64, f64, f64) {
    if z < 1e-3 {
        let z2 = z * z;
        let z3 = z2 * z;
        (
            (-z).exp(),
            0.5 - z / 3.0 + z2 / 8.0 - z3 / 30.0,
            0.5 - z / 6.0 + z2 / 24.0 - z3 / 120.0,
        )
    } else {
        let e = (-z).exp();
        (e, (1.0 - (1.0 + z) * e) / (z * z), (z - 1.0 + e) / (z * z))
    }
}

impl<T: Real> Integrator<T> {
    fn new(grid: GridSpec<T>, alpha: T) -> Self {
        let sp = Spectral2::new(&grid);
        let h = to_f64(grid.dt());
        let shape = (grid.ny, grid.nx);
        let mut decay = Array2::zeros(shape);
        let mut wa = Array2::zeros(shape);
        let mut wb = Array2::zeros(shape);
        for j in 0..grid.ny {
            for i in 0..grid.nx {
                let lam = to_f64(mixed_symbol(alpha, sp.kx()[i], sp.ky()[j]));
                let (e, a, b) = weights(lam * h);
                decay[[j, i]] = lit(e);
                wa[[j, i]] = lit(a * h);
                wb[[j, i]] = lit(b * h);
            }
        }
        Integrator { sp, grid, decay, wa, wb }
    }

    fn forward_all(&self, field: &SpaceTimeField<T>) -> Vec<Array2<Complex<T>>> {
        (0..=self.grid.nt).into_par_iter().map(|k| self.sp.forward(field.slice(k))).collect()
    }

    fn integrate(&self, src: &[Array2<Complex<T>>]) -> SpaceTimeField<T> {
        let g = self.grid;
        let mut spectra = Vec::with_capacity(g.nt + 1);
        let mut cur = Array2::from_elem((g.ny, g.nx), Complex::new(T::zero(), T::zero()));
        spectra.push(cur.clone());
        for n in 0..g.nt {
            ndarray::Zip::from(&mut cur)
                .and(&self.decay)
                .and(&self.wa)
                .and(&self.wb)
                .and(&src[n])
                .and(&src[n + 1])
                .for_each(|u, &e, &a, &b, &f0, &f1| {
                    *u = *u * e + f0 * a + f1 * b;
                });
            spectra.push(cur.clone());
        }
        let slices: Vec<Array2<T>> = spectra.into_par_iter().map(|c| self.sp.inverse_real(c)).collect();
        let mut data = Array3::zeros((g.nt + 1, g.ny, g.nx));
        for (k, s) in slices.into_iter().enumerate() {
            data.index_axis_mut(Axis(0), k).assign(&s);
        }
        SpaceTimeField { grid: g, data }
    }

    fn gradients(&self, u: &SpaceTimeField<T>) -> Vec<(Array2<T>, Array2<T>)> {
        (0..=self.grid.nt).into_par_iter().map(|k| self.sp.gradient(u.slice(k))).collect()
    }
}

/// `u(t) = ∫₀ᵗ T_{t-s} f(s) ds` with `f` linear in time between nodes.
pub fn solve_driftfree<T: Real>(f: &SpaceTimeField<T>, idx: &RegularityIndices<T>) -> Result<PideSolution<T>> {
    f.grid.validate()?;
    let integ = Integrator::new(f.grid, idx.alpha);
    let u = integ.integrate(&integ.forward_all(f));
    Ok(PideSolution { u, iterates: Vec::new(), indices: *idx })
}

/// Picard iteration `u_n = ∫₀ᵗ T_{t-s}(f + F·∇_x u_{n-1} + G·∇_y u_{n-1}) ds`,
/// starting from `u_0 = 0`.
pub fn picard_solve<T: Real>(
    f: &SpaceTimeField<T>,
    drift: &DriftSpec<T>,
    idx: &RegularityIndices<T>,
    opts: PicardOptions,
) -> Result<PideSolution<T>> {
    f.grid.validate()?;
    f.grid.check_same(&drift.grid())?;
    let integ = Integrator::new(f.grid, idx.alpha);
    let g = f.grid;
    let f_spec = integ.forward_all(f);
    let zero_drift = drift.is_zero();
    let mut u_prev = SpaceTimeField::zeros(g);
    let mut grads: Option<Vec<(Array2<T>, Array2<T>)>> = None;
    let mut records: Vec<IterateRecord> = Vec::new();
    let mut above_one = 0;
    for n in 1..=opts.max_iter {
        let src = match (&grads, zero_drift) {
            (Some(gr), false) => (0..=g.nt)
                .into_par_iter()
                .map(|k| {
                    let (gx, gy) = &gr[k];
                    let s = &f.slice(k) + &(&drift.f.slice(k) * gx) + &(&drift.g.slice(k) * gy);
                    integ.sp.forward(s.view())
                })
                .collect(),
            _ => f_spec.clone(),
        };
        let u = integ.integrate(&src);
        let diff = to_f64(mixed_norm_with(&u.sub(&u_prev), None, idx.p, idx.q));
        let new_grads = integ.gradients(&u);
        let gxs = new_grads.iter().fold(T::zero(), |m, (gx, _)| m.max(sup_abs(gx.view())));
        let gys = new_grads.iter().fold(T::zero(), |m, (_, gy)| m.max(sup_abs(gy.view())));
        let ratio = records.last().and_then(|r| (r.diff_norm > 0.0).then(|| diff / r.diff_norm));
        records.push(IterateRecord {
            iteration: n,
            diff_norm: diff,
            ratio,
            grad_x_sup: to_f64(gxs),
            grad_y_sup: to_f64(gys),
        });
        if diff < opts.tol {
            return Ok(PideSolution { u, iterates: records, indices: *idx });
        }
        if ratio.is_some_and(|r| r > 1.0) {
            above_one += 1;
            if above_one >= 3 {
                return Err(Error::ContractionFailed {
                    iteration: n,
                    ratios: records.iter().filter_map(|r| r.ratio).collect(),
                });
            }
        } else {
            above_one = 0;
        }
        u_prev = u;
        grads = Some(new_grads);
    }
    Err(Error::MaxIterExceeded {
        max_iter: opts.max_iter,
        last: records.last().map(|r| r.diff_norm).unwrap_or(f64::NAN),
    })
}

/// Applies `L₀` to every slice spectrally.
pub fn apply_generator<T: Real>(u: &SpaceTimeField<T>, alpha: T) -> SpaceTimeField<T> {
    let sp = Spectral2::new(&u.grid);
    map_slices(u, |a| {
        sp.apply(a, |kx, ky, _, _| Complex::new(-mixed_symbol(alpha, kx, ky), T::zero()))
    })
}

fn map_slices<T: Real>(
    u: &SpaceTimeField<T>,
    f: impl Fn(ndarray::ArrayView2<'_, T>) -> Array2<T> + Sync,
) -> SpaceTimeField<T> {
    let g = u.grid;
    let slices: Vec<Array2<T>> = (0..=g.nt).into_par_iter().map(|k| f(u.slice(k))).collect();
    let mut data = Array3::zeros((g.nt + 1, g.ny, g.nx));
    for (k, s) in slices.into_iter().enumerate() {
        data.index_axis_mut(Axis(0), k).assign(&s);
    }
    SpaceTimeField { grid: g, data }
}

/// `∂_t u` by second-order finite differences (one-sided at the ends).
pub fn time_derivative<T: Real>(u: &SpaceTimeField<T>) -> SpaceTimeField<T> {
    let g = u.grid;
    let nt = g.nt;
    let h = g.dt();
    let two: T = lit(2.0);
    let three: T = lit(3.0);
    let four: T = lit(4.0);
    let mut data = Array3::zeros(u.data.raw_dim());
    for k in 0..=nt {
        let d = if nt < 2 {
            let (a, b) = if k == 0 { (0, 1) } else { (nt - 1, nt) };
            (&u.slice(b) - &u.slice(a)) / h
        } else if k == 0 {
            (&u.slice(1) * four - &u.slice(0) * three - u.slice(2)) / (two * h)
        } else if k == nt {
            (&u.slice(nt) * three - &u.slice(nt - 1) * four + u.slice(nt - 2)) / (two * h)
        } else {
            (&u.slice(k + 1) - &u.slice(k - 1)) / (two * h)
        };
        data.index_axis_mut(Axis(0), k).assign(&d);
    }
    SpaceTimeField { grid: g, data }
}

/// `∂_t u - L₀u - F·∇_x u - G·∇_y u - f` on every node.
pub fn residual<T: Real>(
    u: &SpaceTimeField<T>,
    f: &SpaceTimeField<T>,
    drift: Option<&DriftSpec<T>>,
    alpha: T,
) -> SpaceTimeField<T> {
    let dt = time_derivative(u);
    let lu = apply_generator(u, alpha);
    let mut r = &(&dt.data - &lu.data) - &f.data;
    if let Some(b) = drift {
        let sp = Spectral2::new(&u.grid);
        for k in 0..=u.grid.nt {
            let (gx, gy) = sp.gradient(u.slice(k));
            let t = &(&b.f.slice(k) * &gx) + &(&b.g.slice(k) * &gy);
            let mut s = r.index_axis_mut(Axis(0), k);
            s -= &t;
        }
    }
    SpaceTimeField { grid: u.grid, data: r }
}

/// Ratios of the maximal-regularity quantities to the source norm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegularityReport {
    pub source_norm: f64,
    /// `‖∂_t u‖` in `H^{β,p}_q`.
    pub dt_norm: f64,
    /// `‖∂²_y u‖` in `H^{β,p}_q`.
    pub d2y_norm: f64,
    /// `‖Δ_x^{(α+β)/2} u‖` in `L^p_q`.
    pub frac_norm: f64,
    /// The three norms divided by `source_norm`; `None` for a zero source.
    pub ratios: Option<[f64; 3]>,
}

pub fn regularity_report<T: Real>(
    sol: &PideSolution<T>,
    f: &SpaceTimeField<T>,
    idx: &RegularityIndices<T>,
) -> RegularityReport {
    let (p, q, beta) = (idx.p, idx.q, idx.beta);
    let source = to_f64(mixed_norm_with(f, Some(beta), p, q));
    let u = &sol.u;
    let sp = Spectral2::new(&u.grid);
    let dt_norm = to_f64(mixed_norm_with(&time_derivative(u), Some(beta), p, q));
    let d2y = map_slices(u, |a| sp.apply(a, |_, ky, _, _| Complex::new(-ky * ky, T::zero())));
    let d2y_norm = to_f64(mixed_norm_with(&d2y, Some(beta), p, q));
    let frac = map_slices(u, |a| frac_laplacian_array(&sp, a, idx.alpha + beta, Block::X));
    let frac_norm = to_f64(mixed_norm_with(&frac, None, p, q));
    let ratios = (source > 0.0).then(|| [dt_norm / source, d2y_norm / source, frac_norm / source]);
    RegularityReport { source_norm: source, dt_norm, d2y_norm, frac_norm, ratios }
}

/// Time profile of the gradient sup-norms and fitted power laws.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientScaling {
    pub times: Vec<f64>,
    pub grad_x_sup: Vec<f64>,
    pub grad_y_sup: Vec<f64>,
    /// Least-squares slope of `log sup|∇_y u(t)|` against `log t`.
    pub slope_y: Option<f64>,
    pub slope_x: Option<f64>,
    /// `1/2 - sum`.
    pub target_y: f64,
    /// `1 - 1/α - sum`.
    pub target_x: f64,
}

fn loglog_slope(t: &[f64], v: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> =
        t.iter().zip(v).filter(|(t, v)| **t > 0.0 && **v > 0.0).map(|(t, v)| (t.ln(), v.ln())).collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Measures `sup|∇_x u(t)|`, `sup|∇_y u(t)|` and their growth exponents in
/// `t`. Requires `cond_main` and `cond_gradx`.
pub fn gradient_supnorms<T: Real>(sol: &PideSolution<T>, idx: &RegularityIndices<T>) -> Result<GradientScaling> {
    let report = idx.check();
    require(&report, &["cond_main", "cond_gradx"])?;
    let u = &sol.u;
    let g = u.grid;
    let sp = Spectral2::new(&g);
    let grads: Vec<(f64, f64)> = (0..=g.nt)
        .into_par_iter()
        .map(|k| {
            let (gx, gy) = sp.gradient(u.slice(k));
            (to_f64(sup_abs(gx.view())), to_f64(sup_abs(gy.view())))
        })
        .collect();
    let times: Vec<f64> = (0..=g.nt).map(|k| to_f64(g.t(k))).collect();
    let gx: Vec<f64> = grads.iter().map(|g| g.0).collect();
    let gy: Vec<f64> = grads.iter().map(|g| g.1).collect();
    let sum = to_f64(report.sum);
    let alpha = to_f64(idx.alpha);
    Ok(GradientScaling {
        slope_x: loglog_slope(&times, &gx),
        slope_y: loglog_slope(&times, &gy),
        times,
        grad_x_sup: gx,
        grad_y_sup: gy,
        target_y: 0.5 - sum,
        target_x: 1.0 - 1.0 / alpha - sum,
    })
}

/// Exponent `1 - 1/α - d1/(αp) - d2/(2p) - 1/q` of the small-time bound.
pub fn contraction_exponent<T: Real>(idx: &RegularityIndices<T>) -> T {
    T::one() - idx.alpha.recip() - idx.sum()
}

/// Measured constant of the gradient bound
/// `‖∇_x u‖_∞ + ‖∇_y u‖_∞ ≤ C₁ T^e ‖f‖`: the largest ratio over the
/// drift-free solutions for `sources`.
pub fn calibrate_c1<T: Real>(sources: &[SpaceTimeField<T>], idx: &RegularityIndices<T>) -> Result<T> {
    let e = contraction_exponent(idx);
    let mut c1 = T::zero();
    for f in sources {
        let norm = mixed_norm_with(f, Some(idx.beta), idx.p, idx.q);
        if norm.is_zero() {
            continue;
        }
        let sol = solve_driftfree(f, idx)?;
        let sp = Spectral2::new(&f.grid);
        let (mut gx, mut gy) = (T::zero(), T::zero());
        for k in 0..=f.grid.nt {
            let (a, b) = sp.gradient(sol.u.slice(k));
            gx = gx.max(sup_abs(a.view()));
            gy = gy.max(sup_abs(b.view()));
        }
        c1 = c1.max((gx + gy) / (f.grid.t_end.powf(e) * norm));
    }
    Ok(c1)
}

/// Supremum of the horizons `T` with `2 C₁ T^e S < δ`, where `S` is the
/// drift norm; capped at `horizon`, and equal to it for a zero drift.
pub fn choose_small_t<T: Real>(drift_norm: T, idx: &RegularityIndices<T>, delta: T, c1: T, horizon: T) -> Result<T> {
    if !(delta > T::zero() && delta < T::one()) {
        return Err(Error::OutOfRange { name: "delta", detail: format!("must lie in (0,1), got {delta}") });
    }
    let e = contraction_exponent(idx);
    if !(e > T::zero()) {
        return Err(Error::ConditionViolated { name: "cond_gradx", margin: to_f64(e) });
    }
    if drift_norm.is_zero() {
        return Ok(horizon);
    }
    let t = (delta / (lit::<T>(2.0) * c1 * drift_norm)).powf(e.recip());
    Ok(t.min(horizon))
}

/// Which of the three Sobolev-embedding regimes applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EmbeddingCase {
    /// `β < d1/p`.
    Subcritical,
    /// `β = d1/p`.
    Critical,
    /// `β > d1/p`: `F` is bounded.
    Supercritical,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmbeddingReport {
    pub case: EmbeddingCase,
    pub eps: f64,
    pub p_star: f64,
    /// Infinite in the supercritical case.
    pub r: f64,
    /// `|1/p - 1/p* - 1/r|`.
    pub holder_defect: f64,
    /// `‖F · Δ_x^{β/2} ∇_x u‖` in `L^p_q`.
    pub product_norm: f64,
    /// `‖F‖_{H^{β,p}_q} · ‖u‖_{H^{α+β,p}_q}`.
    pub bound: f64,
}

/// Classifies `β` against `d1/p` and evaluates the product estimate.
///
/// `eps` defaults to half of `min(β, α - 1 - (d1/p - β))`.
pub fn embedding_case_report<T: Real>(
    drift_f: &SpaceTimeField<T>,
    u: &SpaceTimeField<T>,
    idx: &RegularityIndices<T>,
    eps: Option<f64>,
) -> EmbeddingReport {
    let i = idx.to_f64();
    let d1p = i.d1 as f64 / i.p;
    let case = if (i.beta - d1p).abs() < 1e-12 {
        EmbeddingCase::Critical
    } else if i.beta < d1p {
        EmbeddingCase::Subcritical
    } else {
        EmbeddingCase::Supercritical
    };
    let eps = eps.unwrap_or(0.5 * i.beta.min(i.alpha - 1.0 - (d1p - i.beta)));
    let (p_star, r) = match case {
        EmbeddingCase::Supercritical => (i.p, f64::INFINITY),
        _ => (i.d1 as f64 / (d1p - i.beta + eps), i.d1 as f64 / (i.beta - eps)),
    };
    let holder_defect = (1.0 / i.p - 1.0 / p_star - 1.0 / r).abs();

    let sp = Spectral2::new(&u.grid);
    let prod = map_slices(u, |a| {
        let gx = sp.deriv_x(a);
        frac_laplacian_array(&sp, gx.view(), idx.beta, Block::X)
    });
    let prod = SpaceTimeField { grid: u.grid, data: &prod.data * &drift_f.data };
    let product_norm = to_f64(mixed_norm_with(&prod, None, idx.p, idx.q));
    let fnorm = to_f64(mixed_norm_with(drift_f, Some(idx.beta), idx.p, idx.q));
    let unorm = to_f64(mixed_norm_with(u, Some(idx.alpha + idx.beta), idx.p, idx.q));
    EmbeddingReport { case, eps, p_star, r, holder_defect, product_norm, bound: fnorm * unorm }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn idx() -> RegularityIndices<f64> {
        RegularityIndices::new(1.5, 0.3, 20.0, 20.0, 1, 1).unwrap()
    }

    #[test]
    fn weights_series_continuity() {
        let z = 0.999e-3;
        let (e, a, b) = weights(z);
        assert!((a - (1.0 - (1.0 + z) * e) / (z * z)).abs() < 1e-9);
        assert!((b - (z - 1.0 + e) / (z * z)).abs() < 1e-9);
    }

    #[test]
    fn single_mode_amplitude() {
        let g = GridSpec::new(PI, PI, 16, 16, 1.0, 8).unwrap();
        let f = SpaceTimeField::from_fn(g, |_, x, y| (x + y).cos());
        let sol = solve_driftfree(&f, &idx()).unwrap();
        let amp = (1.0 - (-1.5f64).exp()) / 1.5;
        for j in 0..16 {
            for i in 0..16 {
                let v = sol.u.data[[8, j, i]];
                assert!((v - amp * (g.x(i) + g.y(j)).cos()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn small_t_choice() {
        let i = idx();
        let t = choose_small_t(1.0, &i, 0.5, 1.0, 10.0).unwrap();
        assert_relative_eq!(t, 0.25f64.powf(1.0 / 0.225), max_relative = 1e-10);
        let t2 = choose_small_t(2.0, &i, 0.5, 1.0, 10.0).unwrap();
        assert_relative_eq!(t / t2, 2f64.powf(1.0 / 0.225), max_relative = 1e-10);
        assert_eq!(choose_small_t(0.0, &i, 0.5, 1.0, 0.7).unwrap(), 0.7);
    }

    #[test]
    fn embedding_cases() {
        let g = GridSpec::new(PI, PI, 16, 16, 0.1, 4).unwrap();
        let u = SpaceTimeField::from_fn(g, |t, x, y| t * x.sin() * y.cos());
        let f = SpaceTimeField::from_fn(g, |_, x, _| x.cos());
        let r = embedding_case_report(&f, &u, &idx(), None);
        assert_eq!(r.case, EmbeddingCase::Supercritical);
        let i2 = RegularityIndices::new(1.5, 0.3, 2.0, 2.0, 1, 1).unwrap();
        let r2 = embedding_case_report(&f, &u, &i2, Some(0.05));
        assert_eq!(r2.case, EmbeddingCase::Subcritical);
        assert_relative_eq!(r2.p_star, 4.0, max_relative = 1e-12);
        assert!(r2.holder_defect < 1e-15);
    }
}
