//! Zvonkin change of variables `Φ_t(z) = z + U(t, z)`.
//!
//! `U = (u₁, u₂)` solves the backward equation
//! `∂_t U + L₀U + B·∇U + B = 0`, `U(T) = 0`; it is obtained from the forward
//! solver by reversing time in the drift and in the solution.

use ndarray::{Array2, Array3, Axis};
use num_complex::Complex;
use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{GridSpec, SpaceTimeField};
use crate::interp::Interp;
use crate::noise::StableParams;
use crate::pide::{picard_solve, DriftSpec, IterateRecord, PicardOptions};
use crate::quadrature::GaussLegendre;
use crate::scalar::{lit, to_f64, Real};
use crate::spaces::conditions::RegularityIndices;
use crate::spaces::operators::{frac_laplacian_array, Block};
use crate::spectral::Spectral2;

/// Anything that can play the role of `U` in `Φ = id + U` on `R¹ x R¹`.
pub trait Transform<T: Real>: Sync {
    fn horizon(&self) -> T;
    /// Stable index of the x-block noise.
    fn alpha(&self) -> T;
    fn u(&self, t: T, z: [T; 2]) -> [T; 2];
    /// `[i][j] = ∂_j U_i`.
    fn grad_u(&self, t: T, z: [T; 2]) -> [[T; 2]; 2];
    /// `(-Δ_x)^{α/2} U`.
    fn frac_u(&self, t: T, z: [T; 2]) -> [T; 2];
    /// Upper bound on the operator norm of `∇U`.
    fn grad_bound(&self) -> T;

    fn is_identity(&self) -> bool {
        false
    }

    fn phi(&self, t: T, z: [T; 2]) -> [T; 2] {
        let u = self.u(t, z);
        [z[0] + u[0], z[1] + u[1]]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZvonkinOptions {
    pub picard: PicardOptions,
    pub interp: Interp,
    /// Maps with `‖∇U‖_∞` at or above this value are rejected.
    pub max_grad: f64,
}

impl Default for ZvonkinOptions {
    fn default() -> Self {
        ZvonkinOptions { picard: PicardOptions::default(), interp: Interp::Multilinear, max_grad: 0.5 }
    }
}

/// `U` on the lattice together with `∇U` and `(-Δ_x)^{α/2}U`.
#[derive(Debug, Clone, PartialEq)]
pub struct ZvonkinMap<T: Real> {
    pub alpha: T,
    pub u: [SpaceTimeField<T>; 2],
    /// `grad[i][j] = ∂_j U_i`.
    pub grad: [[SpaceTimeField<T>; 2]; 2],
    pub frac: [SpaceTimeField<T>; 2],
    /// Largest operator norm of `∇U` over the lattice.
    pub grad_sup: T,
    pub interp: Interp,
    pub iterates: [Vec<IterateRecord>; 2],
    /// Measured `(c_min, c_max)` once [`check_bilipschitz`] has run.
    pub bilip: Option<(T, T)>,
    identity: bool,
}

fn op_norm<T: Real>(m: [[T; 2]; 2]) -> (T, T) {
    let s = m[0][0] * m[0][0] + m[0][1] * m[0][1] + m[1][0] * m[1][0] + m[1][1] * m[1][1];
    let det = (m[0][0] * m[1][1] - m[0][1] * m[1][0]).abs();
    let four: T = lit(4.0);
    let disc = (s * s - four * det * det).max(T::zero()).sqrt();
    let smax = ((s + disc) / lit(2.0)).sqrt();
    let smin = if smax > T::zero() { det / smax } else { T::zero() };
    (smax, smin)
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

impl<T: Real> ZvonkinMap<T> {
    /// Assembles a map from `U`, computing derivatives spectrally.
    pub fn from_u(u: [SpaceTimeField<T>; 2], alpha: T, interp: Interp) -> Result<Self> {
        u[0].grid.check_same(&u[1].grid)?;
        let sp = Spectral2::new(&u[0].grid);
        let gx = |f: &SpaceTimeField<T>| map_slices(f, |a| sp.deriv_x(a));
        let gy = |f: &SpaceTimeField<T>| map_slices(f, |a| sp.deriv_y(a));
        let fr = |f: &SpaceTimeField<T>| map_slices(f, |a| frac_laplacian_array(&sp, a, alpha, Block::X));
        let grad = [[gx(&u[0]), gy(&u[0])], [gx(&u[1]), gy(&u[1])]];
        let frac = [fr(&u[0]), fr(&u[1])];
        let mut grad_sup = T::zero();
        ndarray::Zip::from(&grad[0][0].data)
            .and(&grad[0][1].data)
            .and(&grad[1][0].data)
            .and(&grad[1][1].data)
            .for_each(|&a, &b, &c, &d| {
                grad_sup = grad_sup.max(op_norm([[a, b], [c, d]]).0);
            });
        let identity = u[0].is_zero() && u[1].is_zero();
        Ok(ZvonkinMap {
            alpha,
            u,
            grad,
            frac,
            grad_sup,
            interp,
            iterates: [Vec::new(), Vec::new()],
            bilip: None,
            identity,
        })
    }

    pub fn identity(grid: GridSpec<T>, alpha: T) -> Self {
        let z = || SpaceTimeField::zeros(grid);
        ZvonkinMap {
            alpha,
            u: [z(), z()],
            grad: [[z(), z()], [z(), z()]],
            frac: [z(), z()],
            grad_sup: T::zero(),
            interp: Interp::Multilinear,
            iterates: [Vec::new(), Vec::new()],
            bilip: None,
            identity: true,
        }
    }

    pub fn grid(&self) -> GridSpec<T> {
        self.u[0].grid
    }

    pub fn with_interp(mut self, interp: Interp) -> Self {
        self.interp = interp;
        self
    }

    /// `sup |U|` over the lattice.
    pub fn sup_norm(&self) -> T {
        self.u[0].sup_norm().max(self.u[1].sup_norm())
    }

    /// `sup |U(T, ·)|`.
    pub fn terminal_norm(&self) -> T {
        let nt = self.grid().nt;
        self.u[0].slice_field(nt).sup_norm().max(self.u[1].slice_field(nt).sup_norm())
    }

    /// Largest `‖∇Φ‖` and `‖(∇Φ)^{-1}‖` over the lattice.
    pub fn jacobian_bounds(&self) -> (T, T) {
        let mut hi = T::zero();
        let mut inv = T::zero();
        ndarray::Zip::from(&self.grad[0][0].data)
            .and(&self.grad[0][1].data)
            .and(&self.grad[1][0].data)
            .and(&self.grad[1][1].data)
            .for_each(|&a, &b, &c, &d| {
                let (smax, smin) = op_norm([[T::one() + a, b], [c, T::one() + d]]);
                hi = hi.max(smax);
                inv = inv.max(if smin > T::zero() { smin.recip() } else { T::infinity() });
            });
        (hi, inv)
    }

    fn eval2(&self, f: &[SpaceTimeField<T>; 2], t: T, z: [T; 2], how: Interp) -> [T; 2] {
        [f[0].eval(t, z[0], z[1], how), f[1].eval(t, z[0], z[1], how)]
    }
}

impl<T: Real> Transform<T> for ZvonkinMap<T> {
    fn horizon(&self) -> T {
        self.grid().t_end
    }

    fn alpha(&self) -> T {
        self.alpha
    }

    fn u(&self, t: T, z: [T; 2]) -> [T; 2] {
        if self.identity {
            return [T::zero(); 2];
        }
        self.eval2(&self.u, t, z, self.interp)
    }

    fn grad_u(&self, t: T, z: [T; 2]) -> [[T; 2]; 2] {
        if self.identity {
            return [[T::zero(); 2]; 2];
        }
        let ev = |f: &SpaceTimeField<T>| f.eval(t, z[0], z[1], self.interp);
        [[ev(&self.grad[0][0]), ev(&self.grad[0][1])], [ev(&self.grad[1][0]), ev(&self.grad[1][1])]]
    }

    fn frac_u(&self, t: T, z: [T; 2]) -> [T; 2] {
        if self.identity {
            return [T::zero(); 2];
        }
        self.eval2(&self.frac, t, z, self.interp)
    }

    fn grad_bound(&self) -> T {
        self.grad_sup
    }

    fn is_identity(&self) -> bool {
        self.identity
    }
}

/// Solves the two backward equations with sources `F` and `G`.
///
/// The caller is responsible for the horizon; choose it with
/// [`crate::pide::choose_small_t`].
pub fn build_zvonkin_map<T: Real>(
    drift: &DriftSpec<T>,
    idx: &RegularityIndices<T>,
    opts: ZvonkinOptions,
) -> Result<ZvonkinMap<T>> {
    let grid = drift.grid();
    if drift.is_zero() {
        return Ok(ZvonkinMap::identity(grid, idx.alpha));
    }
    let rev = drift.time_reversed();
    let (s1, s2) = rayon::join(
        || picard_solve(&rev.f, &rev, idx, opts.picard),
        || picard_solve(&rev.g, &rev, idx, opts.picard),
    );
    let (s1, s2) = (s1?, s2?);
    let mut map = ZvonkinMap::from_u([s1.u.time_reversed(), s2.u.time_reversed()], idx.alpha, opts.interp)?;
    map.iterates = [s1.iterates, s2.iterates];
    if !(to_f64(map.grad_sup) < opts.max_grad) {
        return Err(Error::GradientTooLarge(to_f64(map.grad_sup)));
    }
    Ok(map)
}

/// Outcome of [`invert_map`].
#[derive(Debug, Clone, PartialEq)]
pub struct Inversion<T> {
    pub z: [T; 2],
    pub iterations: usize,
    /// `|z_{n+1} - z_n| / |z_n - z_{n-1}|` along the iteration.
    pub ratios: Vec<T>,
    pub residual: T,
}

/// Solves `Φ_t(z) = w` by `z ← w - U(t, z)`.
pub fn invert_map<T: Real, M: Transform<T> + ?Sized>(
    map: &M,
    w: [T; 2],
    t: T,
    tol: T,
    max_iter: usize,
) -> Result<Inversion<T>> {
    if map.is_identity() {
        return Ok(Inversion { z: w, iterations: 0, ratios: Vec::new(), residual: T::zero() });
    }
    if !(map.grad_bound() < T::one()) {
        return Err(Error::NotContractive(to_f64(map.grad_bound())));
    }
    let mut z = w;
    let mut ratios = Vec::new();
    let mut last_step: Option<T> = None;
    for it in 1..=max_iter {
        let u = map.u(t, z);
        let next = [w[0] - u[0], w[1] - u[1]];
        let step = ((next[0] - z[0]).powi(2) + (next[1] - z[1]).powi(2)).sqrt();
        if let Some(prev) = last_step {
            if prev > T::zero() {
                ratios.push(step / prev);
            }
        }
        last_step = Some(step);
        z = next;
        let p = map.phi(t, z);
        let residual = ((p[0] - w[0]).powi(2) + (p[1] - w[1]).powi(2)).sqrt();
        if residual <= tol {
            return Ok(Inversion { z, iterations: it, ratios, residual });
        }
    }
    let p = map.phi(t, z);
    Err(Error::MaxIterExceeded {
        max_iter,
        last: to_f64(((p[0] - w[0]).powi(2) + (p[1] - w[1]).powi(2)).sqrt()),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BiLipschitz {
    pub c_min: f64,
    pub c_max: f64,
    pub pairs: usize,
}

/// Difference quotients `|Φ_t(z₁) - Φ_t(z₂)| / |z₁ - z₂|` at random
/// `(t, z₁, z₂)`: half of the pairs are spread over the domain, half are
/// separated by at most two lattice cells.
pub fn check_bilipschitz<T: Real, R: Rng + ?Sized>(map: &ZvonkinMap<T>, n_pairs: usize, rng: &mut R) -> BiLipschitz {
    let g = map.grid();
    let (lx, ly, tt) = (to_f64(g.lx), to_f64(g.ly), to_f64(g.t_end));
    let h = to_f64(g.dx()).max(to_f64(g.dy()));
    let mut c_min = f64::INFINITY;
    let mut c_max: f64 = 0.0;
    for k in 0..n_pairs {
        let t = rng.random::<f64>() * tt;
        let z1 = [(2.0 * rng.random::<f64>() - 1.0) * lx, (2.0 * rng.random::<f64>() - 1.0) * ly];
        let z2 = if k % 2 == 0 {
            [(2.0 * rng.random::<f64>() - 1.0) * lx, (2.0 * rng.random::<f64>() - 1.0) * ly]
        } else {
            [z1[0] + (2.0 * rng.random::<f64>() - 1.0) * 2.0 * h, z1[1] + (2.0 * rng.random::<f64>() - 1.0) * 2.0 * h]
        };
        let d = ((z1[0] - z2[0]).powi(2) + (z1[1] - z2[1]).powi(2)).sqrt();
        if d < 1e-9 {
            continue;
        }
        let p1 = map.phi(lit(t), [lit(z1[0]), lit(z1[1])]);
        let p2 = map.phi(lit(t), [lit(z2[0]), lit(z2[1])]);
        let dp = (to_f64(p1[0] - p2[0]).powi(2) + to_f64(p1[1] - p2[1]).powi(2)).sqrt();
        let q = dp / d;
        c_min = c_min.min(q);
        c_max = c_max.max(q);
    }
    BiLipschitz { c_min, c_max, pairs: n_pairs }
}

/// `B̃(t, z) = -∫_{|v|>1} [U(t, Φ_t^{-1}(z) + Qv) - U(t, Φ_t^{-1}(z))] ν(dv)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransformedDrift<T> {
    pub value: [T; 2],
    pub v_max: f64,
    /// `2 sup|U| · ν(|v| > v_max)`.
    pub tail_remainder: f64,
}

/// Large-jump drift of the transformed equation by Gauss–Legendre
/// quadrature on unit panels of `(1, v_max]`, with `v_max` chosen so the
/// tail remainder is below `1e-8 · sup|U|`.
pub fn transformed_drift<T: Real, M: Transform<T> + ?Sized>(
    map: &M,
    t: T,
    z: [T; 2],
    u_sup: f64,
) -> Result<TransformedDrift<T>> {
    let alpha = to_f64(map.alpha());
    let params = StableParams::new(alpha, 1)?;
    let c = params.levy_constant();
    let x = invert_map(map, z, t, lit(1e-13), 200)?.z;
    let v_max = (params.tail_mass(1.0) / 5e-9).powf(1.0 / alpha);
    let gl = GaussLegendre::<f64>::new(10);
    let base = map.u(t, x);
    let panels = v_max.ceil() as usize - 1;
    let acc = (0..panels)
        .into_par_iter()
        .map(|k| {
            let a = 1.0 + k as f64;
            let mut s = [0.0f64; 2];
            for (node, w) in gl.mapped(a, a + 1.0) {
                let up = map.u(t, [x[0] + lit(node), x[1]]);
                let dn = map.u(t, [x[0] - lit(node), x[1]]);
                let wt = w * c * node.powf(-1.0 - alpha);
                for i in 0..2 {
                    s[i] += wt * to_f64(up[i] + dn[i] - base[i] - base[i]);
                }
            }
            s
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold([0.0f64; 2], |a, b| [a[0] + b[0], a[1] + b[1]]);
    let v_end = (panels + 1) as f64;
    if !acc.iter().all(|v| v.is_finite()) {
        return Err(Error::Quadrature("non-finite large-jump integral".into()));
    }
    Ok(TransformedDrift {
        value: [lit(-acc[0]), lit(-acc[1])],
        v_max: v_end,
        tail_remainder: 2.0 * u_sup * params.tail_mass(v_end),
    })
}

/// How a space-time field is continued outside `[0, T]` before smoothing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TimeExtension {
    /// Frozen at `t ≤ 0`, zero for `t ≥ T`.
    ZeroAfter,
    /// Frozen on both sides.
    Constant,
}

/// Result of [`mollify_field`].
#[derive(Debug, Clone, PartialEq)]
pub struct Mollified<T> {
    pub field: SpaceTimeField<T>,
    /// Discrete mass of the normalized kernel.
    pub mass: f64,
    /// Number of lattice points in the kernel support.
    pub support: usize,
}

/// Convolution with `ρ_n(t, z) = n³ ρ(nt, nz)`, where `ρ` is the radial bump
/// `exp(-1/(1-r²))` on the unit ball of `R³`, normalized on the lattice.
pub fn mollify_field<T: Real>(field: &SpaceTimeField<T>, n: usize, ext: TimeExtension) -> Result<Mollified<T>> {
    if n == 0 {
        return Err(Error::OutOfRange { name: "n", detail: "mollification level must be at least 1".into() });
    }
    let g = field.grid;
    let (nx, ny, nt) = (g.nx, g.ny, g.nt);
    let (dx, dy, dt) = (to_f64(g.dx()), to_f64(g.dy()), to_f64(g.dt()));
    let nf = n as f64;
    let m = (1.0 / (nf * dt)).floor() as usize;
    let off = |i: usize, len: usize, h: f64| {
        let s = if i < len / 2 { i as f64 } else { i as f64 - len as f64 };
        s * h
    };
    let slice_at = |tau: usize| -> Array2<f64> {
        let tt = tau as f64 * dt;
        Array2::from_shape_fn((ny, nx), |(j, i)| {
            let r = nf * (tt * tt + off(i, nx, dx).powi(2) + off(j, ny, dy).powi(2)).sqrt();
            if r < 1.0 {
                (-1.0 / (1.0 - r * r)).exp()
            } else {
                0.0
            }
        })
    };
    let near = m.min(nt);
    let mut slices: Vec<Array2<f64>> = (0..=near).map(slice_at).collect();
    let mut beyond = Array2::<f64>::zeros((ny, nx));
    for tau in (near + 1)..=m {
        beyond += &slice_at(tau);
    }
    let mut total: f64 = slices[0].sum();
    for s in &slices[1..] {
        total += 2.0 * s.sum();
    }
    total += 2.0 * beyond.sum();
    let support = slices.iter().map(|s| s.iter().filter(|&&v| v > 0.0).count()).sum::<usize>();
    for s in slices.iter_mut() {
        *s /= total;
    }
    beyond /= total;
    let mass = slices[0].sum() + 2.0 * slices[1..].iter().map(|s| s.sum()).sum::<f64>() + 2.0 * beyond.sum();

    let sp = Spectral2::new(&g);
    let to_t = |a: &Array2<f64>| a.mapv(lit::<T>);
    let khat: Vec<Array2<Complex<T>>> = slices.par_iter().map(|s| sp.forward(to_t(s).view())).collect();
    // suffix[a] = Σ_{τ ≥ a} K̂_τ over all |τ| > a-1, one side.
    let bhat = sp.forward(to_t(&beyond).view());
    let mut suffix: Vec<Array2<Complex<T>>> = vec![bhat.clone(); nt + 2];
    for a in (0..=nt).rev() {
        let mut s = suffix[a + 1].clone();
        if a <= near {
            s += &khat[a];
        }
        suffix[a] = s;
    }
    let uhat: Vec<Array2<Complex<T>>> = (0..=nt).into_par_iter().map(|k| sp.forward(field.slice(k))).collect();
    let out: Vec<Array2<T>> = (0..=nt)
        .into_par_iter()
        .map(|k| {
            let mut acc = Array2::from_elem((ny, nx), Complex::new(T::zero(), T::zero()));
            for (s, us) in uhat.iter().enumerate() {
                let tau = k.abs_diff(s);
                if tau <= near {
                    acc += &(&khat[tau] * us);
                }
            }
            acc += &(&suffix[k + 1] * &uhat[0]);
            if ext == TimeExtension::Constant {
                acc += &(&suffix[nt - k + 1] * &uhat[nt]);
            }
            sp.inverse_real(acc)
        })
        .collect();
    let mut data = Array3::zeros((nt + 1, ny, nx));
    for (k, s) in out.into_iter().enumerate() {
        data.index_axis_mut(Axis(0), k).assign(&s);
    }
    Ok(Mollified { field: SpaceTimeField { grid: g, data }, mass, support })
}

/// `U_n = ρ_n * U`, with `U` extended by zero after `T` and frozen before 0.
pub fn mollify_u<T: Real>(map: &ZvonkinMap<T>, n: usize) -> Result<ZvonkinMap<T>> {
    let a = mollify_field(&map.u[0], n, TimeExtension::ZeroAfter)?.field;
    let b = mollify_field(&map.u[1], n, TimeExtension::ZeroAfter)?.field;
    ZvonkinMap::from_u([a, b], map.alpha, map.interp)
}

/// Mixed residual `‖∂_t U + L₀U + B·∇U + B‖_∞` of the backward equation,
/// with `∂_t` by centred differences.
pub fn backward_residual<T: Real>(map: &ZvonkinMap<T>, drift: &DriftSpec<T>) -> T {
    let g = map.grid();
    let mut worst = T::zero();
    for i in 0..2 {
        let src = if i == 0 { &drift.f } else { &drift.g };
        let dt_u = crate::pide::time_derivative(&map.u[i]);
        let gen = crate::pide::apply_generator(&map.u[i], map.alpha);
        for k in 1..g.nt {
            for j in 0..g.ny {
                for l in 0..g.nx {
                    let r = dt_u.data[[k, j, l]]
                        + gen.data[[k, j, l]]
                        + drift.f.data[[k, j, l]] * map.grad[i][0].data[[k, j, l]]
                        + drift.g.data[[k, j, l]] * map.grad[i][1].data[[k, j, l]]
                        + src.data[[k, j, l]];
                    worst = worst.max(r.abs());
                }
            }
        }
    }
    worst
}
