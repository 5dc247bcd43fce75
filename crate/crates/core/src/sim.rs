//! Euler schemes for the mixed-noise SDE `dZ = B dt + Q dL + R dW` in
//! `d1 = d2 = 1`, for its Zvonkin transform, and the experiments built on
//! them.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::interp::Interp;
use crate::noise::{sample_driver_path, NoiseStream, PathSample, StableParams};
use crate::pide::DriftSpec;
use crate::presets::smooth_cutoff;
use crate::scalar::{lit, to_f64, Real};
use crate::zvonkin::{invert_map, mollify_field, TimeExtension, Transform};

/// Drift `B(t, z)` with `z = (x, y)`.
pub trait Drift<T>: Sync {
    fn eval(&self, t: T, z: [T; 2]) -> [T; 2];

    fn is_zero(&self) -> bool {
        false
    }
}

impl<T: Real> Drift<T> for DriftSpec<T> {
    fn eval(&self, t: T, z: [T; 2]) -> [T; 2] {
        [
            self.f.eval(t, z[0], z[1], Interp::Multilinear),
            self.g.eval(t, z[0], z[1], Interp::Multilinear),
        ]
    }

    fn is_zero(&self) -> bool {
        DriftSpec::is_zero(self)
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ZeroDrift;

impl<T: Real> Drift<T> for ZeroDrift {
    fn eval(&self, _: T, _: [T; 2]) -> [T; 2] {
        [T::zero(); 2]
    }

    fn is_zero(&self) -> bool {
        true
    }
}

/// Drift given by a closure.
pub struct FnDrift<F>(pub F);

impl<T, F> Drift<T> for FnDrift<F>
where
    F: Fn(T, [T; 2]) -> [T; 2] + Sync,
{
    fn eval(&self, t: T, z: [T; 2]) -> [T; 2] {
        (self.0)(t, z)
    }
}

/// `χ_n(|x|) χ_n(|y|) B`, where `χ_n` is one on `[0, n]` and zero beyond
/// `n + 1`.
pub struct CutoffDrift<'a, T> {
    pub inner: &'a dyn Drift<T>,
    pub level: usize,
}

pub fn cutoff_weight(level: usize, x: f64, y: f64) -> f64 {
    let n = level as f64;
    smooth_cutoff(x, n, n + 1.0) * smooth_cutoff(y, n, n + 1.0)
}

impl<T: Real> Drift<T> for CutoffDrift<'_, T> {
    fn eval(&self, t: T, z: [T; 2]) -> [T; 2] {
        let w: T = lit(cutoff_weight(self.level, to_f64(z[0]), to_f64(z[1])));
        if w == T::one() {
            return self.inner.eval(t, z);
        }
        if w.is_zero() {
            return [T::zero(); 2];
        }
        let b = self.inner.eval(t, z);
        [b[0] * w, b[1] * w]
    }
}

/// Lattice version of [`CutoffDrift`].
pub fn cutoff_drift<T: Real>(drift: &DriftSpec<T>, level: usize) -> Result<DriftSpec<T>> {
    if level == 0 {
        return Err(Error::OutOfRange { name: "cutoff_level", detail: "must be at least 1".into() });
    }
    let g = drift.grid();
    let mut out = drift.clone();
    for j in 0..g.ny {
        for i in 0..g.nx {
            let w: T = lit(cutoff_weight(level, to_f64(g.x(i)), to_f64(g.y(j))));
            for k in 0..=g.nt {
                out.f.data[[k, j, i]] *= w;
                out.g.data[[k, j, i]] *= w;
            }
        }
    }
    out.tag = format!("{}-cutoff{level}", drift.tag);
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig<T> {
    pub z0: [T; 2],
    /// Scale of the stable noise in the x-block.
    pub epsilon: T,
    /// `|Z|` beyond this value aborts with [`Error::Exploded`].
    pub explosion_bound: T,
}

impl<T: Real> SimConfig<T> {
    pub fn new(z0: [T; 2]) -> Self {
        SimConfig { z0, epsilon: T::one(), explosion_bound: lit(1e6) }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon >= T::zero()) {
            return Err(Error::OutOfRange { name: "epsilon", detail: format!("must be non-negative, got {}", self.epsilon) });
        }
        Ok(())
    }
}

fn check_planar<T>(noise: &PathSample<T>) -> Result<()> {
    if noise.d1 != 1 {
        return Err(Error::UnsupportedDimension(noise.d1, "simulation supports d1 = 1"));
    }
    if noise.d2 != 1 {
        return Err(Error::UnsupportedDimension(noise.d2, "simulation supports d2 = 1"));
    }
    Ok(())
}

fn with_states<T: Real>(noise: &PathSample<T>, states: Vec<[T; 2]>) -> PathSample<T> {
    PathSample { states: states.into_iter().map(|z| z.to_vec()).collect(), ..noise.clone() }
}

fn explode_check<T: Real>(z: [T; 2], bound: T, t: T) -> Result<()> {
    if !(z[0].abs() <= bound && z[1].abs() <= bound) {
        return Err(Error::Exploded(to_f64(t)));
    }
    Ok(())
}

/// `Z_{k+1} = Z_k + B(t_k, Z_k) dt + ε ΔS_k + ΔW_k + ε Σ (large jumps)`,
/// where `ΔS_k` is the small-jump part of the stable increment.
pub fn euler_maruyama<T: Real, D: Drift<T> + ?Sized>(
    drift: &D,
    cfg: &SimConfig<T>,
    noise: &PathSample<T>,
) -> Result<PathSample<T>> {
    check_planar(noise)?;
    cfg.validate()?;
    let n = noise.n_steps();
    let dt = noise.dt();
    let eps = cfg.epsilon;
    let mut z = cfg.z0;
    let mut states = Vec::with_capacity(n + 1);
    states.push(z);
    let mut cursor = 0;
    for k in 0..n {
        let t = noise.times[k];
        let b = drift.eval(t, z);
        z[0] += b[0] * dt;
        z[1] += b[1] * dt;
        z[0] += eps * noise.small_jumps[k][0];
        z[1] += noise.brownian_increments[k][0];
        while cursor < noise.large_jumps.len() && noise.large_jumps[cursor].step == k {
            z[0] += eps * noise.large_jumps[cursor].size[0];
            cursor += 1;
        }
        explode_check(z, cfg.explosion_bound, noise.times[k + 1])?;
        states.push(z);
    }
    Ok(with_states(noise, states))
}

const INVERSION_TOL: f64 = 1e-13;
const INVERSION_ITERS: usize = 200;

/// Euler scheme for `Ẑ = Φ_t(Z)` driven by the same increments:
/// drift `(-Δ_x)^{α/2}U`, diffusion `(R + ∇_y U) ΔW`, small jumps as the
/// Φ-difference of the aggregated increment, large jumps at step end.
pub fn simulate_transformed<T: Real, M: Transform<T> + ?Sized>(
    map: &M,
    cfg: &SimConfig<T>,
    noise: &PathSample<T>,
) -> Result<PathSample<T>> {
    check_planar(noise)?;
    cfg.validate()?;
    if cfg.epsilon != T::one() {
        return Err(Error::OutOfRange { name: "epsilon", detail: "the transformed scheme needs epsilon = 1".into() });
    }
    let n = noise.n_steps();
    let dt = noise.dt();
    let tol: T = lit(INVERSION_TOL);
    let mut zh = map.phi(T::zero(), cfg.z0);
    let mut states = Vec::with_capacity(n + 1);
    states.push(zh);
    let mut cursor = 0;
    for k in 0..n {
        let t = noise.times[k];
        let x = invert_map(map, zh, t, tol, INVERSION_ITERS)?.z;
        let d = map.frac_u(t, x);
        let gu = map.grad_u(t, x);
        let dw = noise.brownian_increments[k][0];
        let s = noise.small_jumps[k][0];
        let u0 = map.u(t, x);
        let u1 = map.u(t, [x[0] + s, x[1]]);
        zh[0] += d[0] * dt;
        zh[1] += d[1] * dt;
        zh[0] += gu[0][1] * dw;
        zh[1] += (T::one() + gu[1][1]) * dw;
        zh[0] += s + (u1[0] - u0[0]);
        zh[1] += u1[1] - u0[1];
        while cursor < noise.large_jumps.len() && noise.large_jumps[cursor].step == k {
            let v = noise.large_jumps[cursor].size[0];
            let xj = invert_map(map, zh, t, tol, INVERSION_ITERS)?.z;
            let a = map.u(t, xj);
            let b = map.u(t, [xj[0] + v, xj[1]]);
            zh[0] += v + (b[0] - a[0]);
            zh[1] += b[1] - a[1];
            cursor += 1;
        }
        explode_check(zh, cfg.explosion_bound, noise.times[k + 1])?;
        states.push(zh);
    }
    Ok(with_states(noise, states))
}

fn dist<T: Real>(a: &[T], b: &[T]) -> f64 {
    a.iter().zip(b).map(|(&p, &q)| to_f64(p - q).powi(2)).sum::<f64>().sqrt()
}

/// `max_k |a_k - b_k|` for paths on the same time grid.
pub fn sup_distance<T: Real>(a: &PathSample<T>, b: &PathSample<T>) -> Result<f64> {
    if a.states.len() != b.states.len() {
        return Err(Error::ShapeMismatch { expected: vec![a.states.len()], found: vec![b.states.len()] });
    }
    Ok(a.states.iter().zip(&b.states).map(|(p, q)| dist(p, q)).fold(0.0, f64::max))
}

/// Sup distance between a coarse path, extended piecewise constantly, and a
/// path on a grid refined by an integer factor.
pub fn sup_distance_refined<T: Real>(coarse: &PathSample<T>, fine: &PathSample<T>) -> Result<f64> {
    let (nc, nf) = (coarse.n_steps(), fine.n_steps());
    if nc == 0 || nf % nc != 0 {
        return Err(Error::GridMismatch(format!("{nf} steps is not a refinement of {nc}")));
    }
    let r = nf / nc;
    Ok(fine.states.iter().enumerate().map(|(k, s)| dist(s, &coarse.states[(k / r).min(nc)])).fold(0.0, f64::max))
}

/// `max_k |coarse_k - fine_{rk}|` over the coarse time nodes only.
pub fn sup_distance_at_coarse_nodes<T: Real>(coarse: &PathSample<T>, fine: &PathSample<T>) -> Result<f64> {
    let (nc, nf) = (coarse.n_steps(), fine.n_steps());
    if nc == 0 || nf % nc != 0 {
        return Err(Error::GridMismatch(format!("{nf} steps is not a refinement of {nc}")));
    }
    let r = nf / nc;
    Ok(coarse.states.iter().enumerate().map(|(k, s)| dist(s, &fine.states[k * r])).fold(0.0, f64::max))
}

/// `max_k |Φ_{t_k}(Z_k) - Ẑ_k|`.
pub fn transform_discrepancy<T: Real, M: Transform<T> + ?Sized>(
    map: &M,
    direct: &PathSample<T>,
    transformed: &PathSample<T>,
) -> f64 {
    direct
        .states
        .iter()
        .zip(&transformed.states)
        .zip(&direct.times)
        .map(|((z, zh), &t)| {
            let p = map.phi(t, [z[0], z[1]]);
            dist(&p, zh)
        })
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConsistencyReport {
    pub steps: Vec<usize>,
    /// Seed-averaged `sup_t |Φ_t(Z_t) - Ẑ_t|` per resolution.
    pub mean_sup: Vec<f64>,
    /// `mean_sup[i] / mean_sup[i+1]`.
    pub ratios: Vec<f64>,
    pub per_seed: Vec<Vec<f64>>,
}

/// Runs the direct and transformed schemes on `fine_steps / 2^j` steps,
/// `j = levels-1, …, 0`, with the noise of each seed coarsened from one
/// fine path.
pub fn transform_consistency<T: Real, M: Transform<T> + ?Sized, D: Drift<T> + ?Sized>(
    map: &M,
    drift: &D,
    cfg: &SimConfig<T>,
    params: &StableParams<T>,
    fine_steps: usize,
    levels: usize,
    seeds: &[u64],
) -> Result<ConsistencyReport> {
    let factors: Vec<usize> = (0..levels).rev().map(|j| 1usize << j).collect();
    if !fine_steps.is_multiple_of(factors[0]) {
        return Err(Error::InvalidGrid(format!("{fine_steps} steps cannot be coarsened by {}", factors[0])));
    }
    let per_seed: Vec<Vec<f64>> = seeds
        .par_iter()
        .map(|&seed| -> Result<Vec<f64>> {
            let fine = sample_driver_path(params, 1, map.horizon(), fine_steps, &NoiseStream::new(seed, 0))?;
            factors
                .iter()
                .map(|&f| {
                    let noise = fine.coarsen(f)?;
                    let z = euler_maruyama(drift, cfg, &noise)?;
                    let zh = simulate_transformed(map, cfg, &noise)?;
                    Ok(transform_discrepancy(map, &z, &zh))
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    let mean_sup: Vec<f64> =
        (0..levels).map(|l| per_seed.iter().map(|r| r[l]).sum::<f64>() / seeds.len().max(1) as f64).collect();
    let ratios = mean_sup.windows(2).map(|w| w[0] / w[1]).collect();
    Ok(ConsistencyReport { steps: factors.iter().map(|f| fine_steps / f).collect(), mean_sup, ratios, per_seed })
}

/// One row of the uniqueness report.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniquenessRow {
    pub level: usize,
    pub next_level: usize,
    pub seed: u64,
    pub sup_distance: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct UniquenessReport {
    pub levels: Vec<usize>,
    pub rows: Vec<UniquenessRow>,
    /// Seed-averaged distance between levels `levels[i]` and `levels[i+1]`.
    pub mean_distance: Vec<f64>,
    /// `mean_distance[i] / mean_distance[i+1]`.
    pub shrink: Vec<f64>,
    /// Seed-averaged sup distance, over the coarse nodes, between the
    /// finest-level path and its run on half as many steps.
    pub dt_refinement: f64,
    pub notes: Vec<String>,
}

impl UniquenessReport {
    pub fn monotone(&self) -> bool {
        self.mean_distance.windows(2).all(|w| w[1] <= w[0])
    }
}

/// Simulates, for every seed, the SDE with the drift mollified at each of
/// `levels` and records sup distances between adjacent levels.
#[allow(clippy::too_many_arguments)]
pub fn pathwise_uniqueness_experiment<T: Real>(
    drift: &DriftSpec<T>,
    cfg: &SimConfig<T>,
    params: &StableParams<T>,
    levels: &[usize],
    horizon: T,
    steps: usize,
    seeds: &[u64],
) -> Result<UniquenessReport> {
    if levels.len() < 2 {
        return Err(Error::OutOfRange { name: "levels", detail: "need at least two mollification levels".into() });
    }
    let smoothed: Vec<DriftSpec<T>> = levels
        .iter()
        .map(|&n| {
            Ok(DriftSpec {
                tag: format!("{}-rho{n}", drift.tag),
                f: mollify_field(&drift.f, n, TimeExtension::Constant)?.field,
                g: mollify_field(&drift.g, n, TimeExtension::Constant)?.field,
            })
        })
        .collect::<Result<_>>()?;
    let finest = smoothed.last().expect("two levels");
    let per_seed: Vec<(Vec<f64>, f64)> = seeds
        .par_iter()
        .map(|&seed| -> Result<(Vec<f64>, f64)> {
            let noise = sample_driver_path(params, 1, horizon, steps, &NoiseStream::new(seed, 0))?;
            let paths: Vec<PathSample<T>> =
                smoothed.iter().map(|d| euler_maruyama(d, cfg, &noise)).collect::<Result<_>>()?;
            let d = paths.windows(2).map(|w| sup_distance(&w[0], &w[1])).collect::<Result<Vec<_>>>()?;
            let refined = if steps.is_multiple_of(2) {
                let coarse = euler_maruyama(finest, cfg, &noise.coarsen(2)?)?;
                sup_distance_at_coarse_nodes(&coarse, paths.last().expect("paths"))?
            } else {
                f64::NAN
            };
            Ok((d, refined))
        })
        .collect::<Result<_>>()?;
    let mut rows = Vec::new();
    for (s, (d, _)) in seeds.iter().zip(&per_seed) {
        for (i, &v) in d.iter().enumerate() {
            rows.push(UniquenessRow { level: levels[i], next_level: levels[i + 1], seed: *s, sup_distance: v });
        }
    }
    let m = seeds.len().max(1) as f64;
    let mean_distance: Vec<f64> =
        (0..levels.len() - 1).map(|i| per_seed.iter().map(|(d, _)| d[i]).sum::<f64>() / m).collect();
    let shrink = mean_distance.windows(2).map(|w| w[0] / w[1]).collect();
    let dt_refinement = per_seed.iter().map(|(_, r)| r).sum::<f64>() / m;
    Ok(UniquenessReport { levels: levels.to_vec(), rows, mean_distance, shrink, dt_refinement, notes: Vec::new() })
}

/// The two solutions `0` and `((1-γ)t)^{1/(1-γ)}` of `x' = |x|^γ`,
/// `x(0) = 0`.
pub fn ode_branch(gamma: f64, t: f64) -> f64 {
    ((1.0 - gamma) * t).powf(1.0 / (1.0 - gamma))
}

/// `max_t |x'(t) - |x(t)|^γ|` over both branches, with `x'` in closed form.
pub fn ode_branch_residual(gamma: f64, times: &[f64]) -> f64 {
    times
        .iter()
        .map(|&t| {
            let x = ode_branch(gamma, t);
            let dx = ((1.0 - gamma) * t).powf(gamma / (1.0 - gamma));
            (dx - x.abs().powf(gamma)).abs()
        })
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegularizationReport {
    pub gamma: f64,
    pub times: Vec<f64>,
    pub nonzero_branch: Vec<f64>,
    pub branch_residual: f64,
    pub uniqueness: UniquenessReport,
}

/// Noiseless non-uniqueness of `x' = sign(x)|x|^γ` next to the noisy
/// uniqueness experiment for the same drift (windowed to the torus).
#[allow(clippy::too_many_arguments)]
pub fn regularization_demo<T: Real>(
    gamma: f64,
    grid: crate::grid::GridSpec<T>,
    params: &StableParams<T>,
    levels: &[usize],
    horizon: T,
    steps: usize,
    seeds: &[u64],
) -> Result<RegularizationReport> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::OutOfRange { name: "gamma", detail: format!("must lie in (0,1), got {gamma}") });
    }
    let times: Vec<f64> = (0..=20).map(|k| to_f64(horizon) * k as f64 / 20.0).collect();
    let nonzero_branch = times.iter().map(|&t| ode_branch(gamma, t)).collect();
    let drift = crate::presets::DriftPreset::Holder { gamma, amplitude: 1.0 }.sample(grid);
    let cfg = SimConfig::new([T::zero(), T::zero()]);
    let mut uniqueness = pathwise_uniqueness_experiment(&drift, &cfg, params, levels, horizon, steps, seeds)?;
    uniqueness.notes.push("noiseless branches: x = 0 and x = ((1-gamma) t)^(1/(1-gamma))".into());
    Ok(RegularizationReport {
        gamma,
        branch_residual: ode_branch_residual(gamma, &times),
        times,
        nonzero_branch,
        uniqueness,
    })
}

/// Result of [`kinetic_sde`].
#[derive(Debug, Clone, PartialEq)]
pub struct KineticPath<T> {
    /// States `(X, V)`.
    pub path: PathSample<T>,
    /// Set when `ε = 0`: no noise acts on the position.
    pub degenerate: bool,
}

/// `dX = V dt + ε dL`, `dV = G(t, X, V) dt + dW`.
pub fn kinetic_sde<T: Real, G>(g: G, epsilon: T, z0: [T; 2], noise: &PathSample<T>) -> Result<KineticPath<T>>
where
    G: Fn(T, T, T) -> T + Sync,
{
    let drift = FnDrift(move |t: T, z: [T; 2]| [z[1], g(t, z[0], z[1])]);
    let cfg = SimConfig { z0, epsilon, explosion_bound: lit(1e6) };
    let path = euler_maruyama(&drift, &cfg, noise)?;
    Ok(KineticPath { path, degenerate: epsilon.is_zero() })
}

/// First grid time at which `|X| + |Y| > level`.
pub fn first_exit_time<T: Real>(path: &PathSample<T>, level: usize) -> Option<T> {
    let lv: T = lit(level as f64);
    path.states.iter().zip(&path.times).find(|(s, _)| s[0].abs() + s[1].abs() > lv).map(|(_, &t)| t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;
    use crate::zvonkin::ZvonkinMap;
    use std::f64::consts::PI;

    fn noise(seed: u64, n: usize, t: f64) -> PathSample<f64> {
        let p = StableParams::new(1.5, 1).unwrap();
        sample_driver_path(&p, 1, t, n, &NoiseStream::new(seed, 0)).unwrap()
    }

    #[test]
    fn zero_drift_reproduces_driver() {
        let w = noise(3, 200, 2.0);
        let z = euler_maruyama(&ZeroDrift, &SimConfig::new([0.0, 0.0]), &w).unwrap();
        for (a, b) in z.states.iter().zip(&w.states) {
            assert!((a[0] - b[0]).abs() < 1e-12 && (a[1] - b[1]).abs() < 1e-12);
        }
    }

    #[test]
    fn identity_transform_is_bitwise() {
        let g = GridSpec::new(PI, PI, 16, 16, 1.0, 4).unwrap();
        let map = ZvonkinMap::identity(g, 1.5);
        let w = noise(5, 128, 1.0);
        let cfg = SimConfig::new([0.1, -0.2]);
        let a = euler_maruyama(&ZeroDrift, &cfg, &w).unwrap();
        let b = simulate_transformed(&map, &cfg, &w).unwrap();
        assert_eq!(a.states, b.states);
    }

    #[test]
    fn linear_ode_first_order() {
        let mut w = noise(1, 100, 1.0);
        for v in w.brownian_increments.iter_mut().chain(w.small_jumps.iter_mut()) {
            v[0] = 0.0;
        }
        w.large_jumps.clear();
        let d = FnDrift(|_: f64, z: [f64; 2]| [-z[0], -z[1]]);
        let z = euler_maruyama(&d, &SimConfig::new([1.0, 2.0]), &w).unwrap();
        let end = z.states.last().unwrap();
        assert!((end[0] - (-1.0f64).exp()).abs() < 0.01);
        assert!((end[1] - 2.0 * (-1.0f64).exp()).abs() < 0.02);
    }

    #[test]
    fn ode_branches() {
        assert!(ode_branch_residual(2.0 / 3.0, &[0.0, 0.3, 1.0, 2.5]) < 1e-12);
        assert!((ode_branch(2.0 / 3.0, 1.2) - 0.4f64.powi(3)).abs() < 1e-12);
        assert!((ode_branch(0.5, 1.2) - 0.36).abs() < 1e-12);
    }

    #[test]
    fn explosion_is_reported() {
        let w = noise(2, 100, 1.0);
        let d = FnDrift(|_: f64, z: [f64; 2]| [z[0] * z[0] * 1e3 + 1e3, 0.0]);
        let e = euler_maruyama(&d, &SimConfig::new([1.0, 0.0]), &w).unwrap_err();
        assert!(matches!(e, Error::Exploded(_)));
    }
}
