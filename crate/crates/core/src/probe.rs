//! Monte-Carlo probes of occupation-time estimates for the driver
//! `U = L + W` and for the drifted equation: Krylov means against a
//! deterministic kernel oracle, Khasminskii exponential moments, Girsanov
//! weights and their use in weighted estimates.
//!
//! Paths are drawn per index from `NoiseStream::new(seed, i)`, so results
//! do not depend on the thread count.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kernels::{kernel_lp_norm, stable_cdf_1d, KernelKind};
use crate::noise::{sample_brownian_increment, sample_stable_increment, NoiseStream, StableParams};
use crate::quadrature::{geometric_breaks, uniform_breaks, GaussLegendre};
use crate::scalar::{lit, to_f64, Real};
use crate::sim::Drift;
use crate::spaces::conditions::{require, RegularityIndices};

/// Exponent `r` of the Hölder split used by the weighted bounds.
pub const HOLDER_R: f64 = 1.1;

/// Result of one Monte-Carlo probe.
#[derive(Debug, Clone, PartialEq)]
pub struct MCEstimate<T> {
    pub mean: T,
    pub stderr: T,
    pub n_samples: usize,
    pub seed: u64,
    /// Right-hand side of the inequality being probed.
    pub bound_rhs: T,
    /// `mean ≤ bound_rhs + 3·stderr`.
    pub verdict: bool,
    /// Independent value the mean should reproduce, when one exists.
    pub oracle: Option<T>,
    pub notes: Vec<String>,
}

impl<T: Real> MCEstimate<T> {
    pub fn from_samples(samples: &[T], seed: u64, bound_rhs: T) -> Self {
        let (mean, stderr) = mean_stderr(samples);
        MCEstimate {
            mean,
            stderr,
            n_samples: samples.len(),
            seed,
            bound_rhs,
            verdict: mean <= bound_rhs + lit::<T>(3.0) * stderr,
            oracle: None,
            notes: Vec::new(),
        }
    }

    pub fn with_oracle(mut self, value: T) -> Self {
        self.oracle = Some(value);
        self
    }

    pub fn note(mut self, s: impl Into<String>) -> Self {
        self.notes.push(s.into());
        self
    }

    /// `|mean - oracle| / stderr`, or `None` without an oracle. A zero
    /// standard error gives zero on exact agreement and infinity otherwise.
    pub fn oracle_z(&self) -> Option<f64> {
        self.oracle.map(|o| z_score(to_f64(self.mean) - to_f64(o), to_f64(self.stderr)))
    }

    /// Mean within `3·stderr` of `value`.
    pub fn agrees_with(&self, value: T) -> bool {
        z_score(to_f64(self.mean) - to_f64(value), to_f64(self.stderr)) <= 3.0
    }

    /// Means within three combined standard errors of each other.
    pub fn agrees_with_estimate(&self, other: &Self) -> bool {
        let se = (to_f64(self.stderr).powi(2) + to_f64(other.stderr).powi(2)).sqrt();
        z_score(to_f64(self.mean) - to_f64(other.mean), se) <= 3.0
    }
}

fn z_score(diff: f64, se: f64) -> f64 {
    if se > 0.0 {
        diff.abs() / se
    } else if diff == 0.0 {
        0.0
    } else {
        f64::INFINITY
    }
}

/// Sample mean and standard error of the mean.
pub fn mean_stderr<T: Real>(samples: &[T]) -> (T, T) {
    let n = samples.len();
    if n == 0 {
        return (T::zero(), T::zero());
    }
    let nf: f64 = n as f64;
    let mean = samples.iter().map(|&v| to_f64(v)).sum::<f64>() / nf;
    if n == 1 {
        return (lit(mean), T::zero());
    }
    let var = samples.iter().map(|&v| (to_f64(v) - mean).powi(2)).sum::<f64>() / (nf - 1.0);
    (lit(mean), lit((var / nf).sqrt()))
}

/// Time-independent test functions on `R^2` with closed-form norms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TestFunction {
    Constant(f64),
    /// `height` times the indicator of `[x0, x1] × [y0, y1]`.
    Box { x: [f64; 2], y: [f64; 2], height: f64 },
    /// `amplitude · exp(-|z - center|² / (2 width²))`.
    Bump { center: [f64; 2], width: f64, amplitude: f64 },
}

impl TestFunction {
    pub fn eval<T: Real>(&self, z: [T; 2]) -> T {
        let (x, y) = (to_f64(z[0]), to_f64(z[1]));
        lit(self.eval_f64(x, y))
    }

    pub fn eval_f64(&self, x: f64, y: f64) -> f64 {
        match *self {
            TestFunction::Constant(c) => c,
            TestFunction::Box { x: bx, y: by, height } => {
                if x >= bx[0] && x <= bx[1] && y >= by[0] && y <= by[1] {
                    height
                } else {
                    0.0
                }
            }
            TestFunction::Bump { center, width, amplitude } => {
                amplitude * (-((x - center[0]).powi(2) + (y - center[1]).powi(2)) / (2.0 * width * width)).exp()
            }
        }
    }

    pub fn scaled(&self, c: f64) -> Self {
        match *self {
            TestFunction::Constant(v) => TestFunction::Constant(c * v),
            TestFunction::Box { x, y, height } => TestFunction::Box { x, y, height: c * height },
            TestFunction::Bump { center, width, amplitude } => {
                TestFunction::Bump { center, width, amplitude: c * amplitude }
            }
        }
    }

    pub fn is_nonnegative(&self) -> bool {
        match *self {
            TestFunction::Constant(c) => c >= 0.0,
            TestFunction::Box { x, y, height } => x[0] <= x[1] && y[0] <= y[1] && height >= 0.0,
            TestFunction::Bump { width, amplitude, .. } => amplitude >= 0.0 && width > 0.0,
        }
    }

    /// `‖f‖_{L^q(0,T; L^p(R^2))}`; infinite for a nonzero constant.
    pub fn mixed_norm(&self, p: f64, q: f64, horizon: f64) -> f64 {
        let space = match *self {
            TestFunction::Constant(c) => {
                if c == 0.0 {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
            TestFunction::Box { x, y, height } => height.abs() * ((x[1] - x[0]) * (y[1] - y[0])).max(0.0).powf(1.0 / p),
            TestFunction::Bump { width, amplitude, .. } => {
                amplitude.abs() * (2.0 * std::f64::consts::PI * width * width / p).powf(1.0 / p)
            }
        };
        if q.is_infinite() {
            space
        } else {
            space * horizon.powf(1.0 / q)
        }
    }

    /// `E f(z0 + U_s)` for the driver with `d1 = d2 = 1`.
    pub fn expectation(&self, alpha: f64, s: f64, z0: [f64; 2]) -> Result<f64> {
        if s <= 0.0 {
            return Ok(self.eval_f64(z0[0], z0[1]));
        }
        match *self {
            TestFunction::Constant(c) => Ok(c),
            TestFunction::Box { x, y, height } => {
                let px = stable_cdf_1d(alpha, s, x[1] - z0[0])? - stable_cdf_1d(alpha, s, x[0] - z0[0])?;
                let sd = s.sqrt();
                let py = 0.5 * (libm::erfc((y[0] - z0[1]) / (sd * std::f64::consts::SQRT_2))
                    - libm::erfc((y[1] - z0[1]) / (sd * std::f64::consts::SQRT_2)));
                Ok(height * px * py)
            }
            TestFunction::Bump { center, width, amplitude } => {
                let v2 = width * width + s;
                let ey = (width * width / v2).sqrt() * (-(center[1] - z0[1]).powi(2) / (2.0 * v2)).exp();
                Ok(amplitude * bump_stable_factor(alpha, s, width, center[0] - z0[0]) * ey)
            }
        }
    }

    /// `∫₀ᵀ E f(z0 + U_s) ds` by quadrature in time.
    pub fn occupation_oracle(&self, alpha: f64, horizon: f64, z0: [f64; 2]) -> Result<f64> {
        let g = GaussLegendre::<f64>::new(12);
        let mut breaks = geometric_breaks(horizon.min(1.0), 0.5, 30);
        if horizon > 1.0 {
            breaks.extend(uniform_breaks(1.0, horizon, 0.25).into_iter().skip(1));
        }
        let mut err = None;
        let v = g.composite(
            |s| match self.expectation(alpha, s, z0) {
                Ok(v) => v,
                Err(e) => {
                    err.get_or_insert(e);
                    0.0
                }
            },
            &breaks,
        );
        match err {
            Some(e) => Err(e),
            None => Ok(v),
        }
    }
}

/// `E exp(-(c + L_s)² / (2σ²))` via
/// `(σ/√(2π)) · 2∫₀^∞ exp(-σ²ξ²/2 - sξ^α) cos(cξ) dξ`.
fn bump_stable_factor(alpha: f64, s: f64, sigma: f64, c: f64) -> f64 {
    let xi_max = 80f64.sqrt() / sigma;
    let width = (xi_max / 64.0).min(if c == 0.0 { f64::INFINITY } else { std::f64::consts::FRAC_PI_2 / c.abs() });
    let g = GaussLegendre::<f64>::new(10);
    let body = g.composite(
        |x| (-0.5 * sigma * sigma * x * x - s * x.powf(alpha)).exp() * (c * x).cos(),
        &uniform_breaks(0.0, xi_max, width),
    );
    sigma / (2.0 * std::f64::consts::PI).sqrt() * 2.0 * body
}

/// Sampling parameters shared by the probes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McOptions {
    pub n_samples: usize,
    pub n_steps: usize,
    pub horizon: f64,
    pub seed: u64,
    pub start: [f64; 2],
}

impl McOptions {
    pub fn new(n_samples: usize, n_steps: usize, horizon: f64, seed: u64) -> Self {
        McOptions { n_samples, n_steps, horizon, seed, start: [0.0; 2] }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_samples < 2 {
            return Err(Error::OutOfRange { name: "n_samples", detail: "need at least 2 samples".into() });
        }
        if self.n_steps == 0 {
            return Err(Error::OutOfRange { name: "n_steps", detail: "must be positive".into() });
        }
        if !(self.horizon > 0.0) {
            return Err(Error::NonPositiveTime(self.horizon));
        }
        Ok(())
    }

    pub fn dt(&self) -> f64 {
        self.horizon / self.n_steps as f64
    }

    pub fn starting_at(mut self, z: [f64; 2]) -> Self {
        self.start = z;
        self
    }
}

fn check_dims<T: Real>(idx: &RegularityIndices<T>) -> Result<()> {
    if idx.d1 != 1 || idx.d2 != 1 {
        return Err(Error::UnsupportedDimension(idx.d1 + idx.d2, "Monte-Carlo probes"));
    }
    Ok(())
}

fn check_nonnegative(f: &TestFunction) -> Result<()> {
    if !f.is_nonnegative() {
        return Err(Error::OutOfRange { name: "f", detail: "test function must be nonnegative".into() });
    }
    Ok(())
}

fn par_samples<T: Real>(opts: &McOptions, per_path: impl Fn(&mut NoiseStream) -> Result<T> + Sync) -> Result<Vec<T>> {
    (0..opts.n_samples)
        .into_par_iter()
        .map(|i| per_path(&mut NoiseStream::new(opts.seed, i as u64)))
        .collect()
}

/// `∫₀ᵀ f(z0 + U_s) ds` by the midpoint rule, with `U` sampled exactly at
/// the midpoints `(k + 1/2) dt`.
fn driver_midpoint_integral<T: Real>(
    f: &TestFunction,
    params: &StableParams<T>,
    opts: &McOptions,
    rng: &mut NoiseStream,
) -> Result<T> {
    let dt: T = lit(opts.dt());
    let mut z = [lit::<T>(opts.start[0]), lit::<T>(opts.start[1])];
    let mut acc = T::zero();
    for k in 0..opts.n_steps {
        let h = if k == 0 { dt * lit(0.5) } else { dt };
        z[0] += sample_stable_increment(params, h, rng)?[0];
        z[1] += sample_brownian_increment::<T, _>(1, h, rng)?[0];
        acc += f.eval(z);
    }
    Ok(acc * dt)
}

/// Constant `C` with `E∫₀ᵀ f(s, U_s) ds ≤ C ‖f‖_{L^q L^p}`:
/// `(∫₀ᵀ (‖p^α_s‖_{p'} ‖p^{(2)}_s‖_{p'})^{q'} ds)^{1/q'}`.
pub fn krylov_constant<T: Real>(idx: &RegularityIndices<T>, horizon: f64) -> Result<f64> {
    let i = idx.to_f64();
    let pp = i.p / (i.p - 1.0);
    let qp = if i.q.is_infinite() { 1.0 } else { i.q / (i.q - 1.0) };
    let k1 = kernel_lp_norm(KernelKind::Stable, i.alpha, i.d1, 1.0, pp)?
        * kernel_lp_norm(KernelKind::Gaussian, i.alpha, i.d2, 1.0, pp)?;
    let e = (i.d1 as f64 / i.alpha + i.d2 as f64 / 2.0) / i.p;
    let m = 1.0 - e * qp;
    if m <= 0.0 {
        return Err(Error::ConditionViolated { name: "cond_krylov", margin: m });
    }
    Ok(k1 * (horizon.powf(m) / m).powf(1.0 / qp))
}

/// `E∫₀ᵀ f(U_s) ds` for the driver started at `opts.start`, with the
/// kernel-quadrature oracle attached and the verdict taken against
/// `C ‖f‖_{L^q L^p}`.
pub fn krylov_driver<T: Real>(f: &TestFunction, idx: &RegularityIndices<T>, opts: &McOptions) -> Result<MCEstimate<T>> {
    require(&idx.check(), &["cond_krylov"])?;
    check_dims(idx)?;
    check_nonnegative(f)?;
    opts.validate()?;
    let params = StableParams::new(idx.alpha, 1)?;
    let samples = par_samples(opts, |rng| driver_midpoint_integral(f, &params, opts, rng))?;
    let alpha = to_f64(idx.alpha);
    let oracle = f.occupation_oracle(alpha, opts.horizon, opts.start)?;
    let i = idx.to_f64();
    let norm = f.mixed_norm(i.p, i.q, opts.horizon);
    let c = krylov_constant(idx, opts.horizon)?;
    Ok(MCEstimate::from_samples(&samples, opts.seed, lit(c * norm))
        .with_oracle(lit(oracle))
        .note(format!("C = {c:.6}, norm = {norm:.6}")))
}

/// Constant `c = max_z E∫₀ᵀ f(z + U_s) ds` over the given start points,
/// with the maximising start.
pub fn measure_khasminskii_constant<T: Real>(
    f: &TestFunction,
    idx: &RegularityIndices<T>,
    opts: &McOptions,
    starts: &[[f64; 2]],
) -> Result<(f64, [f64; 2])> {
    check_dims(idx)?;
    check_nonnegative(f)?;
    opts.validate()?;
    if starts.is_empty() {
        return Err(Error::OutOfRange { name: "starts", detail: "need at least one start point".into() });
    }
    let params = StableParams::new(idx.alpha, 1)?;
    let mut best = (f64::NEG_INFINITY, starts[0]);
    for (j, &z) in starts.iter().enumerate() {
        let o = McOptions { seed: opts.seed ^ ((j as u64 + 1) << 40), ..opts.starting_at(z) };
        let samples: Vec<T> = par_samples(&o, |rng| driver_midpoint_integral(f, &params, &o, rng))?;
        let m = to_f64(mean_stderr(&samples).0);
        if m > best.0 {
            best = (m, z);
        }
    }
    Ok(best)
}

/// `E exp{∫₀ᵀ f(U_s) ds}` from the maximising start, against
/// `1/(1 - c)`. Refuses when `c ≥ 1`.
pub fn khasminskii_exponential<T: Real>(
    f: &TestFunction,
    idx: &RegularityIndices<T>,
    opts: &McOptions,
    starts: &[[f64; 2]],
) -> Result<MCEstimate<T>> {
    let (c, z) = measure_khasminskii_constant(f, idx, opts, starts)?;
    if c >= 1.0 {
        return Err(Error::KhasminskiiConstant { c, hint: 0.5 / c });
    }
    let params = StableParams::new(idx.alpha, 1)?;
    let o = opts.starting_at(z);
    let samples = par_samples(&o, |rng| Ok(driver_midpoint_integral::<T>(f, &params, &o, rng)?.exp()))?;
    Ok(MCEstimate::from_samples(&samples, opts.seed, lit(1.0 / (1.0 - c)))
        .note(format!("c = {c:.6} at start ({:.3}, {:.3})", z[0], z[1])))
}

/// Rescales `f` so that its measured constant equals `target`. Returns the
/// rescaled function, the factor applied and the constant before scaling.
pub fn scale_to_constant<T: Real>(
    f: &TestFunction,
    idx: &RegularityIndices<T>,
    opts: &McOptions,
    starts: &[[f64; 2]],
    target: f64,
) -> Result<(TestFunction, f64, f64)> {
    let (c, _) = measure_khasminskii_constant(f, idx, opts, starts)?;
    if !(c > 0.0) {
        return Err(Error::OutOfRange { name: "f", detail: "measured constant is zero".into() });
    }
    let factor = target / c;
    Ok((f.scaled(factor), factor, c))
}

/// Euler-grid driver path with exact increments: states `U_{t_k}` for
/// `k = 0..=n` and the Brownian increments.
fn driver_euler_path<T: Real>(
    params: &StableParams<T>,
    opts: &McOptions,
    rng: &mut NoiseStream,
) -> Result<(Vec<[T; 2]>, Vec<T>)> {
    let dt: T = lit(opts.dt());
    let mut z = [lit::<T>(opts.start[0]), lit::<T>(opts.start[1])];
    let mut states = Vec::with_capacity(opts.n_steps + 1);
    let mut dw = Vec::with_capacity(opts.n_steps);
    states.push(z);
    for _ in 0..opts.n_steps {
        let dl = sample_stable_increment(params, dt, rng)?[0];
        let w = sample_brownian_increment::<T, _>(1, dt, rng)?[0];
        z[0] += dl;
        z[1] += w;
        states.push(z);
        dw.push(w);
    }
    Ok((states, dw))
}

/// `log φ_T = Σ G(t_k, U_k) ΔW_k - ½ Σ G(t_k, U_k)² dt` on the left-point
/// grid. Only the Brownian-block component `G` of the drift enters.
pub fn girsanov_log_weight<T: Real, D: Drift<T> + ?Sized>(drift: &D, states: &[[T; 2]], dw: &[T], dt: T) -> T {
    if drift.is_zero() {
        return T::zero();
    }
    let half: T = lit(0.5);
    let mut acc = T::zero();
    for (k, (z, &w)) in states.iter().zip(dw).enumerate() {
        let g = drift.eval(dt * lit(k as f64), *z)[1];
        acc += g * w - half * g * g * dt;
    }
    acc
}

/// `exp` of [`girsanov_log_weight`].
pub fn girsanov_weight<T: Real, D: Drift<T> + ?Sized>(drift: &D, states: &[[T; 2]], dw: &[T], dt: T) -> T {
    girsanov_log_weight(drift, states, dw, dt).exp()
}

/// `E φ_T` over driver paths; oracle and bound are both 1.
pub fn girsanov_mean<T: Real, D: Drift<T> + ?Sized>(
    drift: &D,
    idx: &RegularityIndices<T>,
    opts: &McOptions,
) -> Result<MCEstimate<T>> {
    check_dims(idx)?;
    opts.validate()?;
    let params = StableParams::new(idx.alpha, 1)?;
    let dt: T = lit(opts.dt());
    let samples = par_samples(opts, |rng| {
        let (s, w) = driver_euler_path(&params, opts, rng)?;
        Ok(girsanov_weight(drift, &s, &w, dt))
    })?;
    Ok(MCEstimate::from_samples(&samples, opts.seed, T::one()).with_oracle(T::one()))
}

fn left_sum<T: Real>(f: &TestFunction, states: &[[T; 2]], dt: T) -> T {
    states[..states.len() - 1].iter().map(|&z| f.eval(z)).fold(T::zero(), |a, b| a + b) * dt
}

fn weighted_run<T: Real, D: Drift<T> + ?Sized>(
    f: &TestFunction,
    drift: &D,
    idx: &RegularityIndices<T>,
    opts: &McOptions,
    exponential: bool,
) -> Result<MCEstimate<T>> {
    require(&idx.check(), &["cond_main"])?;
    check_dims(idx)?;
    check_nonnegative(f)?;
    opts.validate()?;
    let params = StableParams::new(idx.alpha, 1)?;
    let dt: T = lit(opts.dt());
    let pairs: Vec<(T, T)> = (0..opts.n_samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = NoiseStream::new(opts.seed, i as u64);
            let (s, w) = driver_euler_path(&params, opts, &mut rng)?;
            let integral = left_sum(f, &s, dt);
            let value = if exponential { integral.exp() } else { integral };
            Ok((girsanov_weight(drift, &s, &w, dt), value))
        })
        .collect::<Result<_>>()?;
    let r = HOLDER_R;
    let rp = r / (r - 1.0);
    let n = pairs.len() as f64;
    let w_moment = (pairs.iter().map(|(p, _)| to_f64(*p).powf(rp)).sum::<f64>() / n).powf(1.0 / rp);
    let v_moment = (pairs.iter().map(|(_, v)| to_f64(*v).powf(r)).sum::<f64>() / n).powf(1.0 / r);
    let samples: Vec<T> = pairs.iter().map(|&(p, v)| p * v).collect();
    Ok(MCEstimate::from_samples(&samples, opts.seed, lit(w_moment * v_moment))
        .note(format!("Holder split r = {r}: weight moment {w_moment:.6}, integrand moment {v_moment:.6}")))
}

/// `E^Q ∫₀ᵀ f(s, Z_s) ds = E[φ_T ∫₀ᵀ f(s, U_s) ds]`, left-point in time.
/// The bound is the Hölder split `‖φ_T‖_{r'} ‖∫f‖_r` with `r = 1.1`.
pub fn weighted_krylov<T: Real, D: Drift<T> + ?Sized>(
    f: &TestFunction,
    drift: &D,
    idx: &RegularityIndices<T>,
    opts: &McOptions,
) -> Result<MCEstimate<T>> {
    weighted_run(f, drift, idx, opts, false)
}

/// `E[φ_T exp{∫₀ᵀ f(s, U_s) ds}]` with the same Hölder bound.
pub fn weighted_exponential<T: Real, D: Drift<T> + ?Sized>(
    f: &TestFunction,
    drift: &D,
    idx: &RegularityIndices<T>,
    opts: &McOptions,
) -> Result<MCEstimate<T>> {
    weighted_run(f, drift, idx, opts, true)
}

/// Plain MC of `∫₀ᵀ f(s, Z_s) ds` along Euler paths of
/// `dZ = b(t, Z) dt + dL + dW`, left-point in time. No bound is attached
/// (`bound_rhs = +∞`).
pub fn direct_euler_krylov<T: Real, D: Drift<T> + ?Sized>(
    f: &TestFunction,
    drift: &D,
    idx: &RegularityIndices<T>,
    opts: &McOptions,
) -> Result<MCEstimate<T>> {
    check_dims(idx)?;
    opts.validate()?;
    let params = StableParams::new(idx.alpha, 1)?;
    let dt: T = lit(opts.dt());
    let samples = par_samples(opts, |rng| {
        let mut z = [lit::<T>(opts.start[0]), lit::<T>(opts.start[1])];
        let mut acc = T::zero();
        for k in 0..opts.n_steps {
            acc += f.eval(z);
            let b = drift.eval(dt * lit(k as f64), z);
            let dl = sample_stable_increment(&params, dt, rng)?[0];
            let w = sample_brownian_increment::<T, _>(1, dt, rng)?[0];
            z[0] += b[0] * dt + dl;
            z[1] += b[1] * dt + w;
        }
        Ok(acc * dt)
    })?;
    Ok(MCEstimate::from_samples(&samples, opts.seed, T::infinity()))
}

/// Smallest `C₁` with `mean ≤ C₁ ‖f‖` across a family of estimates.
pub fn measured_constant<T: Real>(estimates: &[MCEstimate<T>], norms: &[f64]) -> f64 {
    estimates
        .iter()
        .zip(norms)
        .filter(|(_, &n)| n > 0.0 && n.is_finite())
        .map(|(e, &n)| to_f64(e.mean) / n)
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::{FnDrift, ZeroDrift};

    fn idx() -> RegularityIndices<f64> {
        RegularityIndices::new(1.5, 0.5, 8.0, 8.0, 1, 1).unwrap()
    }

    #[test]
    fn verdict_rule() {
        let e = MCEstimate::from_samples(&[1.0, 1.2, 0.8, 1.0], 0, 0.9);
        assert!(e.stderr > 0.0);
        assert_eq!(e.verdict, e.mean <= 0.9 + 3.0 * e.stderr);
        let e = MCEstimate::from_samples(&[2.0, 2.0], 0, 1.0);
        assert!(!e.verdict);
    }

    #[test]
    fn zero_and_constant_f() {
        let o = McOptions::new(64, 16, 0.5, 3);
        let e = krylov_driver(&TestFunction::Constant(0.0), &idx(), &o).unwrap();
        assert_eq!(e.mean, 0.0);
        let e = krylov_driver(&TestFunction::Constant(2.0), &idx(), &o).unwrap();
        assert!((e.mean - 1.0).abs() < 1e-12);
        assert!((e.oracle.unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_drift_weight_is_one() {
        let s = vec![[0.0, 0.0], [0.1, 0.2]];
        assert_eq!(girsanov_weight(&ZeroDrift, &s, &[0.2], 0.1), 1.0);
        let e = girsanov_mean(&ZeroDrift, &idx(), &McOptions::new(32, 8, 1.0, 1)).unwrap();
        assert_eq!(e.mean, 1.0);
        assert_eq!(e.stderr, 0.0);
    }

    #[test]
    fn constant_drift_closed_form() {
        let b = 0.7;
        let drift = FnDrift(move |_: f64, _: [f64; 2]| [0.0, b]);
        let s = vec![[0.0, 0.0]; 5];
        let dw = [0.1, -0.3, 0.2, 0.05];
        let dt = 0.25;
        let wt: f64 = dw.iter().sum();
        let lw = girsanov_log_weight(&drift, &s, &dw, dt);
        assert!((lw - (b * wt - 0.5 * b * b)).abs() < 1e-14);
    }

    #[test]
    fn weighted_reduces_to_plain_for_zero_drift() {
        let f = TestFunction::Bump { center: [0.0, 0.0], width: 0.5, amplitude: 1.0 };
        let o = McOptions::new(200, 20, 0.5, 9);
        let w = weighted_krylov(&f, &ZeroDrift, &idx(), &o).unwrap();
        let d = direct_euler_krylov(&f, &ZeroDrift, &idx(), &o).unwrap();
        assert_eq!(w.mean, d.mean);
    }

    #[test]
    fn khasminskii_refuses_large_constant() {
        let o = McOptions::new(64, 16, 1.0, 2);
        let err = khasminskii_exponential(&TestFunction::Constant(1.5), &idx(), &o, &[[0.0, 0.0]]).unwrap_err();
        assert!(matches!(err, Error::KhasminskiiConstant { .. }));
        let e = khasminskii_exponential(&TestFunction::Constant(0.5), &idx(), &o, &[[0.0, 0.0]]).unwrap();
        assert!((e.mean - 0.5f64.exp()).abs() < 1e-12);
        assert!((e.bound_rhs - 2.0).abs() < 1e-12);
        assert!(e.verdict);
    }

    #[test]
    fn bump_factor_at_time_zero() {
        let v = bump_stable_factor(1.5, 0.0, 0.5, 0.3);
        assert!((v - (-0.09f64 / 0.5).exp()).abs() < 1e-10);
    }

    #[test]
    fn krylov_constant_requires_condition() {
        let bad = RegularityIndices::new(1.5, 0.5, 1.2, 1.2, 1, 1).unwrap();
        assert!(krylov_constant(&bad, 1.0).is_err());
        assert!(krylov_constant(&idx(), 1.0).unwrap().is_finite());
    }
}
