//! Rotationally symmetric α-stable and Brownian drivers.
//!
//! Increments of `L` are drawn exactly in law by Gaussian subordination.
//! Whole paths use the Lévy–Itô split at `|v| = 1`: large jumps are a
//! compound Poisson process stored event by event, small jumps are stored as
//! per-step compensated sums.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, Poisson, StandardNormal};

use crate::error::{Error, Result};
use crate::scalar::{lit, to_f64, Real};

/// Stability index and dimension of the x-block noise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StableParams<T> {
    pub alpha: T,
    pub d1: usize,
}

impl<T: Real> StableParams<T> {
    pub fn new(alpha: T, d1: usize) -> Result<Self> {
        let p = StableParams { alpha, d1 };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > T::one() && self.alpha < lit(2.0)) {
            return Err(Error::AlphaOutOfRange(to_f64(self.alpha)));
        }
        if self.d1 == 0 {
            return Err(Error::OutOfRange { name: "d1", detail: "must be at least 1".into() });
        }
        Ok(())
    }

    /// Constant `c` in `ν(dv) = c |v|^{-d-α} dv` for which
    /// `∫ (1 - cos ξ·v) ν(dv) = |ξ|^α`.
    pub fn levy_constant(&self) -> T {
        lit(levy_constant_f64(to_f64(self.alpha), self.d1))
    }

    /// `ν({|v| > r})`.
    pub fn tail_mass(&self, r: T) -> T {
        let a = self.alpha;
        self.levy_constant() * lit::<T>(sphere_area(self.d1)) * r.powf(-a) / a
    }

    /// `ν({ε < |v| ≤ 1})`.
    pub fn band_mass(&self, eps: T) -> T {
        self.tail_mass(eps) - self.tail_mass(T::one())
    }

    /// `∫_{|v| ≤ ε} |v|^2 ν(dv)`.
    pub fn small_second_moment(&self, eps: T) -> T {
        let a = self.alpha;
        self.levy_constant() * lit::<T>(sphere_area(self.d1)) * eps.powf(lit::<T>(2.0) - a)
            / (lit::<T>(2.0) - a)
    }
}

pub(crate) fn levy_constant_f64(alpha: f64, d: usize) -> f64 {
    let df = d as f64;
    alpha * 2f64.powf(alpha - 1.0) * libm::tgamma((df + alpha) / 2.0)
        / (std::f64::consts::PI.powf(df / 2.0) * libm::tgamma(1.0 - alpha / 2.0))
}

/// Surface area of the unit sphere in `R^d`.
pub fn sphere_area(d: usize) -> f64 {
    let h = d as f64 / 2.0;
    2.0 * std::f64::consts::PI.powf(h) / libm::tgamma(h)
}

/// `∫ (1 - cos v_1) ν(dv)` by radial quadrature, for `d ≤ 3`.
///
/// Equals one when the normalization is right.
pub fn levy_symbol_by_quadrature(alpha: f64, d: usize) -> Result<f64> {
    let avg_cos: fn(f64) -> f64 = match d {
        1 => f64::cos,
        2 => libm::j0,
        3 => |r: f64| if r < 1e-8 { 1.0 - r * r / 6.0 } else { r.sin() / r },
        _ => return Err(Error::UnsupportedDimension(d, "levy_symbol_by_quadrature")),
    };
    let c = levy_constant_f64(alpha, d) * sphere_area(d);
    let df = d as f64;
    let one_minus = |r: f64| {
        if r < 1e-3 {
            r * r / (2.0 * df) - r.powi(4) / (8.0 * df * (df + 2.0))
        } else {
            1.0 - avg_cos(r)
        }
    };
    let g = crate::quadrature::GaussLegendre::<f64>::new(16);
    // ∫_0^∞ (1 - avg cos(r)) r^{-1-α} dr; near zero the integrand ~ r^{1-α}/(2d)
    let head = g.composite(
        |r| one_minus(r) * r.powf(-1.0 - alpha),
        &crate::quadrature::geometric_breaks(1.0, 0.5, 60),
    ) + (0.5 / df) * 2f64.powf(-60.0 * (2.0 - alpha)) / (2.0 - alpha);
    let rmax = 4000.0;
    let body = g.composite(
        |r| (1.0 - avg_cos(r)) * r.powf(-1.0 - alpha),
        &crate::quadrature::uniform_breaks(1.0, rmax, 0.5),
    );
    // oscillatory part averages out beyond rmax
    let tail = rmax.powf(-alpha) / alpha;
    Ok(c * (head + body + tail))
}

/// A seeded, splittable random stream. Each replicate gets its own stream
/// id; the underlying generator is counter based so streams never overlap.
#[derive(Debug, Clone)]
pub struct NoiseStream {
    pub seed: u64,
    pub stream: u64,
    rng: ChaCha8Rng,
}

impl NoiseStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        NoiseStream { seed, stream, rng }
    }

    /// Independent child stream, deterministic in `(seed, stream, tag)`.
    pub fn child(&self, tag: u64) -> NoiseStream {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15));
        rng.set_stream(self.stream);
        NoiseStream { seed: self.seed, stream: self.stream, rng }
    }
}

impl RngCore for NoiseStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }
    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }
    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}

/// Positive strictly `a`-stable draw with `E e^{-sA} = e^{-s^a}`, `a ∈ (0,1)`
/// (Kanter's representation of the Chambers–Mallows–Stuck transform).
fn positive_stable<R: Rng + ?Sized>(a: f64, rng: &mut R) -> f64 {
    let u: f64 = loop {
        let u = rng.random::<f64>() * std::f64::consts::PI;
        if u > 0.0 {
            break u;
        }
    };
    let e: f64 = Exp1.sample(rng);
    let s = (a * u).sin() / u.sin().powf(1.0 / a);
    s * (((1.0 - a) * u).sin() / e).powf((1.0 - a) / a)
}

fn gaussian_vec<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Vec<f64> {
    (0..d).map(|_| StandardNormal.sample(rng)).collect()
}

fn unit_vector<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Vec<f64> {
    if d == 1 {
        return vec![if rng.random::<bool>() { 1.0 } else { -1.0 }];
    }
    loop {
        let g = gaussian_vec(d, rng);
        let n = g.iter().map(|v| v * v).sum::<f64>().sqrt();
        if n > 1e-12 {
            return g.into_iter().map(|v| v / n).collect();
        }
    }
}

/// One increment `L_dt`, exact in law.
pub fn sample_stable_increment<T: Real, R: Rng + ?Sized>(
    params: &StableParams<T>,
    dt: T,
    rng: &mut R,
) -> Result<Vec<T>> {
    params.validate()?;
    if !(dt > T::zero()) {
        return Err(Error::NonPositiveTime(to_f64(dt)));
    }
    let alpha = to_f64(params.alpha);
    let a = positive_stable(alpha / 2.0, rng);
    let scale = to_f64(dt).powf(1.0 / alpha) * (2.0 * a).sqrt();
    Ok(gaussian_vec(params.d1, rng).into_iter().map(|g| lit(scale * g)).collect())
}

/// One increment `W_dt`.
pub fn sample_brownian_increment<T: Real, R: Rng + ?Sized>(d2: usize, dt: T, rng: &mut R) -> Result<Vec<T>> {
    if !(dt > T::zero()) {
        return Err(Error::NonPositiveTime(to_f64(dt)));
    }
    let s = to_f64(dt).sqrt();
    Ok(gaussian_vec(d2, rng).into_iter().map(|g| lit(s * g)).collect())
}

/// A single jump of `L` with `|v| > 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct LargeJump<T> {
    /// Index of the step `[t_k, t_{k+1})` containing the jump.
    pub step: usize,
    pub time: T,
    pub size: Vec<T>,
}

impl<T: Real> LargeJump<T> {
    pub fn magnitude(&self) -> T {
        self.size.iter().map(|&v| v * v).sum::<T>().sqrt()
    }
}

/// One trajectory of the driver `U_t = Q L_t + R W_t` started at the origin.
#[derive(Debug, Clone, PartialEq)]
pub struct PathSample<T> {
    pub d1: usize,
    pub d2: usize,
    pub times: Vec<T>,
    /// `U_{t_k}`, x-block first.
    pub states: Vec<Vec<T>>,
    pub brownian_increments: Vec<Vec<T>>,
    /// Compensated sum of the jumps with `|v| ≤ 1` in each step.
    pub small_jumps: Vec<Vec<T>>,
    /// Largest individually simulated small atom per step.
    pub small_jump_max: Vec<T>,
    pub large_jumps: Vec<LargeJump<T>>,
    pub seed: u64,
}

impl<T: Real> PathSample<T> {
    pub fn n_steps(&self) -> usize {
        self.times.len().saturating_sub(1)
    }

    pub fn dim(&self) -> usize {
        self.d1 + self.d2
    }

    pub fn dt(&self) -> T {
        if self.n_steps() == 0 {
            T::zero()
        } else {
            self.times[1] - self.times[0]
        }
    }

    pub fn horizon(&self) -> T {
        *self.times.last().unwrap_or(&T::zero())
    }

    /// Total increment of `L` over step `k` (small part plus large jumps).
    pub fn stable_increment(&self, k: usize) -> Vec<T> {
        let mut inc = self.small_jumps[k].clone();
        for j in self.large_jumps.iter().filter(|j| j.step == k) {
            for (a, b) in inc.iter_mut().zip(&j.size) {
                *a += *b;
            }
        }
        inc
    }

    pub fn large_jumps_in(&self, k: usize) -> impl Iterator<Item = &LargeJump<T>> {
        self.large_jumps.iter().filter(move |j| j.step == k)
    }

    /// Builds a path from increments, recomputing `states` and validating
    /// lengths and the jump split.
    #[allow(clippy::too_many_arguments)]
    pub fn from_increments(
        d1: usize,
        d2: usize,
        times: Vec<T>,
        brownian_increments: Vec<Vec<T>>,
        small_jumps: Vec<Vec<T>>,
        small_jump_max: Vec<T>,
        large_jumps: Vec<LargeJump<T>>,
        seed: u64,
    ) -> Result<Self> {
        let n = times.len().saturating_sub(1);
        if times.is_empty()
            || brownian_increments.len() != n
            || small_jumps.len() != n
            || small_jump_max.len() != n
        {
            return Err(Error::ShapeMismatch {
                expected: vec![n, n, n],
                found: vec![brownian_increments.len(), small_jumps.len(), small_jump_max.len()],
            });
        }
        if small_jump_max.iter().any(|&m| m > T::one()) {
            return Err(Error::OutOfRange { name: "small_jump_max", detail: "atom above 1".into() });
        }
        for j in &large_jumps {
            if j.step >= n || !(j.magnitude() > T::one()) || j.size.len() != d1 {
                return Err(Error::OutOfRange {
                    name: "large_jumps",
                    detail: format!("bad event at step {}", j.step),
                });
            }
        }
        let mut p = PathSample {
            d1,
            d2,
            times,
            states: Vec::new(),
            brownian_increments,
            small_jumps,
            small_jump_max,
            large_jumps,
            seed,
        };
        p.rebuild_states();
        Ok(p)
    }

    fn rebuild_states(&mut self) {
        let mut z = vec![T::zero(); self.dim()];
        let mut states = Vec::with_capacity(self.times.len());
        states.push(z.clone());
        for k in 0..self.n_steps() {
            let l = self.stable_increment(k);
            for i in 0..self.d1 {
                z[i] += l[i];
            }
            for i in 0..self.d2 {
                z[self.d1 + i] += self.brownian_increments[k][i];
            }
            states.push(z.clone());
        }
        self.states = states;
    }

    /// Same noise on a grid `factor` times coarser.
    pub fn coarsen(&self, factor: usize) -> Result<Self> {
        let n = self.n_steps();
        if factor == 0 || !n.is_multiple_of(factor) {
            return Err(Error::InvalidGrid(format!("cannot coarsen {n} steps by {factor}")));
        }
        let m = n / factor;
        let sum = |v: &[Vec<T>], d: usize| -> Vec<Vec<T>> {
            (0..m)
                .map(|c| {
                    let mut s = vec![T::zero(); d];
                    for row in &v[c * factor..(c + 1) * factor] {
                        for (a, b) in s.iter_mut().zip(row) {
                            *a += *b;
                        }
                    }
                    s
                })
                .collect()
        };
        let large = self
            .large_jumps
            .iter()
            .map(|j| LargeJump { step: j.step / factor, time: j.time, size: j.size.clone() })
            .collect();
        Ok(PathSample {
            d1: self.d1,
            d2: self.d2,
            times: (0..=m).map(|c| self.times[c * factor]).collect(),
            states: (0..=m).map(|c| self.states[c * factor].clone()).collect(),
            brownian_increments: sum(&self.brownian_increments, self.d2),
            small_jumps: sum(&self.small_jumps, self.d1),
            small_jump_max: (0..m)
                .map(|c| {
                    self.small_jump_max[c * factor..(c + 1) * factor]
                        .iter()
                        .fold(T::zero(), |a, &b| a.max(b))
                })
                .collect(),
            large_jumps: large,
            seed: self.seed,
        })
    }
}

/// Tuning of the small-jump part of [`sample_driver_path`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmallJumpResolution {
    /// Atoms below `kappa * dt^{1/α}` are replaced by a Gaussian of equal
    /// covariance; atoms above are simulated one by one.
    pub kappa: f64,
}

impl Default for SmallJumpResolution {
    fn default() -> Self {
        SmallJumpResolution { kappa: 0.2 }
    }
}

/// Samples the driver on `n` uniform steps over `[0, t_end]`.
///
/// The W and L parts use independent child streams of `rng`, so the
/// Brownian component does not depend on `params`.
pub fn sample_driver_path<T: Real>(
    params: &StableParams<T>,
    d2: usize,
    t_end: T,
    n: usize,
    rng: &NoiseStream,
) -> Result<PathSample<T>> {
    sample_driver_path_with(params, d2, t_end, n, rng, SmallJumpResolution::default())
}

pub fn sample_driver_path_with<T: Real>(
    params: &StableParams<T>,
    d2: usize,
    t_end: T,
    n: usize,
    rng: &NoiseStream,
    res: SmallJumpResolution,
) -> Result<PathSample<T>> {
    params.validate()?;
    if !(t_end > T::zero()) {
        return Err(Error::NonPositiveTime(to_f64(t_end)));
    }
    let d1 = params.d1;
    if n == 0 {
        return Ok(PathSample {
            d1,
            d2,
            times: vec![T::zero()],
            states: vec![vec![T::zero(); d1 + d2]],
            brownian_increments: vec![],
            small_jumps: vec![],
            small_jump_max: vec![],
            large_jumps: vec![],
            seed: rng.seed,
        });
    }
    let alpha = to_f64(params.alpha);
    let tf = to_f64(t_end);
    let dt = tf / n as f64;
    let mut w_rng = rng.child(1);
    let mut s_rng = rng.child(2);
    let mut l_rng = rng.child(3);

    let brownian: Vec<Vec<T>> = (0..n)
        .map(|_| gaussian_vec(d2, &mut w_rng).into_iter().map(|g| lit(g * dt.sqrt())).collect())
        .collect();

    let sp = StableParams { alpha, d1 };
    let eps = (res.kappa * dt.powf(1.0 / alpha)).min(1.0);
    let band_rate = sp.band_mass(eps) * dt;
    let gauss_sd = (sp.small_second_moment(eps) / d1 as f64 * dt).sqrt();
    let band = (band_rate > 0.0).then(|| Poisson::new(band_rate).expect("positive rate"));
    let e_a = eps.powf(-alpha);
    let mut small = Vec::with_capacity(n);
    let mut small_max = Vec::with_capacity(n);
    for _ in 0..n {
        let mut s: Vec<f64> = gaussian_vec(d1, &mut s_rng).into_iter().map(|g| g * gauss_sd).collect();
        let mut mx: f64 = 0.0;
        if let Some(pois) = &band {
            let count = pois.sample(&mut s_rng) as usize;
            for _ in 0..count {
                let u: f64 = s_rng.random();
                let r = (e_a - u * (e_a - 1.0)).powf(-1.0 / alpha);
                mx = mx.max(r);
                for (a, e) in s.iter_mut().zip(unit_vector(d1, &mut s_rng)) {
                    *a += r * e;
                }
            }
        }
        small.push(s.into_iter().map(lit).collect());
        small_max.push(lit(mx.min(1.0)));
    }

    let rate = sp.tail_mass(1.0) * tf;
    let count = Poisson::new(rate).expect("positive rate").sample(&mut l_rng) as usize;
    let mut events: Vec<(f64, Vec<f64>)> = (0..count)
        .map(|_| {
            let t = l_rng.random::<f64>() * tf;
            let u: f64 = 1.0 - l_rng.random::<f64>();
            let r = u.powf(-1.0 / alpha).max(1.0 + 1e-12);
            let dir = unit_vector(d1, &mut l_rng);
            (t, dir.into_iter().map(|e| e * r).collect())
        })
        .collect();
    events.sort_by(|a, b| a.0.total_cmp(&b.0));
    let large = events
        .into_iter()
        .map(|(t, v)| LargeJump {
            step: ((t / dt) as usize).min(n - 1),
            time: lit(t),
            size: v.into_iter().map(lit).collect(),
        })
        .collect();

    let times = (0..=n).map(|k| lit(tf * k as f64 / n as f64)).collect();
    PathSample::from_increments(d1, d2, times, brownian, small, small_max, large, rng.seed)
}

/// Exact-in-law increments of `(L, W)` over `n` steps of length `dt`,
/// without a jump split. Used where only the law of the increments matters.
pub fn sample_exact_increments<T: Real, R: Rng + ?Sized>(
    params: &StableParams<T>,
    d2: usize,
    dt: T,
    n: usize,
    rng: &mut R,
) -> Result<Vec<(Vec<T>, Vec<T>)>> {
    (0..n)
        .map(|_| {
            Ok((
                sample_stable_increment(params, dt, rng)?,
                sample_brownian_increment(d2, dt, rng)?,
            ))
        })
        .collect()
}

/// Splits a path at the first jump of `L` larger than `threshold`.
///
/// Returns the path up to the end of the step containing `τ`, with that
/// jump and all later large jumps removed, together with `τ`. Only large
/// jumps are stored individually, so `threshold` must be at least 1.
pub fn decompose_and_interlace<T: Real>(
    path: &PathSample<T>,
    threshold: T,
) -> Result<(PathSample<T>, Option<T>)> {
    if threshold < T::one() {
        return Err(Error::OutOfRange {
            name: "threshold",
            detail: "individual jumps are only recorded above 1".into(),
        });
    }
    let first = path.large_jumps.iter().find(|j| j.magnitude() > threshold);
    let Some(first) = first else {
        return Ok((path.clone(), None));
    };
    let tau = first.time;
    let k = first.step;
    let mut out = PathSample {
        d1: path.d1,
        d2: path.d2,
        times: path.times[..=k + 1].to_vec(),
        states: Vec::new(),
        brownian_increments: path.brownian_increments[..=k].to_vec(),
        small_jumps: path.small_jumps[..=k].to_vec(),
        small_jump_max: path.small_jump_max[..=k].to_vec(),
        large_jumps: path.large_jumps.iter().filter(|j| j.time < tau).cloned().collect(),
        seed: path.seed,
    };
    out.rebuild_states();
    Ok((out, Some(tau)))
}
