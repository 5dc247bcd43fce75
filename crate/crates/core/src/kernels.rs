//! Gaussian and rotationally symmetric stable heat kernels, their `L^p`
//! norms, and the spectral semigroups on the periodic lattice.
//!
//! Kernel values are computed in `f64` whatever the caller's scalar type,
//! since the radial quadrature needs the extra range.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::grid::ScalarField;
use crate::noise::{levy_constant_f64, sphere_area, StableParams};
use crate::quadrature::{geometric_breaks, uniform_breaks, GaussLegendre};
use crate::scalar::{lit, to_f64, Real};
use crate::spectral::Spectral2;

const SQRT_2_OVER_PI: f64 = 0.797_884_560_802_865_4;
/// `e^{-Ξ^α}` at the radial cutoff is below `1e-15`.
const CUTOFF_EXPONENT: f64 = 36.0;
const MAX_STABLE_DIM: usize = 5;

fn check_time(t: f64) -> Result<()> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::NonPositiveTime(t))
    }
}

/// `(2πt)^{-d/2} exp(-|y|²/(2t))`.
pub fn gaussian_kernel<T: Real>(t: T, y: &[T]) -> Result<T> {
    let tf = to_f64(t);
    check_time(tf)?;
    let r2: f64 = y.iter().map(|&v| to_f64(v).powi(2)).sum();
    Ok(lit(gaussian_radial(tf, r2.sqrt(), y.len())))
}

fn gaussian_radial(t: f64, r: f64, d: usize) -> f64 {
    (2.0 * std::f64::consts::PI * t).powf(-(d as f64) / 2.0) * (-r * r / (2.0 * t)).exp()
}

/// `z^{1-d/2} J_{d/2-1}(z)`, regular at zero.
fn radial_bessel(d: usize, z: f64) -> f64 {
    match d {
        1 => SQRT_2_OVER_PI * z.cos(),
        2 => libm::j0(z),
        3 => {
            if z.abs() < 1e-4 {
                SQRT_2_OVER_PI * (1.0 - z * z / 6.0)
            } else {
                SQRT_2_OVER_PI * z.sin() / z
            }
        }
        4 => {
            if z.abs() < 1e-4 {
                0.5 - z * z / 16.0
            } else {
                libm::j1(z) / z
            }
        }
        5 => {
            if z.abs() < 0.05 {
                let z2 = z * z;
                SQRT_2_OVER_PI * (1.0 / 3.0 - z2 / 30.0 + z2 * z2 / 840.0)
            } else {
                SQRT_2_OVER_PI * (z.sin() - z * z.cos()) / (z * z * z)
            }
        }
        _ => unreachable!("dimension checked by caller"),
    }
}

/// Radial profile of the unit-time stable kernel in dimension `d`.
fn stable_unit_radial(alpha: f64, d: usize, r: f64) -> f64 {
    let xi = CUTOFF_EXPONENT.powf(1.0 / alpha);
    let width = if r > 0.0 { (xi / 64.0).min(std::f64::consts::FRAC_PI_2 / r) } else { xi / 64.0 };
    let mut breaks = geometric_breaks(width, 0.5, 40);
    breaks.pop();
    breaks.extend(uniform_breaks(width, xi, width));
    let g = GaussLegendre::<f64>::new(8);
    let df = d as f64;
    let integral = g.composite(
        |rho| rho.powf(df - 1.0) * (-rho.powf(alpha)).exp() * radial_bessel(d, r * rho),
        &breaks,
    );
    (2.0 * std::f64::consts::PI).powf(-df / 2.0) * integral
}

fn stable_radial(alpha: f64, d: usize, t: f64, r: f64) -> f64 {
    let s = t.powf(1.0 / alpha);
    s.powi(-(d as i32)) * stable_unit_radial(alpha, d, r / s)
}

/// Density of `L_t` at `x`, by radial Fourier quadrature (`d1 ≤ 5`).
pub fn stable_kernel<T: Real>(params: &StableParams<T>, t: T, x: &[T]) -> Result<T> {
    params.validate()?;
    let tf = to_f64(t);
    check_time(tf)?;
    let d = x.len();
    if d != params.d1 {
        return Err(Error::OutOfRange {
            name: "x",
            detail: format!("expected {} coordinates, got {d}", params.d1),
        });
    }
    if d > MAX_STABLE_DIM {
        return Err(Error::UnsupportedDimension(d, "stable_kernel"));
    }
    let r = x.iter().map(|&v| to_f64(v).powi(2)).sum::<f64>().sqrt();
    let v = stable_radial(to_f64(params.alpha), d, tf, r);
    if !v.is_finite() {
        return Err(Error::Quadrature(format!("non-finite stable kernel at t={tf}, |x|={r}")));
    }
    Ok(lit(v))
}

/// `∇_x p^{(α)}(t, x) = -2π x p_{d+2}(t, |x|)`, valid for `d1 ≤ 3`.
pub fn stable_kernel_gradient<T: Real>(params: &StableParams<T>, t: T, x: &[T]) -> Result<Vec<T>> {
    params.validate()?;
    let tf = to_f64(t);
    check_time(tf)?;
    let d = x.len();
    if d + 2 > MAX_STABLE_DIM {
        return Err(Error::UnsupportedDimension(d, "stable_kernel_gradient"));
    }
    let r = x.iter().map(|&v| to_f64(v).powi(2)).sum::<f64>().sqrt();
    let q = stable_radial(to_f64(params.alpha), d + 2, tf, r);
    let c = -2.0 * std::f64::consts::PI * q;
    Ok(x.iter().map(|&v| lit(c * to_f64(v))).collect())
}

/// `p^{(α)}(t, x) p^{(2)}(t, y)`.
pub fn product_kernel<T: Real>(params: &StableParams<T>, t: T, x: &[T], y: &[T]) -> Result<T> {
    Ok(stable_kernel(params, t, x)? * gaussian_kernel(t, y)?)
}

/// `t (|x| + t^{1/α})^{-d-α}`, the profile in the two-sided kernel bound.
pub fn stable_bound_profile(alpha: f64, d: usize, t: f64, r: f64) -> f64 {
    t * (r + t.powf(1.0 / alpha)).powf(-(d as f64) - alpha)
}

/// `t^{1-1/α} (|x| + t^{1/α})^{-d-α}`, the gradient bound profile.
pub fn stable_gradient_profile(alpha: f64, d: usize, t: f64, r: f64) -> f64 {
    t.powf(1.0 - 1.0 / alpha) * (r + t.powf(1.0 / alpha)).powf(-(d as f64) - alpha)
}

/// One row of the kernel bound table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundRatio {
    pub t: f64,
    pub x: f64,
    /// `p^{(α)}(t,x) / profile`; must lie in `[1/c0, c0]`.
    pub ratio: f64,
}

/// Ratios of the stable kernel (`d1 = 1`) to its two-sided bound profile at
/// every `(t, x)`, and the smallest `c0` with all ratios in `[1/c0, c0]`.
pub fn stable_bound_table(alpha: f64, ts: &[f64], xs: &[f64]) -> Result<(Vec<BoundRatio>, f64)> {
    let params = StableParams::new(alpha, 1)?;
    let mut rows = Vec::with_capacity(ts.len() * xs.len());
    let mut c0: f64 = 1.0;
    for &t in ts {
        for &x in xs {
            let p = stable_kernel(&params, t, &[x])?;
            let ratio = p / stable_bound_profile(alpha, 1, t, x.abs());
            c0 = c0.max(ratio).max(ratio.recip());
            rows.push(BoundRatio { t, x, ratio });
        }
    }
    Ok((rows, c0))
}

/// Which kernel an `L^p` norm refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelKind {
    Gaussian,
    Stable,
}

/// `‖p(t, ·)‖_{L^p(R^d)}` by radial quadrature.
///
/// `alpha` is ignored for the Gaussian kernel.
pub fn kernel_lp_norm<T: Real>(which: KernelKind, alpha: T, d: usize, t: T, p: T) -> Result<T> {
    let tf = to_f64(t);
    let pf = to_f64(p);
    check_time(tf)?;
    if !(pf > 1.0) {
        return Err(Error::OutOfRange { name: "p", detail: format!("must exceed 1, got {pf}") });
    }
    let g = GaussLegendre::<f64>::new(16);
    let omega = sphere_area(d);
    let df = d as f64;
    let value = match which {
        KernelKind::Gaussian => {
            let s = tf.sqrt();
            let breaks = uniform_breaks(0.0, 40.0 * s, s / 4.0);
            omega * g.composite(|r| r.powf(df - 1.0) * gaussian_radial(tf, r, d).powf(pf), &breaks)
        }
        KernelKind::Stable => {
            let a = to_f64(alpha);
            StableParams::new(a, d)?;
            if d > MAX_STABLE_DIM {
                return Err(Error::UnsupportedDimension(d, "kernel_lp_norm"));
            }
            let s = tf.powf(1.0 / a);
            let rmax = 2000.0 * s;
            let mut breaks = vec![0.0, 0.25 * s, 0.5 * s, s];
            let mut b = s;
            while b < rmax {
                b = (b * 1.25).min(rmax);
                breaks.push(b);
            }
            let body = g.composite(|r| r.powf(df - 1.0) * stable_radial(a, d, tf, r).powf(pf), &breaks);
            let c = levy_constant_f64(a, d);
            let decay = pf * (df + a) - df;
            let tail = (tf * c).powf(pf) * rmax.powf(-decay) / decay;
            omega * (body + tail)
        }
    };
    if !value.is_finite() {
        return Err(Error::Quadrature("divergent kernel norm".into()));
    }
    Ok(lit(value.powf(1.0 / pf)))
}

/// `∫_{|x| ≤ X} p^{(α)}(t, x) dx` plus the asymptotic tail beyond `X`.
pub fn stable_kernel_mass(alpha: f64, d: usize, t: f64, x_max: f64) -> Result<f64> {
    StableParams::new(alpha, d)?;
    check_time(t)?;
    let g = GaussLegendre::<f64>::new(16);
    let mut breaks = vec![0.0, 0.5, 1.0];
    let mut b: f64 = 1.0;
    while b < x_max {
        b = (b * 1.5).min(x_max);
        breaks.push(b);
    }
    let df = d as f64;
    let body = sphere_area(d) * g.composite(|r| r.powf(df - 1.0) * stable_radial(alpha, d, t, r), &breaks);
    let tail = t * levy_constant_f64(alpha, d) * sphere_area(d) * x_max.powf(-alpha) / alpha;
    Ok(body + tail)
}

/// `P(L_t ≤ x)` for `d1 = 1`, by the Fourier sine integral
/// `1/2 + (1/π) ∫₀^∞ e^{-ξ^α} sin(uξ)/ξ dξ` with `u = x / t^{1/α}`.
pub fn stable_cdf_1d(alpha: f64, t: f64, x: f64) -> Result<f64> {
    StableParams::new(alpha, 1)?;
    check_time(t)?;
    let u = x / t.powf(1.0 / alpha);
    if u == 0.0 {
        return Ok(0.5);
    }
    if u.abs() > 1e4 {
        let tail = levy_constant_f64(alpha, 1) * u.abs().powf(-alpha) / alpha;
        return Ok(if u > 0.0 { 1.0 - tail } else { tail });
    }
    let xi = CUTOFF_EXPONENT.powf(1.0 / alpha);
    let width = (xi / 64.0).min(std::f64::consts::FRAC_PI_2 / u.abs());
    let g = GaussLegendre::<f64>::new(8);
    let integral = g.composite(|s| (-s.powf(alpha)).exp() * (u * s).sin() / s, &uniform_breaks(0.0, xi, width));
    Ok(0.5 + integral / std::f64::consts::PI)
}

/// Which factor of the mixed semigroup to apply.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Semigroup {
    /// Heat semigroup of `Δ_y / 2` only.
    Gaussian,
    /// Stable semigroup in `x` only.
    Stable,
    /// Both, i.e. the semigroup of the full mixed generator.
    Product,
}

/// Exponent `|kx|^α + ky²/2` of the mixed symbol.
#[inline]
pub fn mixed_symbol<T: Real>(alpha: T, kx: T, ky: T) -> T {
    kx.abs().powf(alpha) + ky * ky * lit(0.5)
}

/// Applies `T_t` by exact spectral multiplication.
pub fn apply_semigroup<T: Real>(field: &ScalarField<T>, alpha: T, t: T, which: Semigroup) -> Result<ScalarField<T>> {
    if t < T::zero() {
        return Err(Error::NonPositiveTime(to_f64(t)));
    }
    if t.is_zero() {
        return Ok(field.clone());
    }
    field.grid.validate()?;
    let sp = Spectral2::new(&field.grid);
    let data = sp.apply(field.data.view(), |kx, ky, _, _| {
        let e = match which {
            Semigroup::Gaussian => ky * ky * lit(0.5),
            Semigroup::Stable => kx.abs().powf(alpha),
            Semigroup::Product => mixed_symbol(alpha, kx, ky),
        };
        Complex::new((-t * e).exp(), T::zero())
    });
    Ok(ScalarField { grid: field.grid, data })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn gaussian_values() {
        assert_relative_eq!(gaussian_kernel(1.0, &[0.0]).unwrap(), 0.398_942_280_401_432_7, epsilon = 1e-15);
        assert_relative_eq!(gaussian_kernel(4.0, &[0.0]).unwrap(), 0.199_471_140_200_716_3, epsilon = 1e-15);
        assert!(gaussian_kernel(0.0, &[0.0]).is_err());
    }

    #[test]
    fn stable_scaling_identity() {
        let p = StableParams::new(1.5, 1).unwrap();
        for &t in &[0.01f64, 0.3, 2.0, 16.0] {
            for &x in &[0.0, 0.7, 3.0, 12.0] {
                let lhs = stable_kernel(&p, t, &[x]).unwrap();
                let rhs = t.powf(-1.0 / 1.5) * stable_kernel(&p, 1.0, &[x * t.powf(-1.0 / 1.5)]).unwrap();
                assert_relative_eq!(lhs, rhs, max_relative = 1e-10);
            }
        }
    }

    #[test]
    fn higher_dimensions_at_origin() {
        // p_d(1,0) = (2π)^{-d} ω_d Γ(d/α)/α
        for d in 1..=5 {
            let p = StableParams::new(1.5, d).unwrap();
            let x = vec![0.0; d];
            let v = stable_kernel(&p, 1.0, &x).unwrap();
            let exact = (2.0 * std::f64::consts::PI).powi(-(d as i32)) * sphere_area(d)
                * libm::tgamma(d as f64 / 1.5)
                / 1.5;
            assert_relative_eq!(v, exact, max_relative = 1e-9);
        }
    }

    #[test]
    fn gradient_matches_finite_difference() {
        let p = StableParams::new(1.5, 1).unwrap();
        for &x in &[0.3, 1.0, 4.0] {
            let h = 1e-5;
            let fd = (stable_kernel(&p, 1.0, &[x + h]).unwrap() - stable_kernel(&p, 1.0, &[x - h]).unwrap()) / (2.0 * h);
            let g = stable_kernel_gradient(&p, 1.0, &[x]).unwrap()[0];
            assert_relative_eq!(g, fd, max_relative = 1e-6);
        }
    }

    #[test]
    fn gaussian_norm_closed_form() {
        let v = kernel_lp_norm(KernelKind::Gaussian, 0.0, 1, 1.0, 2.0).unwrap();
        assert_relative_eq!(v, (2.0 * std::f64::consts::PI.sqrt()).powf(-0.5), epsilon = 1e-12);
    }

    #[test]
    fn semigroup_identity_at_zero() {
        let g = crate::GridSpec::new(3.0, 3.0, 16, 16, 1.0, 1).unwrap();
        let f = ScalarField::from_fn(g, |x: f64, y: f64| (x * y).sin());
        assert_eq!(apply_semigroup(&f, 1.5, 0.0, Semigroup::Product).unwrap(), f);
    }
}
