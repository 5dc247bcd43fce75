//! Named drifts, sources and smooth profiles used by the experiments.

use crate::error::{Error, Result};
use crate::grid::{GridSpec, SpaceTimeField};
use crate::pide::DriftSpec;
use crate::scalar::{lit, Real};

/// `exp(-1/(1-s²))` for `|s| < 1`, zero otherwise.
pub fn bump_profile(s: f64) -> f64 {
    if s.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - s * s)).exp()
    }
}

/// Smooth step: 1 for `r ≤ inner`, 0 for `r ≥ outer`, built from the bump
/// profile.
pub fn smooth_cutoff(r: f64, inner: f64, outer: f64) -> f64 {
    let r = r.abs();
    if r <= inner {
        return 1.0;
    }
    if r >= outer {
        return 0.0;
    }
    let s = (r - inner) / (outer - inner);
    let psi = |u: f64| if u <= 0.0 { 0.0 } else { (-1.0 / u).exp() };
    let a = psi(1.0 - s);
    a / (a + psi(s))
}

/// Gaussian bump `exp(-|z - c|² / (2 w²))`.
pub fn gaussian_bump(x: f64, y: f64, cx: f64, cy: f64, width: f64) -> f64 {
    (-((x - cx).powi(2) + (y - cy).powi(2)) / (2.0 * width * width)).exp()
}

/// `sign(x)|x|^γ · w(x) · bump(y)`, where `w` is a smooth window equal to
/// one on `|x| ≤ 1.5` and the y-profile is the compact bump of radius 2.5.
pub fn holder_value(x: f64, y: f64, gamma: f64) -> f64 {
    x.signum() * x.abs().powf(gamma) * smooth_cutoff(x, 1.5, 2.5) * bump_profile(y / 2.5) * std::f64::consts::E
}

/// Drift presets addressable by name.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DriftPreset {
    Zero,
    /// `F = G = a · gaussian_bump(width)` centred at the origin.
    Bump { amplitude: f64, width: f64 },
    /// Hölder-singular `F`, `G = 0`.
    Holder { gamma: f64, amplitude: f64 },
    /// `F = a sin(x)`, `G = a cos(y)`.
    Trig { amplitude: f64 },
}

impl DriftPreset {
    pub fn parse(name: &str, amplitude: f64, width: f64, gamma: f64) -> Result<Self> {
        match name {
            "zero" => Ok(DriftPreset::Zero),
            "bump" => Ok(DriftPreset::Bump { amplitude, width }),
            "holder" => Ok(DriftPreset::Holder { gamma, amplitude }),
            "trig" => Ok(DriftPreset::Trig { amplitude }),
            other => Err(Error::OutOfRange {
                name: "drift.preset",
                detail: format!("unknown preset {other:?}; expected zero, bump, holder or trig"),
            }),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            DriftPreset::Zero => "zero",
            DriftPreset::Bump { .. } => "bump",
            DriftPreset::Holder { .. } => "holder",
            DriftPreset::Trig { .. } => "trig",
        }
    }

    /// `(F, G)` at a point.
    pub fn value(&self, x: f64, y: f64) -> (f64, f64) {
        match *self {
            DriftPreset::Zero => (0.0, 0.0),
            DriftPreset::Bump { amplitude, width } => {
                let b = amplitude * gaussian_bump(x, y, 0.0, 0.0, width);
                (b, b)
            }
            DriftPreset::Holder { gamma, amplitude } => (amplitude * holder_value(x, y, gamma), 0.0),
            DriftPreset::Trig { amplitude } => (amplitude * x.sin(), amplitude * y.cos()),
        }
    }

    /// Samples the (time-independent) preset on every slice of `grid`.
    pub fn sample<T: Real>(&self, grid: GridSpec<T>) -> DriftSpec<T> {
        let f = SpaceTimeField::from_fn(grid, |_, x, y| lit(self.value(x.to_f64().unwrap(), y.to_f64().unwrap()).0));
        let g = SpaceTimeField::from_fn(grid, |_, x, y| lit(self.value(x.to_f64().unwrap(), y.to_f64().unwrap()).1));
        DriftSpec { tag: self.name().to_string(), f, g }
    }
}

/// Time-constant Gaussian source `a · gaussian_bump(width)` at `(cx, cy)`.
pub fn gaussian_source<T: Real>(grid: GridSpec<T>, amplitude: f64, width: f64, cx: f64, cy: f64) -> SpaceTimeField<T> {
    SpaceTimeField::from_fn(grid, |_, x, y| {
        lit(amplitude * gaussian_bump(x.to_f64().unwrap(), y.to_f64().unwrap(), cx, cy, width))
    })
}

/// Rescaled bumps `f_k = gaussian_bump(w_k)` with widths `w_0 / 2^k`.
pub fn rescaled_bump_family<T: Real>(grid: GridSpec<T>, w0: f64, count: usize) -> Vec<SpaceTimeField<T>> {
    (0..count).map(|k| gaussian_source(grid, 1.0, w0 / 2f64.powi(k as i32), 0.0, 0.0)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cutoff_sandwich() {
        assert_eq!(smooth_cutoff(0.9, 1.0, 2.0), 1.0);
        assert_eq!(smooth_cutoff(2.0, 1.0, 2.0), 0.0);
        let mid = smooth_cutoff(1.5, 1.0, 2.0);
        assert!((mid - 0.5).abs() < 1e-12);
        let mut prev = 1.0;
        for k in 0..=100 {
            let v = smooth_cutoff(1.0 + k as f64 / 100.0, 1.0, 2.0);
            assert!(v <= prev + 1e-15);
            prev = v;
        }
    }

    #[test]
    fn holder_preset_shape() {
        assert_eq!(holder_value(0.0, 0.0, 0.7), 0.0);
        assert!((holder_value(1.0, 0.0, 0.7) - 1.0).abs() < 1e-12);
        assert!((holder_value(-0.5, 0.0, 0.7) + 0.5f64.powf(0.7)).abs() < 1e-12);
        assert_eq!(holder_value(3.0, 0.0, 0.7), 0.0);
        assert_eq!(holder_value(1.0, 2.6, 0.7), 0.0);
    }
}
