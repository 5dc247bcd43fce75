//! The four space-time Fourier multipliers of the mixed generator and a
//! numerical check of the Mikhlin-type bounds.
//!
//! Frequencies are `(ξ1, ξ2, ξ3)` for `(t, x, y)`, with denominator
//! `D = iξ1 + |ξ2|^α + |ξ3|²/2`.

use num_complex::Complex64;

/// Multiplier label.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Multiplier {
    /// `iξ1 / D` (time derivative).
    M1,
    /// `|ξ2|^α / D` (fractional Laplacian in x).
    M2,
    /// `(|ξ3|²/2) / D` (Laplacian in y).
    M3,
    /// `|ξ2|^{α/2} ξ3 / D` (mixed first-order term).
    M4,
}

impl Multiplier {
    pub const ALL: [Multiplier; 4] = [Multiplier::M1, Multiplier::M2, Multiplier::M3, Multiplier::M4];

    pub fn name(self) -> &'static str {
        match self {
            Multiplier::M1 => "m1",
            Multiplier::M2 => "m2",
            Multiplier::M3 => "m3",
            Multiplier::M4 => "m4",
        }
    }
}

pub fn evaluate(which: Multiplier, alpha: f64, xi: [f64; 3]) -> Complex64 {
    let [x1, x2, x3] = xi;
    let a2 = x2.abs().powf(alpha);
    let a3 = 0.5 * x3 * x3;
    let den = Complex64::new(a2 + a3, x1);
    let num = match which {
        Multiplier::M1 => Complex64::new(0.0, x1),
        Multiplier::M2 => Complex64::new(a2, 0.0),
        Multiplier::M3 => Complex64::new(a3, 0.0),
        Multiplier::M4 => Complex64::new(x2.abs().powf(alpha / 2.0) * x3, 0.0),
    };
    num / den
}

/// Maxima over the frequency grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MultiplierBounds {
    pub max_modulus: f64,
    /// Max over the grid of `Σ_j |ξ_j| |∂_{ξ_j} m|`.
    pub max_scaled_derivative: f64,
    pub points: usize,
}

/// Log-spaced frequency grid: `0` and `±10^e` for `n` exponents in
/// `[lo, hi]`, with points of total modulus below `min_modulus` removed.
pub fn log_grid(lo: f64, hi: f64, n: usize, min_modulus: f64) -> Vec<[f64; 3]> {
    let mut axis = vec![0.0];
    for k in 0..n {
        let e = lo + (hi - lo) * k as f64 / (n - 1).max(1) as f64;
        let v = 10f64.powf(e);
        axis.push(v);
        axis.push(-v);
    }
    let mut out = Vec::new();
    for &a in &axis {
        for &b in &axis {
            for &c in &axis {
                if (a * a + b * b + c * c).sqrt() >= min_modulus {
                    out.push([a, b, c]);
                }
            }
        }
    }
    out
}

/// `max |m|` and `max Σ_j |ξ_j ∂_j m|`, the derivative taken as a central
/// difference in `log |ξ_j|` with step `h`.
pub fn check_multiplier_bounds(which: Multiplier, alpha: f64, grid: &[[f64; 3]]) -> MultiplierBounds {
    let h: f64 = 1e-4;
    let (eh, emh) = (h.exp(), (-h).exp());
    let mut max_mod: f64 = 0.0;
    let mut max_der: f64 = 0.0;
    for &xi in grid {
        max_mod = max_mod.max(evaluate(which, alpha, xi).norm());
        let mut s = 0.0;
        for j in 0..3 {
            if xi[j] == 0.0 {
                continue;
            }
            let mut up = xi;
            let mut dn = xi;
            up[j] *= eh;
            dn[j] *= emh;
            let d = (evaluate(which, alpha, up) - evaluate(which, alpha, dn)) / (2.0 * h);
            s += d.norm();
        }
        max_der = max_der.max(s);
    }
    MultiplierBounds { max_modulus: max_mod, max_scaled_derivative: max_der, points: grid.len() }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn m2_is_one_on_x_axis() {
        for x2 in [0.01, 1.0, 37.0, -5.0] {
            let v = evaluate(Multiplier::M2, 1.5, [0.0, x2, 0.0]);
            assert_eq!(v, Complex64::new(1.0, 0.0));
        }
    }

    #[test]
    fn m1_modulus_formula() {
        let xi = [2.0, 0.5, 1.5];
        let v = evaluate(Multiplier::M1, 1.5, xi).norm();
        let r = 0.5f64.powf(1.5) + 0.5 * 1.5 * 1.5;
        assert!((v - 2.0 / (4.0 + r * r).sqrt()).abs() < 1e-14);
    }

    #[test]
    fn bounded_on_grid() {
        let g = log_grid(-3.0, 3.0, 13, 1e-3);
        for m in Multiplier::ALL {
            let b = check_multiplier_bounds(m, 1.5, &g);
            assert!(b.max_modulus <= 1.0 + 1e-12, "{:?}", m);
            assert!(b.max_scaled_derivative.is_finite() && b.max_scaled_derivative < 10.0);
        }
    }
}
