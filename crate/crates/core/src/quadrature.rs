//! Gauss–Legendre rules and composite panel integration.

use crate::scalar::{lit, Real};

/// Gauss–Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre<T> {
    nodes: Vec<T>,
    weights: Vec<T>,
}

impl<T: Real> GaussLegendre<T> {
    /// Builds an `n`-point rule. Nodes are found by Newton iteration on the
    /// three-term recurrence in `f64` and then converted.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let (x, w) = legendre_f64(n);
        GaussLegendre {
            nodes: x.into_iter().map(lit).collect(),
            weights: w.into_iter().map(lit).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Nodes and weights mapped to `[a, b]`.
    pub fn mapped(&self, a: T, b: T) -> impl Iterator<Item = (T, T)> + '_ {
        let half = (b - a) * lit(0.5);
        let mid = (a + b) * lit(0.5);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&x, &w)| (mid + half * x, half * w))
    }

    pub fn integrate<F: FnMut(T) -> T>(&self, mut f: F, a: T, b: T) -> T {
        self.mapped(a, b).map(|(x, w)| w * f(x)).sum()
    }

    /// Sum of the rule over consecutive panels `[b_i, b_{i+1}]`.
    pub fn composite<F: FnMut(T) -> T>(&self, mut f: F, breaks: &[T]) -> T {
        breaks
            .windows(2)
            .map(|p| self.integrate(&mut f, p[0], p[1]))
            .sum()
    }
}

fn legendre_f64(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_eval(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_eval(n, z);
        if d != 0.0 {
            dp = d;
        }
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

fn legendre_eval(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

/// Breakpoints `a, a + h, ..., b` with roughly `width` spacing.
pub fn uniform_breaks<T: Real>(a: T, b: T, width: T) -> Vec<T> {
    let n = ((b - a) / width).ceil().to_usize().unwrap_or(1).max(1);
    let h = (b - a) / T::from_usize(n).unwrap();
    (0..=n).map(|i| a + h * T::from_usize(i).unwrap()).collect()
}

/// Breakpoints on `[0, b]` graded geometrically towards zero: `b r^k`,
/// `k = levels..0`, preceded by `0`.
pub fn geometric_breaks<T: Real>(b: T, ratio: T, levels: usize) -> Vec<T> {
    let mut out = Vec::with_capacity(levels + 2);
    out.push(T::zero());
    for k in (0..=levels).rev() {
        out.push(b * ratio.powi(k as i32));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn weights_sum_to_two() {
        for n in [1, 2, 5, 8, 16, 33] {
            let g = GaussLegendre::<f64>::new(n);
            let s: f64 = g.weights.iter().sum();
            assert_relative_eq!(s, 2.0, epsilon = 1e-13);
        }
    }

    #[test]
    fn exact_for_polynomials() {
        let g = GaussLegendre::<f64>::new(6);
        // degree 11 is the highest integrated exactly
        let v = g.integrate(|x| x.powi(10) + 3.0 * x.powi(11), 0.0, 1.0);
        assert_relative_eq!(v, 1.0 / 11.0 + 0.25, epsilon = 1e-14);
    }

    #[test]
    fn composite_matches_closed_form() {
        let g = GaussLegendre::<f64>::new(8);
        let b = uniform_breaks(0.0, std::f64::consts::PI, 0.3);
        assert_relative_eq!(g.composite(f64::sin, &b), 2.0, epsilon = 1e-13);
        let gb = geometric_breaks(1.0, 0.5, 30);
        assert_relative_eq!(g.composite(|x: f64| x.sqrt(), &gb), 2.0 / 3.0, epsilon = 1e-12);
    }

    #[test]
    fn single_precision_rule() {
        let g = GaussLegendre::<f32>::new(8);
        let v = g.integrate(|x| x * x, -1.0, 2.0);
        assert!((v - 3.0).abs() < 1e-5);
    }
}
