//! Regularity indices and the admissibility inequalities between them.

use crate::error::{Error, Result};
use crate::scalar::{to_f64, IndexScalar};

/// `(α, β, p, q, d1, d2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegularityIndices<S> {
    pub alpha: S,
    pub beta: S,
    pub p: S,
    pub q: S,
    pub d1: usize,
    pub d2: usize,
}

/// One strict inequality `lhs < rhs` (or `lhs > rhs`), with
/// `margin = |rhs - lhs|` signed so that it is positive iff it holds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Check<S> {
    pub holds: bool,
    pub lhs: S,
    pub rhs: S,
    pub margin: S,
}

impl<S: IndexScalar> Check<S> {
    fn less(lhs: S, rhs: S) -> Self {
        Check { holds: lhs < rhs, lhs, rhs, margin: rhs - lhs }
    }

    fn greater(lhs: S, rhs: S) -> Self {
        Check { holds: lhs > rhs, lhs, rhs, margin: lhs - rhs }
    }

    pub fn margin_f64(&self) -> f64 {
        to_f64(self.margin)
    }
}

/// All four inequalities for one index tuple.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionReport<S> {
    /// `d1/(αp) + d2/(2p) + 1/q`.
    pub sum: S,
    /// `sum < 1/2`.
    pub main: Check<S>,
    /// `β > 1 - α/2`.
    pub beta: Check<S>,
    /// `sum < 1 - 1/α`.
    pub gradx: Check<S>,
    /// `sum < 1`.
    pub krylov: Check<S>,
}

impl<S: IndexScalar> ConditionReport<S> {
    pub fn rows(&self) -> [(&'static str, &'static str, Check<S>); 4] {
        [
            ("cond_main", "d1/(alpha p) + d2/(2p) + 1/q < 1/2", self.main),
            ("cond_beta", "beta > 1 - alpha/2", self.beta),
            ("cond_gradx", "d1/(alpha p) + d2/(2p) + 1/q < 1 - 1/alpha", self.gradx),
            ("cond_krylov", "d1/(alpha p) + d2/(2p) + 1/q < 1", self.krylov),
        ]
    }
}

/// Exponent bookkeeping for the Girsanov weight: `|B|²` lies in the mixed
/// space with halved exponents.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GirsanovIntegrability<S> {
    /// `d2/(2p') + d1/(αp') + 1/q'` with `p' = p/2`, `q' = q/2`.
    pub halved_sum: S,
    /// `halved_sum < 1`: the Krylov-type bound applies to `|B|²`.
    pub below_one: bool,
    /// `halved_sum < 2 - 2/α`.
    pub below_two_minus_two_over_alpha: bool,
}

/// The chain `2(α/2 + β) > 2(α + β - 1) > α` used for small-jump regularity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JumpRegularity<S> {
    pub exponent: S,
    pub first: bool,
    pub second: bool,
}

fn two<S: IndexScalar>() -> S {
    S::one() + S::one()
}

fn of<S: IndexScalar>(n: usize) -> S {
    S::from_usize(n).expect("dimension representable")
}

impl<S: IndexScalar> RegularityIndices<S> {
    pub fn new(alpha: S, beta: S, p: S, q: S, d1: usize, d2: usize) -> Result<Self> {
        let idx = RegularityIndices { alpha, beta, p, q, d1, d2 };
        idx.validate()?;
        Ok(idx)
    }

    /// Range checks on every field; all violations are reported together.
    pub fn validate(&self) -> Result<()> {
        let errs = self.range_errors();
        if errs.is_empty() {
            Ok(())
        } else if errs.len() == 1 && errs[0].starts_with("alpha") {
            Err(Error::AlphaOutOfRange(to_f64(self.alpha)))
        } else {
            Err(Error::OutOfRange { name: "indices", detail: errs.join("; ") })
        }
    }

    pub fn range_errors(&self) -> Vec<String> {
        let one = S::one();
        let zero = S::zero();
        let mut errs = Vec::new();
        if !(self.alpha > one && self.alpha < two()) {
            errs.push(format!("alpha must lie in (1,2), got {}", to_f64(self.alpha)));
        }
        if !(self.beta > zero && self.beta <= one) {
            errs.push(format!("beta must lie in (0,1], got {}", to_f64(self.beta)));
        }
        if !(self.p > one) {
            errs.push(format!("p must exceed 1, got {}", to_f64(self.p)));
        }
        if !(self.q > one) {
            errs.push(format!("q must exceed 1, got {}", to_f64(self.q)));
        }
        if self.d1 == 0 || self.d2 == 0 {
            errs.push("d1 and d2 must be positive".to_string());
        }
        errs
    }

    /// `d1/(αp) + d2/(2p)`.
    pub fn space_sum(&self) -> S {
        of::<S>(self.d1) / (self.alpha * self.p) + of::<S>(self.d2) / (two::<S>() * self.p)
    }

    /// `d1/(αp) + d2/(2p) + 1/q`.
    pub fn sum(&self) -> S {
        self.space_sum() + S::one() / self.q
    }

    pub fn check(&self) -> ConditionReport<S> {
        let one = S::one();
        let sum = self.sum();
        ConditionReport {
            sum,
            main: Check::less(sum, one / two()),
            beta: Check::greater(self.beta, one - self.alpha / two()),
            gradx: Check::less(sum, one - one / self.alpha),
            krylov: Check::less(sum, one),
        }
    }

    /// Admissibility for the kinetic equation: `d1/(αp) + d2/(2p) < 1 - 1/α`
    /// together with `β > 1 - α/2`.
    pub fn kinetic(&self) -> (Check<S>, Check<S>) {
        let one = S::one();
        (
            Check::less(self.space_sum(), one - one / self.alpha),
            Check::greater(self.beta, one - self.alpha / two()),
        )
    }

    pub fn girsanov_integrability(&self) -> GirsanovIntegrability<S> {
        let halved_sum = two::<S>() * self.sum();
        let one = S::one();
        GirsanovIntegrability {
            halved_sum,
            below_one: halved_sum < one,
            below_two_minus_two_over_alpha: halved_sum < two::<S>() - two::<S>() / self.alpha,
        }
    }

    pub fn jump_regularity(&self) -> JumpRegularity<S> {
        let one = S::one();
        let e = two::<S>() * (self.alpha + self.beta - one);
        JumpRegularity {
            exponent: e,
            first: two::<S>() * (self.alpha / two() + self.beta) > e,
            second: e > self.alpha,
        }
    }

    /// Indices converted to `f64`.
    pub fn to_f64(&self) -> RegularityIndices<f64> {
        RegularityIndices {
            alpha: to_f64(self.alpha),
            beta: to_f64(self.beta),
            p: to_f64(self.p),
            q: to_f64(self.q),
            d1: self.d1,
            d2: self.d2,
        }
    }
}

/// Returns an error naming the first failing inequality among `which`.
pub fn require<S: IndexScalar>(report: &ConditionReport<S>, which: &[&'static str]) -> Result<()> {
    for (name, _, c) in report.rows() {
        if which.contains(&name) && !c.holds {
            return Err(Error::ConditionViolated { name, margin: c.margin_f64() });
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::Rational64;

    #[test]
    fn worked_example() {
        let idx = RegularityIndices::new(1.5f64, 0.3, 20.0, 20.0, 1, 1).unwrap();
        let r = idx.check();
        assert!((r.sum - 0.108_333_333_333).abs() < 1e-9);
        assert!(r.main.holds && r.beta.holds && r.gradx.holds && r.krylov.holds);
        let bad = RegularityIndices::new(1.5f64, 0.3, 2.0, 2.0, 1, 1).unwrap().check();
        assert!((bad.sum - 1.083_333_333_333).abs() < 1e-9);
        assert!(!bad.main.holds && !bad.krylov.holds);
    }

    #[test]
    fn exact_boundary() {
        let r = |n, d| Rational64::new(n, d);
        let idx = RegularityIndices::new(r(3, 2), r(1, 4), r(20, 1), r(20, 1), 1, 1).unwrap();
        let c = idx.check();
        assert!(!c.beta.holds);
        assert_eq!(c.beta.margin, r(0, 1));
        assert_eq!(c.sum, r(13, 120));
    }

    #[test]
    fn validation_collects_everything() {
        let e = RegularityIndices::new(2.0, 0.0, 1.0, 0.5, 1, 1).unwrap_err().to_string();
        assert!(e.contains("alpha") && e.contains("beta") && e.contains("p must") && e.contains("q must"));
        let e = RegularityIndices::new(2.0, 0.5, 2.0, 2.0, 1, 1).unwrap_err();
        assert_eq!(e, Error::AlphaOutOfRange(2.0));
    }

    #[test]
    fn jump_chain_matches_beta_condition() {
        let idx = RegularityIndices::new(1.5, 0.3, 20.0, 20.0, 1, 1).unwrap();
        let j = idx.jump_regularity();
        assert!(j.first && j.second);
        let low = RegularityIndices::new(1.5, 0.2, 20.0, 20.0, 1, 1).unwrap();
        assert!(!low.jump_regularity().second);
    }
}
