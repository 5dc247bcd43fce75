//! Function-space toolkit: admissibility conditions, fractional operators
//! and norms, the maximal function and multiplier checks.

pub mod conditions;
pub mod maximal;
pub mod multipliers;
pub mod operators;

pub use conditions::{ConditionReport, RegularityIndices};
pub use maximal::{check_pointwise_lipschitz, maximal_function};
pub use multipliers::{check_multiplier_bounds, Multiplier};
pub use operators::{bessel_norm, frac_laplacian, mixed_norm, Block};
