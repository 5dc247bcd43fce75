//! Numerical toolkit for SDEs driven by a rotationally symmetric α-stable
//! process in one block of coordinates and a Brownian motion in the other,
//! with singular drift.
//!
//! The crate covers heat kernels of the mixed generator, a spectral solver
//! for the associated degenerate Kolmogorov equation (drift-free and with
//! Picard iteration), the Zvonkin change of variables built from it, Euler
//! schemes for the original and transformed equations, and Monte-Carlo
//! probes of occupation-time estimates.
//!
//! Numerical code is generic over [`Real`] (`f32`/`f64`); index arithmetic
//! is generic over [`IndexScalar`] so that admissibility boundaries can be
//! decided exactly with [`ExactIndices`].

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod fieldfile;
pub mod grid;
pub mod interp;
pub mod kernels;
pub mod noise;
pub mod pide;
pub mod presets;
pub mod probe;
pub mod quadrature;
pub mod scalar;
pub mod sim;
pub mod spaces;
pub mod spectral;
pub mod zvonkin;

/// Crate version, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub use error::{Error, Result};
pub use grid::{GridSpec, ScalarField, SpaceTimeField, VectorField};
pub use noise::{NoiseStream, PathSample, StableParams};
pub use pide::{DriftSpec, PideSolution};
pub use probe::MCEstimate;
pub use scalar::{IndexScalar, Real};
pub use spaces::conditions::{ConditionReport, RegularityIndices};
pub use zvonkin::ZvonkinMap;

pub type GridSpec64 = GridSpec<f64>;
pub type GridSpec32 = GridSpec<f32>;
pub type ScalarField64 = ScalarField<f64>;
pub type ScalarField32 = ScalarField<f32>;
pub type SpaceTimeField64 = SpaceTimeField<f64>;
pub type SpaceTimeField32 = SpaceTimeField<f32>;
pub type VectorField64 = VectorField<f64>;
pub type StableParams64 = StableParams<f64>;
pub type PathSample64 = PathSample<f64>;
pub type DriftSpec64 = DriftSpec<f64>;
pub type PideSolution64 = PideSolution<f64>;
pub type ZvonkinMap64 = ZvonkinMap<f64>;
pub type MCEstimate64 = MCEstimate<f64>;
pub type RegularityIndices64 = RegularityIndices<f64>;
/// Indices with rational entries; boundary cases of the strict
/// inequalities are decided without rounding.
pub type ExactIndices = RegularityIndices<num_rational::Rational64>;
