//! Numerical laboratory for the Dirichlet problem of the fractional
//! p-Laplacian
//!
//!   (-Δ_p)^s u = f in Ω,   u = g on ℝⁿ \ Ω,
//!
//! with ℒ u = -(-Δ_p)^s u = 2 PV ∫ |u(y)-u(x)|^{p-2}(u(y)-u(x)) |y-x|^{-n-sp} dy.
//!
//! The crate evaluates ℒ pointwise by principal-value quadrature, solves the
//! variational Dirichlet and obstacle problems by convex minimization, runs
//! the Perron/Poisson-modification machinery to measure resolutivity, and
//! numerically certifies the explicit barrier formulas (power profiles, the
//! truncated minorant, half-space, cone, radial ring and one-dimensional
//! shell, indicator and smooth-cutoff supersolutions).
//!
//! Everything is defined on all of ℝⁿ: grid functions carry node values on a
//! uniform box grid plus a closed-form exterior tail model, and every
//! operator integral splits into near field, box quadrature and a
//! semi-analytic tail.

pub mod barriers;
pub mod error;
pub mod grid;
pub mod gridfn;
pub mod operator;
pub mod params;
pub mod perron;
pub mod phi;
pub mod probes;
pub mod profile;
pub mod quad;
pub mod report;
pub mod solver;
pub mod tail;

pub use error::{Error, Result};
pub use grid::{DomainMask, DomainShape, Grid};
pub use gridfn::{GridFunction, GridFunctionMeta};
pub use params::{FracParams, KernelRegime, MassRegime};
pub use profile::Profile;
pub use quad::{QuadPreset, QuadratureSpec};
pub use report::{CertificateReport, ConstantEntry, ConstantTable, Sample, Verdict};
pub use tail::TailModel;
