//! Invariance analysis for linear parabolic systems.
//!
//! Given a system `du/dt = sum A_jk d2u/dx_j dx_k + sum A_j du/dx_j` that is
//! uniformly parabolic in the sense of Petrovskii, a closed convex body is
//! invariant exactly when every unit outward normal of the body is an
//! eigenvector of all transposed coefficient matrices. This crate implements
//! that algebraic criterion, structural shortcuts for common body families
//! (polyhedral angles, cylinders, spherical cylinders, cones), a parabolicity
//! margin estimator, and periodic-box Cauchy solvers that corroborate or
//! falsify verdicts numerically.

pub mod bodies;
pub mod criterion;
pub mod error;
pub mod export;
pub mod expr;
pub mod linalg;
pub mod parabolicity;
pub mod simulate;
pub mod system;

pub use bodies::{ConvexBody, NormalSet};
pub use criterion::{SampleGrid, Verdict, VerdictStatus, Witness};
pub use error::Error;
pub use linalg::AlignmentResult;
pub use parabolicity::ParabolicityReport;
pub use simulate::{Scheme, SimConfig, SolutionField, ViolationTrace};
pub use system::{Coefficients, MatrixId};

/// Default relative tolerance for alignment and structural tests.
pub const DEFAULT_TOL: f64 = 1e-9;
