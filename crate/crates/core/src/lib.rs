//! Generalized symmetric ADMM for grouped multi-block separable convex
//! programs
//!
//! ```text
//! min Σᵢ fᵢ(xᵢ) + Σⱼ gⱼ(yⱼ)   s.t.  Σᵢ Aᵢxᵢ + Σⱼ Bⱼyⱼ = c,  xᵢ ∈ 𝒳ᵢ, yⱼ ∈ 𝒴ⱼ
//! ```
//!
//! with exact block oracles, the prediction-correction matrices of the
//! method, and numerical checks of its convergence inequalities.

// `!(x <= tol)` is used on purpose: it fails on NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod diagnostics;
pub mod engine;
pub mod error;
pub mod generators;
pub mod harness;
pub mod linalg;
pub mod model;
pub mod oracles;
pub mod structure;

pub use engine::{IterationRecord, Prediction, Solver, Termination, Trace};
pub use error::{Error, Result};
pub use generators::{GenSpec, InstanceBundle};
pub use linalg::{Matrix, Vector};
pub use model::{
    Block, BlockProblem, FeasibleSet, Iterate, Objective, RegionPolicy, SolverConfig, Subgradients,
    ValidationReport,
};
pub use structure::StructuralMatrices;
