//! Finite-dimensional toolkit for testing whether a probability rule over
//! quantum measurement contexts is noncontextual, and whether
//! noncontextuality forces the Born rule.
//!
//! The crate is layered:
//!
//! * [`state`]: pure states, orthonormal bases, tensor products, Schmidt form.
//! * [`rules`]: candidate probability rules and their constraint residuals.
//! * [`proof`]: the constructive steps (basis collapse, additivity, the
//!   rational continuity sandwich, fine-graining) with an exact rational layer.
//! * [`composite`]: system-plus-pointer states, joint distributions and the
//!   no-signalling marginal test.
//! * [`harness`]: seeded experiment orchestration, state files and reports.

pub mod composite;
pub mod error;
pub mod harness;
pub mod proof;
pub mod rules;
pub mod state;

pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use proof::Rational;
pub use rules::{ContextPair, DensityFit, FrameRule, RuleKind};
pub use state::{
    amplitudes, haar_basis, inner_product, orthonormal_complete, schmidt_decompose, tensor_product, ComplexScalar,
    OrthonormalBasis, ProductSpace, SchmidtForm, StateVector, Tolerances,
};
