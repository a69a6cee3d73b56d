//! The constructive steps of the noncontextuality argument.
//!
//! Vector-level constructions run in floating point with the crate
//! tolerances. The scalar functional-equation layer (additivity scans,
//! sandwich brackets, fine-grained branch weights) is exact over
//! [`Rational`].

mod collapse;
mod finegrain;
mod sandwich;
mod scalar;

pub use collapse::{additivity_witness, collapse_to_two, np_violation_search, ViolationWitness};
pub use finegrain::{fine_grain, fine_grain_invariance_residual, rational_born, FineGrainPlan, MAX_FINE_GRAIN};
pub use sandwich::{continuity_sandwich, continuity_sandwich_f64, SandwichResult};
pub use scalar::{rational_additivity_scan, AdditivityScan, Piece, ScalarForm, ScalarRule};

/// Exact arbitrary-precision fraction, always in lowest terms with a
/// positive denominator.
pub type Rational = num_rational::BigRational;

use num_bigint::BigInt;
use num_traits::ToPrimitive;

/// `num/den` as a [`Rational`].
pub fn ratio(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// Exact value of an `f64`, or `None` for non-finite input.
pub fn rational_from_f64(x: f64) -> Option<Rational> {
    Rational::from_float(x)
}

/// Nearest `f64` to a rational.
pub fn rational_to_f64(x: &Rational) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// `num/den` rendering, with integers written as `n/1`.
pub fn render_rational(x: &Rational) -> String {
    format!("{}/{}", x.numer(), x.denom())
}
