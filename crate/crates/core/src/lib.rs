//! Exact and numerical laboratory for k-th order multicritical random trees.
//!
//! The discrete side ([`series`], [`models`], [`discrete`], [`shapes`]) is exact
//! over [`Rational`]. The continuum side ([`continuum`]) is generic over
//! [`Real`] and is normally run on [`BigFloat`], because the oscillatory
//! integrals and hypergeometric sums cancel catastrophically at moderate `x`.

pub mod continuum;
pub mod discrete;
pub mod error;
pub mod io;
pub mod models;
pub mod real;
pub mod series;
pub mod shapes;

pub use error::{Error, Result};
pub use real::{BigFloat, Precision, Real};
pub use series::PowerSeries;

/// Exact rational scalar used by all discrete computations.
pub type Rational = num_rational::BigRational;
/// Arbitrary-precision integer underlying [`Rational`].
pub type Integer = num_bigint::BigInt;
/// Truncated power series with exact rational coefficients.
pub type RationalSeries = PowerSeries<Rational>;
/// Hardware scalar used where double precision is demonstrably enough.
pub type Float = f64;

/// Correctly rounded conversion; unlike `ToPrimitive` this never returns
/// `None` for huge numerators and denominators of comparable size.
pub fn rational_to_f64(q: &Rational) -> f64 {
    real::rational_to_rug(q).to_f64()
}

/// Small helper for building rationals in code and tests.
pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(num.into(), den.into())
}
