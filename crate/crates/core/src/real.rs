//! Real scalar abstraction shared by every continuum evaluator.
//!
//! Kernels (quadrature, hypergeometric summation, Gamma prefactors) are
//! written once against [`Real`] and run on `f32`, `f64` or [`BigFloat`].
//! Precision is never ambient: a value carries its own context, and constants
//! are created *in* a context taken from an existing value or passed in.

use std::fmt;
use std::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Rem, RemAssign, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::Sign;
use num_traits::{Num, One, Zero};
use rug::float::Constant;
use rug::ops::Pow;

use crate::Rational;

/// Scalar field with the transcendental functions the continuum code needs.
pub trait Real:
    Num
    + num_traits::NumAssign
    + Neg<Output = Self>
    + PartialOrd
    + Clone
    + fmt::Debug
    + fmt::Display
    + Send
    + Sync
    + 'static
{
    /// Working-precision context (unit for hardware floats).
    type Context: Copy + fmt::Debug + Send + Sync + PartialEq;

    fn context(&self) -> Self::Context;
    fn from_f64_in(v: f64, ctx: Self::Context) -> Self;
    fn from_i64_in(v: i64, ctx: Self::Context) -> Self;
    fn from_rational_in(q: &Rational, ctx: Self::Context) -> Self;
    fn pi_in(ctx: Self::Context) -> Self;
    /// Approximate number of significant decimal digits carried in `ctx`.
    fn digits_in(ctx: Self::Context) -> u32;
    /// Context carrying at least `digits` decimal digits (identity for
    /// hardware floats, which cannot widen).
    fn context_with_digits(ctx: Self::Context, digits: u32) -> Self::Context;
    /// Re-round into another context.
    fn to_context(&self, ctx: Self::Context) -> Self;

    fn to_f64(&self) -> f64;
    /// `log10 |self|`, valid far outside the f64 exponent range; `-inf` at zero.
    fn log10_abs(&self) -> f64;
    fn is_finite(&self) -> bool;

    fn abs(&self) -> Self;
    fn exp(&self) -> Self;
    fn ln(&self) -> Self;
    fn sin(&self) -> Self;
    fn cos(&self) -> Self;
    fn sqrt(&self) -> Self;
    fn powf(&self, e: &Self) -> Self;
    fn powi(&self, e: i32) -> Self;
    fn gamma(&self) -> Self;

    fn sin_cos(&self) -> (Self, Self) {
        (self.sin(), self.cos())
    }

    /// Constant in the same context as `self`.
    fn lift(&self, v: f64) -> Self {
        Self::from_f64_in(v, self.context())
    }

    fn lift_int(&self, v: i64) -> Self {
        Self::from_i64_in(v, self.context())
    }

    fn lift_rational(&self, q: &Rational) -> Self {
        Self::from_rational_in(q, self.context())
    }

    /// `log10` of the unit roundoff.
    fn epsilon_log10(ctx: Self::Context) -> f64 {
        -f64::from(Self::digits_in(ctx))
    }
}

macro_rules! impl_real_for_hardware_float {
    ($t:ty, $gamma:path, $digits:expr) => {
        impl Real for $t {
            type Context = ();

            fn context(&self) {}
            fn from_f64_in(v: f64, _: ()) -> Self {
                v as $t
            }
            fn from_i64_in(v: i64, _: ()) -> Self {
                v as $t
            }
            fn from_rational_in(q: &Rational, _: ()) -> Self {
                crate::rational_to_f64(q) as $t
            }
            fn pi_in(_: ()) -> Self {
                std::f64::consts::PI as $t
            }
            fn context_with_digits(_: (), _: u32) {}
            fn to_context(&self, _: ()) -> Self {
                *self
            }
            fn digits_in(_: ()) -> u32 {
                $digits
            }
            fn epsilon_log10(_: ()) -> f64 {
                f64::from(<$t>::EPSILON).log10()
            }
            fn to_f64(&self) -> f64 {
                *self as f64
            }
            fn log10_abs(&self) -> f64 {
                (*self as f64).abs().log10()
            }
            fn is_finite(&self) -> bool {
                <$t>::is_finite(*self)
            }
            fn abs(&self) -> Self {
                <$t>::abs(*self)
            }
            fn exp(&self) -> Self {
                <$t>::exp(*self)
            }
            fn ln(&self) -> Self {
                <$t>::ln(*self)
            }
            fn sin(&self) -> Self {
                <$t>::sin(*self)
            }
            fn cos(&self) -> Self {
                <$t>::cos(*self)
            }
            fn sin_cos(&self) -> (Self, Self) {
                <$t>::sin_cos(*self)
            }
            fn sqrt(&self) -> Self {
                <$t>::sqrt(*self)
            }
            fn powf(&self, e: &Self) -> Self {
                <$t>::powf(*self, *e)
            }
            fn powi(&self, e: i32) -> Self {
                <$t>::powi(*self, e)
            }
            fn gamma(&self) -> Self {
                $gamma(*self)
            }
        }
    };
}

impl_real_for_hardware_float!(f64, libm::tgamma, 15);
impl_real_for_hardware_float!(f32, libm::tgammaf, 6);

/// Binary precision of a [`BigFloat`] context.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Precision {
    bits: u32,
}

const BITS_PER_DIGIT: f64 = std::f64::consts::LOG2_10;

impl Precision {
    pub fn from_bits(bits: u32) -> Self {
        Precision { bits: bits.max(16) }
    }

    pub fn from_digits(digits: u32) -> Self {
        Self::from_bits((f64::from(digits) * BITS_PER_DIGIT).ceil() as u32 + 8)
    }

    pub fn bits(self) -> u32 {
        self.bits
    }

    pub fn digits(self) -> u32 {
        ((f64::from(self.bits) - 8.0) / BITS_PER_DIGIT).floor().max(1.0) as u32
    }
}

/// Only used for exact constants (`0`, `1`, `from_str_radix`); arithmetic promotes
/// to the wider operand, so these never narrow a computation.
const EXACT_CONSTANT_BITS: u32 = 64;

/// Arbitrary-precision real backed by MPFR.
///
/// Binary operations produce a result at the larger of the two operand
/// precisions, so exact low-precision constants (`0`, `1`, small integers)
/// mix freely with high-precision values.
#[derive(Clone, PartialEq, PartialOrd)]
pub struct BigFloat(rug::Float);

impl BigFloat {
    pub fn with_precision(v: f64, prec: Precision) -> Self {
        BigFloat(rug::Float::with_val(prec.bits, v))
    }

    pub fn precision(&self) -> Precision {
        Precision::from_bits(self.0.prec())
    }

    /// Same value re-rounded to `prec`.
    pub fn with_new_precision(&self, prec: Precision) -> Self {
        BigFloat(rug::Float::with_val(prec.bits, &self.0))
    }

    pub fn as_rug(&self) -> &rug::Float {
        &self.0
    }

    /// Decimal rendering with `digits` significant digits.
    pub fn to_decimal(&self, digits: usize) -> String {
        self.0.to_string_radix(10, Some(digits.max(1)))
    }

    fn prec_of(a: &Self, b: &Self) -> u32 {
        a.0.prec().max(b.0.prec())
    }
}

fn integer_to_rug(i: &num_bigint::BigInt) -> rug::Integer {
    let (sign, digits) = i.to_u32_digits();
    let mut out = rug::Integer::from_digits(&digits, rug::integer::Order::Lsf);
    if sign == Sign::Minus {
        out = -out;
    }
    out
}

pub(crate) fn rational_to_rug(q: &Rational) -> rug::Rational {
    rug::Rational::from((integer_to_rug(q.numer()), integer_to_rug(q.denom())))
}

impl fmt::Debug for BigFloat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BigFloat({}, {} bits)", self.to_decimal(20), self.0.prec())
    }
}

impl fmt::Display for BigFloat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match f.precision() {
            Some(d) => f.write_str(&self.to_decimal(d)),
            None => f.write_str(&self.to_decimal(self.precision().digits() as usize)),
        }
    }
}

macro_rules! bigfloat_binop {
    ($tr:ident, $method:ident, $atr:ident, $amethod:ident, $op:tt) => {
        impl $tr for BigFloat {
            type Output = BigFloat;
            fn $method(self, rhs: BigFloat) -> BigFloat {
                let prec = BigFloat::prec_of(&self, &rhs);
                BigFloat(rug::Float::with_val(prec, &self.0 $op &rhs.0))
            }
        }
        impl<'a> $tr<&'a BigFloat> for &'a BigFloat {
            type Output = BigFloat;
            fn $method(self, rhs: &'a BigFloat) -> BigFloat {
                let prec = BigFloat::prec_of(self, rhs);
                BigFloat(rug::Float::with_val(prec, &self.0 $op &rhs.0))
            }
        }
        impl $atr for BigFloat {
            fn $amethod(&mut self, rhs: BigFloat) {
                let prec = BigFloat::prec_of(self, &rhs);
                self.0 = rug::Float::with_val(prec, &self.0 $op &rhs.0);
            }
        }
    };
}

bigfloat_binop!(Add, add, AddAssign, add_assign, +);
bigfloat_binop!(Sub, sub, SubAssign, sub_assign, -);
bigfloat_binop!(Mul, mul, MulAssign, mul_assign, *);
bigfloat_binop!(Div, div, DivAssign, div_assign, /);

impl Rem for BigFloat {
    type Output = BigFloat;
    fn rem(self, rhs: BigFloat) -> BigFloat {
        let q = (&self / &rhs).0.trunc();
        let prec = BigFloat::prec_of(&self, &rhs);
        BigFloat(rug::Float::with_val(prec, &self.0 - &(q * &rhs.0)))
    }
}

impl RemAssign for BigFloat {
    fn rem_assign(&mut self, rhs: BigFloat) {
        *self = self.clone() % rhs;
    }
}

impl Neg for BigFloat {
    type Output = BigFloat;
    fn neg(self) -> BigFloat {
        BigFloat(-self.0)
    }
}

impl Zero for BigFloat {
    fn zero() -> Self {
        BigFloat(rug::Float::new(EXACT_CONSTANT_BITS))
    }
    fn is_zero(&self) -> bool {
        self.0.is_zero()
    }
}

impl One for BigFloat {
    fn one() -> Self {
        BigFloat(rug::Float::with_val(EXACT_CONSTANT_BITS, 1))
    }
}

impl Num for BigFloat {
    type FromStrRadixErr = rug::float::ParseFloatError;

    fn from_str_radix(s: &str, radix: u32) -> Result<Self, Self::FromStrRadixErr> {
        let digits = s.chars().filter(char::is_ascii_alphanumeric).count() as u32;
        let bits = (f64::from(digits) * f64::from(radix).log2()).ceil() as u32 + 16;
        let parsed = rug::Float::parse_radix(s, radix as i32)?;
        Ok(BigFloat(rug::Float::with_val(bits.max(EXACT_CONSTANT_BITS), parsed)))
    }
}

impl FromStr for BigFloat {
    type Err = rug::float::ParseFloatError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        <BigFloat as Num>::from_str_radix(s, 10)
    }
}

impl Real for BigFloat {
    type Context = Precision;

    fn context(&self) -> Precision {
        self.precision()
    }
    fn from_f64_in(v: f64, ctx: Precision) -> Self {
        BigFloat(rug::Float::with_val(ctx.bits, v))
    }
    fn from_i64_in(v: i64, ctx: Precision) -> Self {
        BigFloat(rug::Float::with_val(ctx.bits, v))
    }
    fn from_rational_in(q: &Rational, ctx: Precision) -> Self {
        BigFloat(rug::Float::with_val(ctx.bits, &rational_to_rug(q)))
    }
    fn pi_in(ctx: Precision) -> Self {
        BigFloat(rug::Float::with_val(ctx.bits, Constant::Pi))
    }
    fn context_with_digits(ctx: Precision, digits: u32) -> Precision {
        ctx.max(Precision::from_digits(digits))
    }
    fn to_context(&self, ctx: Precision) -> Self {
        self.with_new_precision(ctx)
    }
    fn digits_in(ctx: Precision) -> u32 {
        ctx.digits()
    }
    fn epsilon_log10(ctx: Precision) -> f64 {
        -f64::from(ctx.bits()) * std::f64::consts::LOG10_2
    }
    fn to_f64(&self) -> f64 {
        self.0.to_f64()
    }
    fn log10_abs(&self) -> f64 {
        if self.0.is_zero() {
            return f64::NEG_INFINITY;
        }
        rug::Float::with_val(64, self.0.abs_ref()).log10().to_f64()
    }
    fn is_finite(&self) -> bool {
        self.0.is_finite()
    }
    fn abs(&self) -> Self {
        BigFloat(self.0.clone().abs())
    }
    fn exp(&self) -> Self {
        BigFloat(self.0.clone().exp())
    }
    fn ln(&self) -> Self {
        BigFloat(self.0.clone().ln())
    }
    fn sin(&self) -> Self {
        BigFloat(self.0.clone().sin())
    }
    fn cos(&self) -> Self {
        BigFloat(self.0.clone().cos())
    }
    fn sin_cos(&self) -> (Self, Self) {
        let (s, c) = self.0.clone().sin_cos(rug::Float::new(self.0.prec()));
        (BigFloat(s), BigFloat(c))
    }
    fn sqrt(&self) -> Self {
        BigFloat(self.0.clone().sqrt())
    }
    fn powf(&self, e: &Self) -> Self {
        let prec = BigFloat::prec_of(self, e);
        BigFloat(rug::Float::with_val(prec, &self.0).pow(&e.0))
    }
    fn powi(&self, e: i32) -> Self {
        BigFloat(self.0.clone().pow(e))
    }
    fn gamma(&self) -> Self {
        BigFloat(self.0.clone().gamma())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mixed_precision_promotes() {
        let hi = BigFloat::with_precision(1.0, Precision::from_digits(100));
        let three = BigFloat::from_i64_in(3, Precision::from_bits(64));
        let third = hi / three;
        assert!(third.precision().digits() >= 100);
        let s = third.to_decimal(60);
        assert!(s.starts_with("3.33333333333333333333333333333333333333333333333333333333"), "{s}");
    }

    #[test]
    fn rational_lift_is_exact_to_precision() {
        let q = Rational::new(1.into(), 7.into());
        let v = BigFloat::from_rational_in(&q, Precision::from_digits(50));
        let back = v * BigFloat::from_i64_in(7, Precision::from_digits(50));
        assert!((back - BigFloat::one()).log10_abs() < -49.0);
    }

    #[test]
    fn gamma_half_is_sqrt_pi() {
        let ctx = Precision::from_digits(40);
        let g = BigFloat::from_f64_in(0.5, ctx).gamma();
        let sp = BigFloat::pi_in(ctx).sqrt();
        assert!((g - sp).log10_abs() < -39.0);
        assert!((Real::gamma(&0.5f64) - std::f64::consts::PI.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn log10_beyond_f64_range() {
        let ctx = Precision::from_digits(30);
        let big = BigFloat::from_f64_in(10.0, ctx).powi(1000);
        assert!((big.log10_abs() - 1000.0).abs() < 1e-9);
        assert_eq!(BigFloat::zero().log10_abs(), f64::NEG_INFINITY);
    }

    #[test]
    fn remainder_matches_fmod() {
        let ctx = Precision::from_digits(30);
        let r = BigFloat::from_f64_in(7.5, ctx) % BigFloat::from_f64_in(2.0, ctx);
        assert_eq!(r.to_f64(), 1.5);
    }
}
