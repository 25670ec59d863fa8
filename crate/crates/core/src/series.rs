//! Truncated formal power series in one variable (λ).
//!
//! A [`PowerSeries`] stores exactly `order + 1` coefficients; nothing above
//! `order` is ever reported. Mixed-order arithmetic truncates to the smaller
//! order. The coefficient type only needs ring operations, except for
//! [`solve_fixed_point`] which divides by `1 - g_1`.

use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};

use num_traits::{One, Zero};

use crate::error::{Error, Result};

/// Ring operations needed on series coefficients.
pub trait Coefficient: Clone + PartialEq + fmt::Debug + Zero + One + Neg<Output = Self> {
    fn mul_ref(&self, rhs: &Self) -> Self;
    fn add_ref(&mut self, rhs: &Self);
    fn sub_ref(&mut self, rhs: &Self);
}

impl<T> Coefficient for T
where
    T: Clone + PartialEq + fmt::Debug + Zero + One + Neg<Output = T>,
    T: for<'a> AddAssign<&'a T> + for<'a> SubAssign<&'a T>,
    for<'a> &'a T: Mul<&'a T, Output = T>,
{
    fn mul_ref(&self, rhs: &Self) -> Self {
        self * rhs
    }
    fn add_ref(&mut self, rhs: &Self) {
        *self += rhs;
    }
    fn sub_ref(&mut self, rhs: &Self) {
        *self -= rhs;
    }
}

#[derive(Clone, PartialEq, Debug)]
pub struct PowerSeries<C> {
    coeffs: Vec<C>,
}

impl<C: Coefficient> PowerSeries<C> {
    /// Pads with zeros or drops coefficients so that exactly `order + 1` remain.
    pub fn new(mut coeffs: Vec<C>, order: usize) -> Self {
        coeffs.resize(order + 1, C::zero());
        PowerSeries { coeffs }
    }

    pub fn zero(order: usize) -> Self {
        Self::new(Vec::new(), order)
    }

    pub fn one(order: usize) -> Self {
        Self::monomial(C::one(), 0, order)
    }

    /// The series variable λ itself.
    pub fn variable(order: usize) -> Self {
        Self::monomial(C::one(), 1, order)
    }

    pub fn monomial(c: C, n: usize, order: usize) -> Self {
        let mut s = Self::zero(order);
        if n <= order {
            s.coeffs[n] = c;
        }
        s
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeff(&self, n: usize) -> Result<&C> {
        self.coeffs
            .get(n)
            .ok_or(Error::CoefficientOutOfRange { index: n, order: self.order() })
    }

    pub fn coeffs(&self) -> &[C] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<C> {
        self.coeffs
    }

    /// Index of the first non-zero coefficient.
    pub fn valuation(&self) -> Option<usize> {
        self.coeffs.iter().position(|c| !c.is_zero())
    }

    pub fn is_zero(&self) -> bool {
        self.valuation().is_none()
    }

    pub fn truncate(&self, order: usize) -> Self {
        Self::new(self.coeffs[..=order.min(self.order())].to_vec(), order.min(self.order()))
    }

    pub fn scale(&self, c: &C) -> Self {
        PowerSeries { coeffs: self.coeffs.iter().map(|a| a.mul_ref(c)).collect() }
    }

    /// Cauchy product truncated to the smaller order. Zero coefficients are
    /// skipped, which makes products of high-valuation series cheap.
    pub fn mul_series(&self, other: &Self) -> Self {
        let order = self.order().min(other.order());
        let mut out = vec![C::zero(); order + 1];
        for (i, a) in self.coeffs.iter().enumerate().take(order + 1) {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate().take(order + 1 - i) {
                if b.is_zero() {
                    continue;
                }
                out[i + j].add_ref(&a.mul_ref(b));
            }
        }
        PowerSeries { coeffs: out }
    }

    /// Binary exponentiation.
    pub fn pow(&self, mut e: u64) -> Self {
        let mut acc = Self::one(self.order());
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul_series(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul_series(&base);
            }
        }
        acc
    }

    /// `a ↦ Σ f_i a^i`, evaluated by Horner's rule.
    pub fn apply_polynomial(f: &[C], a: &Self) -> Self {
        let order = a.order();
        let mut acc = Self::zero(order);
        for c in f.iter().rev() {
            acc = acc.mul_series(a);
            acc.coeffs[0].add_ref(c);
        }
        acc
    }
}

impl<C: Coefficient> Add for &PowerSeries<C> {
    type Output = PowerSeries<C>;
    fn add(self, rhs: Self) -> PowerSeries<C> {
        let order = self.order().min(rhs.order());
        let mut coeffs = self.coeffs[..=order].to_vec();
        for (c, r) in coeffs.iter_mut().zip(&rhs.coeffs) {
            c.add_ref(r);
        }
        PowerSeries { coeffs }
    }
}

impl<C: Coefficient> Sub for &PowerSeries<C> {
    type Output = PowerSeries<C>;
    fn sub(self, rhs: Self) -> PowerSeries<C> {
        let order = self.order().min(rhs.order());
        let mut coeffs = self.coeffs[..=order].to_vec();
        for (c, r) in coeffs.iter_mut().zip(&rhs.coeffs) {
            c.sub_ref(r);
        }
        PowerSeries { coeffs }
    }
}

impl<C: Coefficient> Mul for &PowerSeries<C> {
    type Output = PowerSeries<C>;
    fn mul(self, rhs: Self) -> PowerSeries<C> {
        self.mul_series(rhs)
    }
}

impl<C: Coefficient> Neg for &PowerSeries<C> {
    type Output = PowerSeries<C>;
    fn neg(self) -> PowerSeries<C> {
        PowerSeries { coeffs: self.coeffs.iter().cloned().map(Neg::neg).collect() }
    }
}

impl<C: Coefficient + fmt::Display> fmt::Display for PowerSeries<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (n, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if !first {
                f.write_str(" + ")?;
            }
            first = false;
            match n {
                0 => write!(f, "{c}")?,
                1 => write!(f, "({c})λ")?,
                _ => write!(f, "({c})λ^{n}")?,
            }
        }
        if first {
            f.write_str("0")?;
        }
        write!(f, " + O(λ^{})", self.order() + 1)
    }
}

/// Unique series `T` with `T(0) = 0` and `T = λ + f(T)` through `order`.
///
/// `f` is given by its coefficients `f[i] = g_i`. Coefficients are fixed one
/// order at a time while the powers `T^i` (`i ≤ deg f`) are grown alongside,
/// for `O(order² · deg f)` multiplications.
pub fn solve_fixed_point<C>(f: &[C], order: usize) -> Result<PowerSeries<C>>
where
    C: Coefficient + Div<Output = C>,
{
    if let Some(c0) = f.first() {
        if !c0.is_zero() {
            return Err(Error::NonzeroConstantTerm(format!("{c0:?}")));
        }
    }
    let g1 = f.get(1).cloned().unwrap_or_else(C::zero);
    let mut pivot = C::one();
    pivot.sub_ref(&g1);
    if pivot.is_zero() {
        return Err(Error::DegenerateLinearTerm);
    }
    let deg = f.len().saturating_sub(1);
    // powers[i] holds T^(i+1)
    let mut powers: Vec<Vec<C>> = vec![vec![C::zero(); order + 1]; deg.max(1)];
    for n in 1..=order {
        let mut rhs = if n == 1 { C::one() } else { C::zero() };
        for i in 2..=deg {
            let mut acc = C::zero();
            // T^i has valuation i, so only j in [1, n-i+1] contributes
            for j in 1..=n.saturating_sub(i - 1) {
                let (t_j, prev) = (&powers[0][j], &powers[i - 2][n - j]);
                if t_j.is_zero() || prev.is_zero() {
                    continue;
                }
                acc.add_ref(&t_j.mul_ref(prev));
            }
            if !f[i].is_zero() {
                rhs.add_ref(&f[i].mul_ref(&acc));
            }
            powers[i - 1][n] = acc;
        }
        powers[0][n] = rhs / pivot.clone();
    }
    Ok(PowerSeries { coeffs: powers.swap_remove(0) })
}
