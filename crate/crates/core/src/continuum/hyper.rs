//! Generalized hypergeometric series and the closed form of the profile.
//!
//! `ρ(x) = Σ_{p=1}^{k−1} A_p x^p F_p(z)`, `z = −(k−1)^{k−1} x^k / k`, where
//! `F_p` is a `_{k−1}F_{k−1}` with upper parameters `p/k + i/(k−1)`
//! (`i = 1..k−2`) and `1`, lower parameters `p/k + i/k` (`i = 1..k−1`), and
//! `A_p = sin(πp/k)/sin(π/k) · k^{(k−1)p/k} Γ((k−1)p/k + 1) / (k^{1/k} Γ(1/k + 1) p!)`.
//!
//! The terms of `F_p` peak near `e^{|z|}` while `ρ ~ e^{−|z|}`, so direct
//! summation loses about `0.87 |z|` digits for a relative result (half of it
//! for an absolute one). Precision starts at `target + 20 + ⌈|z|/2⌉` digits and
//! doubles until the a-posteriori error estimate meets the tolerance.

use num_bigint::BigInt;
use num_traits::One;

use super::quad::Estimate;
use super::{check_k, profile_norm, rat_in, sin_pi, tail_coefficient};
use crate::error::{Error, Result};
use crate::real::Real;
use crate::Rational;

const DIGIT_CAP: u32 = 20_000;

/// Requested accuracy of a series evaluation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Tolerance {
    Relative(f64),
    Absolute(f64),
}

impl Tolerance {
    fn value(self) -> f64 {
        match self {
            Tolerance::Relative(t) | Tolerance::Absolute(t) => t,
        }
    }

    /// `log10` of the admissible absolute error for a result of `log10` size
    /// `magnitude`.
    fn allowed_log10(self, magnitude: f64) -> f64 {
        match self {
            Tolerance::Relative(t) => t.log10() + magnitude,
            Tolerance::Absolute(t) => t.log10(),
        }
    }
}

/// Error bookkeeping is in `log10` since values and terms can leave the
/// `f64` range.
struct RawSum<T> {
    value: T,
    max_log10: f64,
    terms: usize,
    tail_log10: f64,
}

fn log10_add(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if lo == f64::NEG_INFINITY {
        return hi;
    }
    hi + (1.0 + 10f64.powf(lo - hi)).log10()
}

impl<T: Real> RawSum<T> {
    fn rounding_log10(&self) -> f64 {
        let eps = T::epsilon_log10(self.value.context());
        (4.0 * (self.terms as f64).sqrt()).log10() + self.max_log10 + eps
    }

    /// Rounding plus truncation, absolute.
    fn error_log10(&self) -> f64 {
        log10_add(self.rounding_log10(), self.tail_log10)
    }
}

/// Next move after a pass that missed its error budget: a lower stopping
/// threshold if truncation dominated, more digits if rounding did.
struct Refine {
    stop: f64,
    digits: u32,
}

#[allow(clippy::too_many_arguments)]
fn refine<C: Copy + PartialEq>(
    allowed: f64,
    rounding: f64,
    tail: f64,
    stop: f64,
    digits: u32,
    widen: impl Fn(u32) -> C,
    current: C,
    cap: u32,
) -> Option<Refine> {
    // all in log10
    let half = allowed - std::f64::consts::LOG10_2;
    let mut next = Refine { stop, digits };
    let mut moved = false;
    if tail > half && allowed.is_finite() {
        let lower = allowed - 3.0;
        if lower < stop {
            next.stop = lower;
            moved = true;
        }
    }
    if rounding > half && digits < cap && widen(digits * 2) != current {
        next.digits = (digits * 2).min(cap);
        moved = true;
    }
    moved.then_some(next)
}

fn is_nonpositive_integer<T: Real>(b: &T) -> bool {
    let f = b.to_f64();
    f <= 0.5 && f.round() == f && *b == b.lift_int(f.round() as i64)
}

/// Sums `Σ Π(a)_m/Π(b)_m z^m/m!` term by term; stops once terms shrink by at
/// least a factor 2 per step and fall below `10^{stop_log10}`.
fn pfq_sum<T: Real>(a: &[T], b: &[T], z: &T, stop_log10: f64) -> Result<RawSum<T>> {
    for (i, bj) in b.iter().enumerate() {
        if is_nonpositive_integer(bj) {
            return Err(Error::HypergeometricPole { index: i + 1, value: bj.to_string() });
        }
    }
    let terminating = a.iter().any(is_nonpositive_integer);
    if a.len() > b.len() + 1 && !terminating {
        return Err(Error::InvalidArgument(format!(
            "{}F{} diverges for z ≠ 0 unless it terminates",
            a.len(),
            b.len()
        )));
    }
    if a.len() == b.len() + 1 && !terminating && z.abs().to_f64() >= 1.0 {
        return Err(Error::InvalidArgument("series outside its disc of convergence".into()));
    }
    let one = z.lift(1.0);
    let mut t = one.clone();
    let mut total = one.clone();
    let mut max_log10 = 0.0f64;
    let mut terms = 1usize;
    let mut m = 0i64;
    loop {
        let mut num = z.clone();
        for ai in a {
            num *= ai.clone() + z.lift_int(m);
        }
        let mut den = z.lift_int(m + 1);
        for bj in b {
            den *= bj.clone() + z.lift_int(m);
        }
        let next = t.clone() * num / den;
        m += 1;
        let (lt, ln) = (t.log10_abs(), next.log10_abs());
        if ln == f64::NEG_INFINITY {
            return Ok(RawSum { value: total, max_log10, terms, tail_log10: f64::NEG_INFINITY });
        }
        total += next.clone();
        terms += 1;
        max_log10 = max_log10.max(ln);
        if ln <= lt - std::f64::consts::LOG10_2 && ln < stop_log10 {
            // later ratios are smaller still, so the tail is below one more term
            return Ok(RawSum { value: total, max_log10, terms, tail_log10: ln });
        }
        if terms > 10_000_000 {
            return Err(Error::PrecisionExhausted { cap: T::digits_in(z.context()), log10_error: ln });
        }
        t = next;
    }
}

/// `pFq(a; b; z)` at the precision of `z`, with an absolute error estimate.
pub fn hypergeometric_pfq<T: Real>(a: &[T], b: &[T], z: &T) -> Result<Estimate<T>> {
    let stop = T::epsilon_log10(z.context()) - 2.0;
    let s = pfq_sum(a, b, z, stop)?;
    let error = 10f64.powf(s.error_log10());
    Ok(Estimate { value: s.value, error })
}

/// `pFq` with exact parameters; precision grows until `tol` is met.
pub fn hypergeometric_pfq_rational<T: Real>(
    a: &[Rational],
    b: &[Rational],
    z: &T,
    tol: Tolerance,
) -> Result<Estimate<T>> {
    let (a, b) = cancel_parameters(a, b);
    let zf = z.abs().to_f64();
    let target = -tol.value().log10();
    let mut digits = (target + 20.0 + (0.5 * zf).ceil()).ceil() as u32;
    let mut stop = -target - 3.0;
    loop {
        let ctx = T::context_with_digits(z.context(), digits);
        let zw = z.to_context(ctx);
        let at: Vec<T> = a.iter().map(|q| T::from_rational_in(q, ctx)).collect();
        let bt: Vec<T> = b.iter().map(|q| T::from_rational_in(q, ctx)).collect();
        let s = pfq_sum(&at, &bt, &zw, stop)?;
        let error = s.error_log10();
        let allowed = tol.allowed_log10(s.value.log10_abs());
        if error <= allowed {
            return Ok(Estimate { value: s.value.to_context(z.context()), error: 10f64.powf(error) });
        }
        let widen = |d| T::context_with_digits(z.context(), d);
        match refine(allowed, s.rounding_log10(), s.tail_log10, stop, digits, widen, ctx, DIGIT_CAP) {
            Some(r) => (stop, digits) = (r.stop, r.digits),
            None => return Err(Error::PrecisionExhausted { cap: T::digits_in(ctx), log10_error: error }),
        }
    }
}

/// Drops upper/lower parameter pairs that coincide.
fn cancel_parameters(a: &[Rational], b: &[Rational]) -> (Vec<Rational>, Vec<Rational>) {
    let mut a = a.to_vec();
    let mut b_out = Vec::new();
    for bj in b {
        if let Some(pos) = a.iter().position(|ai| ai == bj) {
            a.remove(pos);
        } else {
            b_out.push(bj.clone());
        }
    }
    (a, b_out)
}

/// One `p`-component of the closed form.
#[derive(Clone, Debug, PartialEq)]
pub struct HyperTerm {
    pub k: usize,
    pub p: usize,
    /// Upper parameters as printed, `a_{k−1} = 1` included.
    pub a: Vec<Rational>,
    pub b: Vec<Rational>,
}

impl HyperTerm {
    fn new(k: usize, p: usize) -> Self {
        let (kb, pb) = (BigInt::from(k), BigInt::from(p));
        let base = Rational::new(pb, kb.clone());
        let mut a: Vec<Rational> = (1..=k.saturating_sub(2))
            .map(|i| &base + Rational::new(BigInt::from(i), BigInt::from(k - 1)))
            .collect();
        a.push(Rational::one());
        let b = (1..k).map(|i| &base + Rational::new(BigInt::from(i), kb.clone())).collect();
        HyperTerm { k, p, a, b }
    }

    /// Parameters with the coinciding `1`s removed.
    pub fn reduced(&self) -> (Vec<Rational>, Vec<Rational>) {
        cancel_parameters(&self.a, &self.b)
    }

    /// `A_p`, the coefficient of `x^p F_p` in `ρ`.
    pub fn prefactor<T: Real>(&self, ctx: T::Context) -> T {
        let (k, p) = (self.k as i64, self.p as i64);
        let kt = T::from_i64_in(k, ctx);
        let e = rat_in::<T>((k - 1) * p, k, ctx);
        let fact: T = (1..=p).fold(T::from_i64_in(1, ctx), |a, j| a * T::from_i64_in(j, ctx));
        let ratio = sin_pi::<T>(p, k, ctx) / sin_pi::<T>(1, k, ctx);
        let norm = profile_norm::<T>(self.k, ctx) / sin_pi::<T>(1, k, ctx);
        ratio * kt.powf(&e) * (e.clone() + T::from_i64_in(1, ctx)).gamma() / (norm * fact)
    }
}

/// The `k − 1` components of the closed form, `p = 1..k−1`.
pub fn rho_hyper_parameters(k: usize) -> Vec<HyperTerm> {
    (1..k).map(|p| HyperTerm::new(k, p)).collect()
}

/// `z = −(k−1)^{k−1} x^k / k`.
fn argument<T: Real>(k: usize, x: &T) -> T {
    -(x.powi(k as i32) * T::from_rational_in(&tail_coefficient(k), x.context()))
}

fn check_x<T: Real>(x: &T) -> Result<()> {
    if !(x.to_f64() >= 0.0) {
        return Err(Error::InvalidArgument(format!("x must be non-negative, got {x}")));
    }
    Ok(())
}

/// `ρ(x)` from the hypergeometric closed form.
pub fn rho_hypergeometric<T: Real>(k: usize, x: &T, tol: Tolerance) -> Result<Estimate<T>> {
    Ok(rho_hypergeometric_derivatives(k, x, 0, tol)?.swap_remove(0))
}

/// `ρ^{(d)}(x)` for `d = 0..=order`, differentiating the series term by
/// term: the term carrying `x^n` is multiplied by `n(n−1)⋯(n−d+1)/x^d`.
pub fn rho_hypergeometric_derivatives<T: Real>(
    k: usize,
    x: &T,
    order: usize,
    tol: Tolerance,
) -> Result<Vec<Estimate<T>>> {
    check_k(k)?;
    check_x(x)?;
    if order > 0 && x.to_f64() <= 0.0 {
        return Err(Error::InvalidArgument("term-wise derivatives need x > 0".into()));
    }
    let zf = argument(k, &x.lift(x.to_f64())).abs().to_f64();
    let target = -tol.value().log10();
    let mut digits = (target + 20.0 + (0.5 * zf).ceil()).ceil() as u32;
    // ρ and its derivatives are not much smaller than e^{−|z|}
    let mut stop = match tol {
        Tolerance::Absolute(_) => -target - 3.0,
        Tolerance::Relative(_) => -target - 5.0 - zf * std::f64::consts::LOG10_E,
    };
    let comps = rho_hyper_parameters(k);
    loop {
        let ctx = T::context_with_digits(x.context(), digits);
        let xw = x.to_context(ctx);
        let z = argument(k, &xw);
        let mut totals = vec![T::from_i64_in(0, ctx); order + 1];
        let mut rounding = vec![f64::NEG_INFINITY; order + 1];
        let mut tails = vec![f64::NEG_INFINITY; order + 1];
        let inv_x = if order > 0 { Some(T::from_i64_in(1, ctx) / xw.clone()) } else { None };
        for c in &comps {
            let (a, b) = c.reduced();
            let at: Vec<T> = a.iter().map(|q| T::from_rational_in(q, ctx)).collect();
            let bt: Vec<T> = b.iter().map(|q| T::from_rational_in(q, ctx)).collect();
            let lead = c.prefactor::<T>(ctx) * xw.powi(c.p as i32);
            let sums = derivative_sums(&at, &bt, &z, &lead, c.p, k, inv_x.as_ref(), order, stop)?;
            for (d, s) in sums.into_iter().enumerate() {
                rounding[d] = log10_add(rounding[d], s.rounding_log10());
                tails[d] = log10_add(tails[d], s.tail_log10);
                totals[d] += s.value;
            }
        }
        // the worst derivative decides; margins are log10(error / allowed)
        let (mut worst, mut worst_margin) = (0usize, f64::NEG_INFINITY);
        for d in 0..=order {
            let allowed = tol.allowed_log10(totals[d].log10_abs());
            let margin = log10_add(rounding[d], tails[d]) - allowed;
            if !(margin <= worst_margin) {
                (worst, worst_margin) = (d, margin);
            }
        }
        if worst_margin <= 0.0 {
            return Ok(totals
                .into_iter()
                .zip(rounding.iter().zip(&tails))
                .map(|(v, (r, t))| Estimate { value: v.to_context(x.context()), error: 10f64.powf(log10_add(*r, *t)) })
                .collect());
        }
        let allowed = tol.allowed_log10(totals[worst].log10_abs());
        let widen = |d| T::context_with_digits(x.context(), d);
        match refine(allowed, rounding[worst], tails[worst], stop, digits, widen, ctx, DIGIT_CAP) {
            Some(r) => (stop, digits) = (r.stop, r.digits),
            None => {
                let error = log10_add(rounding[worst], tails[worst]);
                let log10_error = match tol {
                    Tolerance::Relative(_) => error - totals[worst].log10_abs(),
                    Tolerance::Absolute(_) => error,
                };
                return Err(Error::PrecisionExhausted { cap: T::digits_in(ctx), log10_error });
            }
        }
    }
}

/// `Σ_m lead · t_m · (n)_d / x^d` for `d = 0..=order`, `n = p + km`.
#[allow(clippy::too_many_arguments)]
fn derivative_sums<T: Real>(
    a: &[T],
    b: &[T],
    z: &T,
    lead: &T,
    p: usize,
    k: usize,
    inv_x: Option<&T>,
    order: usize,
    stop_log10: f64,
) -> Result<Vec<RawSum<T>>> {
    let mut t = lead.clone();
    let mut out: Vec<RawSum<T>> = (0..=order)
        .map(|_| RawSum { value: z.lift(0.0), max_log10: f64::NEG_INFINITY, terms: 0, tail_log10: f64::NEG_INFINITY })
        .collect();
    let mut m = 0i64;
    let mut prev_log = f64::INFINITY;
    loop {
        let n = (p as i64) + (k as i64) * m;
        let mut factor = t.clone();
        let mut head = f64::NEG_INFINITY;
        for (d, acc) in out.iter_mut().enumerate() {
            if d > 0 {
                let inv = inv_x.expect("x > 0 when order > 0");
                factor = factor * z.lift_int(n - (d as i64 - 1)) * inv.clone();
            }
            let l = factor.log10_abs();
            head = head.max(l);
            acc.max_log10 = acc.max_log10.max(l);
            acc.value += factor.clone();
            acc.terms += 1;
        }
        if head == f64::NEG_INFINITY && m > 0 {
            break;
        }
        if head <= prev_log - std::f64::consts::LOG10_2 && head < stop_log10 {
            for acc in out.iter_mut() {
                acc.tail_log10 = head;
            }
            break;
        }
        prev_log = head;
        // next term of the hypergeometric series
        let mut num = z.clone();
        for ai in a {
            num *= ai.clone() + z.lift_int(m);
        }
        let mut den = z.lift_int(m + 1);
        for bj in b {
            den *= bj.clone() + z.lift_int(m);
        }
        t = t * num / den;
        m += 1;
        if m > 10_000_000 {
            return Err(Error::PrecisionExhausted { cap: T::digits_in(z.context()), log10_error: head });
        }
    }
    Ok(out)
}
