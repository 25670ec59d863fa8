//! Weyl fractional integrals `(−d)^{−β} f(x) = Γ(β)^{−1} ∫_x^∞ (u − x)^{β−1} f(u) du`.
//!
//! Substituting `u = x + t^{1/β}` turns `(u − x)^{β−1} du` into `dt/β`, so
//! `(−d)^{−β} f(x) = Γ(β + 1)^{−1} ∫_0^∞ f(x + t^{1/β}) dt` with no endpoint
//! singularity left.

use super::hyper::{rho_hypergeometric, Tolerance};
use super::quad::{integrate, rule_size, uniform_breaks, Estimate, GaussLegendre};
use super::{check_k, negligible_beyond};
use crate::error::{Error, Result};
use crate::real::Real;
use crate::Rational;

/// A function on `[x, ∞)` with a known decay scale.
pub trait DecayingFn<T: Real> {
    fn eval(&self, u: &T) -> Result<T>;
    /// A point past which `|f|` stays below `tol`.
    fn negligible_beyond(&self, tol: f64) -> f64;
}

/// Closure plus cutoff rule.
pub struct WithCutoff<F, C> {
    pub f: F,
    pub cutoff: C,
}

impl<T, F, C> DecayingFn<T> for WithCutoff<F, C>
where
    T: Real,
    F: Fn(&T) -> Result<T>,
    C: Fn(f64) -> f64,
{
    fn eval(&self, u: &T) -> Result<T> {
        (self.f)(u)
    }

    fn negligible_beyond(&self, tol: f64) -> f64 {
        (self.cutoff)(tol)
    }
}

/// `ρ` from the hypergeometric closed form, evaluated to absolute accuracy `tol`.
#[derive(Clone, Copy, Debug)]
pub struct ProfileFn {
    pub k: usize,
    pub tol: f64,
}

impl<T: Real> DecayingFn<T> for ProfileFn {
    fn eval(&self, u: &T) -> Result<T> {
        Ok(rho_hypergeometric(self.k, u, Tolerance::Absolute(self.tol))?.value)
    }

    fn negligible_beyond(&self, tol: f64) -> f64 {
        negligible_beyond(self.k, tol)
    }
}

/// `∫_a^∞ f` to absolute accuracy `tol`, at the precision of `a`.
pub(crate) fn integrate_tail<T: Real, F: DecayingFn<T> + ?Sized>(
    f: &F,
    a: &T,
    tol: f64,
) -> Result<Estimate<T>> {
    let ctx = a.context();
    let end = f.negligible_beyond(tol * 1e-3).max(a.to_f64() + 1.0);
    let hi = T::from_f64_in(end, ctx);
    let rule = GaussLegendre::new(smooth_rule(tol), ctx);
    let g = |u: &T| f.eval(u);
    integrate(&rule, &g, &uniform_breaks(a, &hi, 8), tol, 40)
}

pub(crate) fn smooth_rule(tol: f64) -> usize {
    rule_size((-tol.log10()).max(8.0) as u32)
}

/// `(−d)^{−β} f(x)` to absolute accuracy `tol`, at the precision of `x`.
pub fn weyl_fractional_integral<T: Real, F: DecayingFn<T> + ?Sized>(
    f: &F,
    beta: &Rational,
    x: &T,
    tol: f64,
) -> Result<Estimate<T>> {
    if *beta <= Rational::from_integer(0.into()) {
        return Err(Error::InvalidArgument(format!("β must be positive, got {beta}")));
    }
    let ctx = x.context();
    let b = T::from_rational_in(beta, ctx);
    let norm = (b.clone() + T::from_i64_in(1, ctx)).gamma();
    let nf = norm.to_f64();
    let inv_b = T::from_i64_in(1, ctx) / b.clone();
    let span = (f.negligible_beyond(tol * 1e-3) - x.to_f64()).max(1.0);
    let t_max = T::from_f64_in(span, ctx).powf(&b);
    let g = |t: &T| -> Result<T> {
        let zero = t.lift(0.0);
        let shift = if *t <= zero { zero } else { t.powf(&inv_b) };
        f.eval(&(x.clone() + shift))
    };
    let rule = GaussLegendre::new(smooth_rule(tol), ctx);
    let zero = T::from_i64_in(0, ctx);
    let est = integrate(&rule, &g, &uniform_breaks(&zero, &t_max, 8), tol * nf, 40)?;
    Ok(Estimate { value: est.value / norm, error: est.error / nf })
}

/// `max_x |ρ(x) − (k−1) x (−d)^{−1/(k−1)} ρ(x)|` over `grid`, `ρ` from the
/// hypergeometric form.
pub fn fracdif_residual<T: Real>(k: usize, grid: &[T], tol: f64) -> Result<f64> {
    check_k(k)?;
    let rho = ProfileFn { k, tol: tol * 1e-3 };
    let beta = Rational::new(1.into(), ((k - 1) as i64).into());
    let mut worst = 0.0f64;
    for x in grid {
        if !(x.to_f64() > 0.0) {
            return Err(Error::InvalidArgument(format!("grid points must be positive, got {x}")));
        }
        let lhs = <ProfileFn as DecayingFn<T>>::eval(&rho, x)?;
        let w = weyl_fractional_integral(&rho, &beta, x, tol * 1e-2)?;
        let rhs = x.lift_int((k - 1) as i64) * x.clone() * w.value;
        worst = worst.max((lhs - rhs).abs().to_f64());
    }
    Ok(worst)
}
