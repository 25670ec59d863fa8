//! Power-series evaluation of the ξ-integral.
//!
//! Expanding `e^{τ ξ^{k−1} x}` and integrating term by term gives
//! `I_r(x) = Σ_ℓ sin(π(ℓ−r)/k) k^{(r+(k−1)ℓ)/k} Γ(1 + (r+(k−1)ℓ)/k) x^ℓ/ℓ!`,
//! an entire series in `x` for `r > −k`. Within a residue class `ℓ = km + p`
//! consecutive terms differ by the rational factor
//! `−k^{k−1} x^k Π_{i=0}^{k−2}(s_m + i) / Π_{i=1}^{k}(km + p + i)`, with
//! `s_m = 1 + (r + (k−1)p)/k + (k−1)m`.
//!
//! This is far cheaper than quadrature and serves as the fast route for
//! history densities inside nested integrals.

use std::collections::BTreeMap;

use super::integral::{check_j, density_prefactor, sigma_prefactor};
use super::quad::Estimate;
use super::{check_k, history_shift, rat_in, sin_pi, ContinuousHistory};
use crate::error::{Error, Result};
use crate::real::Real;

const DIGIT_CAP: u32 = 20_000;

struct Sum<T> {
    value: T,
    max_log10: f64,
    terms: usize,
}

fn sum_series<T: Real>(k: usize, r: i64, x: &T, tail_log10: f64) -> Sum<T> {
    let ctx = x.context();
    let kk = k as i64;
    let kt = T::from_i64_in(kk, ctx);
    let xk = x.powi(kk as i32);
    let step_scale = -(kt.powi(kk as i32 - 1) * xk);
    let mut total = T::from_i64_in(0, ctx);
    let mut max_log10 = f64::NEG_INFINITY;
    let mut terms = 0;
    for p in 0..kk {
        if (p - r).rem_euclid(kk) == 0 {
            continue;
        }
        let sign = sin_pi::<T>(p - r, kk, ctx);
        let e0 = rat_in::<T>(r + (kk - 1) * p, kk, ctx);
        let mut s = e0.clone() + T::from_i64_in(1, ctx);
        let fact: T = (1..=p).fold(T::from_i64_in(1, ctx), |a, j| a * T::from_i64_in(j, ctx));
        let mut t = sign * kt.powf(&e0) * s.gamma() * x.powi(p as i32) / fact;
        let mut m: i64 = 0;
        loop {
            let lt = t.log10_abs();
            max_log10 = max_log10.max(lt);
            total += t.clone();
            terms += 1;
            let mut num = step_scale.clone();
            for i in 0..kk - 1 {
                num *= s.clone() + T::from_i64_in(i, ctx);
            }
            let mut den = T::from_i64_in(1, ctx);
            for i in 1..=kk {
                den *= T::from_i64_in(kk * m + p + i, ctx);
            }
            t = t * num / den;
            s += T::from_i64_in(kk - 1, ctx);
            m += 1;
            // past the hump terms shrink super-geometrically
            let ratio_small = t.log10_abs() < lt - 0.3 || t.log10_abs() == f64::NEG_INFINITY;
            if ratio_small && t.log10_abs() < tail_log10 {
                break;
            }
            if m > 1_000_000 {
                break;
            }
        }
    }
    Sum { value: total, max_log10, terms }
}

/// `I_r(x)` by the series, to absolute accuracy `tol`; precision is raised
/// until the largest term, less the digits carried, falls below `tol`.
pub fn spectral_series<T: Real>(k: usize, r: i64, x: &T, tol: f64) -> Result<Estimate<T>> {
    check_k(k)?;
    if r <= -(k as i64) {
        return Err(Error::InvalidArgument(format!("series needs r > −k, got r = {r}")));
    }
    let target = tol.log10() - 2.0;
    let mut ctx = x.context();
    loop {
        let xw = x.to_context(ctx);
        let sum = sum_series(k, r, &xw, target);
        let error = 10f64.powf(sum.max_log10 + T::epsilon_log10(ctx) + 0.5 * (sum.terms as f64).log10() + 0.6)
            + 10f64.powf(target);
        if error <= tol {
            return Ok(Estimate { value: sum.value.to_context(x.context()), error });
        }
        let need = (sum.max_log10 - tol.log10() + 10.0 + (sum.terms as f64).log10()).ceil() as u32;
        let wider = T::context_with_digits(ctx, need.max(2 * T::digits_in(ctx)).min(DIGIT_CAP));
        if wider == ctx || T::digits_in(ctx) >= DIGIT_CAP {
            return Err(Error::PrecisionExhausted {
                cap: T::digits_in(ctx),
                log10_error: error.log10(),
            });
        }
        ctx = wider;
    }
}

/// `σ_j(x)` by the series route.
pub fn sigma_j_series<T: Real>(k: usize, j: usize, x: &T, tol: f64) -> Result<Estimate<T>> {
    check_k(k)?;
    check_j(k, j)?;
    let pre: T = sigma_prefactor(k, j, x.context());
    let pf = pre.to_f64().abs();
    let s = spectral_series(k, (k - j) as i64, x, tol / pf)?;
    Ok(Estimate { value: s.value * pre, error: s.error * pf })
}

/// `φ(x; p)`: history density at total length `x` by the series route.
pub fn history_density_series<T: Real>(
    k: usize,
    p: &BTreeMap<usize, usize>,
    x: &T,
    tol: f64,
) -> Result<Estimate<T>> {
    check_k(k)?;
    if let Some(&i) = p.iter().find(|(i, c)| **c > 0 && !(2..=k).contains(*i)).map(|(i, _)| i) {
        return Err(Error::InvalidHistory(format!("no continuum weight for {i} children at k = {k}")));
    }
    let pre: T = density_prefactor(k, p, x.context());
    let pf = pre.to_f64().abs();
    if pf == 0.0 {
        return Ok(Estimate::exact(T::from_i64_in(0, x.context())));
    }
    let s = spectral_series(k, history_shift(k, p) as i64, x, tol / pf)?;
    Ok(Estimate { value: s.value * pre, error: s.error * pf })
}

impl<T: Real> ContinuousHistory<T> {
    /// Density by the series route.
    pub fn density_series(&self, k: usize, tol: f64) -> Result<Estimate<T>> {
        history_density_series(k, &self.p, &self.total_length(), tol)
    }
}
