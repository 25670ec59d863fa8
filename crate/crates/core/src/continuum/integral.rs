//! The ξ-integral representation.
//!
//! `I_r(x) = Im ∫_0^∞ dξ ξ^{k−1} (ξ/τ)^r e^{−ξ^k/k + τ ξ^{k−1} x}`, `τ = e^{iπ/k}`,
//! has the real integrand
//! `ξ^{k−1+r} e^{−ξ^k/k + cos(π/k) ξ^{k−1} x} sin(sin(π/k) ξ^{k−1} x − πr/k)`.
//! For `k ≥ 3` the envelope climbs to `e^{E_max}` before decaying, so the
//! integral is a cancellation of terms up to `E_max/ln 10` digits larger than
//! the result; the working precision is raised accordingly.

use std::collections::BTreeMap;

use super::quad::{integrate, rule_size, Estimate, GaussLegendre};
use super::{check_k, profile_norm, rat_in, sin_pi, ContinuousHistory, UniversalWeights};
use crate::error::{Error, Result};
use crate::real::Real;

/// Shape of `ln |integrand|` as a function of ξ, in double precision.
struct Envelope {
    k: f64,
    power: f64,
    cx: f64,
}

impl Envelope {
    fn log(&self, xi: f64) -> f64 {
        self.power * xi.ln() - xi.powf(self.k) / self.k + self.cx * xi.powf(self.k - 1.0)
    }

    /// ξ·g'(ξ) = power − ξ^k + (k−1) c x ξ^{k−1}; one sign change on (0, ∞).
    fn slope_sign(&self, xi: f64) -> f64 {
        self.power - xi.powf(self.k) + (self.k - 1.0) * self.cx * xi.powf(self.k - 1.0)
    }

    fn peak(&self) -> f64 {
        if self.power == 0.0 && self.cx == 0.0 {
            return 0.0;
        }
        let (mut lo, mut hi) = (0.0, 1.0);
        while self.slope_sign(hi) > 0.0 {
            hi *= 2.0;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.slope_sign(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// Smallest ξ past the peak with `ln |integrand| ≤ level`.
    fn cutoff(&self, peak: f64, level: f64) -> f64 {
        let mut lo = peak.max(1e-300);
        let mut hi = lo.max(1.0);
        while self.log(hi) > level {
            lo = hi;
            hi *= 1.5;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.log(mid) > level {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        hi
    }
}

/// `I_r(x)` to absolute accuracy `tol`.
///
/// The range is cut where the log-envelope falls below
/// `min(E_max − 40, ln tol − 10)`. Initial panels resolve quarter periods of
/// the oscillation and never exceed an eighth of the range.
pub fn xi_integral<T: Real>(k: usize, r: usize, x: &T, tol: f64) -> Result<Estimate<T>> {
    check_k(k)?;
    let xf = x.to_f64();
    if !(xf >= 0.0) {
        return Err(Error::InvalidArgument(format!("x must be non-negative, got {xf}")));
    }
    let kf = k as f64;
    let (s, c) = (std::f64::consts::PI / kf).sin_cos();
    let env = Envelope { k: kf, power: kf - 1.0 + r as f64, cx: c * xf };
    let peak = env.peak();
    let e_max = if peak > 0.0 { env.log(peak) } else { 0.0 };
    let level = (e_max - 40.0).min(tol.ln() - 10.0);
    let top = env.cutoff(peak, level);

    let quarter_turns = (s * xf * top.powf(kf - 1.0) / std::f64::consts::FRAC_PI_2).ceil();
    let rel_digits = (e_max.max(0.0) / std::f64::consts::LN_10 - tol.log10()).max(1.0);
    let work_digits = (rel_digits + 12.0 + quarter_turns.max(1.0).log10()).ceil() as u32;
    let ctx = T::context_with_digits(x.context(), work_digits);
    let carried = -T::epsilon_log10(ctx);
    if carried < rel_digits + 2.0 {
        return Err(Error::PrecisionExhausted { cap: T::digits_in(ctx), log10_error: e_max.max(0.0) / std::f64::consts::LN_10 - carried });
    }
    let xw = x.to_context(ctx);

    let mut breaks_f: Vec<f64> = (0..=8).map(|i| top * i as f64 / 8.0).collect();
    let omega = s * xf;
    if omega > 0.0 {
        let turns = quarter_turns as usize;
        for j in 1..turns {
            let xi = (j as f64 * std::f64::consts::FRAC_PI_2 / omega).powf(1.0 / (kf - 1.0));
            if xi < top {
                breaks_f.push(xi);
            }
        }
    }
    breaks_f.sort_by(|a, b| a.partial_cmp(b).expect("finite breakpoints"));
    breaks_f.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * top);
    let mut breaks: Vec<T> = breaks_f.iter().map(|&b| T::from_f64_in(b, ctx)).collect();
    *breaks.last_mut().expect("non-empty") = T::from_f64_in(top, ctx);

    let kk = k as i64;
    let inv_k = rat_in::<T>(1, kk, ctx);
    let cw = xw.clone() * (T::pi_in(ctx) * inv_k.clone()).cos();
    let sw = xw.clone() * sin_pi::<T>(1, kk, ctx);
    let shift = T::pi_in(ctx) * rat_in::<T>(r as i64, kk, ctx);
    let power = (k - 1 + r) as i32;
    let f = move |xi: &T| -> Result<T> {
        let xk1 = xi.powi(kk as i32 - 1);
        let xk = xk1.clone() * xi.clone();
        let expo = cw.clone() * xk1.clone() - xk * inv_k.clone();
        let phase = sw.clone() * xk1 - shift.clone();
        Ok(xi.powi(power) * expo.exp() * phase.sin())
    };
    let rule = GaussLegendre::new(rule_size(rel_digits.ceil() as u32), ctx);
    let est = integrate(&rule, &f, &breaks, tol, 48)?;
    Ok(Estimate { value: est.value.to_context(x.context()), error: est.error })
}

/// `ρ(x)` from the ξ-integral, to absolute accuracy `tol`.
pub fn rho_integral<T: Real>(k: usize, x: &T, tol: f64) -> Result<Estimate<T>> {
    check_k(k)?;
    let ctx = x.context();
    let norm: T = profile_norm(k, ctx);
    let nf = norm.to_f64().abs();
    let i = xi_integral(k, 0, x, tol * nf)?;
    Ok(Estimate { value: i.value / norm, error: i.error / nf })
}

/// Prefactor of `σ_j`: `k^{(j−1)/k} / (Γ((k−j+1)/k) sin((k−j+1)π/k))`.
pub(crate) fn sigma_prefactor<T: Real>(k: usize, j: usize, ctx: T::Context) -> T {
    let (k, j) = (k as i64, j as i64);
    let kt = T::from_i64_in(k, ctx);
    kt.powf(&rat_in::<T>(j - 1, k, ctx))
        / (rat_in::<T>(k - j + 1, k, ctx).gamma() * sin_pi::<T>(k - j + 1, k, ctx))
}

pub(crate) fn check_j(k: usize, j: usize) -> Result<()> {
    if !(2..=k).contains(&j) {
        return Err(Error::InvalidArgument(format!("σ_j needs 2 ≤ j ≤ k, got j = {j}, k = {k}")));
    }
    Ok(())
}

/// Basic distribution `σ_j(x)`; `σ_k = ρ`.
pub fn sigma_j<T: Real>(k: usize, j: usize, x: &T, tol: f64) -> Result<Estimate<T>> {
    check_k(k)?;
    check_j(k, j)?;
    let pre: T = sigma_prefactor(k, j, x.context());
    let pf = pre.to_f64().abs();
    let i = xi_integral(k, k - j, x, tol / pf)?;
    Ok(Estimate { value: i.value * pre, error: i.error * pf })
}

/// `ρ(H)` from the ξ-integral; depends on `H` through `p` and `Σ x_j` only.
pub fn history_density<T: Real>(k: usize, h: &ContinuousHistory<T>, tol: f64) -> Result<Estimate<T>> {
    check_k(k)?;
    density_at(k, &h.p, &h.total_length(), tol)
}

pub(crate) fn density_prefactor<T: Real>(k: usize, p: &BTreeMap<usize, usize>, ctx: T::Context) -> T {
    let mu = UniversalWeights::new(k).mu_product(p);
    T::from_rational_in(&mu, ctx) / profile_norm::<T>(k, ctx)
}

pub(crate) fn density_at<T: Real>(
    k: usize,
    p: &BTreeMap<usize, usize>,
    x: &T,
    tol: f64,
) -> Result<Estimate<T>> {
    let pre: T = density_prefactor(k, p, x.context());
    let pf = pre.to_f64().abs();
    let i = xi_integral(k, super::history_shift(k, p), x, tol / pf)?;
    Ok(Estimate { value: i.value * pre, error: i.error * pf })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::real::{BigFloat, Precision};

    #[test]
    fn k2_closed_form() {
        for &x in &[0.3, 1.0, 2.5] {
            let v = rho_integral(2, &x, 1e-12).unwrap();
            assert!((v.value - x * (-x * x / 2.0).exp()).abs() < 1e-12, "x = {x}");
        }
        let one = rho_integral(2, &1.0, 1e-12).unwrap().value;
        assert!((one - 0.6065306597126334).abs() < 1e-12);
    }

    #[test]
    fn vanishes_at_origin() {
        for k in 2..=5 {
            assert_eq!(rho_integral(k, &0.0f64, 1e-12).unwrap().value, 0.0);
        }
    }

    #[test]
    fn sigma_k_is_rho() {
        let x = BigFloat::from_f64_in(0.7, Precision::from_digits(30));
        let a = sigma_j(3, 3, &x, 1e-14).unwrap().value;
        let b = rho_integral(3, &x, 1e-14).unwrap().value;
        assert!((a - b).abs().to_f64() < 1e-13);
    }

    #[test]
    fn sigma_2_sign_change_k3() {
        assert!(sigma_j(3, 2, &0.1f64, 1e-10).unwrap().value < 0.0);
        assert!(sigma_j(3, 2, &2.0f64, 1e-10).unwrap().value > 0.0);
        assert!(sigma_j(3, 1, &1.0f64, 1e-10).is_err());
    }

    #[test]
    fn k2_single_branching_point() {
        let h = ContinuousHistory::new(2, BTreeMap::from([(2, 1)]), vec![0.2, 0.3, 0.5]).unwrap();
        let v = history_density(2, &h, 1e-12).unwrap().value;
        assert!((v - 0.5 * (-0.5f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn double_precision_reports_cancellation() {
        // the k = 4 envelope reaches e^{27/16 x^4}; at x = 3 that is ~1e59
        assert!(rho_integral(4, &3.0f64, 1e-12).is_err());
    }
}
