//! Continuum MCRT_k: average profile, basic distributions `σ_j`, history
//! densities and the identities tying them together.
//!
//! Two independent routes evaluate the profile: oscillatory quadrature of
//! the ξ-integral ([`rho_integral`]) and the finite sum of hypergeometric
//! series ([`rho_hypergeometric`], the evaluator of record). Every routine is
//! generic over [`Real`]; [`BigFloat`](crate::BigFloat) is needed once the
//! integrand or the series terms outgrow the result by more than ~10 digits.

mod checks;
mod fractional;
mod hyper;
mod integral;
pub mod quad;
mod spectral;

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::One;

pub use checks::{
    consistency_relation_residual, expand_ode, integrated_shape_weight, laplace_consistency,
    moment, moment_by_quadrature, ode_residual, rho_fixed_size, tail_exponent, total_mass,
    DensityRoute, OdeCoefficients, TailFit,
};
pub use fractional::{fracdif_residual, weyl_fractional_integral, DecayingFn, ProfileFn, WithCutoff};
pub use hyper::{
    hypergeometric_pfq, hypergeometric_pfq_rational, rho_hyper_parameters, rho_hypergeometric,
    rho_hypergeometric_derivatives, HyperTerm, Tolerance,
};
pub use integral::{history_density, rho_integral, sigma_j, xi_integral};
pub use quad::{Estimate, GaussLegendre};
pub use spectral::{history_density_series, sigma_j_series, spectral_series};

use crate::error::{Error, Result};
use crate::real::Real;
use crate::Rational;

/// Universal constants of MCRT_k.
#[derive(Clone, Debug, PartialEq)]
pub struct UniversalWeights {
    pub k: usize,
    /// `μ_i = (−1)^i C(k, i)/k`, `i = 2..=k`.
    pub mu: BTreeMap<usize, Rational>,
    /// Scaling dimensions `α_i = (k − i)/(k − 1)`.
    pub alpha: BTreeMap<usize, Rational>,
    /// `ν_k = (k − 1)/k`.
    pub nu: Rational,
    /// Fractal dimension `d_k = k/(k − 1)`.
    pub d: Rational,
}

impl UniversalWeights {
    pub fn new(k: usize) -> Self {
        assert!(k >= 2, "multicriticality order must be at least 2");
        let w = crate::models::minimal_weights(k).expect("k >= 2");
        let alpha = (2..=k)
            .map(|i| (i, Rational::new(BigInt::from(k - i), BigInt::from(k - 1))))
            .collect();
        UniversalWeights {
            k,
            mu: w.g,
            alpha,
            nu: Rational::new(BigInt::from(k - 1), BigInt::from(k)),
            d: Rational::new(BigInt::from(k), BigInt::from(k - 1)),
        }
    }

    pub fn mu(&self, i: usize) -> Rational {
        self.mu.get(&i).cloned().unwrap_or_default()
    }

    /// `Π μ_i^{p_i}`.
    pub fn mu_product(&self, p: &BTreeMap<usize, usize>) -> Rational {
        p.iter().fold(Rational::one(), |a, (&i, &c)| a * num_traits::pow(self.mu(i), c))
    }
}

/// Branching data of a continuum history.
#[derive(Clone, Debug, PartialEq)]
pub struct ContinuousHistory<T> {
    /// `i ↦ p_i`, number of branching points with `i` children, `2 ≤ i ≤ k`.
    pub p: BTreeMap<usize, usize>,
    pub lengths: Vec<T>,
}

impl<T: Real> ContinuousHistory<T> {
    pub fn new(k: usize, p: BTreeMap<usize, usize>, lengths: Vec<T>) -> Result<Self> {
        if let Some((&i, _)) = p.iter().find(|(&i, &c)| c > 0 && !(2..=k).contains(&i)) {
            return Err(Error::InvalidHistory(format!(
                "branching points with {i} children carry no continuum weight at k = {k}"
            )));
        }
        let p: BTreeMap<usize, usize> = p.into_iter().filter(|(_, c)| *c > 0).collect();
        let h = ContinuousHistory { p, lengths };
        if h.lengths.len() != h.branches() {
            return Err(Error::InvalidHistory(format!(
                "{} branch lengths for {} branches",
                h.lengths.len(),
                h.branches()
            )));
        }
        let zero = T::from_i64_in(0, h.lengths[0].context());
        if h.lengths.iter().any(|x| *x <= zero) {
            return Err(Error::InvalidHistory("branch lengths must be positive".into()));
        }
        Ok(h)
    }

    /// `n = 1 + Σ i p_i`.
    pub fn branches(&self) -> usize {
        branches(&self.p)
    }

    /// `m = 1 + Σ (i − 1) p_i`.
    pub fn marks(&self) -> usize {
        marks(&self.p)
    }

    pub fn total_length(&self) -> T {
        let mut it = self.lengths.iter();
        let first = it.next().expect("at least one branch").clone();
        it.fold(first, |a, b| a + b.clone())
    }
}

pub(crate) fn branches(p: &BTreeMap<usize, usize>) -> usize {
    1 + p.iter().map(|(i, c)| i * c).sum::<usize>()
}

pub(crate) fn marks(p: &BTreeMap<usize, usize>) -> usize {
    1 + p.iter().map(|(i, c)| (i - 1) * c).sum::<usize>()
}

/// `r = Σ (k − i) p_i`, the power of `ξ/τ` a history adds to the integrand.
pub fn history_shift(k: usize, p: &BTreeMap<usize, usize>) -> usize {
    p.iter().map(|(&i, &c)| (k - i) * c).sum()
}

pub(crate) fn check_k(k: usize) -> Result<()> {
    if k < 2 {
        return Err(Error::InvalidOrder(k));
    }
    Ok(())
}

pub(crate) fn rat_in<T: Real>(num: i64, den: i64, ctx: T::Context) -> T {
    T::from_rational_in(&Rational::new(num.into(), den.into()), ctx)
}

/// `sin(π num/den)`.
pub(crate) fn sin_pi<T: Real>(num: i64, den: i64, ctx: T::Context) -> T {
    (T::pi_in(ctx) * rat_in::<T>(num, den, ctx)).sin()
}

/// `k^{1/k} Γ(1 + 1/k) sin(π/k)`, the normalization of the profile integral.
pub(crate) fn profile_norm<T: Real>(k: usize, ctx: T::Context) -> T {
    let k = k as i64;
    let kt = T::from_i64_in(k, ctx);
    let inv = rat_in::<T>(1, k, ctx);
    kt.powf(&inv) * (inv.clone() + T::from_i64_in(1, ctx)).gamma() * sin_pi::<T>(1, k, ctx)
}

/// `((k−1)^{k−1}/k)`, the coefficient of `x^k` in the Gaussian-like tail.
pub fn tail_coefficient(k: usize) -> Rational {
    Rational::new(num_traits::pow(BigInt::from(k - 1), k - 1), BigInt::from(k))
}

/// Rough point beyond which `ρ` and history densities at order `k` are below
/// `tol`: the tail `e^{−c x^k}` with a margin for polynomial prefactors.
pub fn negligible_beyond(k: usize, tol: f64) -> f64 {
    let c = crate::rational_to_f64(&tail_coefficient(k));
    ((-tol.ln() + 25.0) / c).powf(1.0 / k as f64) + 0.5
}
