//! Residuals of the identities satisfied by the continuum profile and the
//! history densities, plus moments and the tail fit.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use super::fractional::{integrate_tail, smooth_rule, DecayingFn};
use super::hyper::{rho_hypergeometric, rho_hypergeometric_derivatives, Tolerance};
use super::integral::density_at;
use super::quad::{integrate, uniform_breaks, Estimate, GaussLegendre};
use super::spectral::history_density_series;
use super::{branches, check_k, marks, negligible_beyond, profile_norm, rat_in, tail_coefficient, UniversalWeights};
use crate::error::{Error, Result};
use crate::real::Real;
use crate::{rational_to_f64, Rational};

/// Evaluator used for `φ(x; p)` inside nested integrals.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum DensityRoute {
    /// Hypergeometric form for `p = {}`, power series in `x` otherwise.
    #[default]
    Series,
    /// The ξ-integral by quadrature.
    Integral,
}

fn check_p(k: usize, p: &BTreeMap<usize, usize>) -> Result<()> {
    if let Some((&i, _)) = p.iter().find(|(&i, &c)| c > 0 && !(2..=k).contains(&i)) {
        return Err(Error::InvalidHistory(format!("no continuum weight for {i} children at k = {k}")));
    }
    Ok(())
}

pub(crate) fn density<T: Real>(
    k: usize,
    p: &BTreeMap<usize, usize>,
    x: &T,
    route: DensityRoute,
    tol: f64,
) -> Result<Estimate<T>> {
    match route {
        DensityRoute::Series if p.values().all(|&c| c == 0) => rho_hypergeometric(k, x, Tolerance::Absolute(tol)),
        DensityRoute::Series => history_density_series(k, p, x, tol),
        DensityRoute::Integral => density_at(k, p, x, tol),
    }
}

/// `u ↦ φ(u; p)` as a decaying function.
struct DensityFn<'a> {
    k: usize,
    p: &'a BTreeMap<usize, usize>,
    route: DensityRoute,
    tol: f64,
}

impl<T: Real> DecayingFn<T> for DensityFn<'_> {
    fn eval(&self, u: &T) -> Result<T> {
        Ok(density(self.k, self.p, u, self.route, self.tol)?.value)
    }

    fn negligible_beyond(&self, tol: f64) -> f64 {
        // derivatives of ρ pick up powers of u
        negligible_beyond(self.k, tol * 1e-6)
    }
}

/// Linear ODE `Σ_{d<k} c_d x^d ρ^{(d)} + ρ^{(k)} = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct OdeCoefficients {
    pub k: usize,
    /// `c_0, …, c_{k−1}`, then `1` for `ρ^{(k)}`.
    pub coeffs: Vec<Rational>,
}

impl OdeCoefficients {
    /// Residual given `derivs[d] = ρ^{(d)}(x)`, `d = 0..=k`.
    pub fn residual<T: Real>(&self, x: &T, derivs: &[T]) -> T {
        let mut total = derivs[self.k].clone();
        let mut xp = x.lift(1.0);
        for (d, c) in self.coeffs[..self.k].iter().enumerate() {
            total += x.lift_rational(c) * xp.clone() * derivs[d].clone();
            xp *= x.clone();
        }
        total
    }

    /// `Σ |c_d x^d| e_d + e_k`, for a residual built from derivatives with errors `e_d`.
    fn error_bound(&self, x: f64, errors: &[f64]) -> f64 {
        let mut total = errors[self.k];
        for (d, c) in self.coeffs[..self.k].iter().enumerate() {
            total += rational_to_f64(c).abs() * x.abs().powi(d as i32) * errors[d];
        }
        total
    }
}

/// Expands `Π_{j=0}^{k−2} ((k−1) x d/dx + k + kj)` into `Σ c_d x^d d^d/dx^d`
/// via `(x d/dx)^n = Σ_d S(n, d) x^d d^d/dx^d`.
pub fn expand_ode(k: usize) -> Result<OdeCoefficients> {
    check_k(k)?;
    let int = |v: usize| Rational::from_integer(BigInt::from(v));
    // polynomial in θ = x d/dx
    let mut poly = vec![Rational::one()];
    for j in 0..k - 1 {
        let (a, b) = (int(k - 1), int(k + k * j));
        let mut next = vec![Rational::zero(); poly.len() + 1];
        for (n, c) in poly.iter().enumerate() {
            next[n] += c * &b;
            next[n + 1] += c * &a;
        }
        poly = next;
    }
    // Stirling numbers of the second kind
    let deg = poly.len() - 1;
    let mut s = vec![vec![BigInt::zero(); deg + 1]; deg + 1];
    s[0][0] = BigInt::one();
    for n in 1..=deg {
        for d in 1..=n {
            s[n][d] = BigInt::from(d) * &s[n - 1][d] + &s[n - 1][d - 1];
        }
    }
    let mut coeffs = vec![Rational::zero(); k + 1];
    for (n, c) in poly.iter().enumerate() {
        for d in 0..=n {
            coeffs[d] += c * Rational::from_integer(s[n][d].clone());
        }
    }
    coeffs[k] += Rational::one();
    Ok(OdeCoefficients { k, coeffs })
}

/// ODE residual at `x > 0` with derivatives from the series, differentiated
/// term by term.
pub fn ode_residual<T: Real>(k: usize, x: &T, tol: f64) -> Result<Estimate<T>> {
    let ode = expand_ode(k)?;
    let xf = x.to_f64();
    let scale: f64 = ode.coeffs.iter().enumerate().map(|(d, c)| rational_to_f64(c).abs() * xf.max(1.0).powi(d as i32)).sum();
    let d = rho_hypergeometric_derivatives(k, x, k, Tolerance::Absolute(tol / scale))?;
    let values: Vec<T> = d.iter().map(|e| e.value.clone()).collect();
    let errors: Vec<f64> = d.iter().map(|e| e.error).collect();
    Ok(Estimate { value: ode.residual(x, &values), error: ode.error_bound(xf, &errors) })
}

/// `⟨x^b⟩ = b!/k^{b(k−1)/k} · Γ((k−1)/k)/Γ((b+1)(k−1)/k)`.
pub fn moment<T: Real>(k: usize, b: usize, ctx: T::Context) -> T {
    let (ki, bi) = (k as i64, b as i64);
    let fact = (1..=bi).fold(T::from_i64_in(1, ctx), |a, j| a * T::from_i64_in(j, ctx));
    let kt = T::from_i64_in(ki, ctx);
    fact / kt.powf(&rat_in::<T>(bi * (ki - 1), ki, ctx)) * rat_in::<T>(ki - 1, ki, ctx).gamma()
        / rat_in::<T>((bi + 1) * (ki - 1), ki, ctx).gamma()
}

/// `∫ x^b ρ(x) dx` for `b = 0..=b_max` on one composite Gauss grid, with the
/// error taken from a rerun on twice as many panels.
pub fn moment_by_quadrature<T: Real>(k: usize, b_max: usize, ctx: T::Context, tol: f64) -> Result<Vec<Estimate<T>>> {
    check_k(k)?;
    let end = negligible_beyond(k, tol * 1e-6);
    let rule = GaussLegendre::<T>::new(smooth_rule(tol), ctx);
    let eval_tol = tol * 1e-3 / end.powi(b_max as i32 + 1).max(1.0);
    let run = |panels: usize| -> Result<Vec<T>> {
        let zero = T::from_i64_in(0, ctx);
        let breaks = uniform_breaks(&zero, &T::from_f64_in(end, ctx), panels);
        let mut sums = vec![T::from_i64_in(0, ctx); b_max + 1];
        for w in breaks.windows(2) {
            let (a, b) = (&w[0], &w[1]);
            for (xnode, wt) in rule.scaled(a, b) {
                let r = rho_hypergeometric(k, &xnode, Tolerance::Absolute(eval_tol))?.value * wt;
                let mut term = r;
                for s in sums.iter_mut() {
                    *s += term.clone();
                    term *= xnode.clone();
                }
            }
        }
        Ok(sums)
    };
    let coarse = run(16)?;
    let fine = run(32)?;
    let slack = eval_tol * end.powi(b_max as i32 + 1).max(1.0);
    Ok(fine
        .into_iter()
        .zip(coarse)
        .map(|(f, c)| {
            let error = (f.clone() - c).abs().to_f64() + slack;
            Estimate { value: f, error }
        })
        .collect())
}

/// `∫_0^∞ f` to absolute accuracy `tol`.
pub fn total_mass<T: Real, F: DecayingFn<T> + ?Sized>(f: &F, ctx: T::Context, tol: f64) -> Result<Estimate<T>> {
    integrate_tail(f, &T::from_i64_in(0, ctx), tol)
}

/// Profile at fixed total size `M`: `M^{1/k} ρ(x / M^{(k−1)/k})`.
pub fn rho_fixed_size<T: Real>(k: usize, mass: &T, x: &T, tol: f64) -> Result<Estimate<T>> {
    check_k(k)?;
    if !(mass.to_f64() > 0.0) {
        return Err(Error::InvalidArgument(format!("size must be positive, got {mass}")));
    }
    let ctx = x.context();
    let ki = k as i64;
    let s = mass.powf(&rat_in::<T>(ki - 1, ki, ctx));
    let pre = mass.clone() / s.clone();
    let pf = pre.to_f64();
    let r = rho_hypergeometric(k, &(x.clone() / s), Tolerance::Absolute(tol / pf))?;
    Ok(Estimate { value: r.value * pre, error: r.error * pf })
}

/// Residual of the size transform: with `M = e^s`,
/// `k^{1/k} sin(π/k) Γ(1+1/k)/π · ∫ ds M^{m − nν − 1/k} e^{−M/k} φ(x M^{−ν}; p) − e^{−x} Π μ_i^{p_i}`.
pub fn laplace_consistency<T: Real>(
    k: usize,
    x: &T,
    p: &BTreeMap<usize, usize>,
    route: DensityRoute,
    tol: f64,
) -> Result<Estimate<T>> {
    check_k(k)?;
    check_p(k, p)?;
    let xf = x.to_f64();
    if !(xf > 0.0) {
        return Err(Error::InvalidArgument(format!("x must be positive, got {xf}")));
    }
    let ctx = x.context();
    let ki = k as i64;
    let (m, n) = (marks(p) as i64, branches(p) as i64);
    // m − nν − 1/k = (k m − n (k−1) − 1)/k
    let e_num = ki * m - n * (ki - 1) - 1;
    let expo = rat_in::<T>(e_num, ki, ctx);
    let ef = e_num as f64 / k as f64;
    let nu = rat_in::<T>(ki - 1, ki, ctx);
    let nuf = (k - 1) as f64 / k as f64;
    let inv_k = rat_in::<T>(1, ki, ctx);

    let level = -(tol * 1e-3).ln();
    let mut big = k as f64 * level;
    while big / k as f64 - ef * big.ln() < level {
        big *= 1.5;
    }
    let y_far = negligible_beyond(k, tol * 1e-8);
    let small = (xf / y_far).powf(1.0 / nuf);
    let (s_lo, s_hi) = (small.ln(), big.ln());

    let pre = profile_norm::<T>(k, ctx) / T::pi_in(ctx);
    let pf = pre.to_f64();
    let eval_tol = tol * 1e-3 / pf / (s_hi - s_lo);
    let f = |s: &T| -> Result<T> {
        let big_m = s.exp();
        let y = x.clone() * (-(nu.clone() * s.clone())).exp();
        let phi = density(k, p, &y, route, eval_tol / (ef * s.to_f64()).exp().max(1e-300))?.value;
        Ok((expo.clone() * s.clone() - big_m * inv_k.clone()).exp() * phi)
    };
    let rule = GaussLegendre::new(smooth_rule(tol), ctx);
    let breaks = uniform_breaks(&T::from_f64_in(s_lo, ctx), &T::from_f64_in(s_hi, ctx), 24);
    let est = integrate(&rule, &f, &breaks, tol * 0.5 / pf, 30)?;
    let rhs = (-x.clone()).exp() * T::from_rational_in(&UniversalWeights::new(k).mu_product(p), ctx);
    Ok(Estimate { value: est.value * pre - rhs, error: est.error * pf + tol * 1e-3 })
}

/// Residual of the leaf-addition relation
/// `φ(x; p) − 2x ∫_0^∞ φ(x+y; p+e_2) dy − Σ_{j=2}^{k−1} (j+1) p_j ∫_0^∞ φ(x+y; p−e_j+e_{j+1}) dy`.
pub fn consistency_relation_residual<T: Real>(
    k: usize,
    p: &BTreeMap<usize, usize>,
    x: &T,
    route: DensityRoute,
    tol: f64,
) -> Result<Estimate<T>> {
    check_k(k)?;
    check_p(k, p)?;
    let xf = x.to_f64();
    if !(xf > 0.0) {
        return Err(Error::InvalidArgument(format!("x must be positive, got {xf}")));
    }
    let p: BTreeMap<usize, usize> = p.iter().filter(|(_, &c)| c > 0).map(|(&i, &c)| (i, c)).collect();
    let terms: Vec<(usize, usize)> = (2..k).filter_map(|j| p.get(&j).map(|&c| (j, c))).collect();
    let weight_count = 1 + terms.len();
    let part = tol / (2.0 * weight_count as f64);
    let lhs = density(k, &p, x, route, part)?;
    let mut value = lhs.value;
    let mut error = lhs.error;

    let mut grown = p.clone();
    *grown.entry(2).or_insert(0) += 1;
    let scale = 2.0 * xf;
    let g = DensityFn { k, p: &grown, route, tol: part * 1e-3 / scale };
    let i2 = integrate_tail(&g, x, part / scale)?;
    value -= x.lift(2.0) * x.clone() * i2.value;
    error += scale * i2.error;

    for (j, c) in terms {
        let mut q = p.clone();
        q.insert(j, c - 1);
        *q.entry(j + 1).or_insert(0) += 1;
        let q: BTreeMap<usize, usize> = q.into_iter().filter(|(_, c)| *c > 0).collect();
        let w = ((j + 1) * c) as f64;
        let g = DensityFn { k, p: &q, route, tol: part * 1e-3 / w };
        let ij = integrate_tail(&g, x, part / w)?;
        value -= x.lift(w) * ij.value;
        error += w * ij.error;
    }
    Ok(Estimate { value, error })
}

/// `w(S) = ∫ x^{n−1}/(n−1)! φ(x; p) dx`, the weight of any single labeled
/// shape with branching counts `p`.
pub fn integrated_shape_weight<T: Real>(
    k: usize,
    p: &BTreeMap<usize, usize>,
    ctx: T::Context,
    route: DensityRoute,
    tol: f64,
) -> Result<Estimate<T>> {
    check_k(k)?;
    check_p(k, p)?;
    let n = branches(p);
    let fact = (1..n as i64).fold(T::from_i64_in(1, ctx), |a, j| a * T::from_i64_in(j, ctx));
    let end = negligible_beyond(k, tol * 1e-6);
    let eval_tol = tol * 1e-3 / end.powi(n as i32).max(1.0);
    let f = |x: &T| -> Result<T> {
        Ok(x.powi(n as i32 - 1) * density(k, p, x, route, eval_tol)?.value / fact.clone())
    };
    let rule = GaussLegendre::new(smooth_rule(tol), ctx);
    let zero = T::from_i64_in(0, ctx);
    integrate(&rule, &f, &uniform_breaks(&zero, &T::from_f64_in(end, ctx), 8), tol, 40)
}

/// Least-squares fit `−ln ρ(x) ≈ a x^k − c ln x − g` over the window where
/// `10^{−30} ≤ ρ ≤ 10^{−8}`.
#[derive(Clone, Debug, PartialEq)]
pub struct TailFit {
    pub k: usize,
    /// Fitted `a`.
    pub coefficient: f64,
    /// `(k−1)^{k−1}/k`.
    pub target: Rational,
    /// Fitted power `c` of the prefactor `x^c`; asymptotically `k/2`.
    pub power: f64,
    pub constant: f64,
    pub window: (f64, f64),
    pub points: usize,
}

impl TailFit {
    pub fn relative_deviation(&self) -> f64 {
        let t = rational_to_f64(&self.target);
        (self.coefficient - t).abs() / t
    }
}

const TAIL_WINDOW: (f64, f64) = (1e-8, 1e-30);
const TAIL_POINTS: usize = 24;

/// Fits the tail of `ρ` evaluated at the precision of `ctx` (which grows as
/// needed inside the series evaluation).
pub fn tail_exponent<T: Real>(k: usize, ctx: T::Context) -> Result<TailFit> {
    check_k(k)?;
    let c = rational_to_f64(&tail_coefficient(k));
    let ln_rho = |x: f64| -> Result<f64> {
        let v = rho_hypergeometric(k, &T::from_f64_in(x, ctx), Tolerance::Relative(1e-12))?.value;
        if !(v.to_f64() > 0.0) && v.log10_abs() == f64::NEG_INFINITY {
            return Err(Error::InvalidArgument(format!("ρ({x}) underflows")));
        }
        Ok(v.log10_abs() * std::f64::consts::LN_10)
    };
    let locate = |level: f64| -> Result<f64> {
        let guess = (-level.ln() / c).powf(1.0 / k as f64);
        let (mut lo, mut hi) = (0.5 * guess, 2.0 * guess);
        let target = level.ln();
        while ln_rho(hi)? > target {
            hi *= 1.5;
        }
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if ln_rho(mid)? > target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    };
    let (x_lo, x_hi) = (locate(TAIL_WINDOW.0)?, locate(TAIL_WINDOW.1)?);
    // normal equations for the basis (x^k, −ln x, −1), solved at high precision
    let wctx = T::context_with_digits(ctx, 40);
    let mut ata = vec![vec![T::from_i64_in(0, wctx); 3]; 3];
    let mut aty = vec![T::from_i64_in(0, wctx); 3];
    for i in 0..TAIL_POINTS {
        let x = x_lo + (x_hi - x_lo) * i as f64 / (TAIL_POINTS - 1) as f64;
        let y = T::from_f64_in(-ln_rho(x)?, wctx);
        let xt = T::from_f64_in(x, wctx);
        let row = [xt.powi(k as i32), -xt.ln(), T::from_i64_in(-1, wctx)];
        for r in 0..3 {
            aty[r] += row[r].clone() * y.clone();
            for s in 0..3 {
                ata[r][s] += row[r].clone() * row[s].clone();
            }
        }
    }
    let sol = solve3(ata, aty)?;
    Ok(TailFit {
        k,
        coefficient: sol[0].to_f64(),
        target: tail_coefficient(k),
        power: sol[1].to_f64(),
        constant: sol[2].to_f64(),
        window: (x_lo, x_hi),
        points: TAIL_POINTS,
    })
}

/// Gaussian elimination with partial pivoting.
fn solve3<T: Real>(mut a: Vec<Vec<T>>, mut b: Vec<T>) -> Result<Vec<T>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| a[i][col].abs().to_f64().total_cmp(&a[j][col].abs().to_f64()))
            .expect("non-empty");
        if a[piv][col].abs().to_f64() == 0.0 {
            return Err(Error::InvalidArgument("singular tail-fit system".into()));
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let factor = a[row][col].clone() / a[col][col].clone();
            for c in col..n {
                let v = factor.clone() * a[col][c].clone();
                a[row][c] -= v;
            }
            let v = factor * b[col].clone();
            b[row] -= v;
        }
    }
    let mut x = b.clone();
    for row in (0..n).rev() {
        let mut acc = b[row].clone();
        for c in row + 1..n {
            acc -= a[row][c].clone() * x[c].clone();
        }
        x[row] = acc / a[row][row].clone();
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat;
    use crate::real::{BigFloat, Precision};

    fn ints(v: &[i64]) -> Vec<Rational> {
        v.iter().map(|&i| rat(i, 1)).collect()
    }

    #[test]
    fn printed_odes() {
        assert_eq!(expand_ode(2).unwrap().coeffs, ints(&[2, 1, 1]));
        assert_eq!(expand_ode(3).unwrap().coeffs, ints(&[18, 22, 4, 1]));
        assert_eq!(expand_ode(4).unwrap().coeffs, ints(&[384, 771, 297, 27, 1]));
    }

    #[test]
    fn ode_residual_k2_and_k3() {
        assert!(ode_residual(2, &1.0f64, 1e-12).unwrap().value.abs() < 1e-11);
        let x = BigFloat::from_f64_in(1.0, Precision::from_digits(30));
        assert!(ode_residual(3, &x, 1e-12).unwrap().value.abs().to_f64() < 1e-11);
    }

    #[test]
    fn closed_form_moments() {
        for k in 2..6 {
            assert!((moment::<f64>(k, 0, ()) - 1.0).abs() < 1e-14);
        }
        assert!((moment::<f64>(2, 2, ()) - 2.0).abs() < 1e-14);
        assert!((moment::<f64>(2, 1, ()) - 1.2533141373155003).abs() < 1e-14);
    }

    #[test]
    fn quadrature_moments_k2() {
        let ctx = Precision::from_digits(30);
        let m = moment_by_quadrature::<BigFloat>(2, 4, ctx, 1e-10).unwrap();
        for (b, e) in m.iter().enumerate() {
            let exact = moment::<f64>(2, b, ());
            assert!((e.value.to_f64() - exact).abs() < 1e-8 * exact, "b = {b}");
        }
    }

    #[test]
    fn fixed_size_rescaling() {
        let v = rho_fixed_size(2, &4.0f64, &2.0, 1e-13).unwrap().value;
        assert!((v - 2.0 * (-0.5f64).exp()).abs() < 1e-12);
        let same = rho_fixed_size(3, &1.0f64, &0.7, 1e-12).unwrap().value;
        let rho = rho_hypergeometric(3, &0.7f64, Tolerance::Absolute(1e-12)).unwrap().value;
        assert!((same - rho).abs() < 1e-12);
        assert!(rho_fixed_size(2, &0.0f64, &1.0, 1e-12).is_err());
    }

    #[test]
    fn laplace_k2() {
        let x = BigFloat::from_f64_in(1.0, Precision::from_digits(30));
        let r = laplace_consistency(2, &x, &BTreeMap::new(), DensityRoute::Series, 1e-9).unwrap();
        assert!(r.value.abs().to_f64() < 1e-8, "{r:?}");
    }

    #[test]
    fn leaf_addition_k2() {
        let x = BigFloat::from_f64_in(1.0, Precision::from_digits(30));
        let r = consistency_relation_residual(2, &BTreeMap::new(), &x, DensityRoute::Series, 1e-10).unwrap();
        assert!(r.value.abs().to_f64() < 1e-8, "{r:?}");
    }

    #[test]
    fn tail_fit_k2() {
        let fit = tail_exponent::<BigFloat>(2, Precision::from_digits(30)).unwrap();
        assert!(fit.relative_deviation() < 1e-3, "{fit:?}");
        assert!((fit.power - 1.0).abs() < 1e-2);
    }
}
