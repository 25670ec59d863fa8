use std::collections::BTreeMap;

use mcrt_core::continuum::*;
use mcrt_core::{rat, BigFloat, Precision, Real};

fn ctx() -> Precision {
    Precision::from_digits(30)
}

fn big(x: f64) -> BigFloat {
    BigFloat::from_f64_in(x, ctx())
}

fn p(pairs: &[(usize, usize)]) -> BTreeMap<usize, usize> {
    pairs.iter().copied().collect()
}

fn hyper(k: usize, x: &BigFloat) -> BigFloat {
    rho_hypergeometric(k, x, Tolerance::Absolute(1e-20)).unwrap().value
}

fn close(a: &BigFloat, b: &BigFloat, tol: f64) -> bool {
    (a.clone() - b.clone()).abs().to_f64() < tol
}

#[test]
fn rho_integral_examples() {
    let v = rho_integral(2, &big(1.0), 1e-14).unwrap().value;
    assert!((v.to_f64() - 0.6065306597126334).abs() < 1e-12);
    for k in 2..=5 {
        assert!(rho_integral(k, &big(0.0), 1e-14).unwrap().value.abs().to_f64() < 1e-12, "k = {k}");
    }
    let v3 = rho_integral(3, &big(1.0), 1e-14).unwrap().value;
    assert!(close(&v3, &hyper(3, &big(1.0)), 1e-10));
}

#[test]
fn rho_hypergeometric_examples() {
    let v = rho_hypergeometric(2, &big(1.0), Tolerance::Relative(1e-12)).unwrap().value;
    assert!((v.to_f64() - (-0.5f64).exp()).abs() < 1e-12);

    let a1 = 3f64.powf(1.0 / 3.0) * libm::tgamma(5.0 / 3.0) / libm::tgamma(4.0 / 3.0);
    for &x in &[1e-2, 2e-2, 5e-2] {
        let v = hyper(3, &big(x)).to_f64();
        assert!((v - a1 * x - 2.0 * x * x).abs() < 3.0 * x.powi(4), "x = {x}");
    }
    for k in 2..=6 {
        assert_eq!(hyper(k, &big(0.0)).to_f64(), 0.0);
    }
}

#[test]
fn pfq_examples() {
    let e = hypergeometric_pfq(&[1.0], &[1.0], &1.0).unwrap().value;
    assert!((e - std::f64::consts::E).abs() < 1e-14);
    let one = hypergeometric_pfq(&[0.25, 3.0, 0.5], &[1.5, 0.75, 2.0], &0.0).unwrap().value;
    assert_eq!(one, 1.0);
    // k = 3 at x = 1 from its two ₁F₁ pieces, against the integral
    let z = BigFloat::from_rational_in(&rat(-4, 3), ctx());
    let tol = Tolerance::Relative(1e-25);
    let w1 = hypergeometric_pfq_rational(&[rat(5, 6)], &[rat(2, 3)], &z, tol).unwrap().value;
    let w2 = hypergeometric_pfq_rational(&[rat(7, 6)], &[rat(4, 3)], &z, tol).unwrap().value;
    let a1 = big(3.0).powf(&BigFloat::from_rational_in(&rat(1, 3), ctx())) * BigFloat::from_rational_in(&rat(5, 3), ctx()).gamma()
        / BigFloat::from_rational_in(&rat(4, 3), ctx()).gamma();
    let rho = a1 * w1 + w2 * big(2.0);
    let direct = rho_integral(3, &big(1.0), 1e-20).unwrap().value;
    assert!(close(&rho, &direct, 1e-18), "{rho} vs {direct}");
    assert!(hypergeometric_pfq(&[1.0], &[0.0], &0.5).is_err());
}

#[test]
fn sigma_examples() {
    for (k, x) in [(3, 0.5), (3, 1.5), (4, 0.7)] {
        let s = sigma_j(k, k, &big(x), 1e-14).unwrap().value;
        let r = rho_integral(k, &big(x), 1e-14).unwrap().value;
        assert!(close(&s, &r, 1e-12));
    }
    for &x in &[0.02, 0.1, 0.2] {
        assert!(sigma_j(3, 2, &big(x), 1e-12).unwrap().value.to_f64() < 0.0);
    }
    assert!(sigma_j(3, 2, &big(2.0), 1e-12).unwrap().value.to_f64() > 0.0);
}

#[test]
fn sigma_distributions_are_normalized() {
    for (k, j) in [(3, 2), (3, 3), (4, 2), (4, 3)] {
        let f = WithCutoff {
            f: move |x: &BigFloat| Ok(sigma_j_series(k, j, x, 1e-14)?.value),
            cutoff: move |tol: f64| negligible_beyond(k, tol * 1e-4),
        };
        let mass = total_mass(&f, ctx(), 1e-10).unwrap().value.to_f64();
        assert!((mass - 1.0).abs() < 1e-8, "k = {k}, j = {j}: {mass}");
    }
}

#[test]
fn history_density_examples() {
    let tol = 1e-14;
    let rho = |k: usize, x: f64| rho_integral(k, &big(x), tol).unwrap().value.to_f64();

    let h = ContinuousHistory::new(2, p(&[(2, 1)]), vec![big(0.3), big(0.4), big(0.5)]).unwrap();
    assert!((history_density(2, &h, tol).unwrap().value.to_f64() - 0.5 * rho(2, 1.2)).abs() < 1e-12);

    let h = ContinuousHistory::new(3, p(&[(3, 1)]), vec![big(0.2), big(0.1), big(0.3), big(0.4)]).unwrap();
    assert!((history_density(3, &h, tol).unwrap().value.to_f64() + rho(3, 1.0) / 3.0).abs() < 1e-12);

    let h = ContinuousHistory::new(4, p(&[(4, 2)]), (0..9).map(|_| big(0.1)).collect()).unwrap();
    assert!((history_density(4, &h, tol).unwrap().value.to_f64() - rho(4, 0.9) / 16.0).abs() < 1e-12);

    let h = ContinuousHistory::new(3, BTreeMap::new(), vec![big(0.8)]).unwrap();
    assert!((history_density(3, &h, tol).unwrap().value.to_f64() - rho(3, 0.8)).abs() < 1e-12);
}

#[test]
fn history_density_sees_only_the_total_length() {
    let q = p(&[(2, 1)]);
    let a = ContinuousHistory::new(3, q.clone(), vec![big(0.1), big(0.2), big(0.9)]).unwrap();
    let b = ContinuousHistory::new(3, q, vec![big(0.6), big(0.4), big(0.2)]).unwrap();
    let (da, db) = (history_density(3, &a, 1e-14).unwrap().value, history_density(3, &b, 1e-14).unwrap().value);
    assert!(close(&da, &db, 1e-13));
    assert!(ContinuousHistory::new(3, p(&[(4, 1)]), vec![big(0.1); 5]).is_err());
    assert!(ContinuousHistory::new(3, p(&[(2, 1)]), vec![big(0.1); 2]).is_err());
    assert!(ContinuousHistory::new(3, p(&[(2, 1)]), vec![big(0.1), big(0.0), big(0.1)]).is_err());
}

#[test]
fn history_density_routes_agree() {
    for (k, q) in [(3, p(&[(2, 1)])), (4, p(&[(2, 1), (3, 1)])), (5, p(&[(4, 1)]))] {
        let x = big(1.1);
        let a = history_density_series(k, &q, &x, 1e-16).unwrap().value;
        let n = 1 + q.iter().map(|(i, c)| i * c).sum::<usize>();
        let h = ContinuousHistory::new(k, q, vec![x.clone() / big(n as f64); n]).unwrap();
        let b = history_density(k, &h, 1e-16).unwrap().value;
        assert!(close(&a, &b, 1e-14), "k = {k}");
    }
}

#[test]
fn weyl_examples() {
    let exp = WithCutoff { f: |u: &f64| Ok((-u).exp()), cutoff: |tol: f64| -tol.ln() };
    let v = weyl_fractional_integral(&exp, &rat(1, 2), &0.0, 1e-12).unwrap().value;
    assert!((v - 1.0).abs() < 1e-10);

    let gauss = WithCutoff {
        f: |u: &f64| Ok(u * (-u * u / 2.0).exp()),
        cutoff: |tol: f64| (-2.0 * tol.ln()).sqrt() + 1.0,
    };
    for &x in &[0.0, 0.5, 1.7] {
        let v = weyl_fractional_integral(&gauss, &rat(1, 1), &x, 1e-12).unwrap().value;
        assert!((v - (-x * x / 2.0).exp()).abs() < 1e-10);
    }
}

#[test]
fn half_integral_of_the_k3_profile() {
    // (−d)^{−1/2} ρ = (−d)^{−1} φ(·; p_2 = 1) / μ_2 with μ_2 = 1, and φ(·; p_2 = 1) ∝ σ_2
    let x = big(1.0);
    let rho = ProfileFn { k: 3, tol: 1e-16 };
    let half = weyl_fractional_integral(&rho, &rat(1, 2), &x, 1e-13).unwrap().value;

    let phi = WithCutoff {
        f: |u: &BigFloat| Ok(history_density_series(3, &p(&[(2, 1)]), u, 1e-16)?.value),
        cutoff: |tol: f64| negligible_beyond(3, tol * 1e-4),
    };
    let tail = weyl_fractional_integral(&phi, &rat(1, 1), &x, 1e-13).unwrap().value;
    assert!(close(&half, &tail, 1e-11));

    let sigma = WithCutoff {
        f: |u: &BigFloat| Ok(sigma_j_series(3, 2, u, 1e-16)?.value),
        cutoff: |tol: f64| negligible_beyond(3, tol * 1e-4),
    };
    let sigma_tail = weyl_fractional_integral(&sigma, &rat(1, 1), &x, 1e-13).unwrap().value;
    let ratio = |u: f64| {
        history_density_series(3, &p(&[(2, 1)]), &big(u), 1e-16).unwrap().value.to_f64()
            / sigma_j_series(3, 2, &big(u), 1e-16).unwrap().value.to_f64()
    };
    assert!((ratio(0.7) - ratio(1.9)).abs() < 1e-10);
    assert!((half.to_f64() - ratio(1.3) * sigma_tail.to_f64()).abs() < 1e-10);

    // the fractional equation at k = 3 gives the same number as ρ(1)/2
    assert!((half.to_f64() - hyper(3, &x).to_f64() / 2.0).abs() < 1e-11);
}

#[test]
fn fracdif_examples() {
    let grid: Vec<BigFloat> = [0.1, 0.7, 1.3, 2.2, 3.0].iter().map(|&x| big(x)).collect();
    for k in 2..=4 {
        let r = fracdif_residual(k, &grid, 1e-10).unwrap();
        assert!(r < 1e-8, "k = {k}: {r:e}");
    }
    assert!(fracdif_residual(3, &[big(0.0)], 1e-10).is_err());
}

#[test]
fn ode_examples() {
    let printed = [
        (2, vec![rat(2, 1), rat(1, 1), rat(1, 1)]),
        (3, vec![rat(18, 1), rat(22, 1), rat(4, 1), rat(1, 1)]),
        (4, vec![rat(384, 1), rat(771, 1), rat(297, 1), rat(27, 1), rat(1, 1)]),
    ];
    for (k, coeffs) in printed {
        assert_eq!(expand_ode(k).unwrap().coeffs, coeffs);
    }
    for k in 2..=4 {
        let r = ode_residual(k, &big(1.0), 1e-14).unwrap().value.abs().to_f64();
        assert!(r < 1e-8, "k = {k}: {r:e}");
    }
    assert!(ode_residual(3, &big(0.0), 1e-12).is_err());
}

#[test]
fn moment_examples() {
    for k in 2..=6 {
        assert!((moment::<BigFloat>(k, 0, ctx()).to_f64() - 1.0).abs() < 1e-25);
    }
    assert!((moment::<BigFloat>(2, 2, ctx()).to_f64() - 2.0).abs() < 1e-25);
    let m1 = moment::<BigFloat>(2, 1, ctx()).to_f64();
    assert!((m1 - (std::f64::consts::PI / 2.0).sqrt()).abs() < 1e-15);
    assert!((m1 - 1.2533141373).abs() < 1e-10);
}

#[test]
fn fixed_size_examples() {
    for &x in &[0.3, 1.0, 2.5] {
        let a = rho_fixed_size(3, &big(1.0), &big(x), 1e-16).unwrap().value;
        assert!(close(&a, &hyper(3, &big(x)), 1e-15));
    }
    let v = rho_fixed_size(2, &big(4.0), &big(2.0), 1e-16).unwrap().value.to_f64();
    assert!((v - 2.0 * (-0.5f64).exp()).abs() < 1e-14);

    let size = 2.0f64;
    let scale = f64::powf(size, 2.0 / 3.0);
    let f = WithCutoff {
        f: move |x: &BigFloat| Ok(rho_fixed_size(3, &big(size), x, 1e-16)?.value),
        cutoff: move |tol: f64| scale * negligible_beyond(3, tol * 1e-3),
    };
    let mass = total_mass(&f, ctx(), 1e-10).unwrap().value.to_f64();
    assert!((mass - size).abs() < 1e-8, "{mass}");
    assert!(rho_fixed_size(3, &big(0.0), &big(1.0), 1e-12).is_err());
}

#[test]
fn laplace_examples() {
    let route = DensityRoute::Series;
    let r = laplace_consistency(2, &big(1.0), &BTreeMap::new(), route, 1e-10).unwrap();
    assert!(r.value.abs().to_f64() < 1e-8);
    let w3 = UniversalWeights::new(3);
    assert_eq!(w3.mu_product(&p(&[(2, 1)])), rat(1, 1));
    let r = laplace_consistency(3, &big(1.0), &p(&[(2, 1)]), route, 1e-10).unwrap();
    assert!(r.value.abs().to_f64() < 1e-8);
    let w4 = UniversalWeights::new(4);
    assert_eq!(w4.mu_product(&p(&[(3, 1)])), rat(-1, 1));
    let r = laplace_consistency(4, &big(0.5), &p(&[(3, 1)]), route, 1e-10).unwrap();
    assert!(r.value.abs().to_f64() < 1e-8);
    assert!(laplace_consistency(3, &big(0.0), &BTreeMap::new(), route, 1e-10).is_err());
}

#[test]
fn tail_examples() {
    for (k, target) in [(2, rat(1, 2)), (3, rat(4, 3)), (4, rat(27, 4))] {
        let fit = tail_exponent::<BigFloat>(k, ctx()).unwrap();
        assert_eq!(fit.target, target);
        assert!(fit.relative_deviation() < 0.02, "{fit:?}");
        // log-log slope of the prefactor is near k/2
        assert!((fit.power - k as f64 / 2.0).abs() < 0.5, "{fit:?}");
    }
}

#[test]
fn consistency_examples() {
    let route = DensityRoute::Series;
    let r = consistency_relation_residual(2, &BTreeMap::new(), &big(1.0), route, 1e-10).unwrap();
    assert!(r.value.abs().to_f64() < 1e-8);
    let r = consistency_relation_residual(3, &p(&[(2, 1)]), &big(1.0), route, 1e-9).unwrap();
    assert!(r.value.abs().to_f64() < 1e-7);
    let r = consistency_relation_residual(4, &p(&[(3, 1)]), &big(1.0), route, 1e-9).unwrap();
    assert!(r.value.abs().to_f64() < 1e-7);
    assert!(consistency_relation_residual(3, &p(&[(4, 1)]), &big(1.0), route, 1e-9).is_err());
}

#[test]
fn universal_weights() {
    for k in 2..=7 {
        let w = UniversalWeights::new(k);
        for i in 2..=k {
            let sign = if i % 2 == 0 { 1 } else { -1 };
            assert!(w.mu(i) * rat(sign, 1) > rat(0, 1));
        }
        assert_eq!(w.alpha[&k], rat(0, 1));
        assert_eq!(w.alpha[&2], rat(k as i64 - 2, k as i64 - 1));
        assert_eq!(w.nu, rat(k as i64 - 1, k as i64));
        assert_eq!(w.d, rat(k as i64, k as i64 - 1));
    }
}

#[test]
fn series_prefactors_are_sine_weighted() {
    // A_p = C sin(πp/k) ((k−1)^{k−1}/k)^{p/k} Π Γ(a_i)/Γ(b_i),
    // C = √(2π(k−1)/k) / (k^{1/k} Γ(1/k + 1) sin(π/k))
    let c = Precision::from_digits(40);
    let r = |q: &mcrt_core::Rational| BigFloat::from_rational_in(q, c);
    for k in 2..=6usize {
        let kt = BigFloat::from_i64_in(k as i64, c);
        let pi = BigFloat::pi_in(c);
        let inv_k = r(&rat(1, k as i64));
        let big_c = (pi.clone() * r(&rat(2 * (k as i64 - 1), k as i64))).sqrt()
            / (kt.powf(&inv_k) * (inv_k.clone() + r(&rat(1, 1))).gamma() * (pi.clone() * inv_k.clone()).sin());
        for term in rho_hyper_parameters(k) {
            let mut gammas = r(&rat(1, 1));
            for a in &term.a {
                gammas *= r(a).gamma();
            }
            for b in &term.b {
                gammas = gammas / r(b).gamma();
            }
            let base = r(&tail_coefficient(k)).powf(&r(&rat(term.p as i64, k as i64)));
            let expected = big_c.clone() * (pi.clone() * r(&rat(term.p as i64, k as i64))).sin() * base * gammas;
            let got: BigFloat = term.prefactor(c);
            assert!(((got - expected.clone()) / expected).abs().to_f64() < 1e-35, "k = {k}, p = {}", term.p);
        }
    }
}
