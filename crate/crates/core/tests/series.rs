use mcrt_core::series::solve_fixed_point;
use mcrt_core::{rat, Error, Rational, RationalSeries};

fn s(c: &[(i64, i64)], order: usize) -> RationalSeries {
    RationalSeries::new(c.iter().map(|&(n, d)| rat(n, d)).collect(), order)
}

fn ints(c: &[i64], order: usize) -> RationalSeries {
    RationalSeries::new(c.iter().map(|&n| rat(n, 1)).collect(), order)
}

#[test]
fn add_examples() {
    assert_eq!(&ints(&[1, 1], 3) + &ints(&[1, -1], 3), ints(&[2], 3));
    let a = s(&[(0, 1), (3, 7), (-2, 5)], 4);
    assert_eq!(&a + &RationalSeries::zero(4), a);
    assert_eq!(&s(&[(0, 1), (1, 2)], 2) + &s(&[(0, 1), (1, 3)], 2), s(&[(0, 1), (5, 6)], 2));
}

#[test]
fn mixed_orders_truncate_to_the_minimum() {
    let sum = &ints(&[1, 1, 1, 1], 3) + &ints(&[1, 1], 1);
    assert_eq!(sum.order(), 1);
    assert_eq!(sum, ints(&[2, 2], 1));
}

#[test]
fn mul_examples() {
    assert_eq!(&ints(&[1, 1], 2) * &ints(&[1, -1], 2), ints(&[1, 0, -1], 2));
    let x = RationalSeries::variable(1);
    assert_eq!(&x * &x, RationalSeries::zero(1));
    // k = 2 minimal: T = λ + λ²/2 + λ³/2 + ..., so T² = λ² + λ³ + ...
    let t = solve_fixed_point(&[rat(0, 1), rat(0, 1), rat(1, 2)], 3).unwrap();
    let t2 = &t * &t;
    assert_eq!(t2.coeff(2).unwrap(), &rat(1, 1));
    assert_eq!(t2.coeff(3).unwrap(), &rat(1, 1));
}

#[test]
fn pow_examples() {
    let a = s(&[(2, 3), (1, 1), (-1, 4)], 3);
    assert_eq!(a.pow(0), RationalSeries::one(3));
    assert_eq!(a.pow(1), a);
    assert_eq!(ints(&[1, 1], 3).pow(3), ints(&[1, 3, 3, 1], 3));
}

#[test]
fn apply_polynomial_examples() {
    let half_square = [rat(0, 1), rat(0, 1), rat(1, 2)];
    let lam = RationalSeries::variable(4);
    assert_eq!(RationalSeries::apply_polynomial(&half_square, &lam), s(&[(0, 1), (0, 1), (1, 2)], 4));
    let k3 = [rat(0, 1), rat(0, 1), rat(1, 1), rat(-1, 3)];
    let t = ints(&[0, 1, 1], 3);
    assert_eq!(RationalSeries::apply_polynomial(&k3, &t), s(&[(0, 1), (0, 1), (1, 1), (5, 3)], 3));
    assert!(RationalSeries::apply_polynomial(&[], &t).is_zero());
}

#[test]
fn fixed_point_examples() {
    let k2 = solve_fixed_point(&[rat(0, 1), rat(0, 1), rat(1, 2)], 4).unwrap();
    assert_eq!(k2, s(&[(0, 1), (1, 1), (1, 2), (1, 2), (5, 8)], 4));
    let k3 = solve_fixed_point(&[rat(0, 1), rat(0, 1), rat(1, 1), rat(-1, 3)], 3).unwrap();
    assert_eq!(k3, s(&[(0, 1), (1, 1), (1, 1), (5, 3)], 3));
    let free = solve_fixed_point::<Rational>(&[], 5).unwrap();
    assert_eq!(free, RationalSeries::variable(5));
}

#[test]
fn fixed_point_rejects_unit_linear_term() {
    let err = solve_fixed_point(&[rat(0, 1), rat(1, 1), rat(1, 2)], 4).unwrap_err();
    assert!(matches!(err, Error::DegenerateLinearTerm));
    assert!(solve_fixed_point(&[rat(1, 1), rat(0, 1)], 4).is_err());
}

#[test]
fn coeff_examples() {
    let k2 = solve_fixed_point(&[rat(0, 1), rat(0, 1), rat(1, 2)], 6).unwrap();
    assert_eq!(k2.coeff(2).unwrap(), &rat(1, 2));
    assert_eq!(RationalSeries::variable(3).coeff(0).unwrap(), &rat(0, 1));
    let k3 = solve_fixed_point(&[rat(0, 1), rat(0, 1), rat(1, 1), rat(-1, 3)], 6).unwrap();
    assert_eq!(k3.coeff(3).unwrap(), &rat(5, 3));
    assert!(matches!(k2.coeff(7), Err(Error::CoefficientOutOfRange { index: 7, order: 6 })));
}

#[test]
fn hardware_scalars_share_the_engine() {
    let t = solve_fixed_point(&[0.0f64, 0.0, 0.5], 4).unwrap();
    assert_eq!(t.coeffs(), &[0.0, 1.0, 0.5, 0.5, 0.625]);
    let t32 = solve_fixed_point(&[0.0f32, 0.0, 1.0, -1.0 / 3.0], 3).unwrap();
    assert!((t32.coeffs()[3] - 5.0 / 3.0).abs() < 1e-6);
}
