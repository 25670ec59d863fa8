use std::collections::BTreeMap;

use mcrt_core::models::*;
use mcrt_core::{rat, Error, Rational};

fn g(w: &WeightSet) -> Vec<(usize, Rational)> {
    w.g.iter().filter(|(_, v)| **v != rat(0, 1)).map(|(i, v)| (*i, v.clone())).collect()
}

#[test]
fn minimal_weight_examples() {
    assert_eq!(g(&minimal_weights(2).unwrap()), vec![(2, rat(1, 2))]);
    assert_eq!(g(&minimal_weights(3).unwrap()), vec![(2, rat(1, 1)), (3, rat(-1, 3))]);
    assert_eq!(
        g(&minimal_weights(4).unwrap()),
        vec![(2, rat(3, 2)), (3, rat(-1, 1)), (4, rat(1, 4))]
    );
    assert!(matches!(minimal_weights(1), Err(Error::InvalidOrder(1))));
}

#[test]
fn validation_examples() {
    let cp = validate_multicritical(&minimal_weights(3).unwrap(), &rat(1, 1)).unwrap();
    assert_eq!((cp.t_c.clone(), cp.lambda_c.clone(), cp.a.clone()), (rat(1, 1), rat(1, 3), rat(1, 1)));
    assert!(cp.normalized);
    assert!(!cp.radius_unverified);

    let half = WeightSet::custom(2, BTreeMap::from([(2, rat(1, 2))])).unwrap();
    let cp = validate_multicritical(&half, &rat(1, 1)).unwrap();
    assert_eq!(cp.lambda_c, rat(1, 2));
    assert!(cp.normalized);
    assert!(cp.radius_unverified);

    let square = WeightSet::custom(3, BTreeMap::from([(2, rat(1, 1))])).unwrap();
    match validate_multicritical(&square, &rat(1, 1)) {
        Err(Error::NotMulticritical { order, value, .. }) => {
            assert_eq!(order, 1);
            assert_eq!(value, "2");
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn first_violated_order_is_reported() {
    // f = T²/2 has f'(1) = 1 but f''(1) = 1, so it is only 2-critical
    let w = WeightSet::custom(3, BTreeMap::from([(2, rat(1, 2))])).unwrap();
    match validate_multicritical(&w, &rat(1, 1)) {
        Err(Error::NotMulticritical { order: 2, value, .. }) => assert_eq!(value, "1"),
        other => panic!("{other:?}"),
    }
}

#[test]
fn custom_sets_need_a_critical_point() {
    let w = WeightSet::custom(2, BTreeMap::from([(2, rat(1, 2))])).unwrap();
    assert!(matches!(critical_point(&w, None), Err(Error::MissingCriticalPoint)));
    assert!(critical_point(&minimal_weights(5).unwrap(), None).unwrap().normalized);
}

#[test]
fn derivative_examples() {
    let k2 = minimal_weights(2).unwrap();
    let k3 = minimal_weights(3).unwrap();
    assert_eq!(derivative_at(&k2, 1, &rat(1, 1)), rat(1, 1));
    assert_eq!(derivative_at(&k3, 2, &rat(1, 1)), rat(0, 1));
    assert_eq!(derivative_at(&k3, 3, &rat(1, 1)), rat(-2, 1));
    assert_eq!(derivative_at(&k3, 0, &rat(1, 2)), rat(1, 4) - rat(1, 24));
}

#[test]
fn json_round_trip() {
    let w = minimal_weights(3).unwrap();
    let doc = w.to_json();
    assert_eq!(doc, r#"{"g":{"2":"1","3":"-1/3"},"k":3}"#);
    assert_eq!(g(&WeightSet::from_json(&doc).unwrap()), g(&w));
    assert!(WeightSet::from_json(r#"{"k":2,"g":{"2":"1/0"}}"#).is_err());
}
