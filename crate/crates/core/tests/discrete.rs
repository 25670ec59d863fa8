use std::collections::BTreeMap;

use mcrt_core::discrete::*;
use mcrt_core::models::{minimal_weights, WeightSet};
use mcrt_core::{rat, BigFloat, Error, Precision, Rational, Real};

fn free() -> WeightSet {
    WeightSet::custom(2, BTreeMap::new()).unwrap()
}

fn table(rho: &ProfileTable) -> Vec<Rational> {
    (1..=rho.n).map(|l| rho.get(l)).collect()
}

#[test]
fn partition_function_examples() {
    assert_eq!(partition_function(&minimal_weights(2).unwrap(), 3).unwrap(), rat(1, 2));
    assert_eq!(partition_function(&minimal_weights(3).unwrap(), 3).unwrap(), rat(5, 3));
    assert_eq!(partition_function(&free(), 1).unwrap(), rat(1, 1));
    for n in 2..6 {
        assert_eq!(partition_function(&free(), n).unwrap(), rat(0, 1));
    }
}

#[test]
fn average_profile_examples() {
    let k2 = minimal_weights(2).unwrap();
    assert_eq!(table(&average_profile(&k2, 2).unwrap()), vec![rat(0, 1), rat(1, 1)]);
    assert_eq!(table(&average_profile(&k2, 3).unwrap()), vec![rat(0, 1), rat(1, 3), rat(2, 3)]);
    for w in [k2, minimal_weights(3).unwrap(), minimal_weights(4).unwrap()] {
        for n in [1, 5, 17] {
            assert_eq!(average_profile(&w, n).unwrap().total(), rat(1, 1));
        }
    }
    assert!(matches!(average_profile(&free(), 3), Err(Error::ZeroPartitionFunction(3))));
}

#[test]
fn single_branch_history_is_the_profile() {
    let w = minimal_weights(3).unwrap();
    let ens = Ensemble::new(&w, 9).unwrap();
    let rho = ens.average_profile(9).unwrap();
    for l in 1..=9 {
        assert_eq!(ens.history_weight(9, &DiscreteHistory::single_branch(l)).unwrap(), rho.get(l as usize));
    }
}

#[test]
fn binary_history_matches_marking_oracle() {
    let w = minimal_weights(2).unwrap();
    let oracle = history_tally(&w, 3, 2).unwrap();
    let by_oracle = |h: &DiscreteHistory| oracle.get(h).cloned().unwrap_or_else(|| rat(0, 1));
    // all lengths 1 leaves no room for the third leaf
    let tight: DiscreteHistory = "(((1)(2))L=[1,1,1])".parse().unwrap();
    assert_eq!(history_weight(&w, 3, &tight).unwrap(), rat(0, 1));
    assert_eq!(by_oracle(&tight), rat(0, 1));
    // both 3-leaf trees have a cherry at depth 2: 2 · (1/4) / (9 · Z_3)
    let h: DiscreteHistory = "(((1)(2))L=[2,1,1])".parse().unwrap();
    assert_eq!(by_oracle(&h), rat(1, 9));
    assert_eq!(history_weight(&w, 3, &h).unwrap(), rat(1, 9));
}

#[test]
fn two_mark_histories_are_normalized() {
    let w = minimal_weights(2).unwrap();
    let ens = Ensemble::new(&w, 3).unwrap();
    let total: Rational = enumerate_histories(2, 3, 2).iter().map(|h| ens.history_weight(3, h).unwrap()).sum();
    assert_eq!(total, rat(1, 1));
}

#[test]
fn scaling_exponent_examples() {
    let binary: DiscreteHistory = "(((1)(2))L=[2,1,1])".parse().unwrap();
    assert_eq!(scaling_exponent(&binary, 2), rat(0, 1));
    let doubled: DiscreteHistory = "((1,2)L=[3])".parse().unwrap();
    assert_eq!(scaling_exponent(&doubled, 2), rat(1, 1));
    let quartic: DiscreteHistory = "(((1)(2)(3))L=[1,1,1,1])".parse().unwrap();
    assert_eq!(scaling_exponent(&quartic, 2), rat(1, 2));
    assert_eq!(scaling_exponent(&quartic, 3), rat(0, 1));
}

#[test]
fn rescaled_profile_examples() {
    let ctx = Precision::from_digits(30);
    let rho = average_profile(&minimal_weights(2).unwrap(), 2).unwrap();
    let pts = rescaled_profile::<BigFloat>(&rho, 2, ctx);
    let nonzero: Vec<(f64, f64)> =
        pts.iter().filter(|(_, y)| y.to_f64() != 0.0).map(|(x, y)| (x.to_f64(), y.to_f64())).collect();
    assert_eq!(nonzero, vec![(1.0, 2.0)]);

    let rho = average_profile(&minimal_weights(3).unwrap(), 60).unwrap();
    let dx = 1.0 / length_scale::<f64>(3, 60, ());
    let mass: f64 = rescaled_profile::<f64>(&rho, 3, ()).iter().map(|(_, y)| y * dx).sum();
    assert!((mass - 1.0).abs() < 1e-12);
}

#[test]
fn enumerate_trees_examples() {
    let k2 = enumerate_trees(&minimal_weights(2).unwrap(), 3).unwrap();
    assert_eq!(k2.len(), 2);
    assert!(k2.iter().all(|(_, w)| *w == rat(1, 4)));

    let mut k3: Vec<Rational> = enumerate_trees(&minimal_weights(3).unwrap(), 3).unwrap().into_iter().map(|(_, w)| w).collect();
    k3.sort();
    assert_eq!(k3, vec![rat(-1, 3), rat(1, 1), rat(1, 1)]);

    let single = enumerate_trees(&free(), 1).unwrap();
    assert_eq!(single.len(), 1);
    assert_eq!(single[0].1, rat(1, 1));
    assert!(matches!(enumerate_trees(&free(), 40), Err(Error::OracleBound { .. })));
}

#[test]
fn history_text_round_trip() {
    let h: DiscreteHistory = "( ((2)(1)) L=[2,1,1] )".parse().unwrap();
    assert_eq!(h.to_string(), "(((2)(1))L=[2,1,1])");
    assert_eq!(h.marks(), 2);
    assert_eq!(h.branch_counts(), BTreeMap::from([(2, 1)]));
    assert!("(((1)(2))L=[2,1])".parse::<DiscreteHistory>().is_err());
    assert!("(((1)(1))L=[1,1,1])".parse::<DiscreteHistory>().is_err());
    assert!("(((1)(3))L=[1,1,1])".parse::<DiscreteHistory>().is_err());
    assert!("((1)L=[0])".parse::<DiscreteHistory>().is_err());
}
