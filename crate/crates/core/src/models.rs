//! Vertex weight sets and their multicritical points.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::{format_rational, parse_rational};
use crate::Rational;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WeightKind {
    Minimal,
    Custom,
}

/// Weights `g_i` of `(i+1)`-valent inner vertices, `f(T) = Σ g_i T^i`.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightSet {
    pub k: usize,
    pub g: BTreeMap<usize, Rational>,
    pub kind: WeightKind,
}

/// Validated critical point of a weight set.
#[derive(Clone, Debug, PartialEq)]
pub struct CriticalPoint {
    pub t_c: Rational,
    pub lambda_c: Rational,
    pub a: Rational,
    pub order: usize,
    /// `T_c = A = 1` and `λ_c = 1/k`.
    pub normalized: bool,
    /// Set for custom weights: a `k`-th order tuning at `T_c` does not by
    /// itself guarantee that `λ_c` is the radius of convergence of `T(λ)`.
    pub radius_unverified: bool,
}

fn binomial(n: usize, k: usize) -> BigInt {
    let mut acc = BigInt::one();
    for j in 0..k {
        acc = acc * BigInt::from(n - j) / BigInt::from(j + 1);
    }
    acc
}

fn factorial(n: usize) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, j| acc * BigInt::from(j))
}

/// Minimal `k`-th order multicritical weights, `f(T) = (kT − 1 + (1−T)^k)/k`.
pub fn minimal_weights(k: usize) -> Result<WeightSet> {
    if k < 2 {
        return Err(Error::InvalidOrder(k));
    }
    let g = (2..=k)
        .map(|i| {
            let sign = if i % 2 == 0 { 1 } else { -1 };
            (i, Rational::new(BigInt::from(sign) * binomial(k, i), BigInt::from(k)))
        })
        .collect();
    Ok(WeightSet { k, g, kind: WeightKind::Minimal })
}

impl WeightSet {
    pub fn custom(k: usize, g: BTreeMap<usize, Rational>) -> Result<Self> {
        if k < 2 {
            return Err(Error::InvalidOrder(k));
        }
        if g.contains_key(&0) {
            return Err(Error::InvalidArgument("valence index must be at least 1".into()));
        }
        let g = g.into_iter().filter(|(_, v)| !v.is_zero()).collect();
        Ok(WeightSet { k, g, kind: WeightKind::Custom })
    }

    /// Largest `i` with `g_i ≠ 0` (0 for the empty set).
    pub fn degree(&self) -> usize {
        self.g.keys().next_back().copied().unwrap_or(0)
    }

    pub fn weight(&self, i: usize) -> Rational {
        self.g.get(&i).cloned().unwrap_or_else(Rational::zero)
    }

    /// Dense coefficient list `[0, g_1, …, g_deg]`.
    pub fn coefficients(&self) -> Vec<Rational> {
        (0..=self.degree()).map(|i| self.weight(i)).collect()
    }

    /// `f(T_0)`.
    pub fn eval(&self, t0: &Rational) -> Rational {
        derivative_at(self, 0, t0)
    }
}

/// `f^{(j)}(T_0)`, exact.
pub fn derivative_at(w: &WeightSet, j: usize, t0: &Rational) -> Rational {
    let mut acc = Rational::zero();
    for (&i, g) in w.g.range(j..) {
        let falling = (0..j).fold(BigInt::one(), |a, s| a * BigInt::from(i - s));
        let pow = num_traits::pow(t0.clone(), i - j);
        acc += g * Rational::from_integer(falling) * pow;
    }
    acc
}

/// Checks a claimed `k`-th order critical point and derives `λ_c` and `A`.
pub fn validate_multicritical(w: &WeightSet, t_c: &Rational) -> Result<CriticalPoint> {
    let k = w.k;
    let fail = |order: usize, value: Rational| Error::NotMulticritical {
        claimed: k,
        t_c: format_rational(t_c),
        order,
        value: format_rational(&value),
    };
    let d1 = derivative_at(w, 1, t_c);
    if !d1.is_one() {
        return Err(fail(1, d1));
    }
    for j in 2..k {
        let dj = derivative_at(w, j, t_c);
        if !dj.is_zero() {
            return Err(fail(j, dj));
        }
    }
    let dk = derivative_at(w, k, t_c);
    if dk.is_zero() {
        return Err(fail(k, dk));
    }
    let lambda_c = t_c - w.eval(t_c);
    if lambda_c.is_zero() {
        return Err(Error::InvalidArgument("λ_c = T_c − f(T_c) vanishes".into()));
    }
    let sign = if k % 2 == 0 { Rational::one() } else { -Rational::one() };
    let a = sign * &dk * num_traits::pow(t_c.clone(), k)
        / (Rational::from_integer(factorial(k)) * &lambda_c);
    let normalized = t_c.is_one() && a.is_one() && lambda_c == Rational::new(1.into(), k.into());
    Ok(CriticalPoint {
        t_c: t_c.clone(),
        lambda_c,
        a,
        order: k,
        normalized,
        radius_unverified: w.kind == WeightKind::Custom,
    })
}

/// Critical point of a minimal set (`T_c = 1`), or the supplied one for custom sets.
pub fn critical_point(w: &WeightSet, t_c: Option<&Rational>) -> Result<CriticalPoint> {
    match (w.kind, t_c) {
        (_, Some(t)) => validate_multicritical(w, t),
        (WeightKind::Minimal, None) => validate_multicritical(w, &Rational::one()),
        (WeightKind::Custom, None) => Err(Error::MissingCriticalPoint),
    }
}

#[derive(Serialize, Deserialize)]
struct WeightDoc {
    k: usize,
    g: BTreeMap<String, String>,
}

impl WeightSet {
    /// `{"g": {"2": "1/2"}, "k": 2}` with sorted keys.
    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_json_value()).expect("plain map serializes")
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        let g: serde_json::Map<String, serde_json::Value> = self
            .g
            .iter()
            .map(|(i, v)| (i.to_string(), serde_json::Value::String(format_rational(v))))
            .collect();
        serde_json::json!({ "k": self.k, "g": g })
    }

    /// Parses the JSON form; the result is `Minimal` if it coincides with the
    /// minimal set of its order.
    pub fn from_json(s: &str) -> Result<Self> {
        let doc: WeightDoc = serde_json::from_str(s)?;
        let mut g = BTreeMap::new();
        for (key, val) in doc.g {
            let i: usize = key
                .parse()
                .map_err(|_| Error::Parse(format!("valence index {key:?} is not an integer")))?;
            g.insert(i, parse_rational(&val)?);
        }
        let mut w = WeightSet::custom(doc.k, g)?;
        if minimal_weights(doc.k).map(|m| m.g == w.g).unwrap_or(false) {
            w.kind = WeightKind::Minimal;
        }
        Ok(w)
    }
}

/// Sign of `g_i` as `-1`, `0` or `1`.
pub fn weight_sign(w: &WeightSet, i: usize) -> i32 {
    let g = w.weight(i);
    if g.is_zero() {
        0
    } else if g.is_positive() {
        1
    } else {
        -1
    }
}

/// `f(T)` at a float argument, for diagnostics.
pub fn eval_f64(w: &WeightSet, t: f64) -> f64 {
    w.g.iter()
        .map(|(&i, g)| crate::rational_to_f64(g) * t.powi(i.to_i32().unwrap_or(i32::MAX)))
        .sum()
}
