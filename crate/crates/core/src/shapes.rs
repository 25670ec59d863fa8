//! Census of history shapes in the continuum limit.
//!
//! A shape is a planted plane tree whose branching points have between 2 and
//! `k` children. Leaves are labeled `1..m`; since every labeling of a plane
//! shape is distinct, only unlabeled shapes are generated and sums over
//! labeled shapes pick up a factor `m!`.
//!
//! Text form: a leaf is `*`, a branching point with `d` children is
//! `(d:` children `)`, e.g. `(2:*(3:***))`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::continuum::UniversalWeights;
use crate::error::{Error, Result};
use crate::io::{format_rational, CsvTable};
use crate::series::solve_fixed_point;
use crate::Rational;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Shape {
    Leaf,
    Node(Vec<Shape>),
}

impl Shape {
    pub fn leaves(&self) -> usize {
        match self {
            Shape::Leaf => 1,
            Shape::Node(c) => c.iter().map(Shape::leaves).sum(),
        }
    }

    /// `i ↦ p_i`, the number of branching points with `i` children.
    pub fn branch_counts(&self) -> BTreeMap<usize, usize> {
        fn walk(s: &Shape, p: &mut BTreeMap<usize, usize>) {
            if let Shape::Node(c) = s {
                *p.entry(c.len()).or_insert(0) += 1;
                c.iter().for_each(|x| walk(x, p));
            }
        }
        let mut p = BTreeMap::new();
        walk(self, &mut p);
        p
    }

    /// Number of branches `n = 1 + Σ i p_i`.
    pub fn branches(&self) -> usize {
        1 + self.branch_counts().iter().map(|(i, c)| i * c).sum::<usize>()
    }
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Shape::Leaf => f.write_str("*"),
            Shape::Node(c) => {
                write!(f, "({}:", c.len())?;
                for s in c {
                    write!(f, "{s}")?;
                }
                f.write_str(")")
            }
        }
    }
}

impl FromStr for Shape {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let compact: Vec<u8> = s.bytes().filter(|c| !c.is_ascii_whitespace()).collect();
        let mut pos = 0;
        let shape = parse_shape(&compact, &mut pos)?;
        if pos != compact.len() {
            return Err(Error::Parse(format!("trailing input after shape in {s:?}")));
        }
        Ok(shape)
    }
}

fn parse_shape(b: &[u8], pos: &mut usize) -> Result<Shape> {
    let bad = |what: &str, at: usize| Error::Parse(format!("{what} at byte {at} of shape"));
    match b.get(*pos) {
        Some(b'*') => {
            *pos += 1;
            Ok(Shape::Leaf)
        }
        Some(b'(') => {
            *pos += 1;
            let start = *pos;
            while b.get(*pos).is_some_and(u8::is_ascii_digit) {
                *pos += 1;
            }
            let d: usize = std::str::from_utf8(&b[start..*pos])
                .ok()
                .and_then(|t| t.parse().ok())
                .ok_or_else(|| bad("expected a child count", start))?;
            if b.get(*pos) != Some(&b':') {
                return Err(bad("expected ':'", *pos));
            }
            *pos += 1;
            let mut children = Vec::new();
            while b.get(*pos) != Some(&b')') {
                if *pos >= b.len() {
                    return Err(bad("unclosed '('", start - 1));
                }
                children.push(parse_shape(b, pos)?);
            }
            *pos += 1;
            if children.len() != d || d < 2 {
                return Err(Error::Parse(format!("node declares {d} children but has {}", children.len())));
            }
            Ok(Shape::Node(children))
        }
        _ => Err(bad("expected '*' or '('", *pos)),
    }
}

/// All unlabeled plane shapes with `m` leaves and branching degrees `2..=k`.
pub fn enumerate_shapes(k: usize, m: usize) -> Vec<Shape> {
    let mut table: Vec<Vec<Shape>> = vec![Vec::new(); m + 1];
    if m == 0 {
        return Vec::new();
    }
    table[1].push(Shape::Leaf);
    for size in 2..=m {
        let mut level = Vec::new();
        for d in 2..=k.min(size) {
            for parts in crate::discrete::compositions(size, d) {
                let mut acc: Vec<Vec<Shape>> = vec![Vec::new()];
                for &part in &parts {
                    acc = acc
                        .into_iter()
                        .flat_map(|prefix| {
                            table[part].iter().map(move |s| {
                                let mut v = prefix.clone();
                                v.push(s.clone());
                                v
                            })
                        })
                        .collect();
                }
                level.extend(acc.into_iter().map(Shape::Node));
            }
        }
        table[size] = level;
    }
    table.swap_remove(m)
}

fn factorial(n: usize) -> BigInt {
    (1..=n).fold(BigInt::one(), |a, j| a * BigInt::from(j))
}

/// Number of labeled shapes, `m!` times the plane count.
pub fn labeled_shape_count(k: usize, m: usize) -> BigInt {
    factorial(m) * BigInt::from(enumerate_shapes(k, m).len())
}

/// `z_m = (−1)^{m−1} k^m Π_{j=1}^{m} (1/k + 1 − j)`, exact.
pub fn z_normalizer(k: usize, m: usize) -> Rational {
    let kq = Rational::from_integer(BigInt::from(k));
    let inv_k = Rational::new(BigInt::one(), BigInt::from(k));
    let mut acc = if m % 2 == 1 { Rational::one() } else { -Rational::one() };
    for j in 1..=m {
        acc = acc * &kq * (&inv_k + Rational::from_integer(BigInt::from(1 - j as i64)));
    }
    acc
}

/// `Π μ_i^{p_i}` of a shape.
pub fn shape_mu_product(uw: &UniversalWeights, s: &Shape) -> Rational {
    s.branch_counts()
        .iter()
        .fold(Rational::one(), |acc, (&i, &c)| acc * num_traits::pow(uw.mu(i), c))
}

/// Weight `w(S) = Π μ_i^{p_i} / z_m` of one labeled version of `s`.
pub fn shape_weight(k: usize, s: &Shape) -> Rational {
    let uw = UniversalWeights::new(k);
    shape_mu_product(&uw, s) / z_normalizer(k, s.leaves())
}

/// `Σ w(S)` over all labeled shapes with `m` leaves; equals 1.
pub fn check_sum_rule(k: usize, m: usize) -> Rational {
    let uw = UniversalWeights::new(k);
    let plane = enumerate_shapes(k, m)
        .iter()
        .fold(Rational::zero(), |acc, s| acc + shape_mu_product(&uw, s));
    Rational::from_integer(factorial(m)) * plane / z_normalizer(k, m)
}

/// `[μ_0^m] Y` for `m = 0..=m_max`, where `Y = μ_0 + Σ μ_i Y^i`.
///
/// Solved as a fixed point and, independently, by expanding
/// `Y = 1 − (1 − kμ_0)^{1/k}` binomially; the routes must agree exactly.
pub fn shape_gf_coefficients(k: usize, m_max: usize) -> Result<Vec<Rational>> {
    let uw = UniversalWeights::new(k);
    let mut f = vec![Rational::zero(); k + 1];
    for i in 2..=k {
        f[i] = uw.mu(i);
    }
    let fixed = solve_fixed_point(&f, m_max)?.into_coeffs();
    // 1 − (1 − kμ)^{1/k} = −Σ_{m≥1} C(1/k, m) (−k)^m μ^m
    let a = Rational::new(BigInt::one(), BigInt::from(k));
    let mk = Rational::from_integer(-BigInt::from(k));
    let mut binom = Rational::one();
    let mut pow = Rational::one();
    let mut closed = vec![Rational::zero(); m_max + 1];
    for (m, c) in closed.iter_mut().enumerate().skip(1) {
        binom = binom * (&a - Rational::from_integer(BigInt::from(m - 1)))
            / Rational::from_integer(BigInt::from(m));
        pow *= &mk;
        *c = -(&binom * &pow);
    }
    if let Some(m) = (0..=m_max).find(|&m| fixed[m] != closed[m]) {
        return Err(Error::RouteMismatch(format!(
            "[μ_0^{m}] Y: fixed point {} vs binomial {}",
            format_rational(&fixed[m]),
            format_rational(&closed[m])
        )));
    }
    Ok(fixed)
}

/// Census table: one row per plane shape with its `p_i` and weight.
pub fn census_table(k: usize, m: usize) -> CsvTable {
    let uw = UniversalWeights::new(k);
    let z = z_normalizer(k, m);
    let mut header = vec!["id".to_string()];
    header.extend((2..=k).map(|i| format!("p_{i}")));
    header.extend(["num", "den", "shape"].map(String::from));
    let mut t = CsvTable::new(header);
    let mut total = Rational::zero();
    for (id, s) in enumerate_shapes(k, m).iter().enumerate() {
        let p = s.branch_counts();
        let w = shape_mu_product(&uw, s) / &z;
        total += &w;
        let mut row = vec![(id + 1).to_string()];
        row.extend((2..=k).map(|i| p.get(&i).copied().unwrap_or(0).to_string()));
        row.push(w.numer().to_string());
        row.push(w.denom().to_string());
        row.push(s.to_string());
        t.push(row);
    }
    t.footer("z_m", format_rational(&z));
    t.footer("labelings", factorial(m).to_string());
    t.footer("sum_rule", format_rational(&(Rational::from_integer(factorial(m)) * total)));
    t
}
