//! Brute-force enumeration of weighted planted plane trees.
//!
//! Used only as an oracle for the series formulas, so it favours clarity:
//! trees are built explicitly, weights are exact products of `g_i`.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use super::history::{compositions, DiscreteHistory, HistoryNode};
use crate::error::{Error, Result};
use crate::models::WeightSet;
use crate::Rational;

/// Largest tree size the enumerator accepts.
pub const ORACLE_MAX_LEAVES: usize = 12;

/// Subtree hanging below the root edge. Children are ordered.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum PlaneTree {
    Leaf,
    Node(Vec<Arc<PlaneTree>>),
}

impl PlaneTree {
    pub fn leaves(&self) -> usize {
        match self {
            PlaneTree::Leaf => 1,
            PlaneTree::Node(c) => c.iter().map(|t| t.leaves()).sum(),
        }
    }

    /// `Π g_{deg}` over inner vertices.
    pub fn weight(&self, w: &WeightSet) -> Rational {
        match self {
            PlaneTree::Leaf => Rational::one(),
            PlaneTree::Node(c) => c.iter().fold(w.weight(c.len()), |acc, t| acc * t.weight(w)),
        }
    }
}

/// All planted plane trees with `n` leaves and inner out-degrees in the
/// support of `w`, with their weights. Trees of weight zero never appear.
pub fn enumerate_trees(w: &WeightSet, n: usize) -> Result<Vec<(Arc<PlaneTree>, Rational)>> {
    if n > ORACLE_MAX_LEAVES {
        return Err(Error::OracleBound { requested: n, max: ORACLE_MAX_LEAVES });
    }
    if w.g.contains_key(&1) {
        return Err(Error::UnaryVertices);
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    let degrees: Vec<(usize, Rational)> = w.g.iter().map(|(&i, g)| (i, g.clone())).collect();
    let mut table: Vec<Vec<(Arc<PlaneTree>, Rational)>> = vec![Vec::new(); n + 1];
    table[1].push((Arc::new(PlaneTree::Leaf), Rational::one()));
    for size in 2..=n {
        let mut level = Vec::new();
        for (d, g) in &degrees {
            for parts in compositions(size, *d) {
                let mut acc: Vec<(Vec<Arc<PlaneTree>>, Rational)> = vec![(Vec::new(), g.clone())];
                for &part in &parts {
                    let mut next = Vec::new();
                    for (prefix, wt) in &acc {
                        for (sub, sw) in &table[part] {
                            let mut v = prefix.clone();
                            v.push(sub.clone());
                            next.push((v, wt * sw));
                        }
                    }
                    acc = next;
                }
                level.extend(acc.into_iter().map(|(c, wt)| (Arc::new(PlaneTree::Node(c)), wt)));
            }
        }
        table[size] = level;
    }
    Ok(table.swap_remove(n))
}

/// Edge distance from the root leaf to each leaf, in plane (left-to-right) order.
pub fn leaf_depths(t: &PlaneTree) -> Vec<usize> {
    fn walk(t: &PlaneTree, depth: usize, out: &mut Vec<usize>) {
        match t {
            PlaneTree::Leaf => out.push(depth),
            PlaneTree::Node(c) => c.iter().for_each(|s| walk(s, depth + 1, out)),
        }
    }
    let mut out = Vec::new();
    walk(t, 1, &mut out);
    out
}

fn partition_sum(trees: &[(Arc<PlaneTree>, Rational)], n: usize) -> Result<Rational> {
    let z = trees.iter().fold(Rational::zero(), |a, (_, w)| a + w);
    if z.is_zero() {
        return Err(Error::ZeroPartitionFunction(n));
    }
    Ok(z)
}

/// `(Z_N, ρ_N(L) for L = 1..N)` by counting leaves at each depth.
pub fn profile_tally(w: &WeightSet, n: usize) -> Result<(Rational, Vec<Rational>)> {
    let trees = enumerate_trees(w, n)?;
    let z = partition_sum(&trees, n)?;
    let mut rho = vec![Rational::zero(); n];
    for (t, wt) in &trees {
        for d in leaf_depths(t) {
            rho[d - 1] += wt;
        }
    }
    let norm = Rational::from_integer(BigInt::from(n)) * &z;
    Ok((z, rho.into_iter().map(|r| r / &norm).collect()))
}

/// History spanned by the root and the marked leaves; `marks_at[i]` lists the
/// marks on the `i`-th leaf in plane order.
fn history_of(t: &PlaneTree, marks_at: &[Vec<usize>]) -> DiscreteHistory {
    // subtree mark sets as bitmasks over labels
    fn mask(t: &PlaneTree, next_leaf: &mut usize, marks_at: &[Vec<usize>]) -> (u64, Annot) {
        match t {
            PlaneTree::Leaf => {
                let i = *next_leaf;
                *next_leaf += 1;
                let m = marks_at[i].iter().fold(0u64, |a, &x| a | (1 << x));
                (m, Annot { mask: m, leaf: Some(i), children: Vec::new() })
            }
            PlaneTree::Node(c) => {
                let kids: Vec<Annot> = c.iter().map(|s| mask(s, next_leaf, marks_at).1).collect();
                let m = kids.iter().fold(0, |a, k| a | k.mask);
                (m, Annot { mask: m, leaf: None, children: kids })
            }
        }
    }
    struct Annot {
        mask: u64,
        leaf: Option<usize>,
        children: Vec<Annot>,
    }
    fn build(a: &Annot, depth: u64, marks_at: &[Vec<usize>], lengths: &mut Vec<u64>) -> HistoryNode {
        let marked: Vec<&Annot> = a.children.iter().filter(|c| c.mask != 0).collect();
        match (a.leaf, marked.len()) {
            (Some(i), _) => {
                lengths.push(depth);
                HistoryNode::leaf(marks_at[i].clone())
            }
            (None, 1) => build(marked[0], depth + 1, marks_at, lengths),
            (None, _) => {
                lengths.push(depth);
                let children = marked.iter().map(|c| build(c, 1, marks_at, lengths)).collect();
                HistoryNode::Branch { children }
            }
        }
    }
    let mut counter = 0;
    let (_, annot) = mask(t, &mut counter, marks_at);
    let mut lengths = Vec::new();
    let root = build(&annot, 1, marks_at, &mut lengths);
    DiscreteHistory::new(root, lengths).expect("extracted histories are well formed")
}

/// `ρ_N(ℋ)` for every history reached by marking `m` leaves of every tree
/// of size `n` in all `n^m` ways.
pub fn history_tally(w: &WeightSet, n: usize, m: usize) -> Result<BTreeMap<DiscreteHistory, Rational>> {
    if m == 0 || m >= 64 {
        return Err(Error::InvalidArgument(format!("mark count {m} outside 1..64")));
    }
    let trees = enumerate_trees(w, n)?;
    let z = partition_sum(&trees, n)?;
    let norm = Rational::from_integer(num_traits::pow(BigInt::from(n), m)) * z;
    let mut tally: BTreeMap<DiscreteHistory, Rational> = BTreeMap::new();
    let total = n.pow(m as u32);
    for (t, wt) in &trees {
        for code in 0..total {
            let mut marks_at = vec![Vec::new(); n];
            let mut c = code;
            for mark in 1..=m {
                marks_at[c % n].push(mark);
                c /= n;
            }
            let h = history_of(t, &marks_at);
            *tally.entry(h).or_insert_with(Rational::zero) += wt;
        }
    }
    for v in tally.values_mut() {
        *v /= &norm;
    }
    tally.retain(|_, v| !v.is_zero());
    Ok(tally)
}
