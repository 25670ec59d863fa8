//! Marked history trees of the discrete ensemble.
//!
//! A history is the subtree spanned by the root and the `m` marked leaves.
//! Its nodes are the leaves carrying marks and the most recent common
//! ancestors; every node hangs below one branch, and branch lengths count
//! edges. Lengths are listed in preorder (a node before its children).
//!
//! Text form: `"(" shape "L=[" lengths "])"`, where a leaf is written as its
//! marks `(1)` or `(1,2)` and a branching point as its children in order,
//! e.g. `(((1)(2))L=[2,1,1])`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum HistoryNode {
    Leaf { marks: Vec<usize> },
    Branch { children: Vec<HistoryNode> },
}

impl HistoryNode {
    pub fn leaf(marks: Vec<usize>) -> Self {
        let mut marks = marks;
        marks.sort_unstable();
        HistoryNode::Leaf { marks }
    }

    fn node_count(&self) -> usize {
        match self {
            HistoryNode::Leaf { .. } => 1,
            HistoryNode::Branch { children } => 1 + children.iter().map(Self::node_count).sum::<usize>(),
        }
    }

    fn visit<'a>(&'a self, out: &mut Vec<&'a HistoryNode>) {
        out.push(self);
        if let HistoryNode::Branch { children } = self {
            for c in children {
                c.visit(out);
            }
        }
    }

    fn write_shape(&self, f: &mut impl fmt::Write) -> fmt::Result {
        f.write_char('(')?;
        match self {
            HistoryNode::Leaf { marks } => {
                let s: Vec<String> = marks.iter().map(usize::to_string).collect();
                f.write_str(&s.join(","))?;
            }
            HistoryNode::Branch { children } => {
                for c in children {
                    c.write_shape(f)?;
                }
            }
        }
        f.write_char(')')
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DiscreteHistory {
    root: HistoryNode,
    lengths: Vec<u64>,
}

impl DiscreteHistory {
    pub fn new(root: HistoryNode, lengths: Vec<u64>) -> Result<Self> {
        let bad = |msg: String| Err(Error::InvalidHistory(msg));
        if root.node_count() != lengths.len() {
            return bad(format!(
                "{} branches but {} lengths",
                root.node_count(),
                lengths.len()
            ));
        }
        if lengths.iter().any(|&l| l == 0) {
            return bad("branch lengths must be at least 1".into());
        }
        let mut nodes = Vec::new();
        root.visit(&mut nodes);
        let mut seen = Vec::new();
        for n in &nodes {
            match n {
                HistoryNode::Leaf { marks } if marks.is_empty() => {
                    return bad("every leaf carries at least one mark".into())
                }
                HistoryNode::Leaf { marks } => seen.extend(marks.iter().copied()),
                HistoryNode::Branch { children } if children.len() < 2 => {
                    return bad("branching points need at least two children".into())
                }
                HistoryNode::Branch { .. } => {}
            }
        }
        seen.sort_unstable();
        if seen != (1..=seen.len()).collect::<Vec<_>>() {
            return bad(format!("marks must be exactly 1..m, got {seen:?}"));
        }
        let root = canonical(root);
        Ok(DiscreteHistory { root, lengths })
    }

    /// One leaf carrying mark 1 at distance `l` from the root.
    pub fn single_branch(l: u64) -> Self {
        DiscreteHistory::new(HistoryNode::leaf(vec![1]), vec![l]).expect("valid by construction")
    }

    pub fn root(&self) -> &HistoryNode {
        &self.root
    }

    pub fn lengths(&self) -> &[u64] {
        &self.lengths
    }

    pub fn branches(&self) -> usize {
        self.lengths.len()
    }

    fn nodes(&self) -> Vec<&HistoryNode> {
        let mut v = Vec::new();
        self.root.visit(&mut v);
        v
    }

    /// Number of marks `m`.
    pub fn marks(&self) -> usize {
        self.nodes()
            .iter()
            .map(|n| match n {
                HistoryNode::Leaf { marks } => marks.len(),
                HistoryNode::Branch { .. } => 0,
            })
            .sum()
    }

    /// Number of (non-root) leaves `p_0`.
    pub fn leaf_count(&self) -> usize {
        self.nodes().iter().filter(|n| matches!(n, HistoryNode::Leaf { .. })).count()
    }

    /// `i ↦ p_i`, the number of branching points with `i` children.
    pub fn branch_counts(&self) -> BTreeMap<usize, usize> {
        let mut p = BTreeMap::new();
        for n in self.nodes() {
            if let HistoryNode::Branch { children } = n {
                *p.entry(children.len()).or_insert(0) += 1;
            }
        }
        p
    }

    /// Every mark on its own leaf.
    pub fn is_nondegenerate(&self) -> bool {
        self.marks() == self.leaf_count()
    }
}

fn canonical(n: HistoryNode) -> HistoryNode {
    match n {
        HistoryNode::Leaf { marks } => HistoryNode::leaf(marks),
        HistoryNode::Branch { children } => {
            HistoryNode::Branch { children: children.into_iter().map(canonical).collect() }
        }
    }
}

impl fmt::Display for DiscreteHistory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        self.root.write_shape(f)?;
        let l: Vec<String> = self.lengths.iter().map(u64::to_string).collect();
        write!(f, "L=[{}])", l.join(","))
    }
}

struct Parser<'a> {
    s: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn err<T>(&self, what: &str) -> Result<T> {
        Err(Error::Parse(format!("history text, byte {}: {what}", self.pos)))
    }

    fn eat(&mut self, c: u8) -> Result<()> {
        if self.s.get(self.pos) == Some(&c) {
            self.pos += 1;
            Ok(())
        } else {
            self.err(&format!("expected {:?}", c as char))
        }
    }

    fn peek(&self) -> Option<u8> {
        self.s.get(self.pos).copied()
    }

    fn number(&mut self) -> Result<u64> {
        let start = self.pos;
        while matches!(self.peek(), Some(b'0'..=b'9')) {
            self.pos += 1;
        }
        if start == self.pos {
            return self.err("expected a number");
        }
        std::str::from_utf8(&self.s[start..self.pos])
            .expect("ascii digits")
            .parse()
            .or_else(|_| self.err("number too large"))
    }

    fn list(&mut self, close: u8) -> Result<Vec<u64>> {
        let mut v = vec![self.number()?];
        while self.peek() == Some(b',') {
            self.pos += 1;
            v.push(self.number()?);
        }
        self.eat(close)?;
        Ok(v)
    }

    fn node(&mut self) -> Result<HistoryNode> {
        self.eat(b'(')?;
        if self.peek() == Some(b'(') {
            let mut children = Vec::new();
            while self.peek() == Some(b'(') {
                children.push(self.node()?);
            }
            self.eat(b')')?;
            Ok(HistoryNode::Branch { children })
        } else {
            let marks = self.list(b')')?.into_iter().map(|m| m as usize).collect();
            Ok(HistoryNode::leaf(marks))
        }
    }
}

impl FromStr for DiscreteHistory {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let mut p = Parser { s: compact.as_bytes(), pos: 0 };
        p.eat(b'(')?;
        let root = p.node()?;
        for &c in b"L=[" {
            p.eat(c)?;
        }
        let lengths = p.list(b']')?;
        p.eat(b')')?;
        if p.pos != p.s.len() {
            return p.err("trailing input");
        }
        DiscreteHistory::new(root, lengths)
    }
}

/// Plane shapes with `leaves` leaves and branching degrees in `2..=max_degree`;
/// leaves are left unmarked (empty mark lists).
fn plane_shapes(leaves: usize, max_degree: usize) -> Vec<HistoryNode> {
    if leaves == 1 {
        return vec![HistoryNode::Leaf { marks: Vec::new() }];
    }
    let mut out = Vec::new();
    for d in 2..=max_degree.min(leaves) {
        for parts in compositions(leaves, d) {
            let mut acc: Vec<Vec<HistoryNode>> = vec![Vec::new()];
            for &part in &parts {
                let subs = plane_shapes(part, max_degree);
                acc = acc
                    .into_iter()
                    .flat_map(|prefix| {
                        subs.iter().map(move |s| {
                            let mut v = prefix.clone();
                            v.push(s.clone());
                            v
                        })
                    })
                    .collect();
            }
            out.extend(acc.into_iter().map(|children| HistoryNode::Branch { children }));
        }
    }
    out
}

/// Ordered compositions of `n` into `d` positive parts.
pub(crate) fn compositions(n: usize, d: usize) -> Vec<Vec<usize>> {
    if d == 1 {
        return if n >= 1 { vec![vec![n]] } else { Vec::new() };
    }
    let mut out = Vec::new();
    for first in 1..=n.saturating_sub(d - 1) {
        for mut rest in compositions(n - first, d - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

fn assign_marks(node: &HistoryNode, blocks: &mut std::slice::Iter<'_, Vec<usize>>) -> HistoryNode {
    match node {
        HistoryNode::Leaf { .. } => HistoryNode::leaf(blocks.next().expect("one block per leaf").clone()),
        HistoryNode::Branch { children } => HistoryNode::Branch {
            children: children.iter().map(|c| assign_marks(c, blocks)).collect(),
        },
    }
}

/// Surjections of marks `1..=m` onto `leaves` ordered blocks.
fn ordered_partitions(m: usize, leaves: usize) -> Vec<Vec<Vec<usize>>> {
    let mut out = Vec::new();
    let total = leaves.pow(m as u32);
    for code in 0..total {
        let mut blocks = vec![Vec::new(); leaves];
        let mut c = code;
        for mark in 1..=m {
            blocks[c % leaves].push(mark);
            c /= leaves;
        }
        if blocks.iter().all(|b| !b.is_empty()) {
            out.push(blocks);
        }
    }
    out
}

/// All branch-length vectors with `n` entries `≥ 1` and `Σ (L_j − 1) ≤ budget`.
fn length_vectors(n: usize, budget: u64) -> Vec<Vec<u64>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for extra in 0..=budget {
        for mut rest in length_vectors(n - 1, budget - extra) {
            rest.insert(0, extra + 1);
            out.push(rest);
        }
    }
    out
}

/// Every history with `m` marks (degenerate ones included) that can carry
/// weight in trees of size `n` whose inner vertices have at most
/// `max_degree` children.
pub fn enumerate_histories(m: usize, n: usize, max_degree: usize) -> Vec<DiscreteHistory> {
    let mut out = Vec::new();
    for leaves in 1..=m.min(n) {
        for shape in plane_shapes(leaves, max_degree.max(2)) {
            for blocks in ordered_partitions(m, leaves) {
                let root = assign_marks(&shape, &mut blocks.iter());
                let branches = root.node_count();
                for lengths in length_vectors(branches, (n - leaves) as u64) {
                    out.push(DiscreteHistory::new(root.clone(), lengths).expect("valid by construction"));
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_round_trip() {
        for s in ["(((1)(2))L=[2,1,1])", "((1,2)L=[3])", "((((2)(1,3))(4))L=[1,2,1,1,5])"] {
            let h: DiscreteHistory = s.parse().unwrap();
            assert_eq!(h.to_string(), s);
        }
        let h: DiscreteHistory = "( (2,1) L=[4] )".parse().unwrap();
        assert_eq!(h.to_string(), "((1,2)L=[4])");
    }

    #[test]
    fn counts() {
        let h: DiscreteHistory = "((((2)(1,3))(4)(5))L=[1,2,1,1,5,1])".parse().unwrap();
        assert_eq!(h.marks(), 5);
        assert_eq!(h.leaf_count(), 4);
        assert_eq!(h.branch_counts(), BTreeMap::from([(2, 1), (3, 1)]));
        assert!(!h.is_nondegenerate());
        // n = p0 + Σ p_i = 1 + Σ i p_i
        assert_eq!(h.branches(), 6);
    }

    #[test]
    fn rejects_malformed() {
        for s in [
            "(((1)(2))L=[1,1])",
            "(((1)(3))L=[1,1,1])",
            "(((1))L=[1,1])",
            "((1)L=[0])",
            "(()L=[1])",
            "((1)L=[1])x",
            "((1)L=[1]",
        ] {
            assert!(s.parse::<DiscreteHistory>().is_err(), "{s}");
        }
    }

    #[test]
    fn enumeration_sizes() {
        // m = 2, N = 2, binary only: the double-marked leaf with L ∈ {1, 2},
        // plus two labelings of the cherry with all lengths 1
        let hs = enumerate_histories(2, 2, 2);
        assert_eq!(hs.len(), 4);
        assert_eq!(compositions(4, 2), vec![vec![1, 3], vec![2, 2], vec![3, 1]]);
        assert_eq!(ordered_partitions(3, 2).len(), 6);
    }
}
