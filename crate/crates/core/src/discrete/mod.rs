//! Exact finite-size observables of a weighted plane-tree ensemble.
//!
//! Everything here is coefficient extraction from `T(λ)` and from series
//! built out of `f^{(i)}(T)`. An [`Ensemble`] solves `T` once to a maximal
//! size and then answers many queries.

mod history;
mod trees;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::Serialize;

pub(crate) use history::compositions;
pub use history::{enumerate_histories, DiscreteHistory, HistoryNode};
pub use trees::{
    enumerate_trees, history_tally, leaf_depths, profile_tally, PlaneTree, ORACLE_MAX_LEAVES,
};

use crate::error::{Error, Result};
use crate::io::{format_rational, format_rational_decimal, CsvTable};
use crate::models::WeightSet;
use crate::real::Real;
use crate::series::{solve_fixed_point, PowerSeries};
use crate::{Rational, RationalSeries};

/// Exact average profile at fixed size `N`; `rho[L-1] = ρ_N(L)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProfileTable {
    pub n: usize,
    #[serde(serialize_with = "ser_rational")]
    pub z_n: Rational,
    #[serde(serialize_with = "ser_rationals")]
    pub rho: Vec<Rational>,
}

fn ser_rational<S: serde::Serializer>(q: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&format_rational(q))
}

fn ser_rationals<S: serde::Serializer>(
    v: &[Rational],
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(format_rational))
}

impl ProfileTable {
    pub fn get(&self, l: usize) -> Rational {
        if l == 0 || l > self.n {
            Rational::zero()
        } else {
            self.rho[l - 1].clone()
        }
    }

    pub fn total(&self) -> Rational {
        self.rho.iter().fold(Rational::zero(), |a, b| a + b)
    }

    /// Columns `L, rho, rho_decimal`, with the exact total as footer.
    pub fn to_csv_table(&self) -> CsvTable {
        let mut t = CsvTable::new(["L", "rho", "rho_decimal"]);
        for (i, r) in self.rho.iter().enumerate() {
            if r.is_zero() {
                continue;
            }
            t.push(vec![(i + 1).to_string(), format_rational(r), format_rational_decimal(r)]);
        }
        t.footer("N", self.n.to_string());
        t.footer("Z_N", format_rational(&self.z_n));
        t.footer("sum", format_rational(&self.total()));
        t
    }
}

/// Tree generating function solved through `n_max`, with the derived series
/// `f'(T)` and `f^{(i)}(T)/i!` needed by profile and history weights.
#[derive(Clone, Debug)]
pub struct Ensemble {
    weights: WeightSet,
    t: RationalSeries,
    f_prime: RationalSeries,
    /// `taylor[i] = f^{(i)}(T)/i!` for `i` up to the degree of `f`.
    taylor: Vec<RationalSeries>,
}

impl Ensemble {
    pub fn new(w: &WeightSet, n_max: usize) -> Result<Self> {
        let f = w.coefficients();
        let t = solve_fixed_point(&f, n_max)?;
        let taylor: Vec<RationalSeries> = (0..f.len())
            .map(|i| {
                // coefficients of f^{(i)}(T)/i! as a polynomial in T: C(j, i) g_j
                let shifted: Vec<Rational> = (i..f.len())
                    .map(|j| &f[j] * Rational::from_integer(binomial(j, i)))
                    .collect();
                PowerSeries::apply_polynomial(&shifted, &t)
            })
            .collect();
        let f_prime = taylor.get(1).cloned().unwrap_or_else(|| PowerSeries::zero(n_max));
        Ok(Ensemble { weights: w.clone(), t, f_prime, taylor })
    }

    pub fn weights(&self) -> &WeightSet {
        &self.weights
    }

    pub fn n_max(&self) -> usize {
        self.t.order()
    }

    pub fn tree_series(&self) -> &RationalSeries {
        &self.t
    }

    fn check_size(&self, n: usize) -> Result<()> {
        if n == 0 {
            return Err(Error::InvalidArgument("tree size N must be at least 1".into()));
        }
        if n > self.n_max() {
            return Err(Error::CoefficientOutOfRange { index: n, order: self.n_max() });
        }
        Ok(())
    }

    pub fn partition_function(&self, n: usize) -> Result<Rational> {
        self.check_size(n)?;
        Ok(self.t.coeff(n)?.clone())
    }

    fn nonzero_partition_function(&self, n: usize) -> Result<Rational> {
        let z = self.partition_function(n)?;
        if z.is_zero() {
            return Err(Error::ZeroPartitionFunction(n));
        }
        Ok(z)
    }

    pub fn average_profile(&self, n: usize) -> Result<ProfileTable> {
        Ok(self.average_profiles(&[n])?.pop().expect("one size requested"))
    }

    /// Profiles for several sizes from one sweep over the powers of `f'(T)`.
    ///
    /// `ρ_N(L) = [λ^{N-1}] f'(T)^{L-1} / (N Z_N)`. Since `f'(T)` has valuation
    /// at least 1 when `g_1 = 0`, the `j`-th power only needs coefficients
    /// from `j` on, which brings one sweep to about `N³/6` products.
    pub fn average_profiles(&self, sizes: &[usize]) -> Result<Vec<ProfileTable>> {
        let mut norms = Vec::with_capacity(sizes.len());
        for &n in sizes {
            let z = self.nonzero_partition_function(n)?;
            norms.push((Rational::from_integer(BigInt::from(n)) * &z, z));
        }
        let top = sizes.iter().copied().max().unwrap_or(0);
        let mut rho: Vec<Vec<Rational>> = sizes.iter().map(|&n| vec![Rational::zero(); n]).collect();
        if top == 0 {
            return Ok(Vec::new());
        }
        let fp = self.f_prime.coeffs();
        let val = self.f_prime.valuation().unwrap_or(top);
        // power[n] holds [λ^n] f'(T)^j, for n < top
        let mut power = vec![Rational::zero(); top];
        power[0] = Rational::one();
        let mut low = 0usize;
        for j in 0..top {
            for (s, &n) in sizes.iter().enumerate() {
                if j < n {
                    rho[s][j] = power[n - 1].clone() / &norms[s].0;
                }
            }
            if j + 1 == top {
                break;
            }
            let mut next = vec![Rational::zero(); top];
            for n in (low + val).min(top)..top {
                let mut acc = Rational::zero();
                for i in val..=(n - low) {
                    let (a, b) = (&fp[i], &power[n - i]);
                    if a.is_zero() || b.is_zero() {
                        continue;
                    }
                    acc += a * b;
                }
                next[n] = acc;
            }
            power = next;
            low += val;
            if low >= top {
                // every remaining power vanishes below λ^top
                break;
            }
        }
        Ok(sizes
            .iter()
            .zip(rho)
            .zip(norms)
            .map(|((&n, rho), (_, z_n))| ProfileTable { n, z_n, rho })
            .collect())
    }

    /// `ρ_N(ℋ) = [λ^N] f'(T)^{Σ(L_j−1)} Π (f^{(i)}(T)/i!)^{p_i} λ^{p_0} / (N^m Z_N)`.
    pub fn history_weight(&self, n: usize, h: &DiscreteHistory) -> Result<Rational> {
        let z = self.nonzero_partition_function(n)?;
        let p0 = h.leaf_count();
        let excess: u64 = h.lengths().iter().map(|l| l - 1).sum();
        if (p0 as u64) + excess > n as u64 {
            return Ok(Rational::zero());
        }
        let order = n - p0;
        let mut acc = self.f_prime.truncate(order).pow(excess);
        for (&i, &count) in h.branch_counts().iter() {
            match self.taylor.get(i) {
                Some(d) => acc = acc.mul_series(&d.truncate(order).pow(count as u64)),
                None => return Ok(Rational::zero()),
            }
        }
        let coeff = acc.coeff(order)?.clone();
        let denom = Rational::from_integer(num_traits::pow(BigInt::from(n), h.marks())) * z;
        Ok(coeff / denom)
    }
}

fn binomial(n: usize, k: usize) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let mut acc = BigInt::one();
    for j in 0..k {
        acc = acc * BigInt::from(n - j) / BigInt::from(j + 1);
    }
    acc
}

pub fn partition_function(w: &WeightSet, n: usize) -> Result<Rational> {
    Ensemble::new(w, n)?.partition_function(n)
}

pub fn average_profile(w: &WeightSet, n: usize) -> Result<ProfileTable> {
    Ensemble::new(w, n)?.average_profile(n)
}

pub fn history_weight(w: &WeightSet, n: usize, h: &DiscreteHistory) -> Result<Rational> {
    Ensemble::new(w, n)?.history_weight(n, h)
}

/// `α = (m − p_0) + (1/k) Σ_{i>k} (i−k) p_i`; the history weight decays as `N^{−α}`.
pub fn scaling_exponent(h: &DiscreteHistory, k: usize) -> Rational {
    let mut a = Rational::from_integer(BigInt::from(h.marks() - h.leaf_count()));
    for (&i, &c) in h.branch_counts().iter() {
        if i > k {
            a += Rational::new(BigInt::from((i - k) * c), BigInt::from(k));
        }
    }
    a
}

/// `(kN)^{(k−1)/k}`, the length scale of a size-`N` tree.
pub fn length_scale<T: Real>(k: usize, n: usize, ctx: T::Context) -> T {
    let kn = T::from_i64_in((k * n) as i64, ctx);
    let e = T::from_rational_in(&Rational::new(BigInt::from(k - 1), BigInt::from(k)), ctx);
    kn.powf(&e)
}

/// Points `(L/s, s ρ_N(L))` with `s = (kN)^{(k−1)/k}`, for `L = 1..N`.
pub fn rescaled_profile<T: Real>(table: &ProfileTable, k: usize, ctx: T::Context) -> Vec<(T, T)> {
    let s: T = length_scale(k, table.n, ctx);
    table
        .rho
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let l = T::from_i64_in((i + 1) as i64, ctx);
            (l / s.clone(), s.clone() * T::from_rational_in(r, ctx))
        })
        .collect()
}

/// Sum of `ρ_N(L)` as a float; a cheap diagnostic for huge tables.
pub fn profile_mass_f64(table: &ProfileTable) -> f64 {
    crate::rational_to_f64(&table.total())
}

/// Largest `L` carrying non-zero weight.
pub fn profile_support(table: &ProfileTable) -> usize {
    table.rho.iter().rposition(|r| !r.is_zero()).map_or(0, |i| i + 1)
}
