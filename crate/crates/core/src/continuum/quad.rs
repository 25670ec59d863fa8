//! Gauss–Legendre rules at arbitrary precision and an adaptive bisection driver.

use crate::error::{Error, Result};
use crate::real::Real;

/// Value with an estimated absolute error.
#[derive(Clone, Debug, PartialEq)]
pub struct Estimate<T> {
    pub value: T,
    pub error: f64,
}

impl<T: Real> Estimate<T> {
    pub fn exact(value: T) -> Self {
        Estimate { value, error: 0.0 }
    }

    pub fn to_f64(&self) -> f64 {
        self.value.to_f64()
    }
}

/// `n`-point Gauss–Legendre rule on `[-1, 1]`.
#[derive(Clone, Debug)]
pub struct GaussLegendre<T> {
    nodes: Vec<T>,
    weights: Vec<T>,
}

fn legendre<T: Real>(n: usize, x: &T) -> (T, T) {
    let one = x.lift(1.0);
    let (mut p0, mut p1) = (one.clone(), x.clone());
    for j in 1..n {
        let jt = x.lift_int(j as i64);
        let p2 = ((jt.clone() + jt.clone() + one.clone()) * x.clone() * p1.clone() - jt.clone() * p0)
            / (jt + one.clone());
        p0 = p1;
        p1 = p2;
    }
    // P_n and P_n' = n (x P_n − P_{n−1}) / (x² − 1)
    let nt = x.lift_int(n as i64);
    let d = nt * (x.clone() * p1.clone() - p0) / (x.clone() * x.clone() - one);
    (p1, d)
}

impl<T: Real> GaussLegendre<T> {
    /// Nodes by Newton's method from the classical cosine guesses, iterated
    /// at the working precision of `ctx`.
    pub fn new(n: usize, ctx: T::Context) -> Self {
        assert!(n >= 1, "rule needs at least one node");
        let digits = T::digits_in(ctx) as f64;
        let tol = 10f64.powf(-digits + 2.0).max(f64::MIN_POSITIVE);
        let half = n.div_ceil(2);
        let mut nodes = Vec::with_capacity(n);
        let mut weights = Vec::with_capacity(n);
        let two = T::from_i64_in(2, ctx);
        for i in 0..half {
            let guess = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut x = T::from_f64_in(guess, ctx);
            if n % 2 == 1 && i == half - 1 {
                x = T::from_i64_in(0, ctx);
            } else {
                for _ in 0..200 {
                    let (p, d) = legendre(n, &x);
                    let dx = p / d;
                    x -= dx.clone();
                    let rel = dx.abs().log10_abs();
                    if rel < tol.log10() {
                        break;
                    }
                }
            }
            let (_, d) = legendre(n, &x);
            let one = x.lift(1.0);
            let w = two.clone() / ((one - x.clone() * x.clone()) * d.clone() * d);
            nodes.push(x);
            weights.push(w);
        }
        // mirror the positive nodes
        let mut all_nodes = nodes.clone();
        let mut all_weights = weights.clone();
        let mirror = if n % 2 == 1 { half - 1 } else { half };
        for i in (0..mirror).rev() {
            all_nodes.push(-nodes[i].clone());
            all_weights.push(weights[i].clone());
        }
        GaussLegendre { nodes: all_nodes, weights: all_weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Nodes and weights mapped onto `[a, b]`.
    pub fn scaled(&self, a: &T, b: &T) -> Vec<(T, T)> {
        let half = (b.clone() - a.clone()) / a.lift(2.0);
        let mid = (b.clone() + a.clone()) / a.lift(2.0);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| (mid.clone() + half.clone() * x.clone(), w.clone() * half.clone()))
            .collect()
    }

    /// `(∫_a^b f, ∫_a^b |f|)` by the rule.
    pub fn apply<F>(&self, f: &F, a: &T, b: &T) -> Result<(T, T)>
    where
        F: Fn(&T) -> Result<T> + ?Sized,
    {
        let half = (b.clone() - a.clone()) / a.lift(2.0);
        let mid = (b.clone() + a.clone()) / a.lift(2.0);
        let mut sum = a.lift(0.0);
        let mut abs = a.lift(0.0);
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            let v = f(&(mid.clone() + half.clone() * x.clone()))? * w.clone();
            abs += v.abs();
            sum += v;
        }
        Ok((sum * half.clone(), abs * half.abs()))
    }
}

/// Rule size giving roughly `digits` correct digits on panels that resolve
/// a quarter oscillation.
pub fn rule_size(digits: u32) -> usize {
    (f64::from(digits) * 0.3 + 10.0).ceil() as usize
}

/// Adaptive bisection over consecutive `breaks`.
///
/// Each panel is compared with the sum over its halves; a panel is accepted
/// once the difference is below its share of `tol` (proportional to width).
/// Rounding is charged as `10^{−digits} ∫|f|`.
pub fn integrate<T, F>(
    rule: &GaussLegendre<T>,
    f: &F,
    breaks: &[T],
    tol: f64,
    max_depth: usize,
) -> Result<Estimate<T>>
where
    T: Real,
    F: Fn(&T) -> Result<T> + ?Sized,
{
    assert!(breaks.len() >= 2, "need at least one panel");
    let lo = breaks[0].clone();
    let hi = breaks[breaks.len() - 1].clone();
    let span = (hi - lo.clone()).abs().to_f64().max(f64::MIN_POSITIVE);
    let mut total = lo.lift(0.0);
    let mut abs_total = lo.lift(0.0);
    let mut err = 0.0f64;
    let eps = T::epsilon_log10(lo.context());
    for w in breaks.windows(2) {
        let (first, _) = rule.apply(f, &w[0], &w[1])?;
        let mut stack = vec![(w[0].clone(), w[1].clone(), first, 0usize)];
        while let Some((a, b, whole, depth)) = stack.pop() {
            let m = (a.clone() + b.clone()) / a.lift(2.0);
            let (l, la) = rule.apply(f, &a, &m)?;
            let (r, ra) = rule.apply(f, &m, &b)?;
            let halves = l.clone() + r.clone();
            let diff = (halves.clone() - whole).abs().to_f64();
            let share = tol * (b.clone() - a.clone()).abs().to_f64() / span;
            // splitting further cannot beat rounding on this panel
            let floor = 10f64.powf((la.clone() + ra.clone()).log10_abs() + eps + 2.0);
            if diff <= share || diff <= floor || depth >= max_depth {
                total += halves;
                abs_total += la + ra;
                err += diff;
            } else {
                stack.push((m.clone(), b, r, depth + 1));
                stack.push((a, m, l, depth + 1));
            }
        }
    }
    let rounding = 10f64.powf(abs_total.log10_abs() + T::epsilon_log10(total.context()) + 1.0);
    let error = err + if rounding.is_finite() { rounding } else { f64::INFINITY };
    if !(error <= tol) {
        return Err(Error::QuadratureFailed { achieved: error, requested: tol });
    }
    Ok(Estimate { value: total, error })
}

/// `n + 1` equally spaced points from `a` to `b`.
pub fn uniform_breaks<T: Real>(a: &T, b: &T, n: usize) -> Vec<T> {
    let n = n.max(1);
    let step = (b.clone() - a.clone()) / a.lift_int(n as i64);
    (0..=n).map(|i| a.clone() + step.clone() * a.lift_int(i as i64)).collect()
}
