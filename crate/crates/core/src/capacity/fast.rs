//! Capacities for budgets beyond the dynamic-programming range.
//!
//! The solver is a depth-first branch and bound over the per-class level
//! totals, classes taken from the largest weight down. Each class is a stack
//! of unit items (cost `j` for the `j`-th level, all of value `p`), so the
//! fractional knapsack over the remaining classes is an exact upper bound that
//! is cheap to evaluate: fill units in order of `p/j` until the budget runs
//! out. For a fixed prefix the bound on the next class's total `s` is concave
//! in `s`, which lets each branch scan outward from its peak and stop at the
//! first pruned value in each direction.
//!
//! A completed search is a proof of optimality. If the node budget runs out,
//! the result is the interval between the incumbent and the smaller of the
//! root fractional bound and the equal-levels continuous relaxation.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{EchError, Result};
use crate::scalar::Scalar;
use crate::weights::WeightMultiset;

use super::scaled::{cost, max_units, tri, tri_inverse, Classes};
use super::{CapacityConfig, CapacityResult, Engine};

const MAX_CLASSES: usize = 64;

fn overflow() -> EchError {
    EchError::Overflow("fast solver bound")
}

/// Fractional-knapsack solution over classes `from..` with budget `b`.
struct Lp {
    /// Threshold ratio `P/Q`: every unit with a larger ratio is taken in full.
    mu: (u128, u128),
    /// Per class (indexed from `from`): number of fully taken levels.
    strict: Vec<u128>,
    /// Budget and value of the fully taken units.
    c_gt: u128,
    v_gt: u128,
    b: u128,
}

impl Lp {
    fn solve(cl: &Classes, from: usize, b: u128) -> Result<Lp> {
        let idx: Vec<usize> = (from..cl.len()).collect();
        if idx.is_empty() || b == 0 {
            return Ok(Lp { mu: (1, 0), strict: vec![0; idx.len()], c_gt: 0, v_gt: 0, b });
        }
        let jcap: Vec<u128> = idx.iter().map(|&i| tri_inverse(b / cl.n[i]) + 1).collect();
        // budget of every unit whose ratio is at least P/Q
        let f = |pp: u128, qq: u128| -> Result<u128> {
            let mut total = 0u128;
            for (t, &i) in idx.iter().enumerate() {
                let lv = (cl.p[i].checked_mul(qq).ok_or_else(overflow)? / pp).min(jcap[t]);
                total = total.checked_add(cl.n[i].checked_mul(tri(lv)).ok_or_else(overflow)?).ok_or_else(overflow)?;
            }
            Ok(total)
        };
        let mut mu: Option<(u128, u128)> = None;
        for (t, &i) in idx.iter().enumerate() {
            if f(cl.p[i], jcap[t])? < b {
                continue;
            }
            let (mut lo, mut hi) = (1u128, jcap[t]);
            while lo < hi {
                let mid = lo + (hi - lo) / 2;
                if f(cl.p[i], mid)? >= b {
                    hi = mid;
                } else {
                    lo = mid + 1;
                }
            }
            let cand = (cl.p[i], lo);
            mu = match mu {
                Some(m) if m.0 * cand.1 >= cand.0 * m.1 => Some(m),
                _ => Some(cand),
            };
        }
        let mu = mu.expect("all units together exceed the budget");
        let mut strict = Vec::with_capacity(idx.len());
        let (mut c_gt, mut v_gt) = (0u128, 0u128);
        for (t, &i) in idx.iter().enumerate() {
            let lv = ((cl.p[i] * mu.1 - 1) / mu.0).min(jcap[t]);
            strict.push(lv);
            c_gt += cl.n[i] * tri(lv);
            v_gt = v_gt.checked_add(cl.p[i].checked_mul(cl.n[i] * lv).ok_or_else(overflow)?).ok_or_else(overflow)?;
        }
        debug_assert!(c_gt < b);
        Ok(Lp { mu, strict, c_gt, v_gt, b })
    }

    fn floor(&self) -> Result<u128> {
        if self.mu.1 == 0 {
            return Ok(self.v_gt);
        }
        let extra = (self.b - self.c_gt).checked_mul(self.mu.0).ok_or_else(overflow)? / self.mu.1;
        self.v_gt.checked_add(extra).ok_or_else(overflow)
    }

    fn value(&self) -> BigRational {
        if self.mu.1 == 0 {
            return BigRational::from_integer(self.v_gt.into());
        }
        BigRational::from_integer(self.v_gt.into())
            + BigRational::new(BigInt::from(self.b - self.c_gt) * BigInt::from(self.mu.0), self.mu.1.into())
    }

    /// Fractional per-class totals, ties at the threshold handed out in
    /// class order; returned as `(whole units, has fractional part)`.
    fn shares(&self, cl: &Classes, from: usize) -> Vec<(u128, bool)> {
        let mut left = self.b - self.c_gt;
        let mut out = Vec::with_capacity(self.strict.len());
        for (t, &lv) in self.strict.iter().enumerate() {
            let i = from + t;
            let (n, p) = (cl.n[i], cl.p[i]);
            let mut whole = n * lv;
            let mut frac = false;
            if self.mu.1 != 0 && (p * self.mu.1) % self.mu.0 == 0 {
                let j = p * self.mu.1 / self.mu.0;
                if j == lv + 1 && left > 0 {
                    let take = (left / j).min(n);
                    whole += take;
                    if take < n && left % j != 0 {
                        frac = true;
                        left = 0;
                    } else {
                        left -= take * j;
                    }
                }
            }
            out.push((whole, frac));
        }
        out
    }
}

struct Search<'a> {
    cl: &'a Classes,
    inc: u128,
    inc_s: Vec<u128>,
    cur: Vec<u128>,
    nodes: u64,
    node_limit: u64,
    complete: bool,
}

impl Search<'_> {
    /// `p_t·s + ⌊LP of the classes after t with what s leaves⌋`.
    fn bound(&self, t: usize, b: u128, s: u128) -> Result<u128> {
        let rest = Lp::solve(self.cl, t + 1, b - cost(self.cl.n[t], s))?.floor()?;
        Ok(self.cl.p[t] * s + rest)
    }

    fn run(&mut self, t: usize, b: u128, acc: u128) -> Result<()> {
        let cl = self.cl;
        let top = max_units(cl.n[t], b);
        if t + 1 == cl.len() {
            let val = acc + cl.p[t] * top;
            self.cur[t] = top;
            if val > self.inc {
                self.inc = val;
                self.inc_s.clone_from(&self.cur);
            }
            return Ok(());
        }
        let (whole, frac) = Lp::solve(cl, t, b)?.shares(cl, t)[0];
        let mut peak = whole.min(top);
        if frac && whole < top && self.bound(t, b, whole + 1)? > self.bound(t, b, whole)? {
            peak = whole + 1;
        }
        for dir in [false, true] {
            let mut s = if dir { peak + 1 } else { peak };
            loop {
                if dir && s > top {
                    break;
                }
                self.nodes += 1;
                if self.nodes > self.node_limit {
                    self.complete = false;
                    return Ok(());
                }
                if acc + self.bound(t, b, s)? <= self.inc {
                    break;
                }
                self.cur[t] = s;
                for c in &mut self.cur[t + 1..] {
                    *c = 0;
                }
                self.run(t + 1, b - cost(cl.n[t], s), acc + cl.p[t] * s)?;
                if !self.complete {
                    return Ok(());
                }
                if !dir {
                    if s == 0 {
                        break;
                    }
                    s -= 1;
                } else {
                    s += 1;
                }
            }
        }
        Ok(())
    }
}

/// Greedy completion: each class in order takes as many levels as still fit.
fn greedy_fill(cl: &Classes, start: &[u128], b: u128) -> Vec<u128> {
    let mut s = start.to_vec();
    let mut rem = b - (0..cl.len()).map(|i| cost(cl.n[i], s[i])).sum::<u128>();
    for i in 0..cl.len() {
        let extra = max_units(cl.n[i], rem + cost(cl.n[i], s[i]));
        rem = rem + cost(cl.n[i], s[i]) - cost(cl.n[i], extra);
        s[i] = extra;
    }
    s
}

fn value_of(cl: &Classes, s: &[u128]) -> u128 {
    (0..cl.len()).map(|i| cl.p[i] * s[i]).sum()
}

/// Value of the equal-levels continuous relaxation: maximize `Σ n_i a_i d_i`
/// over real `d_i ≥ 0` with `Σ n_i (d_i² + d_i) ≤ 2k`. The optimum has
/// `d_i = λ a_i − 1/2` on the classes where this is positive; `λ` is rounded
/// up to a dyadic rational, which keeps the value an upper bound.
pub fn relaxation_upper(w: &WeightMultiset, k: u64) -> Scalar {
    let two_k = BigRational::from_integer(BigInt::from(2 * k as u128));
    let quarter = BigRational::new(BigInt::one(), BigInt::from(4));
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    let entries: Vec<(BigRational, BigRational)> = w
        .entries()
        .iter()
        .map(|(a, n)| (a.as_rational().clone(), BigRational::from_integer(BigInt::from(n.clone()))))
        .collect();
    let mut sum_n = BigRational::zero();
    let mut sum_na2 = BigRational::zero();
    for t in 0..entries.len() {
        let (a, n) = &entries[t];
        sum_n += n;
        sum_na2 += n * a * a;
        let lambda2 = (&two_k + &quarter * &sum_n) / &sum_na2;
        let next_inactive = entries.get(t + 1).map_or(true, |(a1, _)| &lambda2 * a1 * a1 <= quarter);
        if &lambda2 * a * a > quarter && next_inactive {
            let lambda = sqrt_up(&lambda2);
            let value: BigRational = entries[..=t]
                .iter()
                .map(|(a, n)| n * a * (&lambda * a - &half))
                .fold(BigRational::zero(), |x, y| x + y);
            return Scalar::from_rational(value).expect("active levels are positive");
        }
    }
    Scalar::zero()
}

/// Dyadic upper bound on `√x` with 64 fractional bits beyond the integer part.
fn sqrt_up(x: &BigRational) -> BigRational {
    let shift = 128u32;
    let num = x.numer().to_biguint().unwrap() << shift;
    let den = x.denom().to_biguint().unwrap();
    let root: BigUint = (num / den).sqrt() + 1u32;
    BigRational::new(root.into(), BigInt::one() << (shift / 2))
}

/// Capacity by branch and bound; exact unless the node budget runs out.
pub fn multiset_capacity_fast(w: &WeightMultiset, k: u64, cfg: &CapacityConfig) -> Result<CapacityResult> {
    if w.entries().len() > MAX_CLASSES {
        return Err(EchError::Resource(format!(
            "{} weight classes exceed the fast solver limit {MAX_CLASSES}",
            w.entries().len()
        )));
    }
    let cl = Classes::new(w)?;
    let b = k as u128;
    let pmax = cl.p.iter().copied().max().unwrap_or(0);
    if pmax.checked_mul(b + 1).and_then(|v| v.checked_mul(1 << 16)).is_none() {
        return Err(EchError::Overflow("fast solver values"));
    }
    let relax = relaxation_upper(w, k);
    if cl.len() == 0 {
        return Ok(CapacityResult {
            best: Scalar::zero(),
            upper: Scalar::zero(),
            exact: true,
            engine: Engine::Fast,
            witness: Some(cl.assignment(&[])),
            relaxation_upper: Some(relax),
        });
    }
    let root = Lp::solve(&cl, 0, b)?;
    let rounded: Vec<u128> = root.shares(&cl, 0).into_iter().map(|(whole, _)| whole).collect();
    let mut start = greedy_fill(&cl, &vec![0; cl.len()], b);
    let from_lp = greedy_fill(&cl, &rounded, b);
    if value_of(&cl, &from_lp) > value_of(&cl, &start) {
        start = from_lp;
    }
    let mut search = Search {
        cl: &cl,
        inc: value_of(&cl, &start),
        inc_s: start,
        cur: vec![0; cl.len()],
        nodes: 0,
        node_limit: cfg.node_limit,
        complete: true,
    };
    search.run(0, b, 0)?;
    let witness = cl.assignment(&search.inc_s);
    let best = witness.value.clone();
    let upper = if search.complete {
        best.clone()
    } else {
        let lp = Scalar::from_rational(root.value() / BigRational::from_integer(cl.denom.clone()))?;
        lp.min(relax.clone())
    };
    Ok(CapacityResult {
        best,
        upper,
        exact: search.complete,
        engine: Engine::Fast,
        witness: Some(witness),
        relaxation_upper: Some(relax),
    })
}
