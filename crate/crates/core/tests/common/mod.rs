#![allow(dead_code)]

use std::collections::HashMap;

use num_bigint::BigUint;
use proptest::prelude::*;
use rand::Rng;
use toric_ech::{MomentProfile, Scalar, Vertex, WeightMultiset};

pub fn s(n: u64, d: u64) -> Scalar {
    Scalar::from_ratio(n, d)
}

pub fn int(n: u64) -> Scalar {
    Scalar::from_integer(n)
}

pub fn multiset(pairs: &[((u64, u64), u64)]) -> WeightMultiset {
    WeightMultiset::new(pairs.iter().map(|&((n, d), m)| (s(n, d), BigUint::from(m)))).unwrap()
}

/// Convex profile from runs `dx` and slope magnitudes `steep` (sorted
/// descending inside).
pub fn profile_from(runs: &[(u64, u64)], steep: &[(u64, u64)]) -> MomentProfile {
    let mut slopes: Vec<Scalar> = steep.iter().map(|&(n, d)| s(n, d)).collect();
    slopes.sort();
    slopes.reverse();
    slopes.dedup();
    let runs: Vec<Scalar> = runs.iter().take(slopes.len()).map(|&(n, d)| s(n, d)).collect();
    let slopes = &slopes[..runs.len()];
    let height: Scalar = runs.iter().zip(slopes).map(|(r, m)| r * m).sum();
    let mut x = Scalar::zero();
    let mut y = height;
    let mut v = vec![Vertex::new(x.clone(), y.clone())];
    for (r, m) in runs.iter().zip(slopes) {
        x = &x + r;
        y = y.checked_sub(&(r * m)).unwrap();
        v.push(Vertex::new(x.clone(), y.clone()));
    }
    MomentProfile::new(v).unwrap()
}

prop_compose! {
    pub fn arb_profile()(
        runs in prop::collection::vec((1u64..8, 1u64..5), 1..5),
        steep in prop::collection::vec((1u64..12, 1u64..5), 1..5),
    ) -> MomentProfile {
        profile_from(&runs, &steep)
    }
}

prop_compose! {
    pub fn arb_multiset(max_distinct: usize, max_mult: u64)(
        pairs in prop::collection::vec(((1u64..30, 1u64..9), 1..=max_mult), 1..=max_distinct)
    ) -> WeightMultiset {
        multiset(&pairs)
    }
}

pub fn random_multiset(rng: &mut impl Rng, max_distinct: usize, max_mult: u64) -> WeightMultiset {
    let n = rng.gen_range(1..=max_distinct);
    let pairs: Vec<((u64, u64), u64)> =
        (0..n).map(|_| ((rng.gen_range(1..50), rng.gen_range(1..13)), rng.gen_range(1..=max_mult))).collect();
    multiset(&pairs)
}

/// `(0, a, a, 2a, 2a, 2a, …)` for `a = 1`, listed directly.
pub fn ball_sequence(len: usize) -> Vec<u64> {
    let mut out = Vec::with_capacity(len);
    let mut d = 0u64;
    while out.len() < len {
        for _ in 0..=d {
            out.push(d);
        }
        d += 1;
    }
    out.truncate(len);
    out
}

/// `max Σ c_{k_i}(B(a_i))` over `k_1 + … + k_m = k`, by exhaustive recursion
/// over the individual balls.
pub fn partition_capacity(w: &WeightMultiset, k: u64) -> Scalar {
    let balls: Vec<Scalar> =
        w.entries().iter().flat_map(|(a, m)| std::iter::repeat(a.clone()).take(m.try_into().unwrap())).collect();
    let seq = ball_sequence(k as usize + 1);
    fn go(i: usize, k: u64, balls: &[Scalar], seq: &[u64], memo: &mut HashMap<(usize, u64), Scalar>) -> Scalar {
        if i == balls.len() {
            return Scalar::zero();
        }
        if let Some(v) = memo.get(&(i, k)) {
            return v.clone();
        }
        let mut best = Scalar::zero();
        for ki in 0..=k {
            let v = &(&balls[i] * &Scalar::from_integer(seq[ki as usize])) + &go(i + 1, k - ki, balls, seq, memo);
            if v > best {
                best = v;
            }
        }
        memo.insert((i, k), best.clone());
        best
    }
    go(0, k, &balls, &seq, &mut HashMap::new())
}

/// `k`-th smallest (from 0) of `{m·a + n·b}` with repetition, by listing.
pub fn ellipsoid_sequence(a: &Scalar, b: &Scalar, len: usize) -> Vec<Scalar> {
    let (a, b) = if a <= b { (a, b) } else { (b, a) };
    let cap = a * &Scalar::from_integer(len as u64);
    let mut vals = Vec::new();
    let mut m = 0u64;
    loop {
        let base = a * &Scalar::from_integer(m);
        if base > cap {
            break;
        }
        let mut n = 0u64;
        loop {
            let v = &base + &(b * &Scalar::from_integer(n));
            if v > cap {
                break;
            }
            vals.push(v);
            n += 1;
        }
        m += 1;
    }
    vals.sort();
    vals.truncate(len);
    vals
}
