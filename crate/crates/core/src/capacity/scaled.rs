//! Integer model of a weight multiset shared by the multiset engines.
//!
//! Weights are scaled by the common denominator `D` so each class has an
//! integer value `p_i`. A class with `n` copies carrying `s` total levels in
//! normal form (levels `d = s / n` and `d + 1`, the latter `r = s % n` times)
//! costs `n·T(d) + r·(d + 1)` where `T(d) = d(d+1)/2`; the constraint
//! `Σ (d² + d) ≤ 2k` becomes `Σ cost ≤ k`.

use num_bigint::{BigInt, BigUint};
use num_integer::Roots;
use num_traits::ToPrimitive;

use crate::error::{EchError, Result};
use crate::scalar::{common_denominator, Scalar};
use crate::weights::WeightMultiset;

use super::{CandidateAssignment, ClassLevel};

#[derive(Clone, Debug)]
pub(crate) struct Classes {
    pub weights: Vec<Scalar>,
    /// Scaled values, descending.
    pub p: Vec<u128>,
    pub n: Vec<u128>,
    pub denom: BigInt,
}

impl Classes {
    pub fn new(w: &WeightMultiset) -> Result<Self> {
        let denom = common_denominator(w.entries().iter().map(|(a, _)| a));
        let mut p = Vec::new();
        let mut n = Vec::new();
        for (a, m) in w.entries() {
            let v = a.numer() * (&denom / a.denom());
            p.push(v.to_u128().ok_or(EchError::Overflow("scaled weight"))?);
            n.push(m.to_u128().ok_or(EchError::Overflow("weight multiplicity"))?);
        }
        Ok(Classes { weights: w.entries().iter().map(|(a, _)| a.clone()).collect(), p, n, denom })
    }

    pub fn len(&self) -> usize {
        self.p.len()
    }

    pub fn to_scalar(&self, v: u128) -> Scalar {
        Scalar::new(BigInt::from(v), self.denom.clone()).expect("positive denominator")
    }

    /// Witness for per-class level totals `s`.
    pub fn assignment(&self, s: &[u128]) -> CandidateAssignment {
        let mut classes = Vec::with_capacity(s.len());
        let mut budget = BigUint::from(0u32);
        let mut value = 0u128;
        for i in 0..self.len() {
            let (d, r) = split(self.n[i], s[i]);
            let (nb, db, rb) = (BigUint::from(self.n[i]), BigUint::from(d), BigUint::from(r));
            // (n - r)(d² + d) + r((d+1)² + (d+1))
            budget += (&nb - &rb) * (&db * &db + &db) + &rb * ((&db + 1u32) * (&db + 1u32) + &db + 1u32);
            value += self.p[i] * s[i];
            classes.push(ClassLevel { weight: self.weights[i].clone(), copies: nb, d: db, r: rb });
        }
        CandidateAssignment { classes, budget, value: self.to_scalar(value) }
    }
}

pub(crate) fn tri(d: u128) -> u128 {
    if d % 2 == 0 {
        (d / 2) * (d + 1)
    } else {
        d * ((d + 1) / 2)
    }
}

/// `(s / n, s % n)`.
pub(crate) fn split(n: u128, s: u128) -> (u128, u128) {
    (s / n, s % n)
}

/// Cost of `s` total levels spread in normal form over `n` copies.
pub(crate) fn cost(n: u128, s: u128) -> u128 {
    let (d, r) = split(n, s);
    n * tri(d) + r * (d + 1)
}

/// Largest `d` with `T(d) <= m`.
pub(crate) fn tri_inverse(m: u128) -> u128 {
    let mut d = ((8 * m + 1).sqrt() - 1) / 2;
    while tri(d + 1) <= m {
        d += 1;
    }
    while tri(d) > m {
        d -= 1;
    }
    d
}

/// Largest `s` with `cost(n, s) <= b`.
pub(crate) fn max_units(n: u128, b: u128) -> u128 {
    let d = tri_inverse(b / n);
    let r = ((b - n * tri(d)) / (d + 1)).min(n - 1);
    n * d + r
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cost_matches_levels() {
        for n in 1..6u128 {
            for s in 0..40u128 {
                let (d, r) = split(n, s);
                let direct: u128 = (0..n).map(|j| tri(if j < r { d + 1 } else { d })).sum();
                assert_eq!(cost(n, s), direct);
            }
        }
    }

    #[test]
    fn max_units_is_maximal() {
        for n in 1..6u128 {
            for b in 0..200u128 {
                let s = max_units(n, b);
                assert!(cost(n, s) <= b);
                assert!(cost(n, s + 1) > b);
            }
        }
    }

    #[test]
    fn tri_inverse_large() {
        for m in [0u128, 1, 2, 3, 5, 6, 10, 1 << 60, u64::MAX as u128] {
            let d = tri_inverse(m);
            assert!(tri(d) <= m && tri(d + 1) > m);
        }
    }
}
