//! ECH capacity engines.
//!
//! * [`ball_capacity`]: closed form for `B(a)`.
//! * [`ellipsoid_capacity`]: `k`-th smallest element of `{ma + nb}` by lattice
//!   point counting.
//! * [`multiset_capacity_oracle`] and [`multiset_capacity_fast`]: the optimum of
//!   `Σ d_{i,j} a_i` over integers `d_{i,j} ≥ 0` with `Σ (d² + d) ≤ 2k`, for a
//!   concave toric domain given by its weights.

mod fast;
mod oracle;
mod scaled;

use num_bigint::{BigInt, BigUint};
use num_traits::ToPrimitive;
use serde::Serialize;

use crate::error::{EchError, Result};
use crate::geometry::Ellipsoid;
use crate::scalar::{common_denominator, Scalar};
use crate::weights::WeightMultiset;

pub use fast::multiset_capacity_fast;
pub use oracle::multiset_capacity_oracle;

/// Levels of one weight class: `copies - r` copies at level `d`, `r` at `d + 1`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ClassLevel {
    pub weight: Scalar,
    #[serde(serialize_with = "crate::format::decimal")]
    pub copies: BigUint,
    #[serde(serialize_with = "crate::format::decimal")]
    pub d: BigUint,
    #[serde(serialize_with = "crate::format::decimal")]
    pub r: BigUint,
}

/// A feasible level assignment with its cached budget `Σ (d² + d)` and value
/// `Σ d·a`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CandidateAssignment {
    pub classes: Vec<ClassLevel>,
    #[serde(serialize_with = "crate::format::decimal")]
    pub budget: BigUint,
    pub value: Scalar,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Engine {
    Ball,
    Ellipsoid,
    Oracle,
    Fast,
}

/// Capacity value or certified interval.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CapacityResult {
    pub best: Scalar,
    pub upper: Scalar,
    pub exact: bool,
    pub engine: Engine,
    pub witness: Option<CandidateAssignment>,
    /// Value of the equal-levels continuous relaxation, when it was computed.
    pub relaxation_upper: Option<Scalar>,
}

impl CapacityResult {
    fn exact(value: Scalar, engine: Engine, witness: Option<CandidateAssignment>) -> Self {
        CapacityResult { upper: value.clone(), best: value, exact: true, engine, witness, relaxation_upper: None }
    }

    /// `(upper - best) / best`, zero when exact or both vanish.
    pub fn relative_gap(&self) -> f64 {
        if self.best.is_zero() {
            return if self.upper.is_zero() { 0.0 } else { f64::INFINITY };
        }
        let gap = self.upper.checked_sub(&self.best).expect("best <= upper");
        (&gap / &self.best).to_f64()
    }
}

/// Limits shared by the engines.
#[derive(Clone, Copy, Debug)]
pub struct CapacityConfig {
    /// Largest `2k` the dynamic-programming oracle accepts.
    pub oracle_limit: u64,
    /// Largest `k` accepted by the ellipsoid engine.
    pub ellipsoid_limit: u64,
    /// Search nodes the fast solver may visit before settling for an interval.
    pub node_limit: u64,
}

impl Default for CapacityConfig {
    fn default() -> Self {
        CapacityConfig { oracle_limit: 400_000, ellipsoid_limit: 1_000_000_000_000, node_limit: 2_000_000 }
    }
}

/// Largest `d` with `d(d+1)/2 <= k`.
pub fn ball_level(k: u64) -> u64 {
    scaled::tri_inverse(k as u128) as u64
}

/// `c_k(B(a)) = d·a` with `d` the largest integer such that `d(d+1)/2 <= k`.
pub fn ball_capacity(a: &Scalar, k: u64) -> Scalar {
    a * &Scalar::from_integer(ball_level(k))
}

/// `c_k(E(a, b))`: the `(k+1)`-st smallest element, with repetition, of
/// `{ma + nb : m, n ≥ 0}`.
pub fn ellipsoid_capacity(e: &Ellipsoid, k: u64, cfg: &CapacityConfig) -> Result<Scalar> {
    if k > cfg.ellipsoid_limit {
        return Err(EchError::Resource(format!("k = {k} exceeds the ellipsoid limit {}", cfg.ellipsoid_limit)));
    }
    let denom = common_denominator([e.a(), e.b()]);
    let scaled = |x: &Scalar| (x.numer() * (&denom / x.denom())).to_u128().ok_or(EchError::Overflow("ellipsoid axes"));
    let (p, q) = (scaled(e.a())?, scaled(e.b())?);
    // the answer is at most k·p (the values 0, p, …, kp are k + 1 lattice values)
    let (mut lo, mut hi) = (0u128, (k as u128).checked_mul(p).ok_or(EchError::Overflow("ellipsoid search range"))?);
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if lattice_count(p, q, mid)? > k as u128 {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    Ok(Scalar::new(BigInt::from(lo), denom).expect("positive denominator"))
}

/// `#{(m, n) : mp + nq ≤ t}`.
fn lattice_count(p: u128, q: u128, t: u128) -> Result<u128> {
    let m = t / q;
    let r = t - m * q;
    // Σ_{i=0}^{m} (⌊(r + iq) / p⌋ + 1)
    let s = floor_sum(m + 1, p, q, r).ok_or(EchError::Overflow("lattice count"))?;
    s.checked_add(m + 1).ok_or(EchError::Overflow("lattice count"))
}

/// `Σ_{i=0}^{n-1} ⌊(a·i + b) / m⌋` in `O(log)` steps.
fn floor_sum(mut n: u128, mut m: u128, mut a: u128, mut b: u128) -> Option<u128> {
    let mut ans: u128 = 0;
    loop {
        if a >= m {
            let t = (n.checked_mul(n.checked_sub(1).unwrap_or(0))? / 2).checked_mul(a / m)?;
            ans = ans.checked_add(t)?;
            a %= m;
        }
        if b >= m {
            ans = ans.checked_add(n.checked_mul(b / m)?)?;
            b %= m;
        }
        let y_max = a.checked_mul(n)?.checked_add(b)?;
        if y_max < m {
            return Some(ans);
        }
        n = y_max / m;
        b = y_max % m;
        std::mem::swap(&mut m, &mut a);
    }
}

/// Exact when the oracle can run, otherwise the fast solver.
pub fn multiset_capacity(w: &WeightMultiset, k: u64, cfg: &CapacityConfig) -> Result<CapacityResult> {
    if oracle_fits(k, cfg) {
        multiset_capacity_oracle(w, k, cfg)
    } else {
        multiset_capacity_fast(w, k, cfg)
    }
}

pub(crate) fn oracle_fits(k: u64, cfg: &CapacityConfig) -> bool {
    (k as u128) * 2 <= cfg.oracle_limit as u128
}

pub fn ball_result(a: &Scalar, k: u64) -> CapacityResult {
    let d = ball_level(k);
    let witness = CandidateAssignment {
        classes: vec![ClassLevel { weight: a.clone(), copies: 1u32.into(), d: d.into(), r: 0u32.into() }],
        budget: BigUint::from(d) * BigUint::from(d + 1),
        value: ball_capacity(a, k),
    };
    CapacityResult::exact(ball_capacity(a, k), Engine::Ball, Some(witness))
}

pub fn ellipsoid_result(e: &Ellipsoid, k: u64, cfg: &CapacityConfig) -> Result<CapacityResult> {
    Ok(CapacityResult::exact(ellipsoid_capacity(e, k, cfg)?, Engine::Ellipsoid, None))
}

/// `c_k² / (4k · area)`, which tends to 1 as `k → ∞`.
pub fn weyl_ratio(c_k: &Scalar, k: u64, area: &Scalar) -> Result<f64> {
    if k == 0 {
        return Err(EchError::ZeroIndex);
    }
    if area.is_zero() {
        return Err(EchError::InvalidDomain("zero area".into()));
    }
    let denom = &Scalar::from_integer(4 * k) * area;
    Ok((&(c_k * c_k) / &denom).to_f64())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(n: u64, d: u64) -> Scalar {
        Scalar::from_ratio(n, d)
    }

    fn brute_ellipsoid(a: u64, b: u64, k: usize) -> u64 {
        let mut vals = Vec::new();
        for m in 0..=k as u64 + 1 {
            for n in 0..=k as u64 + 1 {
                vals.push(m * a + n * b);
            }
        }
        vals.sort_unstable();
        vals[k]
    }

    #[test]
    fn ball_sequence() {
        let got: Vec<Scalar> = (0..6).map(|k| ball_capacity(&s(1, 1), k)).collect();
        let want: Vec<Scalar> = [0, 1, 1, 2, 2, 2].iter().map(|&v| s(v, 1)).collect();
        assert_eq!(got, want);
        assert_eq!(ball_capacity(&s(3, 1), 4), s(6, 1));
        assert_eq!(ball_capacity(&s(1, 1), 6), s(3, 1));
    }

    #[test]
    fn ellipsoid_examples() {
        let cfg = CapacityConfig::default();
        let e12 = Ellipsoid::new(s(1, 1), s(2, 1)).unwrap();
        assert_eq!(ellipsoid_capacity(&e12, 4, &cfg).unwrap(), s(3, 1));
        let e23 = Ellipsoid::new(s(2, 1), s(3, 1)).unwrap();
        assert_eq!(ellipsoid_capacity(&e23, 3, &cfg).unwrap(), s(4, 1));
        let b1 = Ellipsoid::ball(s(1, 1)).unwrap();
        for k in 0..=100 {
            assert_eq!(ellipsoid_capacity(&b1, k, &cfg).unwrap(), ball_capacity(&s(1, 1), k));
        }
    }

    #[test]
    fn ellipsoid_matches_sorting() {
        let cfg = CapacityConfig::default();
        for (a, b) in [(1, 3), (2, 5), (3, 7), (4, 4), (5, 1)] {
            let e = Ellipsoid::new(s(a, 1), s(b, 1)).unwrap();
            for k in 0..60 {
                assert_eq!(
                    ellipsoid_capacity(&e, k as u64, &cfg).unwrap(),
                    s(brute_ellipsoid(a, b, k), 1),
                    "{a} {b} {k}"
                );
            }
        }
    }

    #[test]
    fn ellipsoid_rational_axes() {
        let cfg = CapacityConfig::default();
        let e = Ellipsoid::new(s(1, 2), s(2, 3)).unwrap();
        // 3m + 4n over 6
        for k in 0..40 {
            assert_eq!(ellipsoid_capacity(&e, k as u64, &cfg).unwrap(), s(brute_ellipsoid(3, 4, k), 6));
        }
    }

    #[test]
    fn ellipsoid_limit() {
        let cfg = CapacityConfig { ellipsoid_limit: 10, ..Default::default() };
        let e = Ellipsoid::ball(s(1, 1)).unwrap();
        assert!(matches!(ellipsoid_capacity(&e, 11, &cfg), Err(EchError::Resource(_))));
    }

    #[test]
    fn huge_k_ellipsoid() {
        let cfg = CapacityConfig::default();
        let e = Ellipsoid::ball(s(1, 1)).unwrap();
        let k = 999_999_999_999u64;
        assert_eq!(ellipsoid_capacity(&e, k, &cfg).unwrap(), ball_capacity(&s(1, 1), k));
    }

    #[test]
    fn floor_sum_brute() {
        for n in 0..8u128 {
            for m in 1..6u128 {
                for a in 0..7u128 {
                    for b in 0..7u128 {
                        let direct: u128 = (0..n).map(|i| (a * i + b) / m).sum();
                        assert_eq!(floor_sum(n, m, a, b), Some(direct));
                    }
                }
            }
        }
    }

    #[test]
    fn weyl_ratios() {
        let c = ball_capacity(&s(1, 1), 10_000);
        let r = weyl_ratio(&c, 10_000, &s(1, 2)).unwrap();
        assert!((r - 1.0).abs() < 0.05);
        assert_eq!(weyl_ratio(&c, 0, &s(1, 2)), Err(EchError::ZeroIndex));
    }
}
