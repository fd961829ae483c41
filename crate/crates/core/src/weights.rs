//! Weight expansions: ball decompositions of concave toric domains.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{EchError, Result};
use crate::geometry::{Ellipsoid, MomentProfile, ScaleFactor};
use crate::scalar::Scalar;

type Q = BigRational;

/// Multiset of ball sizes, run-length encoded and sorted by size descending.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct WeightMultiset {
    entries: Vec<(Scalar, BigUint)>,
}

impl WeightMultiset {
    /// Builds a multiset from arbitrary pairs: merges equal sizes, sorts,
    /// drops zero multiplicities. Zero sizes are rejected.
    pub fn new(pairs: impl IntoIterator<Item = (Scalar, BigUint)>) -> Result<Self> {
        let mut map: BTreeMap<Scalar, BigUint> = BTreeMap::new();
        for (w, m) in pairs {
            if w.is_zero() {
                return Err(EchError::InvalidDomain("weights must be positive".into()));
            }
            if m.is_zero() {
                continue;
            }
            *map.entry(w).or_default() += m;
        }
        Ok(WeightMultiset { entries: map.into_iter().rev().collect() })
    }

    /// A single ball `B(a)`.
    pub fn ball(a: Scalar) -> Result<Self> {
        Self::new([(a, BigUint::one())])
    }

    pub fn entries(&self) -> &[(Scalar, BigUint)] {
        &self.entries
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn total_multiplicity(&self) -> BigUint {
        self.entries.iter().map(|(_, m)| m).sum()
    }

    /// `Σ mult · w² / 2`, the area of any realization.
    pub fn area(&self) -> Scalar {
        let two = Scalar::from_integer(2);
        self.entries.iter().map(|(w, m)| &(&(w * w) * &Scalar::from_biguint(m.clone())) / &two).sum()
    }

    pub fn scale(&self, t: &ScaleFactor) -> WeightMultiset {
        let entries = self.entries.iter().map(|(w, m)| (w * t.value(), m.clone())).collect();
        WeightMultiset { entries }
    }

    /// Disjoint union.
    pub fn union(&self, other: &WeightMultiset) -> WeightMultiset {
        let pairs = self.entries.iter().chain(&other.entries).cloned();
        WeightMultiset::new(pairs).expect("entries of valid multisets")
    }
}

impl fmt::Debug for WeightMultiset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, (w, m)) in self.entries.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{w} x {m}")?;
        }
        write!(f, "}}")
    }
}

impl Serialize for WeightMultiset {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(self.entries.iter().map(|(w, m)| (w, m.to_string())))
    }
}

impl<'de> Deserialize<'de> for WeightMultiset {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error;
        let raw: Vec<(Scalar, String)> = Vec::deserialize(d)?;
        let mut pairs = Vec::with_capacity(raw.len());
        for (w, m) in raw {
            let m: BigUint = m.trim().parse().map_err(|_| D::Error::custom(format!("bad multiplicity `{m}`")))?;
            if m.is_zero() {
                return Err(D::Error::custom("multiplicity must be at least 1"));
            }
            pairs.push((w, m));
        }
        WeightMultiset::new(pairs).map_err(D::Error::custom)
    }
}

/// Weights of `E(a, b)` from the Euclidean algorithm on `(a, b)`.
pub fn ellipsoid_weights(e: &Ellipsoid) -> WeightMultiset {
    let mut pairs = Vec::new();
    let (mut a, mut b) = (e.a().as_rational().clone(), e.b().as_rational().clone());
    while !a.is_zero() {
        let q = (&b / &a).floor();
        let r = &b - &q * &a;
        pairs.push((Scalar::from_rational(a.clone()).unwrap(), q.to_integer().to_biguint().unwrap()));
        b = a;
        a = r;
    }
    WeightMultiset::new(pairs).expect("positive Euclidean quotients")
}

/// How a child region is obtained from its parent region.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum Transform {
    Root,
    /// `(x, y) ↦ (x, y + times·(x − c))`: the region against the y-axis.
    UpperShear {
        c: Scalar,
        #[serde(serialize_with = "crate::format::decimal")]
        times: BigUint,
    },
    /// `(x, y) ↦ (x + times·(y − c), y)`: the region against the x-axis.
    LowerShear {
        c: Scalar,
        #[serde(serialize_with = "crate::format::decimal")]
        times: BigUint,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TraceNode {
    /// Size of the triangle removed at this node.
    pub weight: Scalar,
    /// Number of consecutive identical removals folded into this node.
    #[serde(serialize_with = "crate::format::decimal")]
    pub multiplicity: BigUint,
    /// Map from the parent's residual region to this node's region.
    pub transform: Transform,
    pub parent: Option<usize>,
    pub depth: usize,
}

/// Recursion tree of a weight expansion, stored as an arena in visit order.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ExpansionTrace {
    pub nodes: Vec<TraceNode>,
}

impl ExpansionTrace {
    pub fn max_depth(&self) -> usize {
        self.nodes.iter().map(|n| n.depth).max().unwrap_or(0)
    }

    /// Triangle sizes collected from every node.
    pub fn weights(&self) -> WeightMultiset {
        WeightMultiset::new(self.nodes.iter().map(|n| (n.weight.clone(), n.multiplicity.clone())))
            .expect("trace weights are positive")
    }
}

/// Limits for [`weight_expansion_with`] and [`realize_with`].
#[derive(Clone, Copy, Debug)]
pub struct WeightConfig {
    pub depth_limit: usize,
    pub realize_limit: u64,
}

impl Default for WeightConfig {
    fn default() -> Self {
        WeightConfig { depth_limit: 100_000, realize_limit: 10_000 }
    }
}

pub fn weight_expansion(p: &MomentProfile) -> Result<(WeightMultiset, ExpansionTrace)> {
    weight_expansion_with(p, &WeightConfig::default())
}

/// Greedy weight expansion.
///
/// The head weight `c` is the largest `c` with `{x + y ≤ c} ⊆ Ω`, i.e. the
/// minimum of `x + y` over the vertices. What remains above the line
/// `x + y = c` splits into a piece against the y-axis and a piece against the
/// x-axis; each is sheared back into concave position and expanded in turn.
/// Runs of identical head weights (one leftover piece that keeps touching the
/// same axis point) are removed in a single step.
pub fn weight_expansion_with(p: &MomentProfile, cfg: &WeightConfig) -> Result<(WeightMultiset, ExpansionTrace)> {
    struct Work {
        pts: Vec<(Q, Q)>,
        parent: Option<usize>,
        transform: Transform,
        depth: usize,
    }
    let mut trace = ExpansionTrace::default();
    let mut stack = vec![Work { pts: p.points(), parent: None, transform: Transform::Root, depth: 0 }];
    while let Some(Work { pts, parent, transform, depth }) = stack.pop() {
        if depth > cfg.depth_limit {
            return Err(EchError::NonTermination { limit: cfg.depth_limit, residual: format!("{pts:?}") });
        }
        let m = pts.len() - 1;
        let sums: Vec<Q> = pts.iter().map(|(x, y)| x + y).collect();
        let c = sums.iter().min().unwrap().clone();
        let p1 = sums.iter().position(|s| *s == c).unwrap();
        let p2 = sums.iter().rposition(|s| *s == c).unwrap();
        let id = trace.nodes.len();
        let child =
            |pts: Vec<(Q, Q)>, transform: Transform| Work { pts, parent: Some(id), transform, depth: depth + 1 };
        let weight = Scalar::from_rational(c.clone()).expect("vertex sums are positive");

        if p1 == 0 && p2 == m {
            // the region is exactly the triangle
            trace.nodes.push(node(weight, BigUint::one(), transform, parent, depth));
            continue;
        }
        if p2 == m {
            // the minimum sits on the x-axis endpoint; peel the whole run at once
            let a = &pts[m].0;
            let slope = (&pts[m].1 - &pts[m - 1].1) / (a - &pts[m - 1].0);
            let q = (-slope).floor().to_integer();
            let qr = Q::from_integer(q.clone());
            let mut next: Vec<(Q, Q)> = pts.iter().map(|(x, y)| (x.clone(), y - &qr * (a - x))).collect();
            if let Some(z) = next.iter().position(|(_, y)| y.is_zero()) {
                next.truncate(z + 1);
            }
            let times = q.to_biguint().unwrap();
            trace.nodes.push(node(weight.clone(), times.clone(), transform, parent, depth));
            if next.len() >= 2 {
                stack.push(child(next, Transform::UpperShear { c: weight, times }));
            }
            continue;
        }
        if p1 == 0 {
            let b = &pts[0].1;
            let q = (&pts[1].0 / (b - &pts[1].1)).floor().to_integer();
            let qr = Q::from_integer(q.clone());
            let mut next: Vec<(Q, Q)> = pts.iter().map(|(x, y)| (x - &qr * (b - y), y.clone())).collect();
            if let Some(z) = next.iter().rposition(|(x, _)| x.is_zero()) {
                next.drain(..z);
            }
            let times = q.to_biguint().unwrap();
            trace.nodes.push(node(weight.clone(), times.clone(), transform, parent, depth));
            if next.len() >= 2 {
                stack.push(child(next, Transform::LowerShear { c: weight, times }));
            }
            continue;
        }
        trace.nodes.push(node(weight.clone(), BigUint::one(), transform, parent, depth));
        let upper: Vec<(Q, Q)> = pts[..=p1].iter().map(|(x, y)| (x.clone(), x + y - &c)).collect();
        let lower: Vec<(Q, Q)> = pts[p2..].iter().map(|(x, y)| (x + y - &c, y.clone())).collect();
        // pushed first, popped last: the y-axis piece is expanded first
        stack.push(child(lower, Transform::LowerShear { c: weight.clone(), times: BigUint::one() }));
        stack.push(child(upper, Transform::UpperShear { c: weight, times: BigUint::one() }));
    }
    Ok((trace.weights(), trace))
}

fn node(weight: Scalar, multiplicity: BigUint, transform: Transform, parent: Option<usize>, depth: usize) -> TraceNode {
    TraceNode { weight, multiplicity, transform, parent, depth }
}

pub fn realize(w: &WeightMultiset) -> Result<MomentProfile> {
    realize_with(w, &WeightConfig::default())
}

/// A concave toric domain whose weight expansion is exactly `w`.
///
/// Weights are placed from the smallest up. With the current region `R`
/// (of width smaller than the next weight `a`, taken with multiplicity `m`),
/// the next region is `R` sheared by `(x, y) ↦ (x, y + m·(a − x))` followed by
/// the vertex `(a, 0)`; its expansion peels exactly `a × m` and returns `R`.
pub fn realize_with(w: &WeightMultiset, cfg: &WeightConfig) -> Result<MomentProfile> {
    let total = w.total_multiplicity();
    if total > BigUint::from(cfg.realize_limit) {
        return Err(EchError::RealizationTooLarge { total: total.to_string(), limit: cfg.realize_limit });
    }
    if w.is_empty() {
        return Err(EchError::InvalidDomain("cannot realize an empty weight multiset".into()));
    }
    let mut pts: Vec<(Q, Q)> = Vec::new();
    for (a, m) in w.entries().iter().rev() {
        let a = a.as_rational();
        let m = Q::from_integer(BigInt::from(m.clone()));
        if pts.is_empty() {
            pts = vec![(Q::zero(), &m * a), (a.clone(), Q::zero())];
            continue;
        }
        for (x, y) in pts.iter_mut() {
            *y += &m * (a - &*x);
        }
        pts.push((a.clone(), Q::zero()));
    }
    MomentProfile::from_points(pts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{inclusion_scale, Vertex};

    fn s(n: u64, d: u64) -> Scalar {
        Scalar::from_ratio(n, d)
    }

    fn ws(pairs: &[((u64, u64), u64)]) -> WeightMultiset {
        WeightMultiset::new(pairs.iter().map(|&((n, d), m)| (s(n, d), BigUint::from(m)))).unwrap()
    }

    fn ell(a: (u64, u64), b: (u64, u64)) -> Ellipsoid {
        Ellipsoid::new(s(a.0, a.1), s(b.0, b.1)).unwrap()
    }

    #[test]
    fn ellipsoid_weight_examples() {
        assert_eq!(ellipsoid_weights(&ell((1, 1), (3, 1))), ws(&[((1, 1), 3)]));
        assert_eq!(ellipsoid_weights(&ell((2, 1), (3, 1))), ws(&[((2, 1), 1), ((1, 1), 2)]));
        assert_eq!(ellipsoid_weights(&ell((1, 8), (512, 1))), ws(&[((1, 8), 4096)]));
    }

    #[test]
    fn expansion_examples() {
        let tri = MomentProfile::triangle(s(1, 1), s(1, 1));
        assert_eq!(weight_expansion(&tri).unwrap().0, ws(&[((1, 1), 1)]));
        let e23 = ell((2, 1), (3, 1)).profile();
        let (w, trace) = weight_expansion(&e23).unwrap();
        assert_eq!(w, ws(&[((2, 1), 1), ((1, 1), 2)]));
        assert_eq!(trace.weights(), w);
        assert_eq!(trace.nodes[0].transform, Transform::Root);
    }

    #[test]
    fn realize_examples() {
        assert_eq!(realize(&ws(&[((1, 1), 1)])).unwrap(), MomentProfile::triangle(s(1, 1), s(1, 1)));
        let r = realize(&ws(&[((1, 1), 2)])).unwrap();
        assert_eq!(r.area(), s(1, 1));
        assert_eq!(weight_expansion(&r).unwrap().0, ws(&[((1, 1), 2)]));
        let w = ws(&[((2, 1), 1), ((1, 1), 2)]);
        let r = realize(&w).unwrap();
        assert_eq!(r.area(), s(3, 1));
        assert_eq!(weight_expansion(&r).unwrap().0, w);
        // E(2,3) and its realization have the same weights but differ as sets
        let scale = inclusion_scale(&ell((2, 1), (3, 1)), &r).unwrap();
        assert!(scale >= s(1, 1));
    }

    #[test]
    fn notsame_shape() {
        let w = ws(&[((1, 1), 1)]).union(&ellipsoid_weights(&ell((1, 4), (4, 1))));
        let r = realize(&w).unwrap();
        let expect: Vec<Vertex> =
            [(s(0, 1), s(5, 1)), (s(1, 4), s(3, 4)), (s(1, 1), s(0, 1))].into_iter().map(Vertex::from).collect();
        assert_eq!(r.vertices(), &expect[..]);
    }

    #[test]
    fn realize_limit() {
        let err = realize(&ws(&[((1, 1), 10_001)])).unwrap_err();
        assert!(matches!(err, EchError::RealizationTooLarge { .. }));
        assert!(realize(&WeightMultiset::default()).is_err());
    }

    #[test]
    fn depth_limit() {
        let w = ws(&[((3, 1), 1), ((2, 1), 1), ((1, 1), 1)]);
        let r = realize(&w).unwrap();
        let cfg = WeightConfig { depth_limit: 1, ..Default::default() };
        assert!(matches!(weight_expansion_with(&r, &cfg), Err(EchError::NonTermination { .. })));
    }

    #[test]
    fn huge_multiplicities_expand() {
        // triangle with legs 1/4096 and 4096^2: one class of 4096^3 balls
        let tri = MomentProfile::triangle(s(1, 4096), s(4096 * 4096, 1));
        let (w, trace) = weight_expansion(&tri).unwrap();
        assert_eq!(w, WeightMultiset::new([(s(1, 4096), BigUint::from(4096u64).pow(3))]).unwrap());
        assert_eq!(trace.nodes.len(), 1);
    }

    #[test]
    fn serde_format() {
        let w = ws(&[((1, 8), 4096), ((1, 4096), 3)]);
        let js = serde_json::to_string(&w).unwrap();
        assert_eq!(js, r#"[["1/8","4096"],["1/4096","3"]]"#);
        assert_eq!(serde_json::from_str::<WeightMultiset>(&js).unwrap(), w);
        assert!(serde_json::from_str::<WeightMultiset>(r#"[["1/8","0"]]"#).is_err());
    }
}
