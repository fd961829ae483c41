//! Moment-plane geometry of toric domains.
//!
//! A toric domain is described by its moment region in the closed first
//! quadrant, using the normalization `π(|z₁|², |z₂|²)`, so the symplectic volume
//! of the domain equals the Euclidean area of the region. Concave toric domains
//! are regions under a convex, strictly decreasing piecewise-linear function;
//! ellipsoids are the triangles with legs on the axes.

use std::borrow::Cow;
use std::fmt;

use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{EchError, Result};
use crate::scalar::Scalar;

type Q = BigRational;

/// A vertex `(x, y)` of a moment region. Serialized as a `["p/q", "p/q"]` pair.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(from = "(Scalar, Scalar)", into = "(Scalar, Scalar)")]
pub struct Vertex {
    pub x: Scalar,
    pub y: Scalar,
}

impl Vertex {
    pub fn new(x: Scalar, y: Scalar) -> Self {
        Vertex { x, y }
    }

    fn q(&self) -> (Q, Q) {
        (self.x.as_rational().clone(), self.y.as_rational().clone())
    }
}

impl From<(Scalar, Scalar)> for Vertex {
    fn from((x, y): (Scalar, Scalar)) -> Self {
        Vertex { x, y }
    }
}

impl From<Vertex> for (Scalar, Scalar) {
    fn from(v: Vertex) -> Self {
        (v.x, v.y)
    }
}

impl fmt::Debug for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

/// Positive scale factor acting coordinatewise on the moment plane.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScaleFactor(Scalar);

impl ScaleFactor {
    pub fn new(t: Scalar) -> Result<Self> {
        if t.is_zero() {
            return Err(EchError::InvalidDomain("scale factor must be positive".into()));
        }
        Ok(ScaleFactor(t))
    }

    pub fn value(&self) -> &Scalar {
        &self.0
    }
}

/// The ellipsoid `E(a, b)`, stored with `a <= b`.
///
/// Its moment region is the triangle with vertices `(0, b)` and `(a, 0)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "EllipsoidRepr", into = "EllipsoidRepr")]
pub struct Ellipsoid {
    a: Scalar,
    b: Scalar,
}

#[derive(Serialize, Deserialize)]
struct EllipsoidRepr {
    a: Scalar,
    b: Scalar,
}

impl TryFrom<EllipsoidRepr> for Ellipsoid {
    type Error = EchError;
    fn try_from(r: EllipsoidRepr) -> Result<Self> {
        Ellipsoid::new(r.a, r.b)
    }
}

impl From<Ellipsoid> for EllipsoidRepr {
    fn from(e: Ellipsoid) -> Self {
        EllipsoidRepr { a: e.a, b: e.b }
    }
}

impl Ellipsoid {
    pub fn new(a: Scalar, b: Scalar) -> Result<Self> {
        if a.is_zero() || b.is_zero() {
            return Err(EchError::InvalidDomain(format!("ellipsoid E({a}, {b}) has a zero axis")));
        }
        Ok(if a <= b { Ellipsoid { a, b } } else { Ellipsoid { a: b, b: a } })
    }

    /// The ball `B(a) = E(a, a)`.
    pub fn ball(a: Scalar) -> Result<Self> {
        Ellipsoid::new(a.clone(), a)
    }

    pub fn a(&self) -> &Scalar {
        &self.a
    }

    pub fn b(&self) -> &Scalar {
        &self.b
    }

    pub fn area(&self) -> Scalar {
        &(&self.a * &self.b) / &Scalar::from_integer(2)
    }

    pub fn scale(&self, t: &ScaleFactor) -> Ellipsoid {
        Ellipsoid { a: &self.a * t.value(), b: &self.b * t.value() }
    }

    pub fn profile(&self) -> MomentProfile {
        MomentProfile::triangle(self.a.clone(), self.b.clone())
    }
}

/// Boundary of a concave toric domain: vertices from the y-axis to the x-axis.
///
/// Invariants (enforced by every constructor): at least two vertices, the
/// first with `x = 0` and the last with `y = 0`, `x` strictly increasing, `y`
/// strictly decreasing, slopes strictly increasing (convex, no collinear
/// interior vertices).
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vertex>", into = "Vec<Vertex>")]
pub struct MomentProfile {
    vertices: Vec<Vertex>,
}

impl TryFrom<Vec<Vertex>> for MomentProfile {
    type Error = EchError;
    fn try_from(v: Vec<Vertex>) -> Result<Self> {
        MomentProfile::new(v)
    }
}

impl From<MomentProfile> for Vec<Vertex> {
    fn from(p: MomentProfile) -> Self {
        p.vertices
    }
}

impl fmt::Debug for MomentProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(&self.vertices).finish()
    }
}

impl MomentProfile {
    /// Validates and normalizes a vertex list. Collinear interior vertices are
    /// dropped; anything else that breaks the invariants is rejected.
    pub fn new(vertices: Vec<Vertex>) -> Result<Self> {
        let pts: Vec<(Q, Q)> = vertices.iter().map(Vertex::q).collect();
        Self::from_points(pts)
    }

    pub(crate) fn from_points(pts: Vec<(Q, Q)>) -> Result<Self> {
        let bad = |why: String| Err(EchError::InvalidDomain(why));
        if pts.len() < 2 {
            return bad(format!("profile needs at least two vertices, got {}", pts.len()));
        }
        if !pts[0].0.is_zero() {
            return bad(format!("first vertex must lie on the y-axis, got x = {}", pts[0].0));
        }
        if !pts[pts.len() - 1].1.is_zero() {
            return bad(format!("last vertex must lie on the x-axis, got y = {}", pts[pts.len() - 1].1));
        }
        for w in pts.windows(2) {
            if w[1].0 <= w[0].0 || w[1].1 >= w[0].1 {
                return bad(format!(
                    "vertices ({}, {}) -> ({}, {}) are not strictly monotone",
                    w[0].0, w[0].1, w[1].0, w[1].1
                ));
            }
        }
        let mut kept: Vec<(Q, Q)> = Vec::with_capacity(pts.len());
        for p in pts {
            while kept.len() >= 2 {
                let n = kept.len();
                let s1 = slope(&kept[n - 2], &kept[n - 1]);
                let s2 = slope(&kept[n - 1], &p);
                if s1 == s2 {
                    kept.pop();
                } else if s2 < s1 {
                    return bad(format!("boundary is not convex at ({}, {})", kept[n - 1].0, kept[n - 1].1));
                } else {
                    break;
                }
            }
            kept.push(p);
        }
        let vertices = kept
            .into_iter()
            .map(|(x, y)| Vertex {
                x: Scalar::from_rational(x).expect("monotone from an axis point"),
                y: Scalar::from_rational(y).expect("monotone to an axis point"),
            })
            .collect();
        Ok(MomentProfile { vertices })
    }

    /// Triangle with x-intercept `a` and y-intercept `b`.
    pub fn triangle(a: Scalar, b: Scalar) -> Self {
        assert!(!a.is_zero() && !b.is_zero(), "degenerate triangle");
        MomentProfile { vertices: vec![Vertex::new(Scalar::zero(), b), Vertex::new(a, Scalar::zero())] }
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub(crate) fn points(&self) -> Vec<(Q, Q)> {
        self.vertices.iter().map(Vertex::q).collect()
    }

    /// Intercept on the x-axis.
    pub fn width(&self) -> &Scalar {
        &self.vertices[self.vertices.len() - 1].x
    }

    /// Intercept on the y-axis.
    pub fn height(&self) -> &Scalar {
        &self.vertices[0].y
    }

    pub fn area(&self) -> Scalar {
        let mut acc = Q::zero();
        for w in self.vertices.windows(2) {
            let dx = w[1].x.as_rational() - w[0].x.as_rational();
            acc += dx * (w[0].y.as_rational() + w[1].y.as_rational());
        }
        Scalar::from_rational(acc / Q::from_integer(2.into())).expect("area is nonnegative")
    }

    pub fn scale(&self, t: &ScaleFactor) -> MomentProfile {
        let vertices = self.vertices.iter().map(|v| Vertex::new(&v.x * t.value(), &v.y * t.value())).collect();
        MomentProfile { vertices }
    }

    /// Radial function: the `t` with `t * dir` on the boundary. `dir` must be a
    /// nonzero vector in the closed first quadrant.
    pub(crate) fn radial(&self, dir: &(Q, Q)) -> Q {
        let pts = self.points();
        // boundary vertices run clockwise from the y-axis to the x-axis
        for w in pts.windows(2) {
            let (u, v) = (&w[0], &w[1]);
            if cross(dir, u) >= Q::zero() && cross(v, dir) >= Q::zero() {
                let e = (&v.0 - &u.0, &v.1 - &u.1);
                return cross(u, &e) / cross(dir, &e);
            }
        }
        unreachable!("direction outside the first quadrant")
    }
}

fn slope(a: &(Q, Q), b: &(Q, Q)) -> Q {
    (&b.1 - &a.1) / (&b.0 - &a.0)
}

fn cross(a: &(Q, Q), b: &(Q, Q)) -> Q {
    &a.0 * &b.1 - &a.1 * &b.0
}

/// Anything with a moment region in standard concave position.
pub trait MomentRegion {
    fn moment_profile(&self) -> Cow<'_, MomentProfile>;
}

impl MomentRegion for MomentProfile {
    fn moment_profile(&self) -> Cow<'_, MomentProfile> {
        Cow::Borrowed(self)
    }
}

impl MomentRegion for Ellipsoid {
    fn moment_profile(&self) -> Cow<'_, MomentProfile> {
        Cow::Owned(self.profile())
    }
}

/// Smallest `T` with `p ⊆ T · q`.
///
/// Both regions are star-shaped about the origin, so this is the supremum of
/// the ratio of radial functions. Between consecutive vertex directions of the
/// two boundaries that ratio is a linear-fractional function of the direction,
/// hence monotone, so the supremum is attained at a vertex direction.
pub fn inclusion_scale(p: &impl MomentRegion, q: &impl MomentRegion) -> Result<Scalar> {
    let p = p.moment_profile();
    let q = q.moment_profile();
    for r in [&*p, &*q] {
        if r.area().is_zero() {
            return Err(EchError::InvalidDomain("region has zero area".into()));
        }
    }
    let mut best = Q::zero();
    for dir in p.points().into_iter().chain(q.points()) {
        let ratio = p.radial(&dir) / q.radial(&dir);
        if ratio > best {
            best = ratio;
        }
    }
    Scalar::from_rational(best)
}

/// Radial ratio in one direction; used by sampling cross-checks.
pub fn radial_ratio(p: &impl MomentRegion, q: &impl MomentRegion, dir: (Scalar, Scalar)) -> Scalar {
    let d = (dir.0.into_rational(), dir.1.into_rational());
    assert!(d.0.is_positive() || d.1.is_positive(), "zero direction");
    let r = p.moment_profile().radial(&d) / q.moment_profile().radial(&d);
    Scalar::from_rational(r).expect("radial functions are positive")
}
