//! Quasi-flat families: parameter vectors `v = (B_1, …, B_N)`, the domains
//! `X̂_v` built from them, and the chart from `(ℝⁿ, ‖·‖_∞)` into parameter
//! space.
//!
//! `X̂_v` is the union of the ellipsoids `E(B_i^{-i/2}, B_i^{1+i/2})`; its
//! weights are `a_i = B_i^{-i/2}` with multiplicity `B_i^{i+1}`.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{EchError, Result};
use crate::geometry::MomentProfile;
use crate::hp::{self, Interval};
use crate::scalar::Scalar;
use crate::weights::{realize_with, WeightConfig, WeightMultiset};

/// Default lower threshold for the `B_k`.
pub const DEFAULT_THRESHOLD: u64 = 64;

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ParameterVector(Vec<Scalar>);

/// Which admissibility conditions a parameter vector satisfies.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Admissibility {
    pub threshold: Scalar,
    /// `B_k >= threshold` for all `k`.
    pub above_threshold: bool,
    /// `B_k² <= B_{k+1}` for all `k < N`.
    pub growth: bool,
    /// `B_k^{k+1}` is an integer for all `k`.
    pub integral_counts: bool,
    /// Every weight `B_k^{-k/2}` is rational.
    pub exact: bool,
    pub failures: Vec<String>,
}

impl Admissibility {
    pub fn admissible(&self) -> bool {
        self.above_threshold && self.growth && self.integral_counts && self.exact
    }
}

impl ParameterVector {
    pub fn new(b: Vec<Scalar>) -> Result<Self> {
        if b.is_empty() {
            return Err(EchError::InvalidDomain("parameter vector is empty".into()));
        }
        if b.iter().any(Scalar::is_zero) {
            return Err(EchError::InvalidDomain("parameters must be positive".into()));
        }
        Ok(ParameterVector(b))
    }

    pub fn from_integers(b: &[u64]) -> Result<Self> {
        Self::new(b.iter().map(|&x| Scalar::from_integer(x)).collect())
    }

    pub fn values(&self) -> &[Scalar] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Checks every condition and reports; never fails.
    pub fn validate(&self, threshold: &Scalar) -> Admissibility {
        let mut failures = Vec::new();
        let b = &self.0;
        let mut above = true;
        let mut growth = true;
        let mut integral = true;
        let mut exact = true;
        for (i, bk) in b.iter().enumerate() {
            let k = i + 1;
            if bk < threshold {
                above = false;
                failures.push(format!("B_{k} = {bk} is below the threshold {threshold}"));
            }
            if let Some(next) = b.get(i + 1) {
                if &(bk * bk) > next {
                    growth = false;
                    failures.push(format!("B_{k}^2 = {} exceeds B_{} = {next}", bk * bk, k + 1));
                }
            }
            if !bk.pow(k as u32 + 1).is_integer() {
                integral = false;
                failures.push(format!("B_{k}^{} = {} is not an integer", k + 1, bk.pow(k as u32 + 1)));
            }
            if k % 2 == 1 && bk.sqrt_exact().is_none() {
                exact = false;
                failures.push(format!("B_{k} = {bk} is not a rational square, so B_{k}^(-{k}/2) is irrational"));
            }
        }
        Admissibility {
            threshold: threshold.clone(),
            above_threshold: above,
            growth,
            integral_counts: integral,
            exact,
            failures,
        }
    }

    /// `B_k^{-k/2}`, if rational.
    pub fn weight(&self, k: usize) -> Result<Scalar> {
        let bk = &self.0[k - 1];
        let root = if k % 2 == 0 {
            bk.pow(k as u32 / 2)
        } else {
            bk.sqrt_exact().ok_or_else(|| EchError::NotRepresentable { index: k, value: bk.to_string() })?.pow(k as u32)
        };
        root.recip()
    }

    /// `B_k^{k+1}`, if integral.
    pub fn multiplicity(&self, k: usize) -> Result<BigUint> {
        let m = self.0[k - 1].pow(k as u32 + 1);
        if !m.is_integer() {
            return Err(EchError::InvalidDomain(format!("B_{k}^{} = {m} is not an integer", k + 1)));
        }
        Ok(m.floor())
    }

    /// Sum of the `B_k`; twice the area of `X̂_v`.
    pub fn sum(&self) -> Scalar {
        self.0.iter().cloned().sum()
    }
}

/// Extra small weights standing in for a smoothing of `X̂_v`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Padding {
    pub count: u64,
    pub bound: Scalar,
}

/// Weights of `X̂_v`, optionally padded with `count` equal weights of size at
/// most `bound` and strictly below `B_N^{-N}`, adding area at most 1.
pub fn build_weights(v: &ParameterVector, padding: Option<&Padding>) -> Result<WeightMultiset> {
    let mut pairs = Vec::with_capacity(v.len() + 1);
    for k in 1..=v.len() {
        pairs.push((v.weight(k)?, v.multiplicity(k)?));
    }
    if let Some(pad) = padding {
        if pad.count > 0 {
            let n = v.len();
            let smallest = v.weight(n)?.pow(2);
            let half = Scalar::from_ratio(1, 2);
            let mut size = if pad.bound < smallest { pad.bound.clone() } else { &smallest * &half };
            if size.is_zero() {
                return Err(EchError::InvalidDomain("padding bound must be positive".into()));
            }
            let count = Scalar::from_integer(pad.count);
            while &(&count * &(&size * &size)) * &half > Scalar::one() {
                size = &size * &half;
            }
            pairs.push((size, BigUint::from(pad.count)));
        }
    }
    WeightMultiset::new(pairs)
}

/// The concave toric domain `X̂_v`, for vectors small enough to realize.
pub fn build_domain(v: &ParameterVector, cfg: &WeightConfig) -> Result<MomentProfile> {
    realize_with(&build_weights(v, None)?, cfg)
}

/// The linear stage `ℝ^{2n} → ℝ^{2n}`: `y_1 = Σ x`, and row `i + 1` has
/// coefficient `2^i + 2^{i-1-l}` on `x_{2n-l}` for `l < i` and `2^i` otherwise.
pub fn map_linear(x: &[Scalar]) -> Result<Vec<Scalar>> {
    let m = x.len();
    if m == 0 || m % 2 != 0 {
        return Err(EchError::DimensionMismatch(m, m + m % 2));
    }
    let mut y = Vec::with_capacity(m);
    y.push(x.iter().cloned().sum());
    for i in 1..m {
        let mut acc = Scalar::zero();
        for l in 0..m {
            let mut c = BigUint::one() << i;
            if l < i {
                c += BigUint::one() << (i - 1 - l);
            }
            acc = acc + &Scalar::from_biguint(c) * &x[m - 1 - l];
        }
        y.push(acc);
    }
    Ok(y)
}

/// Inverse of [`map_linear`]: `x_{2n-i+1} = y_{i+1} - 2y_i`, then
/// `x_1 = y_1 - Σ_{j≥2} x_j`. Fails if a recovered coordinate is not positive.
pub fn inverse_linear(y: &[Scalar]) -> Result<Vec<Scalar>> {
    let m = y.len();
    if m == 0 || m % 2 != 0 {
        return Err(EchError::DimensionMismatch(m, m + m % 2));
    }
    let two = BigRational::from_integer(BigInt::from(2));
    let mut x = vec![BigRational::zero(); m];
    for i in 1..m {
        x[m - i] = y[i].as_rational() - &two * y[i - 1].as_rational();
    }
    let rest: BigRational = x[1..].iter().fold(BigRational::zero(), |a, b| a + b);
    x[0] = y[0].as_rational() - rest;
    x.into_iter()
        .enumerate()
        .map(|(i, v)| {
            if v.is_positive() {
                Ok(Scalar::from_rational(v).unwrap())
            } else {
                Err(EchError::OutsideCone { index: i + 1, value: v.to_string() })
            }
        })
        .collect()
}

/// The folding stage `ℝⁿ → ℝ^{2n}`: `x_i ↦ (3 + max(x_i, 0), 3 + max(-x_i, 0))`.
pub fn fold(x: &[BigRational]) -> Vec<Scalar> {
    let three = BigRational::from_integer(BigInt::from(3));
    let mut out = Vec::with_capacity(2 * x.len());
    for xi in x {
        let pos = if xi.is_positive() { xi.clone() } else { BigRational::zero() };
        let neg = if xi.is_negative() { -xi.clone() } else { BigRational::zero() };
        out.push(Scalar::from_rational(&three + pos).unwrap());
        out.push(Scalar::from_rational(&three + neg).unwrap());
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum SnapMode {
    /// Round each `B` to an admissible value (a perfect square at odd
    /// positions, an integer at even ones).
    #[default]
    Exact,
    /// Keep `e^y` as a dyadic rational at the working precision.
    Approx,
}

/// One point pushed through the chart.
#[derive(Clone, Debug, Serialize)]
pub struct ChartPoint {
    /// Source point, as signed `"p/q"` strings.
    pub x: Vec<String>,
    pub folded: Vec<Scalar>,
    pub y: Vec<Scalar>,
    pub b: ParameterVector,
    /// `|ln B_j − y_j|` per coordinate.
    pub snap_error: Vec<f64>,
    pub mode: SnapMode,
}

/// Composite chart `x ↦ exp(map_linear(fold(x)))`, with optional snapping.
pub fn chart_embed(x: &[BigRational], mode: SnapMode, precision: usize) -> Result<ChartPoint> {
    let folded = fold(x);
    let y = map_linear(&folded)?;
    let mut b = Vec::with_capacity(y.len());
    let mut snap_error = Vec::with_capacity(y.len());
    for (j, yj) in y.iter().enumerate() {
        let k = j + 1;
        let bj = match mode {
            SnapMode::Approx => hp::exp_scalar(yj, precision),
            SnapMode::Exact if k % 2 == 1 => {
                let half = yj * &Scalar::from_ratio(1, 2);
                let m = hp::round_to_integer(&hp::exp(&half, precision)).max(BigUint::one());
                Scalar::from_biguint(&m * &m)
            }
            SnapMode::Exact => Scalar::from_biguint(hp::round_to_integer(&hp::exp(yj, precision)).max(BigUint::one())),
        };
        snap_error.push((hp::ln_f64(&bj) - yj.to_f64()).abs());
        b.push(bj);
    }
    Ok(ChartPoint {
        x: x.iter().map(|v| format!("{}/{}", v.numer(), v.denom())).collect(),
        folded,
        y,
        b: ParameterVector::new(b)?,
        snap_error,
        mode,
    })
}

/// `max_i |ln(x_i / y_i)|`, enclosed at `precision` bits.
pub fn q_metric(x: &[Scalar], y: &[Scalar], precision: usize) -> Result<Interval> {
    if x.len() != y.len() {
        return Err(EchError::DimensionMismatch(x.len(), y.len()));
    }
    if x.iter().chain(y).any(Scalar::is_zero) {
        return Err(EchError::InvalidDomain("metric coordinates must be positive".into()));
    }
    let mut best = Interval {
        lo: astro_float::BigFloat::from_u64(0, precision),
        hi: astro_float::BigFloat::from_u64(0, precision),
    };
    for (a, b) in x.iter().zip(y) {
        let iv = hp::abs_ln(&(a.as_rational() / b.as_rational()), precision);
        best = Interval { lo: best.lo.max(&iv.lo), hi: best.hi.max(&iv.hi) };
    }
    Ok(best)
}

/// `‖v, w‖` on parameter vectors.
pub fn parameter_distance(v: &ParameterVector, w: &ParameterVector, precision: usize) -> Result<Interval> {
    q_metric(v.values(), w.values(), precision)
}
