//! High-precision real arithmetic for the exponential chart and the
//! logarithmic metric, on top of `astro-float`.
//!
//! Every `BigFloat` is a dyadic rational, so values that leave this module
//! are converted exactly into [`Scalar`]s or bracketed by directed rounding.

use astro_float::{BigFloat, Consts, RoundingMode, Sign};
use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::scalar::Scalar;

/// Default working precision in bits.
pub const DEFAULT_PRECISION: usize = 200;

/// Extra bits carried internally beyond the requested precision.
pub const GUARD_BITS: usize = 64;

fn consts() -> Consts {
    Consts::new().expect("astro-float constant cache")
}

/// Exact conversion of an integer.
pub fn from_bigint(n: &BigInt) -> BigFloat {
    let words = n.magnitude().to_u64_digits();
    if words.is_empty() {
        return BigFloat::from_u64(0, 64);
    }
    let sign = if n.sign() == num_bigint::Sign::Minus { Sign::Neg } else { Sign::Pos };
    BigFloat::from_words(&words, sign, (64 * words.len()) as i32)
}

/// `r` rounded to `p` bits in direction `rm`.
pub fn from_rational(r: &BigRational, p: usize, rm: RoundingMode) -> BigFloat {
    from_bigint(r.numer()).div(&from_bigint(r.denom()), p, rm)
}

/// Exact value of a finite `BigFloat` as a rational.
pub fn to_rational(x: &BigFloat) -> BigRational {
    let Some((words, _, sign, e, _)) = x.as_raw_parts() else {
        panic!("non-finite value {x:?}");
    };
    let m = BigInt::from(BigUint::new(words.iter().flat_map(|w| [*w as u32, (*w >> 32) as u32]).collect()));
    let m = if sign == Sign::Neg { -m } else { m };
    let shift = e as i64 - 64 * words.len() as i64;
    if shift >= 0 {
        BigRational::from_integer(m << shift as usize)
    } else {
        BigRational::new(m, BigInt::one() << (-shift) as usize)
    }
}

/// Nearest integer (halves rounded up) of a nonnegative finite value.
pub fn round_to_integer(x: &BigFloat) -> BigUint {
    let r = to_rational(x);
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    (r + half).floor().to_integer().to_biguint().unwrap_or_default()
}

pub fn to_f64(x: &BigFloat) -> f64 {
    if x.is_zero() {
        return 0.0;
    }
    Scalar::from_rational(to_rational(&x.abs_value())).map(|s| s.to_f64()).unwrap_or(f64::NAN)
        * if x.is_negative() { -1.0 } else { 1.0 }
}

trait AbsValue {
    fn abs_value(&self) -> BigFloat;
}

impl AbsValue for BigFloat {
    fn abs_value(&self) -> BigFloat {
        if self.is_negative() {
            self.neg()
        } else {
            self.clone()
        }
    }
}

/// `e^y` rounded to `p + GUARD_BITS` bits, as an exact dyadic scalar.
pub fn exp_scalar(y: &Scalar, p: usize) -> Scalar {
    Scalar::from_rational(to_rational(&exp(y, p))).expect("exponentials are positive")
}

/// `e^y` at `p + GUARD_BITS` bits.
pub fn exp(y: &Scalar, p: usize) -> BigFloat {
    let q = p + GUARD_BITS;
    let mut cc = consts();
    from_rational(y.as_rational(), q, RoundingMode::ToEven).exp(q, RoundingMode::ToEven, &mut cc)
}

/// An enclosure `[lo, hi]` of a real number.
#[derive(Clone, Debug)]
pub struct Interval {
    pub lo: BigFloat,
    pub hi: BigFloat,
}

impl Interval {
    pub fn lo_f64(&self) -> f64 {
        to_f64(&self.lo)
    }

    pub fn hi_f64(&self) -> f64 {
        to_f64(&self.hi)
    }

    pub fn mid_f64(&self) -> f64 {
        (self.lo_f64() + self.hi_f64()) / 2.0
    }

    /// Upper end minus lower end.
    pub fn width(&self, p: usize) -> BigFloat {
        self.hi.sub(&self.lo, p, RoundingMode::Up)
    }
}

/// `|ln r|` for a positive rational `r`, enclosed with outward rounding at
/// `p` bits. Inputs are bracketed at `p + GUARD_BITS` bits before the
/// logarithm, which is monotone, so the enclosure is rigorous up to the
/// library's own directed rounding of `ln`.
pub fn abs_ln(r: &BigRational, p: usize) -> Interval {
    assert!(r > &BigRational::zero(), "logarithm of a nonpositive number");
    let t = if r >= &BigRational::one() { r.clone() } else { r.recip() };
    let q = p + GUARD_BITS;
    let mut cc = consts();
    let lo_in = from_rational(&t, q, RoundingMode::Down);
    let hi_in = from_rational(&t, q, RoundingMode::Up);
    let zero = BigFloat::from_u64(0, p);
    let lo = lo_in.ln(p, RoundingMode::Down, &mut cc).max(&zero);
    let hi = hi_in.ln(p, RoundingMode::Up, &mut cc).max(&zero);
    Interval { lo, hi }
}

/// `ln x` at `p + GUARD_BITS` bits, for reporting.
pub fn ln_f64(x: &Scalar) -> f64 {
    let q = DEFAULT_PRECISION + GUARD_BITS;
    let mut cc = consts();
    to_f64(&from_rational(x.as_rational(), q, RoundingMode::ToEven).ln(q, RoundingMode::ToEven, &mut cc))
}

/// `ulp`-style tolerance: `n · 2^{-p} · max(1, |v|)`.
pub fn ulps(n: u64, p: usize, v: &BigFloat) -> BigFloat {
    let one = BigFloat::from_u64(1, p);
    let scale = if v.abs_value().cmp(&one).unwrap_or(0) > 0 { v.abs_value() } else { one };
    let mut eps = BigFloat::from_u64(n, p);
    eps.set_exponent(eps.exponent().unwrap() - p as i32);
    eps.mul(&scale, p, RoundingMode::Up)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_round_trips() {
        let r = BigRational::new(BigInt::from(-12345), BigInt::from(64));
        assert_eq!(to_rational(&from_rational(&r, 64, RoundingMode::ToEven)), r);
        let big = BigInt::from(3u32).pow(200);
        assert_eq!(to_rational(&from_bigint(&big)), BigRational::from_integer(big));
    }

    #[test]
    fn logs_bracket_the_truth() {
        let two = BigRational::from_integer(BigInt::from(2));
        let iv = abs_ln(&two, 200);
        assert!(iv.lo.cmp(&iv.hi).unwrap() <= 0);
        assert!((iv.mid_f64() - std::f64::consts::LN_2).abs() < 1e-15);
        let half = two.recip();
        assert!((abs_ln(&half, 200).mid_f64() - std::f64::consts::LN_2).abs() < 1e-15);
        let one = BigRational::one();
        assert!(abs_ln(&one, 200).hi.is_zero());
    }

    #[test]
    fn exponentials() {
        let e6 = exp_scalar(&Scalar::from_integer(6), 200);
        assert!((e6.to_f64() - 6f64.exp()).abs() < 1e-9);
        assert_eq!(round_to_integer(&exp(&Scalar::from_integer(3), 200)), BigUint::from(20u32));
    }
}
