//! Exact nonnegative rationals.
//!
//! Every coordinate, weight, capacity and scale factor in the crate is a
//! [`Scalar`]. The canonical text form is `"p/q"` in lowest terms, always
//! with an explicit denominator. Parsing additionally accepts plain integers
//! (`"12"`) and finite decimals (`"0.125"`).

use std::fmt;
use std::ops::{Add, Div, Mul};
use std::str::FromStr;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{EchError, Result};

/// Exact nonnegative rational number, always stored in lowest terms.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Scalar(BigRational);

impl Scalar {
    pub fn zero() -> Self {
        Scalar(BigRational::zero())
    }

    pub fn one() -> Self {
        Scalar(BigRational::one())
    }

    pub fn from_integer(n: u64) -> Self {
        Scalar(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn from_biguint(n: BigUint) -> Self {
        Scalar(BigRational::from_integer(BigInt::from_biguint(Sign::Plus, n)))
    }

    /// `num / den`; panics if `den == 0`.
    pub fn from_ratio(num: u64, den: u64) -> Self {
        assert!(den != 0, "zero denominator");
        Scalar(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn new(num: BigInt, den: BigInt) -> Result<Self> {
        if den.is_zero() {
            return Err(EchError::Parse(format!("{num}/0"), "zero denominator".into()));
        }
        Self::from_rational(BigRational::new(num, den))
    }

    pub fn from_rational(r: BigRational) -> Result<Self> {
        if r.is_negative() {
            return Err(EchError::Negative(r.to_string()));
        }
        Ok(Scalar(r))
    }

    pub fn as_rational(&self) -> &BigRational {
        &self.0
    }

    pub fn into_rational(self) -> BigRational {
        self.0
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    /// `self - rhs` if the result stays nonnegative.
    pub fn checked_sub(&self, rhs: &Scalar) -> Option<Scalar> {
        if rhs.0 > self.0 {
            None
        } else {
            Some(Scalar(&self.0 - &rhs.0))
        }
    }

    pub fn recip(&self) -> Result<Scalar> {
        if self.is_zero() {
            return Err(EchError::InvalidDomain("reciprocal of zero".into()));
        }
        Ok(Scalar(self.0.recip()))
    }

    pub fn floor(&self) -> BigUint {
        self.0.floor().to_integer().to_biguint().unwrap_or_default()
    }

    pub fn pow(&self, exp: u32) -> Scalar {
        Scalar(num_traits::pow(self.0.clone(), exp as usize))
    }

    /// Exact square root when both numerator and denominator are perfect squares.
    pub fn sqrt_exact(&self) -> Option<Scalar> {
        let n = self.numer().to_biguint()?;
        let d = self.denom().to_biguint()?;
        let rn = n.sqrt();
        let rd = d.sqrt();
        if &rn * &rn == n && &rd * &rd == d {
            Some(Scalar(BigRational::new(rn.into(), rd.into())))
        } else {
            None
        }
    }

    /// Nearest `f64`; accurate for values whose numerator or denominator exceed
    /// the `f64` range as long as the quotient itself is representable.
    pub fn to_f64(&self) -> f64 {
        if let (Some(n), Some(d)) = (self.numer().to_f64(), self.denom().to_f64()) {
            if n.is_finite() && d.is_finite() {
                return n / d;
            }
        }
        ln_big(self.numer()).map_or(0.0, |ln| (ln - ln_big(self.denom()).unwrap_or(0.0)).exp())
    }

    /// Natural logarithm as `f64`; `None` for zero.
    pub fn ln(&self) -> Option<f64> {
        Some(ln_big(self.numer())? - ln_big(self.denom())?)
    }
}

/// `ln |n|` for an arbitrary-size integer, from its top 64 bits.
pub(crate) fn ln_big(n: &BigInt) -> Option<f64> {
    let m = n.magnitude();
    if m.is_zero() {
        return None;
    }
    let bits = m.bits();
    if bits <= 64 {
        return Some(m.to_u64().unwrap() as f64).map(f64::ln);
    }
    let shift = bits - 64;
    let top = (m >> shift).to_u64().unwrap() as f64;
    Some(top.ln() + shift as f64 * std::f64::consts::LN_2)
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.0.numer(), self.0.denom())
    }
}

impl fmt::Debug for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Scalar {
    type Err = EchError;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        let bad = |why: &str| EchError::Parse(s.to_string(), why.to_string());
        if let Some((p, q)) = t.split_once('/') {
            let p: BigInt = p.trim().parse().map_err(|_| bad("bad numerator"))?;
            let q: BigInt = q.trim().parse().map_err(|_| bad("bad denominator"))?;
            return Scalar::new(p, q);
        }
        if let Some((ip, fp)) = t.split_once('.') {
            if fp.is_empty() || !fp.bytes().all(|b| b.is_ascii_digit()) {
                return Err(bad("bad decimal fraction"));
            }
            let digits = format!("{ip}{fp}");
            let n: BigInt = digits.parse().map_err(|_| bad("bad decimal"))?;
            let d = num_traits::pow(BigInt::from(10u32), fp.len());
            return Scalar::new(n, d);
        }
        let n: BigInt = t.parse().map_err(|_| bad("not a rational"))?;
        Scalar::new(n, BigInt::one())
    }
}

impl Serialize for Scalar {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Scalar {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

macro_rules! forward_binop {
    ($tr:ident, $method:ident) => {
        impl<'a> $tr<&'a Scalar> for &'a Scalar {
            type Output = Scalar;
            fn $method(self, rhs: &'a Scalar) -> Scalar {
                Scalar((&self.0).$method(&rhs.0))
            }
        }
        impl $tr<Scalar> for Scalar {
            type Output = Scalar;
            fn $method(self, rhs: Scalar) -> Scalar {
                Scalar(self.0.$method(rhs.0))
            }
        }
    };
}

forward_binop!(Add, add);
forward_binop!(Mul, mul);
forward_binop!(Div, div);

impl std::iter::Sum for Scalar {
    fn sum<I: Iterator<Item = Scalar>>(iter: I) -> Scalar {
        iter.fold(Scalar::zero(), |a, b| a + b)
    }
}

/// Least common multiple of the denominators of `xs`.
pub(crate) fn common_denominator<'a>(xs: impl IntoIterator<Item = &'a Scalar>) -> BigInt {
    xs.into_iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()))
}
