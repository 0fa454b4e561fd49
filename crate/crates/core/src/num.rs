//! Numbers used by games: exact rationals when the input provides them, floats otherwise.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Sub};
use std::str::FromStr;

use num::bigint::BigInt;
use num::{BigRational, One, Signed, ToPrimitive, Zero};
use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// A probability or payoff as read from a game description.
///
/// Integers, decimals and `a/b` literals are stored exactly. Exponent
/// notation and JSON floats are stored as `f64`.
#[derive(Clone, Debug, PartialEq)]
pub enum Value {
    Exact(BigRational),
    Float(f64),
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid number literal `{literal}`: {reason}")]
pub struct ParseValueError {
    pub literal: String,
    pub reason: String,
}

impl Value {
    pub fn int(n: i64) -> Self {
        Value::Exact(BigRational::from_integer(n.into()))
    }

    pub fn ratio(n: i64, d: i64) -> Self {
        assert!(d != 0, "zero denominator");
        Value::Exact(BigRational::new(n.into(), d.into()))
    }

    pub fn zero() -> Self {
        Value::int(0)
    }

    pub fn one() -> Self {
        Value::int(1)
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Value::Exact(r) => ratio_to_f64(r),
            Value::Float(f) => *f,
        }
    }

    pub fn as_exact(&self) -> Option<&BigRational> {
        match self {
            Value::Exact(r) => Some(r),
            Value::Float(_) => None,
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Value::Exact(_))
    }

    pub fn is_negative(&self) -> bool {
        match self {
            Value::Exact(r) => r.is_negative(),
            Value::Float(f) => *f < 0.0,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Value::Exact(r) => r.is_zero(),
            Value::Float(f) => *f == 0.0,
        }
    }

    fn combine(
        &self,
        other: &Value,
        exact: impl Fn(&BigRational, &BigRational) -> BigRational,
        float: impl Fn(f64, f64) -> f64,
    ) -> Value {
        match (self, other) {
            (Value::Exact(a), Value::Exact(b)) => Value::Exact(exact(a, b)),
            _ => Value::Float(float(self.to_f64(), other.to_f64())),
        }
    }
}

impl Add for &Value {
    type Output = Value;
    fn add(self, rhs: &Value) -> Value {
        self.combine(rhs, |a, b| a + b, |a, b| a + b)
    }
}

impl Sub for &Value {
    type Output = Value;
    fn sub(self, rhs: &Value) -> Value {
        self.combine(rhs, |a, b| a - b, |a, b| a - b)
    }
}

impl Mul for &Value {
    type Output = Value;
    fn mul(self, rhs: &Value) -> Value {
        self.combine(rhs, |a, b| a * b, |a, b| a * b)
    }
}

impl Div for &Value {
    type Output = Value;
    fn div(self, rhs: &Value) -> Value {
        self.combine(rhs, |a, b| a / b, |a, b| a / b)
    }
}

impl PartialOrd for Value {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match (self, other) {
            (Value::Exact(a), Value::Exact(b)) => a.partial_cmp(b),
            _ => self.to_f64().partial_cmp(&other.to_f64()),
        }
    }
}

impl From<f64> for Value {
    fn from(f: f64) -> Self {
        Value::Float(f)
    }
}

impl From<BigRational> for Value {
    fn from(r: BigRational) -> Self {
        Value::Exact(r)
    }
}

impl FromStr for Value {
    type Err = ParseValueError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = |reason: &str| ParseValueError {
            literal: s.to_string(),
            reason: reason.to_string(),
        };
        let t = s.trim();
        if t.is_empty() {
            return Err(err("empty literal"));
        }
        if let Some((n, d)) = t.split_once('/') {
            let n: BigInt = n.trim().parse().map_err(|_| err("bad numerator"))?;
            let d: BigInt = d.trim().parse().map_err(|_| err("bad denominator"))?;
            if d.is_zero() {
                return Err(err("zero denominator"));
            }
            return Ok(Value::Exact(BigRational::new(n, d)));
        }
        if t.contains(['e', 'E']) {
            let f: f64 = t.parse().map_err(|_| err("bad float"))?;
            if !f.is_finite() {
                return Err(err("not finite"));
            }
            return Ok(Value::Float(f));
        }
        parse_decimal(t).map(Value::Exact).ok_or_else(|| err("not a number"))
    }
}

fn parse_decimal(t: &str) -> Option<BigRational> {
    let (neg, body) = match t.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, t.strip_prefix('+').unwrap_or(t)),
    };
    let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{int_part}{frac_part}");
    let numer: BigInt = if digits.is_empty() { BigInt::zero() } else { digits.parse().ok()? };
    let denom = num::pow(BigInt::from(10), frac_part.len());
    let r = BigRational::new(numer, denom);
    Some(if neg { -r } else { r })
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Exact(r) => write!(f, "{}", fmt_ratio(r)),
            Value::Float(x) => write!(f, "{x}"),
        }
    }
}

impl Serialize for Value {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            Value::Exact(r) => serializer.serialize_str(&fmt_ratio(r)),
            Value::Float(x) => serializer.serialize_f64(*x),
        }
    }
}

impl<'de> Deserialize<'de> for Value {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct ValueVisitor;

        impl Visitor<'_> for ValueVisitor {
            type Value = Value;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a number or a rational literal such as \"2/3\"")
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Value, E> {
                Ok(Value::int(v))
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Value, E> {
                Ok(Value::Exact(BigRational::from_integer(v.into())))
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> Result<Value, E> {
                Ok(Value::Float(v))
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<Value, E> {
                v.parse().map_err(E::custom)
            }
        }

        deserializer.deserialize_any(ValueVisitor)
    }
}

/// `a/b`, or `a` when the denominator is one.
pub fn fmt_ratio(r: &BigRational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn ratio_to_f64(r: &BigRational) -> f64 {
    ToPrimitive::to_f64(r).unwrap_or_else(|| {
        // huge numerators/denominators: fall back to scaled division
        let n = r.numer().to_f64().unwrap_or(f64::NAN);
        let d = r.denom().to_f64().unwrap_or(f64::NAN);
        n / d
    })
}

/// Formats `x` with 12 significant digits.
pub fn fmt_sig(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let exp = x.abs().log10().floor() as i32;
    if (-5..15).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        format!("{x:.decimals$}")
    } else {
        format!("{x:.11e}")
    }
}

/// Best rational approximation of `x` with denominator at most `max_den`,
/// by continued fractions.
pub fn approximate(x: f64, max_den: u64) -> Option<BigRational> {
    if !x.is_finite() {
        return None;
    }
    let neg = x < 0.0;
    let mut v = x.abs();
    let (mut p0, mut q0, mut p1, mut q1) = (0u128, 1u128, 1u128, 0u128);
    for _ in 0..64 {
        let a = v.floor();
        if a > 1e18 {
            break;
        }
        let a_int = a as u128;
        let p2 = a_int * p1 + p0;
        let q2 = a_int * q1 + q0;
        if q2 > max_den as u128 {
            break;
        }
        (p0, q0, p1, q1) = (p1, q1, p2, q2);
        let frac = v - a;
        if frac < 1e-15 {
            break;
        }
        v = 1.0 / frac;
    }
    if q1 == 0 {
        return None;
    }
    let r = BigRational::new(BigInt::from(p1), BigInt::from(q1));
    Some(if neg { -r } else { r })
}

/// Arithmetic shared by the exact (rational) and float evaluation paths.
pub trait Scalar:
    Clone
    + fmt::Debug
    + PartialOrd
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
{
    const EXACT: bool;

    /// Exact scalars take floats at their binary value.
    fn from_value(v: &Value) -> Self;
    fn to_float(&self) -> f64;
    fn to_value(&self) -> Value;
    fn from_int(n: i64) -> Self;

    fn from_ratio(n: i64, d: i64) -> Self {
        Self::from_int(n) / Self::from_int(d)
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn from_value(v: &Value) -> Self {
        v.to_f64()
    }

    fn to_float(&self) -> f64 {
        *self
    }

    fn to_value(&self) -> Value {
        Value::Float(*self)
    }

    fn from_int(n: i64) -> Self {
        n as f64
    }
}

impl Scalar for BigRational {
    const EXACT: bool = true;

    fn from_value(v: &Value) -> Self {
        match v {
            Value::Exact(r) => r.clone(),
            Value::Float(f) => BigRational::from_float(*f).unwrap_or_else(BigRational::zero),
        }
    }

    fn to_float(&self) -> f64 {
        ratio_to_f64(self)
    }

    fn to_value(&self) -> Value {
        Value::Exact(self.clone())
    }

    fn from_int(n: i64) -> Self {
        BigRational::from_integer(n.into())
    }
}
