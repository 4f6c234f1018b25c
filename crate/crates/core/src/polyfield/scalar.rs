//! Coefficient arithmetic with an exact rational mode and a tagged float mode.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub type Rational = BigRational;

/// Whether a value (or every coefficient of a derived object) is exact.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CoeffMode {
    Exact,
    Float,
}

impl CoeffMode {
    pub fn join(self, other: CoeffMode) -> CoeffMode {
        if self == CoeffMode::Float || other == CoeffMode::Float {
            CoeffMode::Float
        } else {
            CoeffMode::Exact
        }
    }
}

/// A polynomial coefficient or invariant value.
///
/// Arithmetic between two exact values stays exact; any float operand
/// turns the result into a float.
#[derive(Clone, Debug)]
pub enum Scalar {
    Exact(Rational),
    Float(f64),
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("cannot parse {0:?} as a rational or float coefficient")]
pub struct ScalarParseError(pub String);

impl Scalar {
    pub fn zero() -> Self {
        Scalar::Exact(Rational::zero())
    }

    pub fn one() -> Self {
        Scalar::Exact(Rational::one())
    }

    pub fn int(n: i64) -> Self {
        Scalar::Exact(Rational::from_integer(BigInt::from(n)))
    }

    /// Exact `num/den`. Panics on a zero denominator.
    pub fn ratio(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        Scalar::Exact(Rational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn float(v: f64) -> Self {
        Scalar::Float(v)
    }

    /// Exact binary expansion of a finite float.
    pub fn exact_from_f64(v: f64) -> Option<Self> {
        Rational::from_float(v).map(Scalar::Exact)
    }

    pub fn mode(&self) -> CoeffMode {
        match self {
            Scalar::Exact(_) => CoeffMode::Exact,
            Scalar::Float(_) => CoeffMode::Float,
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Scalar::Exact(_))
    }

    pub fn as_rational(&self) -> Option<&Rational> {
        match self {
            Scalar::Exact(r) => Some(r),
            Scalar::Float(_) => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Scalar::Exact(r) => r.is_zero(),
            Scalar::Float(v) => *v == 0.0,
        }
    }

    pub fn is_one(&self) -> bool {
        match self {
            Scalar::Exact(r) => r.is_one(),
            Scalar::Float(v) => *v == 1.0,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Scalar::Exact(r) => rational_to_f64(r),
            Scalar::Float(v) => *v,
        }
    }

    pub fn to_float(&self) -> Self {
        Scalar::Float(self.to_f64())
    }

    /// Sign of the value. Exact values are compared exactly; floats inside
    /// `[-dead_zone, dead_zone]` report `Equal` together with `true` in the
    /// second slot so callers can attach a warning.
    pub fn sign(&self, dead_zone: f64) -> (Ordering, bool) {
        match self {
            Scalar::Exact(r) => (r.cmp(&Rational::zero()), false),
            Scalar::Float(v) => {
                if v.abs() <= dead_zone {
                    (Ordering::Equal, *v != 0.0)
                } else if *v > 0.0 {
                    (Ordering::Greater, false)
                } else {
                    (Ordering::Less, false)
                }
            }
        }
    }

    pub fn abs(&self) -> Self {
        match self {
            Scalar::Exact(r) => Scalar::Exact(r.abs()),
            Scalar::Float(v) => Scalar::Float(v.abs()),
        }
    }

    pub fn recip(&self) -> Self {
        Scalar::one() / self.clone()
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = Scalar::one();
        for _ in 0..k {
            acc = &acc * self;
        }
        acc
    }

    /// Square root, exact when the argument is the square of a rational.
    pub fn sqrt(&self) -> Self {
        if let Scalar::Exact(r) = self {
            if !r.is_negative() {
                let (n, d) = (r.numer(), r.denom());
                let (sn, sd) = (n.sqrt(), d.sqrt());
                if &(&sn * &sn) == n && &(&sd * &sd) == d {
                    return Scalar::Exact(Rational::new(sn, sd));
                }
            }
        }
        Scalar::Float(self.to_f64().sqrt())
    }

    /// Approximate equality used for float-mode comparisons.
    pub fn approx_eq(&self, other: &Scalar, tol: f64) -> bool {
        match (self, other) {
            (Scalar::Exact(a), Scalar::Exact(b)) => a == b,
            _ => {
                let (a, b) = (self.to_f64(), other.to_f64());
                (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
            }
        }
    }
}

pub(crate) fn rational_to_f64(r: &Rational) -> f64 {
    if let Some(v) = r.to_f64() {
        if v.is_finite() {
            return v;
        }
    }
    // Very large numerator/denominator: scale down before dividing.
    let n = r.numer().to_f64().unwrap_or(f64::NAN);
    let d = r.denom().to_f64().unwrap_or(f64::NAN);
    n / d
}

impl PartialEq for Scalar {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Scalar::Exact(a), Scalar::Exact(b)) => a == b,
            _ => self.to_f64() == other.to_f64(),
        }
    }
}

impl From<i64> for Scalar {
    fn from(n: i64) -> Self {
        Scalar::int(n)
    }
}

impl From<Rational> for Scalar {
    fn from(r: Rational) -> Self {
        Scalar::Exact(r)
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Exact(r) => write!(f, "{r}"),
            Scalar::Float(v) => write!(f, "{v}"),
        }
    }
}

impl FromStr for Scalar {
    type Err = ScalarParseError;

    /// Accepts `p/q`, integers, and finite decimals (`0.2` is read as the
    /// exact rational 1/5). Exponent notation falls back to a float.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        let err = || ScalarParseError(s.to_string());
        if let Some((n, d)) = t.split_once('/') {
            let n: BigInt = n.trim().parse().map_err(|_| err())?;
            let d: BigInt = d.trim().parse().map_err(|_| err())?;
            if d.is_zero() {
                return Err(err());
            }
            return Ok(Scalar::Exact(Rational::new(n, d)));
        }
        if let Ok(n) = t.parse::<BigInt>() {
            return Ok(Scalar::Exact(Rational::from_integer(n)));
        }
        if let Some(r) = parse_decimal(t) {
            return Ok(Scalar::Exact(r));
        }
        match t.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(Scalar::Float(v)),
            _ => Err(err()),
        }
    }
}

fn parse_decimal(t: &str) -> Option<Rational> {
    let (neg, body) = match t.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, t.strip_prefix('+').unwrap_or(t)),
    };
    let (int_part, frac_part) = body.split_once('.')?;
    if frac_part.is_empty() && int_part.is_empty() {
        return None;
    }
    if !int_part.chars().all(|c| c.is_ascii_digit()) || !frac_part.chars().all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{int_part}{frac_part}");
    let n: BigInt = if digits.is_empty() { BigInt::zero() } else { digits.parse().ok()? };
    let d = num_traits::pow(BigInt::from(10), frac_part.len());
    let r = Rational::new(n, d);
    Some(if neg { -r } else { r })
}

impl Serialize for Scalar {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Scalar::Exact(_) => s.serialize_str(&self.to_string()),
            Scalar::Float(v) => s.serialize_f64(*v),
        }
    }
}

impl<'de> Deserialize<'de> for Scalar {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v = serde_json::Value::deserialize(d)?;
        scalar_from_json(&v).map_err(serde::de::Error::custom)
    }
}

/// Strings are parsed exactly; JSON integers are exact; other JSON numbers
/// are floats.
pub(crate) fn scalar_from_json(v: &serde_json::Value) -> Result<Scalar, ScalarParseError> {
    match v {
        serde_json::Value::String(s) => s.parse(),
        serde_json::Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                Ok(Scalar::int(i))
            } else if let Some(f) = n.as_f64() {
                Ok(Scalar::Float(f))
            } else {
                Err(ScalarParseError(n.to_string()))
            }
        }
        other => Err(ScalarParseError(other.to_string())),
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident, $op:tt) => {
        impl $tr<&Scalar> for &Scalar {
            type Output = Scalar;
            fn $m(self, rhs: &Scalar) -> Scalar {
                match (self, rhs) {
                    (Scalar::Exact(a), Scalar::Exact(b)) => Scalar::Exact(a $op b),
                    _ => Scalar::Float(self.to_f64() $op rhs.to_f64()),
                }
            }
        }
        impl $tr<Scalar> for Scalar {
            type Output = Scalar;
            fn $m(self, rhs: Scalar) -> Scalar {
                (&self).$m(&rhs)
            }
        }
        impl $tr<&Scalar> for Scalar {
            type Output = Scalar;
            fn $m(self, rhs: &Scalar) -> Scalar {
                (&self).$m(rhs)
            }
        }
        impl $tr<Scalar> for &Scalar {
            type Output = Scalar;
            fn $m(self, rhs: Scalar) -> Scalar {
                self.$m(&rhs)
            }
        }
    };
}

binop!(Add, add, +);
binop!(Sub, sub, -);
binop!(Mul, mul, *);

impl Div<&Scalar> for &Scalar {
    type Output = Scalar;
    fn div(self, rhs: &Scalar) -> Scalar {
        match (self, rhs) {
            (Scalar::Exact(a), Scalar::Exact(b)) => {
                assert!(!b.is_zero(), "exact division by zero");
                Scalar::Exact(a / b)
            }
            _ => Scalar::Float(self.to_f64() / rhs.to_f64()),
        }
    }
}

impl Div<Scalar> for Scalar {
    type Output = Scalar;
    fn div(self, rhs: Scalar) -> Scalar {
        &self / &rhs
    }
}

impl Div<&Scalar> for Scalar {
    type Output = Scalar;
    fn div(self, rhs: &Scalar) -> Scalar {
        &self / rhs
    }
}

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        match self {
            Scalar::Exact(r) => Scalar::Exact(-r),
            Scalar::Float(v) => Scalar::Float(-v),
        }
    }
}

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        -(self.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fractions_and_decimals_exactly() {
        assert_eq!("3/4".parse::<Scalar>().unwrap(), Scalar::ratio(3, 4));
        assert_eq!("-0.2".parse::<Scalar>().unwrap(), Scalar::ratio(-1, 5));
        assert_eq!("7".parse::<Scalar>().unwrap(), Scalar::int(7));
        assert!("1e-3".parse::<Scalar>().unwrap().mode() == CoeffMode::Float);
        assert!("1/0".parse::<Scalar>().is_err());
        assert!("abc".parse::<Scalar>().is_err());
    }

    #[test]
    fn sqrt_is_exact_on_rational_squares() {
        assert_eq!(Scalar::ratio(9, 4).sqrt(), Scalar::ratio(3, 2));
        assert!(Scalar::ratio(9, 4).sqrt().is_exact());
        assert!(!Scalar::int(2).sqrt().is_exact());
    }

    #[test]
    fn float_contaminates() {
        let s = Scalar::int(1) + Scalar::float(0.5);
        assert_eq!(s.mode(), CoeffMode::Float);
        assert_eq!(s.to_f64(), 1.5);
    }

    #[test]
    fn json_round_trip() {
        let s = Scalar::ratio(-5, 3);
        let j = serde_json::to_string(&s).unwrap();
        assert_eq!(j, "\"-5/3\"");
        let back: Scalar = serde_json::from_str(&j).unwrap();
        assert_eq!(back, s);
        let f: Scalar = serde_json::from_str("1.25").unwrap();
        assert_eq!(f, Scalar::float(1.25));
    }
}
