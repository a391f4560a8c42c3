use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, Sign};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Parses `"p/q"` or `"p"` into a reduced rational.
pub fn parse_rational(text: &str) -> Result<BigRational> {
    let trimmed = text.trim();
    let (num, den) = match trimmed.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (trimmed, "1"),
    };
    let num = BigInt::from_str(num)
        .map_err(|_| Error::InvalidInput(format!("not a rational: {text:?}")))?;
    let den = BigInt::from_str(den)
        .map_err(|_| Error::InvalidInput(format!("not a rational: {text:?}")))?;
    if den.is_zero() {
        return Err(Error::InvalidInput(format!("zero denominator in {text:?}")));
    }
    Ok(BigRational::new(num, den))
}

pub fn rational(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

pub fn rational_int(num: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(num))
}

pub fn format_rational(q: &BigRational) -> String {
    q.to_string()
}

pub fn rational_to_f64(q: &BigRational) -> f64 {
    match (q.numer().to_f64(), q.denom().to_f64()) {
        (Some(n), Some(d)) if n.is_finite() && d.is_finite() => n / d,
        // Huge numerator or denominator: shift both down before dividing.
        _ => {
            let shift = q.numer().bits().max(q.denom().bits()).saturating_sub(1000);
            let n = (q.numer() >> shift).to_f64().unwrap_or(f64::NAN);
            let d = (q.denom() >> shift).to_f64().unwrap_or(f64::NAN);
            n / d
        }
    }
}

/// Real `m`-th root in double precision; odd roots of negatives are negative.
pub fn real_root_f64(x: f64, m: u32) -> f64 {
    match m {
        1 => x,
        2 => x.sqrt(),
        3 => x.cbrt(),
        _ if x < 0.0 && m % 2 == 1 => -(-x).powf(1.0 / f64::from(m)),
        _ => x.powf(1.0 / f64::from(m)),
    }
}

fn exact_integer_root(n: &BigInt, m: u32) -> Option<BigInt> {
    let r = n.nth_root(m);
    if num_traits::pow(r.clone(), m as usize) == *n {
        Some(r)
    } else {
        None
    }
}

/// The real `m`-th root of `q` in canonical exact form: a rational when `q`
/// is a perfect `m`-th power, otherwise a symbolic root.
pub fn exact_root(q: &BigRational, m: u32) -> Result<Point> {
    if m == 0 {
        return Err(Error::InvalidParameter("root index must be positive".into()));
    }
    if q.is_negative() && m % 2 == 0 {
        return Err(Error::domain(
            format_rational(q),
            format!("even root (index {m}) of a negative number"),
        ));
    }
    if m == 1 || q.is_zero() {
        return Ok(Point::Rational(q.clone()));
    }
    let magnitude_num = q.numer().abs();
    match (
        exact_integer_root(&magnitude_num, m),
        exact_integer_root(q.denom(), m),
    ) {
        (Some(rn), Some(rd)) => {
            let root = BigRational::new(rn, rd);
            Ok(Point::Rational(if q.is_negative() { -root } else { root }))
        }
        _ => Ok(Point::Root {
            radicand: q.clone(),
            index: m,
        }),
    }
}

pub(crate) fn mod_reduce(k: &BigInt, p: u64) -> u64 {
    let modulus = BigInt::from(p);
    let mut r = k % &modulus;
    if r.sign() == Sign::Minus {
        r += &modulus;
    }
    r.to_u64().expect("residue fits in u64")
}

pub(crate) fn mod_mul(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

pub(crate) fn mod_pow(mut base: u64, mut exp: u64, p: u64) -> u64 {
    let mut acc = 1 % p;
    base %= p;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mod_mul(acc, base, p);
        }
        base = mod_mul(base, base, p);
        exp >>= 1;
    }
    acc
}

/// Inverse modulo a prime `p`; `None` for zero.
pub(crate) fn mod_inv(a: u64, p: u64) -> Option<u64> {
    if a % p == 0 {
        None
    } else {
        Some(mod_pow(a, p - 2, p))
    }
}

pub(crate) fn rational_mod(q: &BigRational, p: u64) -> Result<u64> {
    let den = mod_reduce(q.denom(), p);
    let inv = mod_inv(den, p).ok_or_else(|| {
        Error::mismatch(format!("value invertible mod {p}"), format_rational(q))
    })?;
    Ok(mod_mul(mod_reduce(q.numer(), p), inv, p))
}

/// An element of an abelian group instance.
#[derive(Clone, Debug, PartialEq)]
pub enum GroupValue {
    Rational(BigRational),
    Vector(Vec<BigRational>),
    Mod { p: u64, value: u64 },
    Float(f64),
}

impl GroupValue {
    pub fn rational(num: i64, den: i64) -> Self {
        GroupValue::Rational(rational(num, den))
    }

    pub fn int(num: i64) -> Self {
        GroupValue::Rational(rational_int(num))
    }

    pub fn kind_name(&self) -> String {
        match self {
            GroupValue::Rational(_) => "exact-rational".into(),
            GroupValue::Vector(v) => format!("rational-vector({})", v.len()),
            GroupValue::Mod { p, .. } => format!("mod-{p}"),
            GroupValue::Float(_) => "float".into(),
        }
    }

    pub fn as_rational(&self) -> Option<&BigRational> {
        match self {
            GroupValue::Rational(q) => Some(q),
            _ => None,
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            GroupValue::Rational(q) => Some(rational_to_f64(q)),
            GroupValue::Float(x) => Some(*x),
            _ => None,
        }
    }
}

impl fmt::Display for GroupValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupValue::Rational(q) => write!(f, "{q}"),
            GroupValue::Vector(v) => {
                write!(f, "(")?;
                for (i, q) in v.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{q}")?;
                }
                write!(f, ")")
            }
            GroupValue::Mod { p, value } => write!(f, "{value} (mod {p})"),
            GroupValue::Float(x) => write!(f, "{x:e}"),
        }
    }
}

/// An element of a domain: a semigroup point, or a point of the real line
/// that may carry an exact symbolic root.
#[derive(Clone, Debug, PartialEq)]
pub enum Point {
    Rational(BigRational),
    /// The real `index`-th root of `radicand`; never a perfect power.
    Root { radicand: BigRational, index: u32 },
    Vector(Vec<BigRational>),
    Mod { p: u64, value: u64 },
    Float(f64),
}

impl Point {
    pub fn rational(num: i64, den: i64) -> Self {
        Point::Rational(rational(num, den))
    }

    pub fn int(num: i64) -> Self {
        Point::Rational(rational_int(num))
    }

    pub fn is_exact(&self) -> bool {
        !matches!(self, Point::Float(_))
    }

    /// Double-precision value for scalar points.
    pub fn to_f64(&self) -> Option<f64> {
        match self {
            Point::Rational(q) => Some(rational_to_f64(q)),
            Point::Root { radicand, index } => Some(real_root_f64(rational_to_f64(radicand), *index)),
            Point::Float(x) => Some(*x),
            Point::Mod { .. } | Point::Vector(_) => None,
        }
    }

    pub fn to_float(&self) -> Result<Point> {
        self.to_f64()
            .map(Point::Float)
            .ok_or_else(|| Error::mismatch("scalar point", self))
    }

    pub fn key(&self) -> PointKey {
        match self {
            Point::Rational(q) => PointKey::Rational(q.clone()),
            Point::Root { radicand, index } => PointKey::Root(radicand.clone(), *index),
            Point::Vector(v) => PointKey::Vector(v.clone()),
            Point::Mod { p, value } => PointKey::Mod(*p, *value),
            Point::Float(x) => PointKey::Float(if *x == 0.0 { 0 } else { x.to_bits() }),
        }
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Point::Rational(q) => write!(f, "{q}"),
            Point::Root { radicand, index } => write!(f, "root{index}({radicand})"),
            Point::Vector(v) => {
                write!(f, "(")?;
                for (i, q) in v.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{q}")?;
                }
                write!(f, ")")
            }
            Point::Mod { p, value } => write!(f, "{value} (mod {p})"),
            Point::Float(x) => write!(f, "{x}"),
        }
    }
}

/// Hashable identity of a point; floats compare by bit pattern with `-0.0 == 0.0`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum PointKey {
    Rational(BigRational),
    Root(BigRational, u32),
    Vector(Vec<BigRational>),
    Mod(u64, u64),
    Float(u64),
}

/// A power `x^j` of a scalar point, ready to multiply a coefficient.
#[derive(Clone, Debug, PartialEq)]
pub enum Scalar {
    Rational(BigRational),
    Mod { p: u64, value: u64 },
    Float(f64),
}

impl Scalar {
    pub fn power(x: &Point, j: u32) -> Result<Scalar> {
        match x {
            Point::Rational(q) => Ok(Scalar::Rational(num_traits::pow(q.clone(), j as usize))),
            Point::Float(v) => Ok(Scalar::Float(v.powi(j as i32))),
            Point::Mod { p, value } => Ok(Scalar::Mod {
                p: *p,
                value: mod_pow(*value, u64::from(j), *p),
            }),
            Point::Root { radicand, index } if j % index == 0 => Ok(Scalar::Rational(
                num_traits::pow(radicand.clone(), (j / index) as usize),
            )),
            Point::Root { .. } => Err(Error::InvalidInput(format!(
                "power {j} of {x} is not an exact rational"
            ))),
            Point::Vector(_) => Err(Error::mismatch("scalar point", x)),
        }
    }

    pub fn one_rational() -> Scalar {
        Scalar::Rational(BigRational::one())
    }
}

// JSON encodings: rationals as "p/q", vectors as arrays of such strings,
// mod-p values as {"mod": p, "value": v}, floats as plain numbers.
#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum ValueRepr {
    Text(String),
    Number(f64),
    Vector(Vec<String>),
    Mod {
        #[serde(rename = "mod")]
        p: u64,
        value: u64,
    },
    Root {
        root: u32,
        of: String,
    },
}

fn parse_vector(items: &[String]) -> Result<Vec<BigRational>> {
    items.iter().map(|s| parse_rational(s)).collect()
}

fn check_mod(p: u64, value: u64) -> Result<()> {
    if p < 2 || value >= p {
        return Err(Error::InvalidInput(format!(
            "mod-p value {value} out of range for p = {p}"
        )));
    }
    Ok(())
}

impl TryFrom<ValueRepr> for GroupValue {
    type Error = Error;

    fn try_from(repr: ValueRepr) -> Result<Self> {
        match repr {
            ValueRepr::Text(s) => Ok(GroupValue::Rational(parse_rational(&s)?)),
            ValueRepr::Number(x) => Ok(GroupValue::Float(x)),
            ValueRepr::Vector(v) => Ok(GroupValue::Vector(parse_vector(&v)?)),
            ValueRepr::Mod { p, value } => {
                check_mod(p, value)?;
                Ok(GroupValue::Mod { p, value })
            }
            ValueRepr::Root { .. } => Err(Error::InvalidInput(
                "symbolic roots are points, not group values".into(),
            )),
        }
    }
}

impl From<&GroupValue> for ValueRepr {
    fn from(v: &GroupValue) -> Self {
        match v {
            GroupValue::Rational(q) => ValueRepr::Text(format_rational(q)),
            GroupValue::Vector(items) => ValueRepr::Vector(items.iter().map(format_rational).collect()),
            GroupValue::Mod { p, value } => ValueRepr::Mod { p: *p, value: *value },
            GroupValue::Float(x) => ValueRepr::Number(*x),
        }
    }
}

impl TryFrom<ValueRepr> for Point {
    type Error = Error;

    fn try_from(repr: ValueRepr) -> Result<Self> {
        match repr {
            ValueRepr::Text(s) => Ok(Point::Rational(parse_rational(&s)?)),
            ValueRepr::Number(x) => Ok(Point::Float(x)),
            ValueRepr::Vector(v) => Ok(Point::Vector(parse_vector(&v)?)),
            ValueRepr::Mod { p, value } => {
                check_mod(p, value)?;
                Ok(Point::Mod { p, value })
            }
            ValueRepr::Root { root, of } => exact_root(&parse_rational(&of)?, root),
        }
    }
}

impl From<&Point> for ValueRepr {
    fn from(p: &Point) -> Self {
        match p {
            Point::Rational(q) => ValueRepr::Text(format_rational(q)),
            Point::Root { radicand, index } => ValueRepr::Root {
                root: *index,
                of: format_rational(radicand),
            },
            Point::Vector(items) => ValueRepr::Vector(items.iter().map(format_rational).collect()),
            Point::Mod { p, value } => ValueRepr::Mod { p: *p, value: *value },
            Point::Float(x) => ValueRepr::Number(*x),
        }
    }
}

impl Serialize for GroupValue {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        ValueRepr::from(self).serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for GroupValue {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let repr = ValueRepr::deserialize(deserializer)?;
        GroupValue::try_from(repr).map_err(serde::de::Error::custom)
    }
}

impl Serialize for Point {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        ValueRepr::from(self).serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Point {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let repr = ValueRepr::deserialize(deserializer)?;
        Point::try_from(repr).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_rationals() {
        assert_eq!(parse_rational("6/4").unwrap(), rational(3, 2));
        assert_eq!(parse_rational("-7").unwrap(), rational_int(-7));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
    }

    #[test]
    fn exact_roots_are_canonical() {
        assert_eq!(exact_root(&rational_int(-8), 3).unwrap(), Point::int(-2));
        assert_eq!(exact_root(&rational(9, 4), 2).unwrap(), Point::rational(3, 2));
        assert_eq!(
            exact_root(&rational_int(2), 2).unwrap(),
            Point::Root {
                radicand: rational_int(2),
                index: 2
            }
        );
        assert!(exact_root(&rational_int(-4), 2).is_err());
    }

    #[test]
    fn json_shapes() {
        let v: GroupValue = serde_json::from_str(r#"{"mod": 7, "value": 3}"#).unwrap();
        assert_eq!(v, GroupValue::Mod { p: 7, value: 3 });
        let v: GroupValue = serde_json::from_str(r#"["1/2", "3"]"#).unwrap();
        assert_eq!(v, GroupValue::Vector(vec![rational(1, 2), rational_int(3)]));
        let v: GroupValue = serde_json::from_str("2.5").unwrap();
        assert_eq!(v, GroupValue::Float(2.5));
        assert_eq!(serde_json::to_string(&GroupValue::rational(3, 2)).unwrap(), r#""3/2""#);
        let p: Point = serde_json::from_str(r#"{"root": 2, "of": "9"}"#).unwrap();
        assert_eq!(p, Point::int(3));
        assert!(serde_json::from_str::<GroupValue>(r#"{"mod": 7, "value": 9}"#).is_err());
    }

    #[test]
    fn modular_helpers() {
        assert_eq!(mod_inv(2, 5), Some(3));
        assert_eq!(mod_reduce(&BigInt::from(-3), 7), 4);
        assert_eq!(rational_mod(&rational(1, 2), 5).unwrap(), 3);
    }
}
