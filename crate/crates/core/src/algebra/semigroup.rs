use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use super::group::is_prime;
use super::value::{mod_mul, Point};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SemigroupKind {
    RealLine,
    /// `[0, ∞)`
    NonNegative,
    /// `(-∞, 0]`
    NonPositive,
    ModP { p: u64 },
    RationalVector { dim: usize },
}

/// Whether points are exact rationals or doubles.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Repr {
    Exact,
    Float,
}

/// A commutative semigroup `(X, +)` with identity 0.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Semigroup {
    kind: SemigroupKind,
    repr: Repr,
}

impl Semigroup {
    pub fn new(kind: SemigroupKind, repr: Repr) -> Result<Self> {
        match kind {
            SemigroupKind::ModP { p } if !is_prime(p) => {
                return Err(Error::InvalidInstance(format!("{p} is not prime")))
            }
            SemigroupKind::RationalVector { dim: 0 } => {
                return Err(Error::InvalidInstance("vector dimension must be positive".into()))
            }
            SemigroupKind::ModP { .. } | SemigroupKind::RationalVector { .. } if repr == Repr::Float => {
                return Err(Error::InvalidInstance(format!("{kind:?} has no float representation")))
            }
            _ => {}
        }
        Ok(Semigroup { kind, repr })
    }

    pub fn real_line(repr: Repr) -> Self {
        Semigroup { kind: SemigroupKind::RealLine, repr }
    }

    pub fn non_negative(repr: Repr) -> Self {
        Semigroup { kind: SemigroupKind::NonNegative, repr }
    }

    pub fn non_positive(repr: Repr) -> Self {
        Semigroup { kind: SemigroupKind::NonPositive, repr }
    }

    pub fn mod_p(p: u64) -> Result<Self> {
        Semigroup::new(SemigroupKind::ModP { p }, Repr::Exact)
    }

    pub fn rational_vector(dim: usize) -> Result<Self> {
        Semigroup::new(SemigroupKind::RationalVector { dim }, Repr::Exact)
    }

    pub fn kind(&self) -> SemigroupKind {
        self.kind
    }

    pub fn repr(&self) -> Repr {
        self.repr
    }

    pub fn with_repr(self, repr: Repr) -> Result<Self> {
        Semigroup::new(self.kind, repr)
    }

    pub fn name(&self) -> String {
        let base = match self.kind {
            SemigroupKind::RealLine => "real-line".to_string(),
            SemigroupKind::NonNegative => "nonneg-half-line".to_string(),
            SemigroupKind::NonPositive => "nonpos-half-line".to_string(),
            SemigroupKind::ModP { p } => format!("mod-{p}"),
            SemigroupKind::RationalVector { dim } => format!("rational-vector({dim})"),
        };
        match self.repr {
            Repr::Exact => base,
            Repr::Float => format!("{base}/float"),
        }
    }

    pub fn is_scalar(&self) -> bool {
        !matches!(self.kind, SemigroupKind::RationalVector { .. })
    }

    pub fn contains(&self, x: &Point) -> bool {
        match (self.kind, self.repr, x) {
            (SemigroupKind::RealLine, Repr::Exact, Point::Rational(_)) => true,
            (SemigroupKind::NonNegative, Repr::Exact, Point::Rational(q)) => !q.is_negative(),
            (SemigroupKind::NonPositive, Repr::Exact, Point::Rational(q)) => !q.is_positive(),
            (SemigroupKind::RealLine, Repr::Float, Point::Float(v)) => v.is_finite(),
            (SemigroupKind::NonNegative, Repr::Float, Point::Float(v)) => v.is_finite() && *v >= 0.0,
            (SemigroupKind::NonPositive, Repr::Float, Point::Float(v)) => v.is_finite() && *v <= 0.0,
            (SemigroupKind::ModP { p }, _, Point::Mod { p: q, value }) => p == *q && *value < p,
            (SemigroupKind::RationalVector { dim }, _, Point::Vector(v)) => v.len() == dim,
            _ => false,
        }
    }

    pub fn check(&self, x: &Point) -> Result<()> {
        if self.contains(x) {
            Ok(())
        } else {
            Err(Error::domain(x, format!("not a point of {}", self.name())))
        }
    }

    pub fn identity(&self) -> Point {
        match (self.kind, self.repr) {
            (SemigroupKind::ModP { p }, _) => Point::Mod { p, value: 0 },
            (SemigroupKind::RationalVector { dim }, _) => Point::Vector(vec![BigRational::zero(); dim]),
            (_, Repr::Exact) => Point::Rational(BigRational::zero()),
            (_, Repr::Float) => Point::Float(0.0),
        }
    }

    /// The generator used to read a power coefficient off a monomial: `1`,
    /// or `-1` on the nonpositive half-line. `None` for vector domains.
    pub fn unit(&self) -> Option<Point> {
        let negative = self.kind == SemigroupKind::NonPositive;
        match (self.kind, self.repr) {
            (SemigroupKind::RationalVector { .. }, _) => None,
            (SemigroupKind::ModP { p }, _) => Some(Point::Mod { p, value: 1 % p }),
            (_, Repr::Exact) => {
                let one = BigRational::one();
                Some(Point::Rational(if negative { -one } else { one }))
            }
            (_, Repr::Float) => Some(Point::Float(if negative { -1.0 } else { 1.0 })),
        }
    }

    pub fn add(&self, a: &Point, b: &Point) -> Result<Point> {
        self.check(a)?;
        self.check(b)?;
        Ok(match (a, b) {
            (Point::Rational(x), Point::Rational(y)) => Point::Rational(x + y),
            (Point::Float(x), Point::Float(y)) => Point::Float(x + y),
            (Point::Mod { p, value: x }, Point::Mod { value: y, .. }) => Point::Mod {
                p: *p,
                value: ((*x as u128 + *y as u128) % *p as u128) as u64,
            },
            (Point::Vector(x), Point::Vector(y)) => Point::Vector(x.iter().zip(y).map(|(s, t)| s + t).collect()),
            _ => unreachable!("operands checked against the instance"),
        })
    }

    /// `k · x`, the `k`-fold sum (the identity for `k = 0`).
    pub fn times(&self, k: u64, x: &Point) -> Result<Point> {
        self.check(x)?;
        Ok(match x {
            Point::Rational(q) => Point::Rational(q * BigRational::from_integer(BigInt::from(k))),
            Point::Float(v) => Point::Float(k as f64 * v),
            Point::Mod { p, value } => Point::Mod {
                p: *p,
                value: mod_mul(k % p, *value, *p),
            },
            Point::Vector(v) => {
                let k = BigRational::from_integer(BigInt::from(k));
                Point::Vector(v.iter().map(|s| s * &k).collect())
            }
            Point::Root { .. } => unreachable!("roots are not semigroup points"),
        })
    }
}

/// JSON form of a semigroup instance.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SemigroupSpec {
    pub kind: String,
    #[serde(default = "default_repr")]
    pub repr: Repr,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
}

fn default_repr() -> Repr {
    Repr::Exact
}

impl TryFrom<&SemigroupSpec> for Semigroup {
    type Error = Error;

    fn try_from(spec: &SemigroupSpec) -> Result<Self> {
        let kind = match spec.kind.as_str() {
            "real-line" => SemigroupKind::RealLine,
            "nonneg-half-line" => SemigroupKind::NonNegative,
            "nonpos-half-line" => SemigroupKind::NonPositive,
            "mod-p" => SemigroupKind::ModP {
                p: spec.p.ok_or_else(|| Error::InvalidInput("mod-p semigroup needs \"p\"".into()))?,
            },
            "rational-vector" => SemigroupKind::RationalVector {
                dim: spec
                    .dim
                    .ok_or_else(|| Error::InvalidInput("rational-vector semigroup needs \"dim\"".into()))?,
            },
            other => return Err(Error::InvalidInput(format!("unknown semigroup kind {other:?}"))),
        };
        Semigroup::new(kind, spec.repr)
    }
}

impl From<&Semigroup> for SemigroupSpec {
    fn from(s: &Semigroup) -> Self {
        let (kind, p, dim) = match s.kind {
            SemigroupKind::RealLine => ("real-line", None, None),
            SemigroupKind::NonNegative => ("nonneg-half-line", None, None),
            SemigroupKind::NonPositive => ("nonpos-half-line", None, None),
            SemigroupKind::ModP { p } => ("mod-p", Some(p), None),
            SemigroupKind::RationalVector { dim } => ("rational-vector", None, Some(dim)),
        };
        SemigroupSpec {
            kind: kind.into(),
            repr: s.repr,
            p,
            dim,
        }
    }
}

impl Serialize for Semigroup {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        SemigroupSpec::from(self).serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Semigroup {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let spec = SemigroupSpec::deserialize(deserializer)?;
        Semigroup::try_from(&spec).map_err(serde::de::Error::custom)
    }
}
