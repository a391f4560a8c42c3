use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::binomial::factorial;
use super::value::{mod_inv, mod_mul, mod_reduce, rational_mod, rational_to_f64, GroupValue, Scalar};
use crate::error::{Error, Result};

/// Division by `n!` is supported up to this `n` unless configured otherwise.
pub const DEFAULT_DIVISIBILITY_BOUND: u32 = 6;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum GroupKind {
    Rational,
    RationalVector { dim: usize },
    ModP { p: u64 },
    /// Doubles compared with `|a - b| <= eps * max(1, |a|, |b|)`.
    Float { eps: f64 },
}

/// An `(n!)`-divisible abelian group: the codomain `Y` of every function
/// handled by this crate.
#[derive(Clone, Debug, PartialEq)]
pub struct Group {
    kind: GroupKind,
    divisibility_bound: u32,
}

pub(crate) fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2u64;
    while d.saturating_mul(d) <= p {
        if p % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

impl Group {
    pub fn rational() -> Self {
        Self::rational_with_bound(DEFAULT_DIVISIBILITY_BOUND)
    }

    pub fn rational_with_bound(divisibility_bound: u32) -> Self {
        Group {
            kind: GroupKind::Rational,
            divisibility_bound,
        }
    }

    pub fn rational_vector(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidInstance("vector dimension must be positive".into()));
        }
        Ok(Group {
            kind: GroupKind::RationalVector { dim },
            divisibility_bound: DEFAULT_DIVISIBILITY_BOUND,
        })
    }

    /// `Z/p` is `(n!)`-divisible exactly when `p > n`, so construction is
    /// refused for composite `p` and for `p <= divisibility_bound`.
    pub fn mod_p(p: u64, divisibility_bound: u32) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::InvalidInstance(format!("{p} is not prime")));
        }
        if p <= u64::from(divisibility_bound) {
            return Err(Error::InvalidInstance(format!(
                "p = {p} must exceed the divisibility bound {divisibility_bound}"
            )));
        }
        Ok(Group {
            kind: GroupKind::ModP { p },
            divisibility_bound,
        })
    }

    pub fn float(eps: f64) -> Result<Self> {
        if !(eps.is_finite() && eps >= 0.0) {
            return Err(Error::InvalidInstance(format!("tolerance {eps} must be finite and nonnegative")));
        }
        Ok(Group {
            kind: GroupKind::Float { eps },
            divisibility_bound: DEFAULT_DIVISIBILITY_BOUND,
        })
    }

    pub fn with_divisibility_bound(mut self, bound: u32) -> Result<Self> {
        if let GroupKind::ModP { p } = self.kind {
            return Group::mod_p(p, bound);
        }
        self.divisibility_bound = bound;
        Ok(self)
    }

    pub fn kind(&self) -> GroupKind {
        self.kind
    }

    pub fn divisibility_bound(&self) -> u32 {
        self.divisibility_bound
    }

    pub fn is_exact(&self) -> bool {
        !matches!(self.kind, GroupKind::Float { .. })
    }

    pub fn eps(&self) -> Option<f64> {
        match self.kind {
            GroupKind::Float { eps } => Some(eps),
            _ => None,
        }
    }

    pub fn name(&self) -> String {
        match self.kind {
            GroupKind::Rational => "exact-rational".into(),
            GroupKind::RationalVector { dim } => format!("rational-vector({dim})"),
            GroupKind::ModP { p } => format!("mod-{p}"),
            GroupKind::Float { eps } => format!("float-tolerance({eps:e})"),
        }
    }

    pub fn contains(&self, v: &GroupValue) -> bool {
        match (self.kind, v) {
            (GroupKind::Rational, GroupValue::Rational(_)) => true,
            (GroupKind::RationalVector { dim }, GroupValue::Vector(items)) => items.len() == dim,
            (GroupKind::ModP { p }, GroupValue::Mod { p: q, value }) => p == *q && *value < p,
            (GroupKind::Float { .. }, GroupValue::Float(x)) => !x.is_nan(),
            _ => false,
        }
    }

    pub fn check(&self, v: &GroupValue) -> Result<()> {
        if self.contains(v) {
            Ok(())
        } else {
            Err(Error::mismatch(self.name(), v.kind_name()))
        }
    }

    pub fn zero(&self) -> GroupValue {
        match self.kind {
            GroupKind::Rational => GroupValue::Rational(BigRational::zero()),
            GroupKind::RationalVector { dim } => GroupValue::Vector(vec![BigRational::zero(); dim]),
            GroupKind::ModP { p } => GroupValue::Mod { p, value: 0 },
            GroupKind::Float { .. } => GroupValue::Float(0.0),
        }
    }

    pub fn add(&self, a: &GroupValue, b: &GroupValue) -> Result<GroupValue> {
        self.check(a)?;
        self.check(b)?;
        Ok(match (a, b) {
            (GroupValue::Rational(x), GroupValue::Rational(y)) => GroupValue::Rational(x + y),
            (GroupValue::Vector(x), GroupValue::Vector(y)) => {
                GroupValue::Vector(x.iter().zip(y).map(|(s, t)| s + t).collect())
            }
            (GroupValue::Mod { p, value: x }, GroupValue::Mod { value: y, .. }) => GroupValue::Mod {
                p: *p,
                value: ((*x as u128 + *y as u128) % *p as u128) as u64,
            },
            (GroupValue::Float(x), GroupValue::Float(y)) => GroupValue::Float(x + y),
            _ => unreachable!("operands checked against the instance"),
        })
    }

    pub fn neg(&self, a: &GroupValue) -> Result<GroupValue> {
        self.check(a)?;
        Ok(match a {
            GroupValue::Rational(x) => GroupValue::Rational(-x),
            GroupValue::Vector(x) => GroupValue::Vector(x.iter().map(|s| -s).collect()),
            GroupValue::Mod { p, value } => GroupValue::Mod {
                p: *p,
                value: (*p - *value) % *p,
            },
            GroupValue::Float(x) => GroupValue::Float(-x),
        })
    }

    pub fn sub(&self, a: &GroupValue, b: &GroupValue) -> Result<GroupValue> {
        self.add(a, &self.neg(b)?)
    }

    /// `k · a`, the `k`-fold sum (negated for negative `k`).
    pub fn scale(&self, k: &BigInt, a: &GroupValue) -> Result<GroupValue> {
        self.check(a)?;
        Ok(match a {
            GroupValue::Rational(x) => GroupValue::Rational(x * BigRational::from_integer(k.clone())),
            GroupValue::Vector(x) => {
                let k = BigRational::from_integer(k.clone());
                GroupValue::Vector(x.iter().map(|s| s * &k).collect())
            }
            GroupValue::Mod { p, value } => GroupValue::Mod {
                p: *p,
                value: mod_mul(mod_reduce(k, *p), *value, *p),
            },
            GroupValue::Float(x) => GroupValue::Float(k.to_f64().unwrap_or(f64::NAN) * x),
        })
    }

    /// `(k!) · a`.
    pub fn factorial_multiple(&self, a: &GroupValue, k: u32) -> Result<GroupValue> {
        self.scale(&factorial(k), a)
    }

    /// The unique `b` with `(k!) · b = a`.
    pub fn divide_by_factorial(&self, a: &GroupValue, k: u32) -> Result<GroupValue> {
        if k > self.divisibility_bound {
            return Err(Error::UnsupportedDivision {
                k,
                bound: self.divisibility_bound,
            });
        }
        self.check(a)?;
        let f = factorial(k);
        Ok(match a {
            GroupValue::Rational(x) => GroupValue::Rational(x / BigRational::from_integer(f)),
            GroupValue::Vector(x) => {
                let f = BigRational::from_integer(f);
                GroupValue::Vector(x.iter().map(|s| s / &f).collect())
            }
            GroupValue::Mod { p, value } => {
                let inv = mod_inv(mod_reduce(&f, *p), *p)
                    .ok_or(Error::UnsupportedDivision { k, bound: self.divisibility_bound })?;
                GroupValue::Mod {
                    p: *p,
                    value: mod_mul(*value, inv, *p),
                }
            }
            GroupValue::Float(x) => GroupValue::Float(x / f.to_f64().unwrap_or(f64::NAN)),
        })
    }

    /// Equality in this instance: bit-exact for exact kinds, relative
    /// tolerance for floats.
    pub fn approx_eq(&self, a: &GroupValue, b: &GroupValue) -> Result<bool> {
        self.check(a)?;
        self.check(b)?;
        Ok(match (a, b) {
            (GroupValue::Float(x), GroupValue::Float(y)) => {
                let eps = self.eps().unwrap_or(0.0);
                (x - y).abs() <= eps * 1f64.max(x.abs()).max(y.abs())
            }
            _ => a == b,
        })
    }

    pub fn is_zero(&self, a: &GroupValue) -> Result<bool> {
        self.approx_eq(a, &self.zero())
    }

    /// Size of a value for residual reporting: absolute value, max-norm for
    /// vectors, and 0/1 for residues.
    pub fn magnitude(&self, a: &GroupValue) -> f64 {
        match a {
            GroupValue::Rational(x) => rational_to_f64(&x.abs()),
            GroupValue::Vector(x) => x
                .iter()
                .map(|s| rational_to_f64(&s.abs()))
                .fold(0.0, f64::max),
            GroupValue::Mod { value, .. } => {
                if *value == 0 {
                    0.0
                } else {
                    1.0
                }
            }
            GroupValue::Float(x) => x.abs(),
        }
    }

    /// Converts a coefficient into this instance where the embedding is
    /// canonical (rationals into floats or residues).
    pub fn coerce(&self, v: &GroupValue) -> Result<GroupValue> {
        if self.contains(v) {
            return Ok(v.clone());
        }
        let converted = match (self.kind, v) {
            (GroupKind::Float { .. }, GroupValue::Rational(q)) => GroupValue::Float(rational_to_f64(q)),
            (GroupKind::ModP { p }, GroupValue::Rational(q)) => GroupValue::Mod {
                p,
                value: rational_mod(q, p)?,
            },
            _ => return Err(Error::mismatch(self.name(), v.kind_name())),
        };
        Ok(converted)
    }

    /// `c · s` for a coefficient `c` and a scalar power `s = x^j`.
    pub fn mul_scalar(&self, c: &GroupValue, s: &Scalar) -> Result<GroupValue> {
        let c = self.coerce(c)?;
        Ok(match (&c, s) {
            (GroupValue::Rational(x), Scalar::Rational(t)) => GroupValue::Rational(x * t),
            (GroupValue::Vector(x), Scalar::Rational(t)) => {
                GroupValue::Vector(x.iter().map(|e| e * t).collect())
            }
            (GroupValue::Mod { p, value }, Scalar::Mod { p: q, value: t }) if p == q => GroupValue::Mod {
                p: *p,
                value: mod_mul(*value, *t, *p),
            },
            (GroupValue::Mod { p, value }, Scalar::Rational(t)) => GroupValue::Mod {
                p: *p,
                value: mod_mul(*value, rational_mod(t, *p)?, *p),
            },
            (GroupValue::Float(x), Scalar::Float(t)) => GroupValue::Float(x * t),
            (GroupValue::Float(x), Scalar::Rational(t)) => GroupValue::Float(x * rational_to_f64(t)),
            _ => return Err(Error::mismatch(self.name(), format!("scalar {s:?}"))),
        })
    }
}

/// JSON form of a group instance.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum GroupSpec {
    ExactRational {
        #[serde(default)]
        divisibility_bound: Option<u32>,
    },
    RationalVector {
        dim: usize,
        #[serde(default)]
        divisibility_bound: Option<u32>,
    },
    ModP {
        p: u64,
        #[serde(default)]
        divisibility_bound: Option<u32>,
    },
    FloatTolerance {
        eps: f64,
        #[serde(default)]
        divisibility_bound: Option<u32>,
    },
}

impl TryFrom<&GroupSpec> for Group {
    type Error = Error;

    fn try_from(spec: &GroupSpec) -> Result<Self> {
        let bound = |b: &Option<u32>| b.unwrap_or(DEFAULT_DIVISIBILITY_BOUND);
        match spec {
            GroupSpec::ExactRational { divisibility_bound } => {
                Ok(Group::rational_with_bound(bound(divisibility_bound)))
            }
            GroupSpec::RationalVector { dim, divisibility_bound } => {
                Group::rational_vector(*dim)?.with_divisibility_bound(bound(divisibility_bound))
            }
            GroupSpec::ModP { p, divisibility_bound } => Group::mod_p(*p, bound(divisibility_bound)),
            GroupSpec::FloatTolerance { eps, divisibility_bound } => {
                Group::float(*eps)?.with_divisibility_bound(bound(divisibility_bound))
            }
        }
    }
}

impl From<&Group> for GroupSpec {
    fn from(g: &Group) -> Self {
        let divisibility_bound = Some(g.divisibility_bound);
        match g.kind {
            GroupKind::Rational => GroupSpec::ExactRational { divisibility_bound },
            GroupKind::RationalVector { dim } => GroupSpec::RationalVector { dim, divisibility_bound },
            GroupKind::ModP { p } => GroupSpec::ModP { p, divisibility_bound },
            GroupKind::Float { eps } => GroupSpec::FloatTolerance { eps, divisibility_bound },
        }
    }
}

impl Serialize for Group {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        GroupSpec::from(self).serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Group {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let spec = GroupSpec::deserialize(deserializer)?;
        Group::try_from(&spec).map_err(serde::de::Error::custom)
    }
}
