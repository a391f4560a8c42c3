use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use crate::algebra::{Group, GroupValue, Point, PointKey, Repr, Semigroup};
use crate::error::{Error, Result};
use crate::section::SectionPair;

use super::monomial::{MonomialForm, MonomialSum};

/// Relative distance under which a double-precision query matches a table key.
pub const TABLE_KEY_TOL: f64 = 1e-12;

/// `Some(k)` when `u` is the double nearest to `kπ`.
pub fn pi_multiple(u: f64) -> Option<i64> {
    let k = (u / PI).round();
    let gap = (u - k * PI).abs();
    (gap <= 4.0 * f64::EPSILON * u.abs().max(1.0)).then_some(k as i64)
}

/// Distance from `u` to the nearest integer multiple of π.
pub fn distance_to_pi_multiple(u: f64) -> f64 {
    let k = (u / PI).round();
    (u - k * PI).abs()
}

/// Open real domains `U` on which composite equations are posed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum UDomain {
    /// All of `R`; exact points may be rationals or symbolic roots.
    RealLine(Repr),
    /// `R \ {kπ : k ∈ Z}`, evaluated in double precision.
    Punctured,
}

impl UDomain {
    pub fn contains(&self, u: &Point) -> bool {
        match (self, u) {
            (UDomain::RealLine(Repr::Exact), Point::Rational(_) | Point::Root { .. }) => true,
            (UDomain::RealLine(Repr::Float), Point::Float(v)) => v.is_finite(),
            (UDomain::Punctured, Point::Float(_) | Point::Rational(_)) => {
                let v = u.to_f64().unwrap_or(f64::NAN);
                v.is_finite() && pi_multiple(v).is_none()
            }
            _ => false,
        }
    }

    pub fn name(&self) -> String {
        match self {
            UDomain::RealLine(Repr::Exact) => "real-line".into(),
            UDomain::RealLine(Repr::Float) => "real-line/float".into(),
            UDomain::Punctured => "real-line-minus-pi-multiples".into(),
        }
    }
}

/// Domain of a function handle: a semigroup `X` or an open domain `U`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Domain {
    Semigroup(Semigroup),
    Line(UDomain),
}

impl Domain {
    pub fn contains(&self, x: &Point) -> bool {
        match self {
            Domain::Semigroup(s) => s.contains(x),
            Domain::Line(u) => u.contains(x),
        }
    }

    pub fn check(&self, x: &Point) -> Result<()> {
        if self.contains(x) {
            Ok(())
        } else {
            Err(Error::domain(x, format!("outside the domain {}", self.name())))
        }
    }

    pub fn name(&self) -> String {
        match self {
            Domain::Semigroup(s) => s.name(),
            Domain::Line(u) => u.name(),
        }
    }

    pub fn semigroup(&self) -> Option<&Semigroup> {
        match self {
            Domain::Semigroup(s) => Some(s),
            Domain::Line(_) => None,
        }
    }
}

impl From<Semigroup> for Domain {
    fn from(s: Semigroup) -> Self {
        Domain::Semigroup(s)
    }
}

impl From<UDomain> for Domain {
    fn from(u: UDomain) -> Self {
        Domain::Line(u)
    }
}

/// A finite sample of a function: distinct points with their values.
#[derive(Clone, Debug)]
pub struct Table {
    entries: Vec<(Point, GroupValue)>,
    exact: HashMap<PointKey, usize>,
    // Scalar keys in double precision, sorted, for float queries.
    floats: Vec<(f64, usize)>,
}

impl Table {
    pub fn new(entries: Vec<(Point, GroupValue)>) -> Result<Self> {
        let mut exact = HashMap::with_capacity(entries.len());
        let mut floats = Vec::new();
        for (i, (p, _)) in entries.iter().enumerate() {
            if exact.insert(p.key(), i).is_some() {
                return Err(Error::InvalidInput(format!("duplicate table key {p}")));
            }
            if let Some(v) = p.to_f64() {
                floats.push((v, i));
            }
        }
        floats.sort_by(|a, b| a.0.total_cmp(&b.0));
        for w in floats.windows(2) {
            let both_float = matches!(entries[w[0].1].0, Point::Float(_)) && matches!(entries[w[1].1].0, Point::Float(_));
            if both_float && (w[1].0 - w[0].0).abs() <= TABLE_KEY_TOL * w[0].0.abs().max(1.0) {
                return Err(Error::InvalidInput(format!(
                    "table keys {} and {} are indistinguishable",
                    w[0].0, w[1].0
                )));
            }
        }
        Ok(Table { entries, exact, floats })
    }

    pub fn entries(&self) -> &[(Point, GroupValue)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    fn nearest_float(&self, v: f64) -> Option<usize> {
        let pos = self.floats.partition_point(|(k, _)| *k < v);
        let tol = TABLE_KEY_TOL * v.abs().max(1.0);
        [pos.checked_sub(1), Some(pos)]
            .into_iter()
            .flatten()
            .filter_map(|i| self.floats.get(i))
            .filter(|(k, _)| (k - v).abs() <= tol)
            .min_by(|a, b| (a.0 - v).abs().total_cmp(&(b.0 - v).abs()))
            .map(|&(_, i)| i)
    }

    pub fn index_of(&self, x: &Point) -> Option<usize> {
        if let Some(&i) = self.exact.get(&x.key()) {
            return Some(i);
        }
        match x {
            Point::Float(v) => self.nearest_float(*v),
            _ => None,
        }
    }

    pub fn lookup(&self, x: &Point) -> Result<&GroupValue> {
        self.index_of(x)
            .map(|i| &self.entries[i].1)
            .ok_or_else(|| Error::MissingSample {
                point: x.to_string(),
                index: 0,
            })
    }

    /// A copy with the value at `index` replaced.
    pub fn with_value(&self, index: usize, value: GroupValue) -> Table {
        let mut copy = self.clone();
        copy.entries[index].1 = value;
        copy
    }
}

impl serde::Serialize for Table {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_seq(self.entries.iter())
    }
}

impl<'de> serde::Deserialize<'de> for Table {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let entries = Vec::<(Point, GroupValue)>::deserialize(deserializer)?;
        Table::new(entries).map_err(serde::de::Error::custom)
    }
}

pub(crate) type Evaluator = dyn Fn(&Point) -> Result<GroupValue> + Send + Sync;

#[derive(Clone)]
pub(crate) enum Body {
    Closed(MonomialSum),
    Table(Arc<Table>),
    /// `a - b`
    Difference(Arc<FunctionHandle>, Arc<FunctionHandle>),
    /// `x ↦ ρ(x + y) - ρ(x)`
    Step(Arc<FunctionHandle>, Point),
    /// `u ↦ ρ(g(u))`
    Lift(Arc<FunctionHandle>, SectionPair),
    /// `x ↦ f(g'(x))`
    Pullback(Arc<FunctionHandle>, SectionPair),
    Custom(Arc<Evaluator>),
}

impl fmt::Debug for Body {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Body::Closed(sum) => f.debug_tuple("Closed").field(sum).finish(),
            Body::Table(t) => write!(f, "Table({} entries)", t.len()),
            Body::Difference(a, b) => f.debug_tuple("Difference").field(a).field(b).finish(),
            Body::Step(inner, y) => f.debug_tuple("Step").field(inner).field(y).finish(),
            Body::Lift(rho, pair) => f.debug_tuple("Lift").field(rho).field(pair).finish(),
            Body::Pullback(g, pair) => f.debug_tuple("Pullback").field(g).field(pair).finish(),
            Body::Custom(_) => write!(f, "Custom"),
        }
    }
}

/// A function `ρ: domain → codomain`, given in closed form, by a finite
/// table, or derived from other handles. Handles are immutable.
#[derive(Clone, Debug)]
pub struct FunctionHandle {
    domain: Domain,
    codomain: Group,
    pub(crate) body: Body,
}

impl FunctionHandle {
    pub(crate) fn from_parts(domain: Domain, codomain: Group, body: Body) -> Self {
        FunctionHandle { domain, codomain, body }
    }

    /// A closed-form sum of monomials.
    pub fn closed(domain: impl Into<Domain>, codomain: Group, sum: MonomialSum) -> Result<Self> {
        let domain = domain.into();
        match &domain {
            Domain::Semigroup(s) => sum.validate(s, &codomain)?,
            Domain::Line(_) => {
                for c in sum.components() {
                    match c.form() {
                        MonomialForm::Power { coefficient } => {
                            codomain.coerce(coefficient)?;
                        }
                        MonomialForm::Tensor { .. } => {
                            return Err(Error::InvalidSpec("tensor monomials need a vector domain".into()))
                        }
                    }
                }
            }
        }
        Ok(FunctionHandle::from_parts(domain, codomain, Body::Closed(sum)))
    }

    pub fn table(domain: impl Into<Domain>, codomain: Group, entries: Vec<(Point, GroupValue)>) -> Result<Self> {
        let domain = domain.into();
        for (p, v) in &entries {
            domain.check(p)?;
            codomain.check(v)?;
        }
        let table = Table::new(entries)?;
        Ok(FunctionHandle::from_parts(domain, codomain, Body::Table(Arc::new(table))))
    }

    pub fn from_table(domain: impl Into<Domain>, codomain: Group, table: Table) -> Result<Self> {
        let domain = domain.into();
        for (p, v) in table.entries() {
            domain.check(p)?;
            codomain.check(v)?;
        }
        Ok(FunctionHandle::from_parts(domain, codomain, Body::Table(Arc::new(table))))
    }

    pub fn from_fn<F>(domain: impl Into<Domain>, codomain: Group, f: F) -> Self
    where
        F: Fn(&Point) -> Result<GroupValue> + Send + Sync + 'static,
    {
        FunctionHandle::from_parts(domain.into(), codomain, Body::Custom(Arc::new(f)))
    }

    pub fn zero(domain: impl Into<Domain>, codomain: Group) -> Self {
        FunctionHandle::from_parts(domain.into(), codomain, Body::Closed(MonomialSum::default()))
    }

    /// `self - other` on the common domain.
    pub fn minus(&self, other: &FunctionHandle) -> Result<Self> {
        if self.codomain != other.codomain {
            return Err(Error::mismatch(self.codomain.name(), other.codomain.name()));
        }
        Ok(FunctionHandle::from_parts(
            self.domain,
            self.codomain.clone(),
            Body::Difference(Arc::new(self.clone()), Arc::new(other.clone())),
        ))
    }

    /// `Δ_y^1 ρ`, the handle `x ↦ ρ(x + y) - ρ(x)`.
    pub fn step(&self, y: &Point) -> Result<Self> {
        let sg = self.semigroup()?;
        sg.check(y)?;
        Ok(FunctionHandle::from_parts(
            self.domain,
            self.codomain.clone(),
            Body::Step(Arc::new(self.clone()), y.clone()),
        ))
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn codomain(&self) -> &Group {
        &self.codomain
    }

    pub fn semigroup(&self) -> Result<&Semigroup> {
        self.domain.semigroup().ok_or_else(|| {
            Error::InvalidInput(format!("domain {} is not a semigroup", self.domain.name()))
        })
    }

    pub fn as_closed(&self) -> Option<&MonomialSum> {
        match &self.body {
            Body::Closed(sum) => Some(sum),
            _ => None,
        }
    }

    pub fn as_table(&self) -> Option<&Table> {
        match &self.body {
            Body::Table(t) => Some(t),
            _ => None,
        }
    }

    pub fn is_table_backed(&self) -> bool {
        match &self.body {
            Body::Table(_) => true,
            Body::Difference(a, b) => a.is_table_backed() || b.is_table_backed(),
            Body::Step(inner, _) | Body::Lift(inner, _) | Body::Pullback(inner, _) => inner.is_table_backed(),
            Body::Closed(_) | Body::Custom(_) => false,
        }
    }

    pub fn eval(&self, x: &Point) -> Result<GroupValue> {
        self.domain.check(x)?;
        let value = match &self.body {
            Body::Closed(sum) => sum.evaluate(x, &self.codomain)?,
            Body::Table(t) => t.lookup(x)?.clone(),
            Body::Difference(a, b) => self.codomain.sub(&a.eval(x)?, &b.eval(x)?)?,
            Body::Step(inner, y) => {
                let sg = self.semigroup()?;
                let shifted = inner.eval(&sg.add(x, y)?)?;
                self.codomain.sub(&shifted, &inner.eval(x)?)?
            }
            Body::Lift(rho, pair) => rho.eval(&pair.g(x)?)?,
            Body::Pullback(f, pair) => f.eval(&pair.section(x)?)?,
            Body::Custom(f) => f(x)?,
        };
        self.codomain.check(&value)?;
        Ok(value)
    }
}
