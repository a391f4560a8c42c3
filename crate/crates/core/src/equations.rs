//! The radical equations
//!
//! ```text
//! Σ_{i=0}^{n} (-1)^(n-i) C(n,i) f((u^m + i v^m)^(1/m)) = (n!) f(v)
//! f(u) + Σ_{i=1}^{n+1} (-1)^i C(n+1,i) f((u^m + i v^m)^(1/m)) = 0
//! ```
//!
//! and their arcsine counterparts, where the argument is
//! `arcsin|sin u · sin^i v|` and `u, v` range over `R \ πZ`.

use std::collections::HashMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::algebra::{
    difference_weights, exact_root, factorial, pascal_row, rational_to_f64, real_root_f64, Group, GroupValue,
    Point, PointKey, Repr, Semigroup, DEFAULT_DIVISIBILITY_BOUND,
};
use crate::calculus::{decompose, pi_multiple, Domain, FunctionHandle, MonomialForm, MonomialSpec, MonomialSum, Table};
use crate::error::{Error, Result};
use crate::section::{lift_canonical, pullback, EquationForm, SectionPair};

pub const SCHEMA: &str = "1";
pub const DEFAULT_TOL: f64 = 1e-9;

/// Tolerance for treating two double-precision nodes as the same point.
const NODE_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EquationId {
    Eq1,
    Eq2,
    Eq3,
    Eq4,
}

impl EquationId {
    pub fn is_radical(self) -> bool {
        matches!(self, EquationId::Eq1 | EquationId::Eq2)
    }

    /// `true` for the equations whose right-hand side is `(n!) f(v)`.
    pub fn is_monomial(self) -> bool {
        matches!(self, EquationId::Eq1 | EquationId::Eq3)
    }

    pub fn name(self) -> &'static str {
        match self {
            EquationId::Eq1 => "eq1",
            EquationId::Eq2 => "eq2",
            EquationId::Eq3 => "eq3",
            EquationId::Eq4 => "eq4",
        }
    }
}

impl std::str::FromStr for EquationId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "eq1" => Ok(EquationId::Eq1),
            "eq2" => Ok(EquationId::Eq2),
            "eq3" => Ok(EquationId::Eq3),
            "eq4" => Ok(EquationId::Eq4),
            other => Err(Error::InvalidParameter(format!("unknown equation {other:?}"))),
        }
    }
}

/// One of the four equations at a fixed order `n` (and root index `m`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Equation {
    id: EquationId,
    n: u32,
    m: Option<u32>,
}

impl Equation {
    pub fn new(id: EquationId, n: u32, m: Option<u32>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("n must be at least 1".into()));
        }
        if n > DEFAULT_DIVISIBILITY_BOUND {
            return Err(Error::InvalidParameter(format!(
                "n = {n} exceeds the supported maximum {DEFAULT_DIVISIBILITY_BOUND}"
            )));
        }
        match (id.is_radical(), m) {
            (true, Some(m)) if m >= 2 => {}
            (true, Some(m)) => return Err(Error::InvalidParameter(format!("m must be at least 2, got {m}"))),
            (true, None) => return Err(Error::InvalidParameter(format!("{} needs m", id.name()))),
            (false, Some(_)) => return Err(Error::InvalidParameter(format!("{} takes no m", id.name()))),
            (false, None) => {}
        }
        Ok(Equation { id, n, m })
    }

    pub fn eq1(n: u32, m: u32) -> Result<Self> {
        Equation::new(EquationId::Eq1, n, Some(m))
    }

    pub fn eq2(n: u32, m: u32) -> Result<Self> {
        Equation::new(EquationId::Eq2, n, Some(m))
    }

    pub fn eq3(n: u32) -> Result<Self> {
        Equation::new(EquationId::Eq3, n, None)
    }

    pub fn eq4(n: u32) -> Result<Self> {
        Equation::new(EquationId::Eq4, n, None)
    }

    pub fn id(&self) -> EquationId {
        self.id
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn m(&self) -> Option<u32> {
        self.m
    }

    pub fn is_radical(&self) -> bool {
        self.id.is_radical()
    }

    pub fn pair(&self) -> SectionPair {
        match self.m {
            Some(m) => SectionPair::PowerRoot { m },
            None => SectionPair::LogAbsSin,
        }
    }

    pub fn form(&self) -> EquationForm {
        if self.id.is_monomial() {
            EquationForm::monomial(self.n)
        } else {
            EquationForm::polynomial(self.n)
        }
    }

    pub fn target(&self, repr: Repr) -> Semigroup {
        self.pair().target(repr)
    }

    fn require_exact_support(&self) -> Result<()> {
        if self.is_radical() {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!(
                "{} has no exact mode; use float",
                self.id.name()
            )))
        }
    }

    /// The `i`-th inner argument in `u`-space: `(u^m + i v^m)^(1/m)` or
    /// `arcsin|sin u · sin^i v|`.
    fn argument(&self, u: &Point, v: &Point, i: u32, repr: Repr) -> Result<Point> {
        match (self.m, repr) {
            (Some(m), Repr::Exact) => {
                let pair = self.pair();
                let (Point::Rational(x), Point::Rational(y)) = (pair.g(u)?, pair.g(v)?) else {
                    return Err(Error::mismatch("exact point", u));
                };
                exact_root(&(x + y * BigRational::from_integer(i.into())), m)
            }
            (Some(m), Repr::Float) => {
                let (uf, vf) = (float_of(u)?, float_of(v)?);
                let q = uf.powi(m as i32) + f64::from(i) * vf.powi(m as i32);
                Ok(Point::Float(real_root_f64(q, m)))
            }
            (None, _) => {
                let (uf, vf) = (float_of(u)?, float_of(v)?);
                let a = (uf.sin() * vf.sin().powi(i as i32)).abs().asin();
                // The argument must stay in (0, π/2] ⊂ U.
                if !(a > 0.0 && a <= std::f64::consts::FRAC_PI_2) {
                    return Err(Error::domain(
                        format!("(u, v) = ({u}, {v})"),
                        format!("argument {i} is {a}, outside (0, π/2]"),
                    ));
                }
                Ok(Point::Float(a))
            }
        }
    }

    /// The points at which `f` is evaluated for one `(u, v)`, with their
    /// integer weights on each side of the equation.
    pub fn terms(&self, u: &Point, v: &Point, repr: Repr) -> Result<Terms> {
        let n = self.n;
        let mut lhs = Vec::new();
        let mut rhs = Vec::new();
        if self.id.is_monomial() {
            for (i, w) in difference_weights(n).into_iter().enumerate() {
                lhs.push(Term {
                    point: self.argument(u, v, i as u32, repr)?,
                    weight: w,
                });
            }
            rhs.push(Term {
                point: v.clone(),
                weight: factorial(n),
            });
        } else {
            lhs.push(Term {
                point: u.clone(),
                weight: BigInt::one(),
            });
            for (i, c) in pascal_row(n + 1).into_iter().enumerate().skip(1) {
                let weight = if i % 2 == 0 { c } else { -c };
                lhs.push(Term {
                    point: self.argument(u, v, i as u32, repr)?,
                    weight,
                });
            }
        }
        Ok(Terms { lhs, rhs })
    }
}

impl fmt::Display for Equation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.m {
            Some(m) => write!(f, "{}(n={}, m={m})", self.id.name(), self.n),
            None => write!(f, "{}(n={})", self.id.name(), self.n),
        }
    }
}

fn float_of(p: &Point) -> Result<f64> {
    p.to_f64().ok_or_else(|| Error::mismatch("scalar point", p))
}

#[derive(Clone, Debug, PartialEq)]
pub struct Term {
    pub point: Point,
    pub weight: BigInt,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Terms {
    pub lhs: Vec<Term>,
    pub rhs: Vec<Term>,
}

impl Terms {
    /// Net weight of every distinct point: left-hand weights minus
    /// right-hand weights.
    pub fn net_weights(&self) -> Vec<(Point, BigInt)> {
        let mut order: Vec<(Point, BigInt)> = Vec::new();
        let mut index: HashMap<PointKey, usize> = HashMap::new();
        let sides = self.lhs.iter().map(|t| (t, true)).chain(self.rhs.iter().map(|t| (t, false)));
        for (t, left) in sides {
            let w = if left { t.weight.clone() } else { -t.weight.clone() };
            match index.get(&t.point.key()) {
                Some(&i) => order[i].1 += w,
                None => {
                    index.insert(t.point.key(), order.len());
                    order.push((t.point.clone(), w));
                }
            }
        }
        order
    }
}

/// Exact characteristic-coordinate checking or direct double-precision
/// evaluation in `u`-space.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Exact,
    Float,
}

impl Mode {
    pub fn repr(self) -> Repr {
        match self {
            Mode::Exact => Repr::Exact,
            Mode::Float => Repr::Float,
        }
    }
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(Mode::Exact),
            "float" => Ok(Mode::Float),
            other => Err(Error::InvalidParameter(format!("unknown mode {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VerifyOptions {
    pub mode: Mode,
    pub tol: f64,
}

impl VerifyOptions {
    pub fn exact() -> Self {
        VerifyOptions {
            mode: Mode::Exact,
            tol: 0.0,
        }
    }

    pub fn float(tol: f64) -> Self {
        VerifyOptions { mode: Mode::Float, tol }
    }

    pub fn codomain(&self) -> Result<Group> {
        match self.mode {
            Mode::Exact => Ok(Group::rational()),
            Mode::Float => Group::float(self.tol),
        }
    }
}

/// JSON descriptor: `{"equation": "eq1", "n": 2, "m": 3, "mode": "exact", "tol": 1e-9}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Descriptor {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schema: Option<String>,
    pub equation: EquationId,
    pub n: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<Mode>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
}

impl Descriptor {
    pub fn equation(&self) -> Result<Equation> {
        check_schema(self.schema.as_deref())?;
        Equation::new(self.equation, self.n, self.m)
    }

    /// Exact for radical equations unless overridden; always float for the
    /// arcsine ones.
    pub fn options(&self) -> Result<VerifyOptions> {
        let tol = self.tol.unwrap_or(DEFAULT_TOL);
        if !(tol.is_finite() && tol >= 0.0) {
            return Err(Error::InvalidParameter(format!("tol must be a nonnegative number, got {tol}")));
        }
        let mode = self
            .mode
            .unwrap_or(if self.equation.is_radical() { Mode::Exact } else { Mode::Float });
        Ok(VerifyOptions { mode, tol })
    }
}

pub fn check_schema(schema: Option<&str>) -> Result<()> {
    match schema {
        None | Some(SCHEMA) => Ok(()),
        Some(other) => Err(Error::InvalidSpec(format!("unsupported schema version {other:?}"))),
    }
}

/// A proposed solution `f: U → Y`.
#[derive(Clone, Debug)]
pub enum Candidate {
    /// `f = ρ ∘ g` with `ρ = Σ ρ_j` in characteristic coordinates.
    Canonical { pair: SectionPair, coeffs: MonomialSum },
    /// Values of `f` at finitely many points of `U`.
    Raw { table: Table },
}

impl Candidate {
    /// A handle for `f` on `U` in the given mode.
    pub fn handle(&self, eq: &Equation, opts: &VerifyOptions) -> Result<FunctionHandle> {
        if opts.mode == Mode::Exact {
            eq.require_exact_support()?;
        }
        let repr = opts.mode.repr();
        let group = opts.codomain()?;
        match self {
            Candidate::Canonical { pair, coeffs } => {
                if *pair != eq.pair() {
                    return Err(Error::mismatch(eq.pair().name(), pair.name()));
                }
                let rho = FunctionHandle::closed(eq.target(repr), group, coeffs.clone())?;
                lift_canonical(&rho, *pair)
            }
            Candidate::Raw { table } => {
                let domain = Domain::Line(eq.pair().u_domain(repr));
                let entries = table
                    .entries()
                    .iter()
                    .map(|(p, v)| {
                        let p = match opts.mode {
                            Mode::Exact => p.clone(),
                            Mode::Float => p.to_float()?,
                        };
                        Ok((p, group.coerce(v)?))
                    })
                    .collect::<Result<Vec<_>>>()?;
                FunctionHandle::table(domain, group, entries)
            }
        }
    }

    /// `ρ` on `X` for exact characteristic checking.
    fn characteristic(&self, eq: &Equation) -> Result<FunctionHandle> {
        let opts = VerifyOptions::exact();
        match self {
            Candidate::Canonical { pair, coeffs } => {
                if *pair != eq.pair() {
                    return Err(Error::mismatch(eq.pair().name(), pair.name()));
                }
                FunctionHandle::closed(eq.target(Repr::Exact), opts.codomain()?, coeffs.clone())
            }
            Candidate::Raw { .. } => pullback(&self.handle(eq, &opts)?, eq.pair()),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CandidateRepr {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    schema: Option<String>,
    form: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pair: Option<SectionPair>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    coeffs: Option<MonomialSum>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    table: Option<Table>,
}

impl Serialize for Candidate {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let repr = match self {
            Candidate::Canonical { pair, coeffs } => CandidateRepr {
                schema: Some(SCHEMA.into()),
                form: "canonical".into(),
                pair: Some(*pair),
                coeffs: Some(coeffs.clone()),
                table: None,
            },
            Candidate::Raw { table } => CandidateRepr {
                schema: Some(SCHEMA.into()),
                form: "raw".into(),
                pair: None,
                coeffs: None,
                table: Some(table.clone()),
            },
        };
        repr.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Candidate {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let repr = CandidateRepr::deserialize(deserializer)?;
        check_schema(repr.schema.as_deref()).map_err(D::Error::custom)?;
        match repr.form.as_str() {
            "canonical" => Ok(Candidate::Canonical {
                pair: repr.pair.ok_or_else(|| D::Error::missing_field("pair"))?,
                coeffs: repr.coeffs.ok_or_else(|| D::Error::missing_field("coeffs"))?,
            }),
            "raw" => Ok(Candidate::Raw {
                table: repr.table.ok_or_else(|| D::Error::missing_field("table"))?,
            }),
            other => Err(D::Error::custom(format!("unknown candidate form {other:?}"))),
        }
    }
}

/// Pairs `(u, v)` in `U²`, or pairs `(x, y)` in `X²`.
#[derive(Clone, Debug, PartialEq)]
pub enum Grid {
    U(Vec<(Point, Point)>),
    Characteristic(Vec<(Point, Point)>),
}

impl Grid {
    pub fn pairs(&self) -> &[(Point, Point)] {
        match self {
            Grid::U(p) | Grid::Characteristic(p) => p,
        }
    }
}

/// Canonical solution for the given coefficients in characteristic
/// coordinates.
pub fn solve(eq: &Equation, coeffs: &MonomialSum) -> Result<Candidate> {
    for c in coeffs.components() {
        if !matches!(c.form(), MonomialForm::Power { .. }) {
            return Err(Error::InvalidParameter("coefficients must be in power form".into()));
        }
    }
    let degrees: Vec<u32> = coeffs.components().iter().map(MonomialSpec::degree).collect();
    if eq.id.is_monomial() {
        if degrees != [eq.n] {
            return Err(Error::InvalidParameter(format!(
                "{} needs a single monomial of degree {}, got degrees {degrees:?}",
                eq.id.name(),
                eq.n
            )));
        }
    } else if let Some(&d) = degrees.iter().find(|&&d| d > eq.n) {
        return Err(Error::InvalidParameter(format!(
            "{} allows degrees up to {}, got {d}",
            eq.id.name(),
            eq.n
        )));
    }
    Ok(Candidate::Canonical {
        pair: eq.pair(),
        coeffs: coeffs.clone(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Holds,
    Fails,
}

impl Outcome {
    pub fn from_holds(holds: bool) -> Self {
        if holds {
            Outcome::Holds
        } else {
            Outcome::Fails
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReportWitness {
    pub u: Point,
    pub v: Point,
    pub lhs: GroupValue,
    pub rhs: GroupValue,
    pub residual: f64,
}

/// Result of [`verify`]. Residuals are listed in grid order; pairs that
/// could not be evaluated from a finite table are `null`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub schema: &'static str,
    pub equation: String,
    pub mode: Mode,
    pub verdict: Outcome,
    pub max_residual: f64,
    pub checked_pairs: usize,
    pub requested_pairs: usize,
    pub residuals: Vec<Option<f64>>,
    pub witness: Option<ReportWitness>,
}

impl Report {
    pub fn holds(&self) -> bool {
        self.verdict == Outcome::Holds
    }
}

struct PairResult {
    lhs: GroupValue,
    rhs: GroupValue,
    residual: f64,
    ok: bool,
}

fn collect<F>(eq: &Equation, mode: Mode, grid: &[(Point, Point)], mut eval: F) -> Result<Report>
where
    F: FnMut(&Point, &Point) -> Result<PairResult>,
{
    if grid.is_empty() {
        return Err(Error::InvalidInput("grid is empty".into()));
    }
    let mut residuals = Vec::with_capacity(grid.len());
    let mut witness = None;
    let mut max_residual: f64 = 0.0;
    let mut checked = 0;
    let mut first_missing = None;
    for (u, v) in grid {
        match eval(u, v) {
            Ok(r) => {
                checked += 1;
                residuals.push(Some(r.residual));
                max_residual = if r.residual.is_nan() { f64::NAN } else { max_residual.max(r.residual) };
                if !r.ok && witness.is_none() {
                    witness = Some(ReportWitness {
                        u: u.clone(),
                        v: v.clone(),
                        lhs: r.lhs,
                        rhs: r.rhs,
                        residual: r.residual,
                    });
                }
            }
            Err(e @ Error::MissingSample { .. }) => {
                residuals.push(None);
                first_missing.get_or_insert(e);
            }
            Err(e) => return Err(e),
        }
    }
    if checked == 0 {
        if let Some(e) = first_missing {
            return Err(e);
        }
    }
    Ok(Report {
        schema: SCHEMA,
        equation: eq.to_string(),
        mode,
        verdict: Outcome::from_holds(witness.is_none()),
        max_residual,
        checked_pairs: checked,
        requested_pairs: grid.len(),
        residuals,
        witness,
    })
}

fn exact_result(group: &Group, lhs: GroupValue, rhs: GroupValue) -> Result<PairResult> {
    let diff = group.sub(&lhs, &rhs)?;
    let ok = group.is_zero(&diff)?;
    Ok(PairResult {
        residual: group.magnitude(&diff),
        lhs,
        rhs,
        ok,
    })
}

fn evaluate_terms(f: &FunctionHandle, terms: &Terms, tol: Option<f64>) -> Result<PairResult> {
    let group = f.codomain();
    let mut largest: f64 = 0.0;
    let mut side = |ts: &[Term]| -> Result<GroupValue> {
        let mut acc = group.zero();
        for t in ts {
            let value = f.eval(&t.point)?;
            largest = largest.max(group.magnitude(&value));
            acc = group.add(&acc, &group.scale(&t.weight, &value)?)?;
        }
        Ok(acc)
    };
    let lhs = side(&terms.lhs)?;
    let rhs = side(&terms.rhs)?;
    match tol {
        None => exact_result(group, lhs, rhs),
        Some(tol) => {
            let (l, r) = (lhs.as_f64().unwrap_or(f64::NAN), rhs.as_f64().unwrap_or(f64::NAN));
            let residual = (l - r).abs() / largest.max(1.0);
            Ok(PairResult {
                lhs,
                rhs,
                residual,
                ok: residual <= tol,
            })
        }
    }
}

/// Checks a candidate against the equation over a grid.
///
/// In exact mode a canonical candidate is checked in characteristic
/// coordinates, where every argument `u^m + i v^m` is rational; a table is
/// checked at the exact (possibly symbolic-root) arguments it must contain.
/// In float mode the equation is evaluated as written, and the residual of
/// a pair is `|LHS - RHS| / max(1, max |f|)` over the values involved.
pub fn verify(eq: &Equation, candidate: &Candidate, grid: &Grid, opts: &VerifyOptions) -> Result<Report> {
    match opts.mode {
        Mode::Exact => {
            eq.require_exact_support()?;
            let pair = eq.pair();
            let form = eq.form();
            let group = opts.codomain()?;
            let characteristic = |rho: &FunctionHandle, x: &Point, y: &Point| -> Result<PairResult> {
                let lhs = form.g(rho, x, y)?;
                let rhs = form.h(&group, &rho.eval(x)?, &rho.eval(y)?)?;
                exact_result(&group, lhs, rhs)
            };
            match (candidate, grid) {
                (Candidate::Canonical { .. }, Grid::U(pairs)) => {
                    let rho = candidate.characteristic(eq)?;
                    collect(eq, opts.mode, pairs, |u, v| characteristic(&rho, &pair.g(u)?, &pair.g(v)?))
                }
                (_, Grid::Characteristic(pairs)) => {
                    let rho = candidate.characteristic(eq)?;
                    collect(eq, opts.mode, pairs, |x, y| characteristic(&rho, x, y))
                }
                (Candidate::Raw { .. }, Grid::U(pairs)) => {
                    let f = candidate.handle(eq, opts)?;
                    collect(eq, opts.mode, pairs, |u, v| {
                        f.domain().check(u)?;
                        f.domain().check(v)?;
                        evaluate_terms(&f, &eq.terms(u, v, Repr::Exact)?, None)
                    })
                }
            }
        }
        Mode::Float => {
            let f = candidate.handle(eq, opts)?;
            let pairs = float_pairs(eq, grid)?;
            collect(eq, opts.mode, &pairs, |u, v| {
                f.domain().check(u)?;
                f.domain().check(v)?;
                evaluate_terms(&f, &eq.terms(u, v, Repr::Float)?, Some(opts.tol))
            })
        }
    }
}

fn float_pairs(eq: &Equation, grid: &Grid) -> Result<Vec<(Point, Point)>> {
    let pair = eq.pair();
    grid.pairs()
        .iter()
        .map(|(a, b)| match grid {
            Grid::U(_) => Ok((a.to_float()?, b.to_float()?)),
            Grid::Characteristic(_) => Ok((
                pair.section(&a.to_float()?)?.to_float()?,
                pair.section(&b.to_float()?)?.to_float()?,
            )),
        })
        .collect()
}

/// Every point of `U` at which `f` is evaluated when checking `grid`, in
/// first-use order.
pub fn required_points(eq: &Equation, grid: &[(Point, Point)], mode: Mode) -> Result<Vec<Point>> {
    let mut seen = std::collections::HashSet::new();
    let mut out = Vec::new();
    for (u, v) in grid {
        let terms = eq.terms(u, v, mode.repr())?;
        for t in terms.lhs.iter().chain(&terms.rhs) {
            if seen.insert(t.point.key()) {
                out.push(t.point.clone());
            }
        }
    }
    Ok(out)
}

/// Tabulates a candidate at the given points of `U`.
pub fn tabulate(eq: &Equation, candidate: &Candidate, points: &[Point], opts: &VerifyOptions) -> Result<Table> {
    let f = candidate.handle(eq, opts)?;
    let entries = points
        .iter()
        .map(|p| Ok((p.clone(), f.eval(p)?)))
        .collect::<Result<Vec<_>>>()?;
    Table::new(entries)
}

/// A candidate defined also at some multiples of π.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Extended {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schema: Option<String>,
    pub candidate: Candidate,
    /// `[k, f(kπ)]` pairs.
    pub pi_multiples: Vec<(i64, GroupValue)>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Violation {
    pub k: i64,
    pub sample: Point,
    pub lhs: GroupValue,
    pub rhs: GroupValue,
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrivialityReport {
    pub schema: &'static str,
    pub equation: String,
    pub verdict: Outcome,
    pub substitutions: usize,
    pub violations: Vec<Violation>,
}

impl TrivialityReport {
    pub fn holds(&self) -> bool {
        self.verdict == Outcome::Holds
    }
}

/// Substitutes a multiple of π for `u` (monomial arcsine equation) or `v`
/// (polynomial one). Every inner argument becomes `arcsin 0 = 0`, so the
/// equation collapses to `0 = (n!) f(v)`, respectively `f(u) = f(0)`, and
/// each sample that breaks this is reported.
pub fn triviality_check(eq: &Equation, ext: &Extended, samples: &[Point], tol: f64) -> Result<TrivialityReport> {
    check_schema(ext.schema.as_deref())?;
    if eq.is_radical() {
        return Err(Error::InvalidParameter(format!(
            "{} is posed on the whole line; the check applies to eq3 and eq4",
            eq.id.name()
        )));
    }
    if ext.pi_multiples.is_empty() {
        return Err(Error::NotApplicable("candidate is not defined at any multiple of π".into()));
    }
    if samples.is_empty() {
        return Err(Error::InvalidInput("no samples".into()));
    }
    let opts = VerifyOptions::float(tol);
    let group = opts.codomain()?;
    let f = ext.candidate.handle(eq, &opts)?;
    let mut at_pi = HashMap::new();
    for (k, value) in &ext.pi_multiples {
        if at_pi.insert(*k, group.coerce(value)?).is_some() {
            return Err(Error::InvalidInput(format!("f({k}π) given twice")));
        }
    }
    let f0 = at_pi
        .get(&0)
        .cloned()
        .ok_or_else(|| Error::NotApplicable("the collapsed equation needs f(0)".into()))?;
    let value = |p: &Point| -> Result<GroupValue> {
        let x = float_of(p)?;
        match pi_multiple(x) {
            Some(k) => at_pi.get(&k).cloned().ok_or_else(|| Error::MissingSample {
                point: format!("{k}π"),
                index: 0,
            }),
            None => f.eval(&Point::Float(x)),
        }
    };

    let n = eq.n;
    let mut ks: Vec<i64> = at_pi.keys().copied().collect();
    ks.sort_unstable();
    let mut violations = Vec::new();
    let mut substitutions = 0;
    for &k in &ks {
        for s in samples {
            let fs = value(s)?;
            let (lhs, rhs) = if eq.id.is_monomial() {
                // u = kπ: Σ (-1)^(n-i) C(n,i) f(0) = (n!) f(v).
                let mut lhs = group.zero();
                for w in difference_weights(n) {
                    lhs = group.add(&lhs, &group.scale(&w, &f0)?)?;
                }
                (lhs, group.factorial_multiple(&fs, n)?)
            } else {
                // v = kπ: f(u) + Σ_{i≥1} (-1)^i C(n+1,i) f(0) = 0.
                let mut lhs = fs.clone();
                for (i, c) in pascal_row(n + 1).into_iter().enumerate().skip(1) {
                    let w = if i % 2 == 0 { c } else { -c };
                    lhs = group.add(&lhs, &group.scale(&w, &f0)?)?;
                }
                (lhs, group.zero())
            };
            substitutions += 1;
            let largest = group.magnitude(&f0).max(group.magnitude(&fs)).max(1.0);
            let diff = group.sub(&lhs, &rhs)?;
            let residual = group.magnitude(&diff) / largest;
            if !(residual <= tol) {
                violations.push(Violation {
                    k,
                    sample: s.clone(),
                    lhs,
                    rhs,
                    residual,
                });
            }
        }
    }
    Ok(TrivialityReport {
        schema: SCHEMA,
        equation: eq.to_string(),
        verdict: Outcome::from_holds(violations.is_empty()),
        substitutions,
        violations,
    })
}

enum Nodes {
    Exact(Vec<(BigRational, BigRational)>),
    Float(Vec<(f64, f64)>),
}

/// Picks `count` nodes starting at `0`, each next one farthest from those
/// already chosen.
fn spread(xs: &[f64], count: usize) -> Vec<usize> {
    let mut chosen: Vec<usize> = Vec::with_capacity(count);
    let Some(zero) = xs.iter().position(|x| *x == 0.0) else {
        return chosen;
    };
    chosen.push(zero);
    while chosen.len() < count {
        let next = (0..xs.len())
            .filter(|i| !chosen.contains(i))
            .max_by(|&a, &b| {
                let da = chosen.iter().map(|&c| (xs[a] - xs[c]).abs()).fold(f64::INFINITY, f64::min);
                let db = chosen.iter().map(|&c| (xs[b] - xs[c]).abs()).fold(f64::INFINITY, f64::min);
                da.total_cmp(&db).then(b.cmp(&a))
            });
        match next {
            Some(i) => chosen.push(i),
            None => break,
        }
    }
    chosen
}

/// Power-basis coefficients of the polynomial through the given nodes
/// (Newton divided differences).
fn interpolate_exact(nodes: &[(BigRational, BigRational)]) -> Vec<BigRational> {
    let xs: Vec<_> = nodes.iter().map(|n| n.0.clone()).collect();
    let mut dd: Vec<_> = nodes.iter().map(|n| n.1.clone()).collect();
    for level in 1..xs.len() {
        for i in (level..xs.len()).rev() {
            dd[i] = (&dd[i] - &dd[i - 1]) / (&xs[i] - &xs[i - level]);
        }
    }
    let mut coeffs = vec![BigRational::zero(); xs.len()];
    for k in (0..xs.len()).rev() {
        // coeffs = coeffs * (x - xs[k]) + dd[k]
        let mut next = vec![BigRational::zero(); xs.len()];
        for (j, c) in coeffs.iter().enumerate() {
            if j + 1 < next.len() {
                next[j + 1] += c;
            }
            next[j] -= c * &xs[k];
        }
        next[0] += &dd[k];
        coeffs = next;
    }
    coeffs
}

fn interpolate_float(nodes: &[(f64, f64)]) -> Vec<f64> {
    let xs: Vec<f64> = nodes.iter().map(|n| n.0).collect();
    let mut dd: Vec<f64> = nodes.iter().map(|n| n.1).collect();
    for level in 1..xs.len() {
        for i in (level..xs.len()).rev() {
            dd[i] = (dd[i] - dd[i - 1]) / (xs[i] - xs[i - level]);
        }
    }
    let mut coeffs = vec![0.0; xs.len()];
    for k in (0..xs.len()).rev() {
        let mut next = vec![0.0; xs.len()];
        for (j, c) in coeffs.iter().enumerate() {
            if j + 1 < next.len() {
                next[j + 1] += c;
            }
            next[j] -= c * xs[k];
        }
        next[0] += dd[k];
        coeffs = next;
    }
    coeffs
}

/// Recovers `ρ` from a table of `f` on `U`.
///
/// The table is pulled back through `g`, which must send it onto at least
/// `n + 1` distinct points including `0` (`u = 0` for the radical
/// equations, `u = π/2` for the arcsine ones). The polynomial of degree
/// `n` through those nodes is decomposed into monomials and must reproduce
/// every table entry; for the monomial equations only the top degree may
/// survive.
pub fn recover(eq: &Equation, table: &Table, opts: &VerifyOptions) -> Result<MonomialSum> {
    if opts.mode == Mode::Exact {
        eq.require_exact_support()?;
    }
    let pair = eq.pair();
    let n = eq.n as usize;
    let group = opts.codomain()?;
    let inconsistent = |msg: String| Error::DecompositionInconsistent(msg);

    let nodes = match opts.mode {
        Mode::Exact => {
            let mut by_x: Vec<(BigRational, BigRational)> = Vec::new();
            let mut index: HashMap<BigRational, usize> = HashMap::new();
            for (u, value) in table.entries() {
                let Point::Rational(x) = pair.g(u)? else {
                    return Err(Error::mismatch("exact point", u));
                };
                let Some(y) = value.as_rational().cloned() else {
                    return Err(Error::mismatch("rational value", value.kind_name()));
                };
                match index.get(&x) {
                    Some(&i) if by_x[i].1 != y => {
                        return Err(inconsistent(format!(
                            "points with g(u) = {x} carry different values {} and {y}",
                            by_x[i].1
                        )))
                    }
                    Some(_) => {}
                    None => {
                        index.insert(x.clone(), by_x.len());
                        by_x.push((x, y));
                    }
                }
            }
            Nodes::Exact(by_x)
        }
        Mode::Float => {
            let mut by_x: Vec<(f64, f64)> = Vec::new();
            for (u, value) in table.entries() {
                let x = float_of(&pair.g(&u.to_float()?)?)?;
                let x = if x.abs() <= NODE_TOL { 0.0 } else { x };
                let y = value
                    .as_f64()
                    .ok_or_else(|| Error::mismatch("real value", value.kind_name()))?;
                match by_x.iter().find(|(a, _)| (a - x).abs() <= NODE_TOL * a.abs().max(1.0)) {
                    Some((_, b)) if (b - y).abs() > opts.tol * b.abs().max(y.abs()).max(1.0) => {
                        return Err(inconsistent(format!(
                            "points with g(u) = {x} carry different values {b} and {y}"
                        )))
                    }
                    Some(_) => {}
                    None => by_x.push((x, y)),
                }
            }
            Nodes::Float(by_x)
        }
    };

    let (xs, count): (Vec<f64>, usize) = match &nodes {
        Nodes::Exact(v) => (v.iter().map(|(x, _)| rational_to_f64(x)).collect(), v.len()),
        Nodes::Float(v) => (v.iter().map(|(x, _)| *x).collect(), v.len()),
    };
    if !xs.contains(&0.0) {
        return Err(Error::InvalidInput(
            "table must contain a point with g(u) = 0 (u = 0, or u = π/2)".into(),
        ));
    }
    if count < n + 1 {
        return Err(Error::InvalidInput(format!(
            "table has {count} distinct characteristic points; degree {n} needs {}",
            n + 1
        )));
    }
    let chosen = spread(&xs, n + 1);
    let coefficients: Vec<GroupValue> = match &nodes {
        Nodes::Exact(v) => {
            let picked: Vec<_> = chosen.iter().map(|&i| v[i].clone()).collect();
            interpolate_exact(&picked).into_iter().map(GroupValue::Rational).collect()
        }
        Nodes::Float(v) => {
            let picked: Vec<_> = chosen.iter().map(|&i| v[i]).collect();
            interpolate_float(&picked).into_iter().map(GroupValue::Float).collect()
        }
    };

    let target = eq.target(opts.mode.repr());
    let interpolant = FunctionHandle::closed(target, group.clone(), MonomialSum::from_power_coefficients(coefficients))?;
    let node_points: Vec<Point> = chosen
        .iter()
        .map(|&i| match &nodes {
            Nodes::Exact(v) => Point::Rational(v[i].0.clone()),
            Nodes::Float(v) => Point::Float(v[i].0),
        })
        .collect();
    let grid: Vec<(Point, Point)> = node_points
        .iter()
        .flat_map(|x| node_points.iter().map(move |y| (x.clone(), y.clone())))
        .collect();
    let sum = decompose(&interpolant, eq.n, &grid)?;
    let closed = FunctionHandle::closed(target, group.clone(), sum.clone())?;

    let largest = match &nodes {
        Nodes::Exact(_) => 0.0,
        Nodes::Float(v) => v.iter().map(|(_, y)| y.abs()).fold(1.0, f64::max),
    };
    match &nodes {
        Nodes::Exact(v) => {
            for (x, y) in v {
                let got = closed.eval(&Point::Rational(x.clone()))?;
                if got != GroupValue::Rational(y.clone()) {
                    return Err(inconsistent(format!(
                        "table value {y} at g(u) = {x} is not reproduced (degree-{n} fit gives {got})"
                    )));
                }
            }
        }
        Nodes::Float(v) => {
            for &(x, y) in v {
                let got = closed.eval(&Point::Float(x))?.as_f64().unwrap_or(f64::NAN);
                if !((got - y).abs() <= opts.tol * largest) {
                    return Err(inconsistent(format!(
                        "table value {y} at g(u) = {x} is not reproduced (degree-{n} fit gives {got})"
                    )));
                }
            }
        }
    }

    if !eq.id.is_monomial() {
        return Ok(sum);
    }
    let mut top = None;
    for c in sum.components() {
        let coefficient = c.coefficient().cloned().unwrap_or_else(|| group.zero());
        if c.degree() == eq.n {
            top = Some(c.clone());
            continue;
        }
        let size = group.magnitude(&coefficient);
        let negligible = match opts.mode {
            Mode::Exact => size == 0.0 && group.is_zero(&coefficient)?,
            Mode::Float => size <= opts.tol * largest,
        };
        if !negligible {
            return Err(inconsistent(format!(
                "{} admits only degree {}, but the degree-{} part is {coefficient}",
                eq.id.name(),
                eq.n,
                c.degree()
            )));
        }
    }
    let top = top.ok_or_else(|| inconsistent("no top-degree component".into()))?;
    Ok(MonomialSum::single(top))
}

/// Coefficient-wise comparison of two power-form sums, absent degrees
/// counting as zero. `tol = 0` demands equality.
pub fn same_coefficients(a: &MonomialSum, b: &MonomialSum, tol: f64) -> bool {
    let top = a.max_degree().unwrap_or(0).max(b.max_degree().unwrap_or(0));
    let get = |s: &MonomialSum, j: u32| -> Option<GroupValue> {
        match s.component(j) {
            Some(c) => c.coefficient().cloned(),
            None => Some(GroupValue::Rational(BigRational::zero())),
        }
    };
    (0..=top).all(|j| match (get(a, j), get(b, j)) {
        (Some(GroupValue::Rational(x)), Some(GroupValue::Rational(y))) if tol == 0.0 => x == y,
        (Some(x), Some(y)) => match (x.as_f64(), y.as_f64()) {
            (Some(p), Some(q)) => (p - q).abs() <= tol * p.abs().max(q.abs()).max(1.0),
            _ => x == y,
        },
        _ => false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::rational_int;
    use std::f64::consts::PI;

    fn coeffs(cs: &[(u32, i64, i64)]) -> MonomialSum {
        MonomialSum::new(cs.iter().map(|&(j, p, q)| MonomialSpec::power(j, GroupValue::rational(p, q))).collect())
            .unwrap()
    }

    fn all_pairs(pts: &[Point]) -> Vec<(Point, Point)> {
        pts.iter().flat_map(|x| pts.iter().map(move |y| (x.clone(), y.clone()))).collect()
    }

    #[test]
    fn eq1_example_substitution() {
        let eq = Equation::eq1(1, 3).unwrap();
        let sol = solve(&eq, &coeffs(&[(1, 2, 1)])).unwrap();
        let f = sol.handle(&eq, &VerifyOptions::exact()).unwrap();
        let root9 = exact_root(&rational_int(9), 3).unwrap();
        assert_eq!(f.eval(&root9).unwrap(), GroupValue::int(18));
        let terms = eq.terms(&Point::int(1), &Point::int(2), Repr::Exact).unwrap();
        assert_eq!(terms.lhs[1].point, root9);
        let r = verify(&eq, &sol, &Grid::U(vec![(Point::int(1), Point::int(2))]), &VerifyOptions::exact()).unwrap();
        assert!(r.holds());
        assert_eq!(r.max_residual, 0.0);
    }

    #[test]
    fn shifted_power_fails_eq1() {
        let eq = Equation::eq1(1, 2).unwrap();
        let table: Vec<_> = [-2, -1, 0, 1, 2, 3]
            .iter()
            .map(|&u| (Point::int(u), GroupValue::int(u * u + 1)))
            .collect();
        let cand = Candidate::Raw {
            table: Table::new(table).unwrap(),
        };
        let grid = Grid::U(vec![(Point::int(0), Point::int(0)), (Point::int(1), Point::int(0))]);
        let r = verify(&eq, &cand, &grid, &VerifyOptions::exact()).unwrap();
        assert!(!r.holds());
        assert_eq!(r.witness.unwrap().u, Point::int(0));
    }

    #[test]
    fn solve_checks_degrees() {
        let eq = Equation::eq1(2, 2).unwrap();
        assert!(solve(&eq, &coeffs(&[(1, 1, 1)])).is_err());
        assert!(solve(&eq, &coeffs(&[(1, 1, 1), (2, 1, 1)])).is_err());
        let eq2 = Equation::eq2(1, 2).unwrap();
        assert!(solve(&eq2, &coeffs(&[(0, 3, 1), (1, -1, 2)])).is_ok());
        assert!(solve(&eq2, &coeffs(&[(2, 1, 1)])).is_err());
    }

    #[test]
    fn even_m_rejects_negative_characteristic_points() {
        let eq = Equation::eq2(1, 2).unwrap();
        let sol = solve(&eq, &coeffs(&[(1, 1, 1)])).unwrap();
        let grid = Grid::Characteristic(vec![(Point::int(-1), Point::int(2))]);
        assert!(matches!(verify(&eq, &sol, &grid, &VerifyOptions::exact()), Err(Error::Domain { .. })));
    }

    #[test]
    fn eq3_log_identity_in_float_mode() {
        let eq = Equation::eq3(1).unwrap();
        let sol = solve(&eq, &coeffs(&[(1, 1, 1)])).unwrap();
        let pts: Vec<_> = [0.3, 1.1, -2.0, 4.0, 7.5].iter().map(|&u| Point::Float(u)).collect();
        let r = verify(&eq, &sol, &Grid::U(all_pairs(&pts)), &VerifyOptions::float(DEFAULT_TOL)).unwrap();
        assert!(r.holds(), "{r:?}");
        assert!(r.max_residual < 1e-12);
    }

    #[test]
    fn arcsine_grid_must_avoid_pi_multiples() {
        let eq = Equation::eq4(2).unwrap();
        let sol = solve(&eq, &coeffs(&[(2, 1, 1)])).unwrap();
        let grid = Grid::U(vec![(Point::Float(PI), Point::Float(1.0))]);
        assert!(matches!(
            verify(&eq, &sol, &grid, &VerifyOptions::float(DEFAULT_TOL)),
            Err(Error::Domain { .. })
        ));
        assert!(verify(&eq, &sol, &grid, &VerifyOptions::exact()).is_err());
    }

    #[test]
    fn recover_even_power() {
        let eq = Equation::eq1(2, 2).unwrap();
        let table: Vec<_> = [-3, -1, 0, 1, 2, 5]
            .iter()
            .map(|&u| (Point::int(u), GroupValue::int(u.pow(4))))
            .collect();
        let sum = recover(&eq, &Table::new(table).unwrap(), &VerifyOptions::exact()).unwrap();
        assert_eq!(sum, coeffs(&[(2, 1, 1)]));
    }

    #[test]
    fn recover_zero_and_arcsine() {
        let eq = Equation::eq2(2, 3).unwrap();
        let table: Vec<_> = (-2..3).map(|u| (Point::int(u), GroupValue::int(0))).collect();
        let sum = recover(&eq, &Table::new(table).unwrap(), &VerifyOptions::exact()).unwrap();
        assert!(same_coefficients(&sum, &MonomialSum::default(), 0.0));

        let eq3 = Equation::eq3(1).unwrap();
        let table: Vec<_> = [PI / 2.0, 0.4, 1.0, 2.5, -0.7]
            .iter()
            .map(|&u| (Point::Float(u), GroupValue::Float(2.0 * u.sin().abs().ln())))
            .collect();
        let sum = recover(&eq3, &Table::new(table).unwrap(), &VerifyOptions::float(DEFAULT_TOL)).unwrap();
        assert_eq!(sum.components().len(), 1);
        assert!((sum.components()[0].coefficient().unwrap().as_f64().unwrap() - 2.0).abs() < 1e-9);
    }

    #[test]
    fn recover_rejects_non_solutions() {
        let eq = Equation::eq1(1, 2).unwrap();
        let table: Vec<_> = [0, 1, 2, 3].iter().map(|&u| (Point::int(u), GroupValue::int(u * u + 1))).collect();
        assert!(matches!(
            recover(&eq, &Table::new(table).unwrap(), &VerifyOptions::exact()),
            Err(Error::DecompositionInconsistent(_))
        ));
    }

    #[test]
    fn triviality_flags_log_and_passes_zero() {
        let samples: Vec<_> = [0.5, 1.0, 2.0].iter().map(|&v| Point::Float(v)).collect();
        let ext = |c: MonomialSum| Extended {
            schema: None,
            candidate: Candidate::Canonical {
                pair: SectionPair::LogAbsSin,
                coeffs: c,
            },
            pi_multiples: (-2..=2).map(|k| (k, GroupValue::int(0))).collect(),
        };
        for n in 1..=3 {
            for eq in [Equation::eq3(n).unwrap(), Equation::eq4(n).unwrap()] {
                let top = coeffs(&[(n, 1, 1)]);
                let r = triviality_check(&eq, &ext(top), &samples, DEFAULT_TOL).unwrap();
                assert!(!r.holds(), "{eq}");
                let zero = triviality_check(&eq, &ext(MonomialSum::default()), &samples, DEFAULT_TOL).unwrap();
                assert!(zero.holds(), "{eq}");
            }
        }
        let mut none = ext(MonomialSum::default());
        none.pi_multiples.clear();
        assert!(matches!(
            triviality_check(&Equation::eq3(1).unwrap(), &none, &samples, DEFAULT_TOL),
            Err(Error::NotApplicable(_))
        ));
    }

    #[test]
    fn candidate_json_round_trip() {
        let eq = Equation::eq2(1, 3).unwrap();
        let sol = solve(&eq, &coeffs(&[(0, 1, 2), (1, -3, 1)])).unwrap();
        let text = serde_json::to_string(&sol).unwrap();
        assert!(text.starts_with(r#"{"schema":"1","form":"canonical","pair":{"kind":"power-root","m":3}"#), "{text}");
        let back: Candidate = serde_json::from_str(&text).unwrap();
        assert!(matches!(back, Candidate::Canonical { .. }));
        let raw = r#"{"form":"raw","table":[["1/2","3"],[{"root":3,"of":"2"},"-1"]]}"#;
        let Candidate::Raw { table } = serde_json::from_str(raw).unwrap() else { panic!() };
        assert_eq!(table.len(), 2);
    }
}
