//! Section pairs `(g, g')` with `g ∘ g' = id`, equation forms `(G, H)`, and
//! the checks that move solutions between a composite equation on `U` and
//! its characteristic equation on `X`.

use std::fmt;
use std::sync::Arc;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::algebra::{
    difference_weights, exact_root, real_root_f64, rational_to_f64, Group, GroupValue, Point, Repr, Semigroup,
};
use crate::calculus::{check_pairs, delta_sided, Body, Domain, FunctionHandle, Sided, UDomain, Verdict};
use crate::error::{Error, Result};

/// A section pair: `g: U → X` and a right inverse `g': X → U`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SectionPair {
    /// `g(u) = u^m`, `g'(x) = x^(1/m)`; `X = R` for odd `m`, `[0, ∞)` for even.
    PowerRoot { m: u32 },
    /// `g(u) = ln|sin u|`, `g'(x) = arcsin(e^x)`; `U = R \ πZ`, `X = (-∞, 0]`.
    LogAbsSin,
}

impl SectionPair {
    pub fn power_root(m: u32) -> Result<Self> {
        if m < 2 {
            return Err(Error::InvalidParameter(format!("m must be at least 2, got {m}")));
        }
        Ok(SectionPair::PowerRoot { m })
    }

    pub fn name(&self) -> String {
        match self {
            SectionPair::PowerRoot { m } => format!("power-root(m={m})"),
            SectionPair::LogAbsSin => "log-abs-sin".into(),
        }
    }

    /// The representation this pair can work in; the logarithmic pair has
    /// no exact one.
    pub fn supports(&self, repr: Repr) -> bool {
        !(matches!(self, SectionPair::LogAbsSin) && repr == Repr::Exact)
    }

    pub fn u_domain(&self, repr: Repr) -> UDomain {
        match self {
            SectionPair::PowerRoot { .. } => UDomain::RealLine(repr),
            SectionPair::LogAbsSin => UDomain::Punctured,
        }
    }

    pub fn target(&self, repr: Repr) -> Semigroup {
        match self {
            SectionPair::PowerRoot { m } if m % 2 == 1 => Semigroup::real_line(repr),
            SectionPair::PowerRoot { .. } => Semigroup::non_negative(repr),
            SectionPair::LogAbsSin => Semigroup::non_positive(Repr::Float),
        }
    }

    /// `g(u)`.
    pub fn g(&self, u: &Point) -> Result<Point> {
        match *self {
            SectionPair::PowerRoot { m } => match u {
                Point::Rational(q) => Ok(Point::Rational(num_traits::pow(q.clone(), m as usize))),
                Point::Root { radicand, index } if m % index == 0 => {
                    Ok(Point::Rational(num_traits::pow(radicand.clone(), (m / index) as usize)))
                }
                Point::Float(v) => Ok(Point::Float(v.powi(m as i32))),
                _ => Err(Error::domain(u, format!("g = u^{m} is not exact here"))),
            },
            SectionPair::LogAbsSin => {
                if !UDomain::Punctured.contains(u) {
                    return Err(Error::domain(u, "ln|sin u| needs u outside πZ"));
                }
                let v = u.to_f64().unwrap_or(f64::NAN);
                Ok(Point::Float(v.sin().abs().ln().min(0.0)))
            }
        }
    }

    /// `g'(x)`.
    pub fn section(&self, x: &Point) -> Result<Point> {
        match *self {
            SectionPair::PowerRoot { m } => match x {
                Point::Rational(q) => exact_root(q, m),
                Point::Float(v) => {
                    if *v < 0.0 && m % 2 == 0 {
                        return Err(Error::domain(x, format!("even root (index {m}) of a negative number")));
                    }
                    Ok(Point::Float(real_root_f64(*v, m)))
                }
                _ => Err(Error::mismatch("scalar point", x)),
            },
            SectionPair::LogAbsSin => {
                let v = match x {
                    Point::Float(v) => *v,
                    Point::Rational(q) => rational_to_f64(q),
                    _ => return Err(Error::mismatch("scalar point", x)),
                };
                if !(v <= 0.0) {
                    return Err(Error::domain(x, "arcsin(e^x) needs x <= 0"));
                }
                let u = v.exp().asin();
                if u == 0.0 {
                    return Err(Error::domain(x, "arcsin(e^x) underflows to 0"));
                }
                Ok(Point::Float(u))
            }
        }
    }
}

impl fmt::Display for SectionPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

fn repr_of(domain: &Domain) -> Repr {
    match domain {
        Domain::Semigroup(s) => s.repr(),
        Domain::Line(UDomain::RealLine(r)) => *r,
        Domain::Line(UDomain::Punctured) => Repr::Float,
    }
}

/// `f = ρ ∘ g` on `U`.
pub fn lift_canonical(rho: &FunctionHandle, pair: SectionPair) -> Result<FunctionHandle> {
    let sg = rho.semigroup()?;
    let expected = pair.target(sg.repr());
    if *sg != expected {
        return Err(Error::mismatch(expected.name(), sg.name()));
    }
    let domain = Domain::Line(pair.u_domain(sg.repr()));
    Ok(FunctionHandle::from_parts(
        domain,
        rho.codomain().clone(),
        Body::Lift(Arc::new(rho.clone()), pair),
    ))
}

/// `f ∘ g'` on `X`. A lifted `ρ ∘ g` pulls back to `ρ` itself, which keeps
/// radical pairs in exact characteristic coordinates.
pub fn pullback(f: &FunctionHandle, pair: SectionPair) -> Result<FunctionHandle> {
    if let Body::Lift(rho, p) = &f.body {
        if *p == pair {
            return Ok((**rho).clone());
        }
    }
    let target = pair.target(repr_of(f.domain()));
    Ok(FunctionHandle::from_parts(
        Domain::Semigroup(target),
        f.codomain().clone(),
        Body::Pullback(Arc::new(f.clone()), pair),
    ))
}

/// Which argument of `H` is held at `f(u0)` in the injectivity test.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FixedArgument {
    /// Test `y ↦ H(f(u0), y)`.
    First,
    /// Test `y ↦ H(y, f(u0))`.
    Second,
}

type GFn = dyn Fn(&FunctionHandle, &Point, &Point) -> Result<GroupValue> + Send + Sync;
type HFn = dyn Fn(&Group, &GroupValue, &GroupValue) -> Result<GroupValue> + Send + Sync;

#[derive(Clone)]
enum GBody {
    /// `Δ_y^n ρ(x)`
    Difference(u32),
    /// `Σ_{i=1}^{n+1} (-1)^i C(n+1, i) ρ(x + i·y)`
    TailSum(u32),
    Custom(Arc<GFn>),
}

#[derive(Clone)]
enum HBody {
    /// `(n!) · y2`
    FactorialSecond(u32),
    /// `-y1`
    NegFirst,
    Custom(Arc<HFn>),
}

/// An equation `G(ρ, (x, y)) = H(ρ(x), ρ(y))`.
#[derive(Clone)]
pub struct EquationForm {
    name: String,
    g: GBody,
    h: HBody,
    fixed: FixedArgument,
}

impl fmt::Debug for EquationForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("EquationForm")
            .field("name", &self.name)
            .field("fixed", &self.fixed)
            .finish()
    }
}

impl EquationForm {
    /// `Δ_y^n ρ(x) = (n!) ρ(y)`.
    pub fn monomial(n: u32) -> Self {
        EquationForm {
            name: format!("monomial(n={n})"),
            g: GBody::Difference(n),
            h: HBody::FactorialSecond(n),
            fixed: FixedArgument::First,
        }
    }

    /// `Σ_{i=1}^{n+1} (-1)^i C(n+1, i) ρ(x + i·y) = -ρ(x)`.
    pub fn polynomial(n: u32) -> Self {
        EquationForm {
            name: format!("polynomial(n={n})"),
            g: GBody::TailSum(n),
            h: HBody::NegFirst,
            fixed: FixedArgument::Second,
        }
    }

    pub fn custom<G, H>(name: impl Into<String>, g: G, h: H, fixed: FixedArgument) -> Self
    where
        G: Fn(&FunctionHandle, &Point, &Point) -> Result<GroupValue> + Send + Sync + 'static,
        H: Fn(&Group, &GroupValue, &GroupValue) -> Result<GroupValue> + Send + Sync + 'static,
    {
        EquationForm {
            name: name.into(),
            g: GBody::Custom(Arc::new(g)),
            h: HBody::Custom(Arc::new(h)),
            fixed,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn fixed_argument(&self) -> FixedArgument {
        self.fixed
    }

    pub(crate) fn g_sided(&self, rho: &FunctionHandle, x: &Point, y: &Point) -> Result<Sided> {
        let group = rho.codomain();
        match &self.g {
            GBody::Difference(n) => delta_sided(rho, *n, x, y),
            GBody::TailSum(n) => {
                let sg = rho.semigroup()?;
                sg.check(x)?;
                sg.check(y)?;
                let mut acc = group.zero();
                let mut scale = 0.0;
                let mut point = x.clone();
                for (i, w) in difference_weights(n + 1).iter().enumerate().skip(1) {
                    point = sg.add(&point, y)?;
                    let value = rho.eval(&point).map_err(|e| match e {
                        Error::MissingSample { point, .. } => Error::MissingSample { point, index: i as u32 },
                        other => other,
                    })?;
                    // (-1)^i C(n+1, i) and the difference weight differ by (-1)^(n+1).
                    let w = if (n + 1) % 2 == 0 { w.clone() } else { -w };
                    let term = group.scale(&w, &value)?;
                    scale += group.magnitude(&term);
                    acc = group.add(&acc, &term)?;
                }
                Ok(Sided { value: acc, scale })
            }
            GBody::Custom(g) => Ok(Sided::plain(group, g(rho, x, y)?)),
        }
    }

    pub fn g(&self, rho: &FunctionHandle, x: &Point, y: &Point) -> Result<GroupValue> {
        self.g_sided(rho, x, y).map(|s| s.value)
    }

    pub fn h(&self, group: &Group, y1: &GroupValue, y2: &GroupValue) -> Result<GroupValue> {
        match &self.h {
            HBody::FactorialSecond(n) => {
                group.check(y1)?;
                group.factorial_multiple(y2, *n)
            }
            HBody::NegFirst => {
                group.check(y2)?;
                group.neg(y1)
            }
            HBody::Custom(h) => h(group, y1, y2),
        }
    }
}

/// Checks `G(ρ, (x, y)) = H(ρ(x), ρ(y))` over a grid in `X²`.
pub fn check_characteristic(rho: &FunctionHandle, form: &EquationForm, grid: &[(Point, Point)]) -> Result<Verdict> {
    let group = rho.codomain();
    check_pairs(group, grid, |x, y| {
        let lhs = form.g_sided(rho, x, y)?;
        let rhs = form.h(group, &rho.eval(x)?, &rho.eval(y)?)?;
        Ok((lhs, Sided::plain(group, rhs)))
    })
}

/// Checks `G(f ∘ g', (g(u), g(v))) = H(f(u), f(v))` over a grid in `U²`.
pub fn check_composite(
    f: &FunctionHandle,
    form: &EquationForm,
    pair: SectionPair,
    grid: &[(Point, Point)],
) -> Result<Verdict> {
    let group = f.codomain();
    let pulled = pullback(f, pair)?;
    check_pairs(group, grid, |u, v| {
        f.domain().check(u)?;
        f.domain().check(v)?;
        let lhs = form.g_sided(&pulled, &pair.g(u)?, &pair.g(v)?)?;
        let rhs = form.h(group, &f.eval(u)?, &f.eval(v)?)?;
        Ok((lhs, Sided::plain(group, rhs)))
    })
}

/// Result of the finite injectivity test.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InjectivityVerdict {
    pub probes: usize,
    /// Two distinct probes with the same image, and that image.
    pub collision: Option<(GroupValue, GroupValue, GroupValue)>,
}

impl InjectivityVerdict {
    pub fn holds(&self) -> bool {
        self.collision.is_none()
    }
}

/// Looks for two distinct probes `y` with equal `H(f(u0), y)` (or
/// `H(y, f(u0))`). Finding none is evidence of injectivity, not a proof.
pub fn injectivity_witness(
    f: &FunctionHandle,
    form: &EquationForm,
    u0: &Point,
    probes: &[GroupValue],
) -> Result<InjectivityVerdict> {
    if probes.is_empty() {
        return Err(Error::InvalidInput("probe set is empty".into()));
    }
    let group = f.codomain();
    let anchor = f.eval(u0)?;
    let mut images: Vec<(GroupValue, GroupValue)> = Vec::with_capacity(probes.len());
    for y in probes {
        let image = match form.fixed {
            FixedArgument::First => form.h(group, &anchor, y)?,
            FixedArgument::Second => form.h(group, y, &anchor)?,
        };
        for (seen, seen_image) in &images {
            if !group.approx_eq(seen, y)? && group.approx_eq(seen_image, &image)? {
                return Ok(InjectivityVerdict {
                    probes: probes.len(),
                    collision: Some((seen.clone(), y.clone(), image)),
                });
            }
        }
        images.push((y.clone(), image));
    }
    Ok(InjectivityVerdict {
        probes: probes.len(),
        collision: None,
    })
}

/// `|g(g'(x)) - x|` for a scalar characteristic point; zero when exact.
pub fn section_defect(pair: SectionPair, x: &Point) -> Result<f64> {
    let back = pair.g(&pair.section(x)?)?;
    Ok(match (&back, x) {
        (Point::Rational(a), Point::Rational(b)) => {
            let d = (a - b).abs();
            if d.is_zero() {
                0.0
            } else {
                rational_to_f64(&d)
            }
        }
        _ => (back.to_f64().unwrap_or(f64::NAN) - x.to_f64().unwrap_or(f64::NAN)).abs(),
    })
}
