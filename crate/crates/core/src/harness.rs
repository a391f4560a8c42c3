//! Seeded grid samplers, random solution/non-solution fuzzing, and an
//! independent difference oracle.
//!
//! All randomness comes from [`Lcg64`]:
//!
//! ```text
//! state' = 6364136223846793005 * state + 1442695040888963407   (mod 2^64)
//! ```
//!
//! `next_u64` advances and returns the new state. Integers in `[0, n)` are
//! `((state' >> 32) * n) >> 32`, doubles in `[0, 1)` are
//! `(state' >> 11) / 2^53`. Case `i` of a fuzz run uses a generator seeded
//! with `seed + (i + 1) * 0x9E3779B97F4A7C15`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::algebra::{
    factorial, rational, GroupValue, Point, PointKey, Repr, Semigroup, SemigroupKind, SemigroupSpec,
};
use crate::calculus::{distance_to_pi_multiple, FunctionHandle, MonomialSpec, MonomialSum};
use crate::equations::{
    required_points, solve, tabulate, verify, Candidate, Equation, EquationId, Grid, Mode, Outcome, ReportWitness,
    VerifyOptions, DEFAULT_TOL, SCHEMA,
};
use crate::error::{Error, Result};

const LCG_MUL: u64 = 6364136223846793005;
const LCG_INC: u64 = 1442695040888963407;
const CASE_STRIDE: u64 = 0x9E37_79B9_7F4A_7C15;

/// The 64-bit linear congruential generator described in the module docs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Lcg64 {
    state: u64,
}

impl Lcg64 {
    pub fn new(seed: u64) -> Self {
        Lcg64 { state: seed }
    }

    /// Generator for case `index` of a run seeded with `seed`.
    pub fn for_case(seed: u64, index: u64) -> Self {
        Lcg64::new(seed.wrapping_add((index + 1).wrapping_mul(CASE_STRIDE)))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_mul(LCG_MUL).wrapping_add(LCG_INC);
        self.state
    }

    /// Uniform in `[0, n)`; `n` must be below `2^32`.
    pub fn below(&mut self, n: u64) -> u64 {
        debug_assert!(n > 0 && n <= u64::from(u32::MAX));
        ((self.next_u64() >> 32) * n) >> 32
    }

    /// Uniform in `[lo, hi]`.
    pub fn range_i64(&mut self, lo: i64, hi: i64) -> i64 {
        lo + self.below((hi - lo + 1) as u64) as i64
    }

    pub fn unit_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    pub fn coin(&mut self) -> bool {
        self.below(2) == 1
    }

    /// `num / den` with `1 <= den <= max_den` and `|num| <= max_num`.
    pub fn rational(&mut self, max_num: i64, max_den: i64) -> BigRational {
        let den = self.range_i64(1, max_den);
        let num = self.range_i64(-max_num, max_num);
        rational(num, den)
    }

    pub fn nonzero_rational(&mut self, max_num: i64, max_den: i64) -> BigRational {
        let den = self.range_i64(1, max_den);
        let mut num = self.range_i64(1, max_num);
        if self.coin() {
            num = -num;
        }
        rational(num, den)
    }
}

fn default_max_abs() -> f64 {
    10.0
}

fn default_max_num() -> i64 {
    20
}

fn default_max_den() -> i64 {
    20
}

fn default_float_abs() -> f64 {
    20.0
}

fn default_gap() -> f64 {
    1e-3
}

/// How to draw a grid of pairs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum GridSpec {
    /// Rationals `num/den` with `|num|, den <= 20` and `|·| <= max_abs`.
    RationalBox {
        #[serde(default = "default_max_abs")]
        max_abs: f64,
        #[serde(default = "default_max_num")]
        max_num: i64,
        #[serde(default = "default_max_den")]
        max_den: i64,
        count: usize,
        seed: u64,
    },
    /// Doubles with `|u| <= max_abs`, each at least `min_gap` from `πZ`.
    FloatBoxAvoidingKpi {
        #[serde(default = "default_float_abs")]
        max_abs: f64,
        #[serde(default = "default_gap")]
        min_gap: f64,
        count: usize,
        seed: u64,
    },
    /// Points of a scalar semigroup, drawn like a rational box and folded
    /// onto its sign.
    CharacteristicBox {
        target: SemigroupSpec,
        #[serde(default = "default_max_abs")]
        max_abs: f64,
        #[serde(default = "default_max_num")]
        max_num: i64,
        #[serde(default = "default_max_den")]
        max_den: i64,
        count: usize,
        seed: u64,
    },
}

fn check_rational_bounds(max_abs: f64, max_num: i64, max_den: i64) -> Result<()> {
    if !(max_abs.is_finite() && max_abs >= 0.0) || max_num < 0 || max_den < 1 {
        return Err(Error::InvalidSpec(format!(
            "rational box needs max_abs >= 0, max_num >= 0, max_den >= 1 (got {max_abs}, {max_num}, {max_den})"
        )));
    }
    Ok(())
}

fn draw_rational(rng: &mut Lcg64, max_abs: f64, max_num: i64, max_den: i64) -> BigRational {
    let den = rng.range_i64(1, max_den);
    let cap = max_num.min((max_abs * den as f64).floor() as i64);
    let num = rng.range_i64(-cap, cap);
    rational(num, den)
}

/// Draws `count` pairs deterministically from `spec`.
pub fn sample_grid(spec: &GridSpec) -> Result<Vec<(Point, Point)>> {
    match spec {
        GridSpec::RationalBox {
            max_abs,
            max_num,
            max_den,
            count,
            seed,
        } => {
            check_rational_bounds(*max_abs, *max_num, *max_den)?;
            let mut rng = Lcg64::new(*seed);
            Ok((0..*count)
                .map(|_| {
                    let u = draw_rational(&mut rng, *max_abs, *max_num, *max_den);
                    let v = draw_rational(&mut rng, *max_abs, *max_num, *max_den);
                    (Point::Rational(u), Point::Rational(v))
                })
                .collect())
        }
        GridSpec::FloatBoxAvoidingKpi {
            max_abs,
            min_gap,
            count,
            seed,
        } => {
            if !(max_abs.is_finite() && *max_abs > 0.0 && min_gap.is_finite() && *min_gap >= 0.0) {
                return Err(Error::InvalidSpec(format!(
                    "float box needs max_abs > 0 and min_gap >= 0 (got {max_abs}, {min_gap})"
                )));
            }
            // Points exist iff some u in [-max_abs, max_abs] is min_gap away from πZ.
            let best = if *max_abs >= std::f64::consts::FRAC_PI_2 {
                std::f64::consts::FRAC_PI_2
            } else {
                *max_abs
            };
            if best <= *min_gap {
                return Err(Error::InvalidSpec(format!(
                    "no point of |u| <= {max_abs} is {min_gap} away from every kπ"
                )));
            }
            let mut rng = Lcg64::new(*seed);
            let mut draw = || -> Result<Point> {
                for _ in 0..10_000 {
                    let u = (2.0 * rng.unit_f64() - 1.0) * max_abs;
                    if distance_to_pi_multiple(u) >= *min_gap {
                        return Ok(Point::Float(u));
                    }
                }
                Err(Error::InvalidSpec("float box rejected 10000 draws in a row".into()))
            };
            (0..*count).map(|_| Ok((draw()?, draw()?))).collect()
        }
        GridSpec::CharacteristicBox {
            target,
            max_abs,
            max_num,
            max_den,
            count,
            seed,
        } => {
            check_rational_bounds(*max_abs, *max_num, *max_den)?;
            let sg = Semigroup::try_from(target).map_err(|e| Error::InvalidSpec(e.to_string()))?;
            let fold = |q: BigRational| -> BigRational {
                match sg.kind() {
                    SemigroupKind::NonNegative => q.abs(),
                    SemigroupKind::NonPositive => -q.abs(),
                    _ => q,
                }
            };
            if !sg.is_scalar() || matches!(sg.kind(), SemigroupKind::ModP { .. }) {
                return Err(Error::InvalidSpec(format!("{} is not a real semigroup", sg.name())));
            }
            let mut rng = Lcg64::new(*seed);
            let mut draw = || {
                let q = fold(draw_rational(&mut rng, *max_abs, *max_num, *max_den));
                match sg.repr() {
                    Repr::Exact => Point::Rational(q),
                    Repr::Float => Point::Rational(q).to_float().expect("scalar point"),
                }
            };
            Ok((0..*count).map(|_| (draw(), draw())).collect())
        }
    }
}

/// Pairs of points of any semigroup: a characteristic box on the real
/// ones, uniform residues mod p, and vectors with small rational entries.
pub fn semigroup_grid(sg: &Semigroup, count: usize, seed: u64) -> Result<Vec<(Point, Point)>> {
    let mut rng = Lcg64::new(seed);
    let draw: Box<dyn Fn(&mut Lcg64) -> Point> = match sg.kind() {
        SemigroupKind::ModP { p } => Box::new(move |rng| Point::Mod { p, value: rng.below(p) }),
        SemigroupKind::RationalVector { dim } => Box::new(move |rng| {
            Point::Vector(
                (0..dim)
                    .map(|_| draw_rational(rng, default_max_abs(), default_max_num(), default_max_den()))
                    .collect(),
            )
        }),
        _ => {
            return sample_grid(&GridSpec::CharacteristicBox {
                target: SemigroupSpec::from(sg),
                max_abs: default_max_abs(),
                max_num: default_max_num(),
                max_den: default_max_den(),
                count,
                seed,
            })
        }
    };
    Ok((0..count).map(|_| (draw(&mut rng), draw(&mut rng))).collect())
}

/// The grid used when none is given: rational for the radical equations,
/// `πZ`-avoiding doubles for the arcsine ones.
pub fn default_grid(eq: &Equation, count: usize, seed: u64) -> Result<Grid> {
    let spec = if eq.is_radical() {
        GridSpec::RationalBox {
            max_abs: default_max_abs(),
            max_num: default_max_num(),
            max_den: default_max_den(),
            count,
            seed,
        }
    } else {
        GridSpec::FloatBoxAvoidingKpi {
            max_abs: default_float_abs(),
            min_gap: default_gap(),
            count,
            seed,
        }
    };
    Ok(Grid::U(sample_grid(&spec)?))
}

/// `Σ c_j x^j` with random rational coefficients for `j = 0..=n`; each
/// coefficient is zero with probability 1/4.
pub fn random_power_sum(rng: &mut Lcg64, n: u32) -> MonomialSum {
    let coefficients = (0..=n)
        .map(|_| {
            if rng.below(4) == 0 {
                GroupValue::Rational(BigRational::zero())
            } else {
                GroupValue::Rational(rng.nonzero_rational(9, 4))
            }
        })
        .collect();
    MonomialSum::from_power_coefficients(coefficients)
}

/// A symmetric degree-`j` tensor over `Q^dim` with random entries.
pub fn random_tensor(rng: &mut Lcg64, j: u32, dim: usize) -> MonomialSpec {
    let mut cache = std::collections::HashMap::new();
    MonomialSpec::symmetric_tensor(j, dim, |idx| {
        cache
            .entry(idx.to_vec())
            .or_insert_with(|| rng.rational(6, 3))
            .clone()
    })
    .expect("dimension is positive")
}

/// `Δ_y^j ρ(x)` recomputed independently: terms are summed from `i = j`
/// down to `0`, binomials come from factorials, and `x + i·y` is formed as
/// `x + (i·y)`.
pub fn oracle_delta(rho: &FunctionHandle, j: u32, x: &Point, y: &Point) -> Result<GroupValue> {
    let sg = rho.semigroup()?;
    let group = rho.codomain();
    let mut acc = group.zero();
    for i in (0..=j).rev() {
        let binom = factorial(j) / (factorial(i) * factorial(j - i));
        let weight = if (j - i) % 2 == 0 { binom } else { -binom };
        let point = sg.add(x, &sg.times(u64::from(i), y)?)?;
        acc = group.add(&acc, &group.scale(&weight, &rho.eval(&point)?)?)?;
    }
    Ok(acc)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Radical,
    Arcsine,
}

impl std::str::FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "radical" => Ok(Family::Radical),
            "arcsine" => Ok(Family::Arcsine),
            other => Err(Error::InvalidParameter(format!("unknown family {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FuzzConfig {
    pub family: Family,
    pub n_min: u32,
    pub n_max: u32,
    pub m_min: u32,
    pub m_max: u32,
    pub cases: usize,
    pub seed: u64,
    /// Float tolerance for the arcsine equations.
    pub tol: f64,
    /// Grid pairs per case.
    pub pairs: usize,
    /// Restricts the family to one of its two equations.
    pub only: Option<EquationId>,
}

impl FuzzConfig {
    pub fn new(family: Family, cases: usize, seed: u64) -> Self {
        FuzzConfig {
            family,
            n_min: 1,
            n_max: 3,
            m_min: 2,
            m_max: 4,
            cases,
            seed,
            tol: DEFAULT_TOL,
            pairs: 6,
            only: None,
        }
    }

    /// A configuration for a single equation; its family follows from it.
    pub fn for_equation(id: EquationId, cases: usize, seed: u64) -> Self {
        let family = if id.is_radical() { Family::Radical } else { Family::Arcsine };
        FuzzConfig {
            only: Some(id),
            ..FuzzConfig::new(family, cases, seed)
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n_min == 0 || self.n_min > self.n_max || self.n_max > 6 {
            return Err(Error::InvalidParameter(format!(
                "n range {}..={} must lie in 1..=6",
                self.n_min, self.n_max
            )));
        }
        if self.family == Family::Radical && (self.m_min < 2 || self.m_min > self.m_max || self.m_max > 6) {
            return Err(Error::InvalidParameter(format!(
                "m range {}..={} must lie in 2..=6",
                self.m_min, self.m_max
            )));
        }
        if let Some(id) = self.only {
            if id.is_radical() != (self.family == Family::Radical) {
                return Err(Error::InvalidParameter(format!("{} is not in the {:?} family", id.name(), self.family)));
            }
        }
        if self.pairs == 0 {
            return Err(Error::InvalidParameter("pairs per case must be positive".into()));
        }
        if !(self.tol.is_finite() && self.tol > 0.0) {
            return Err(Error::InvalidParameter(format!("tol must be positive, got {}", self.tol)));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CaseKind {
    Solution,
    Perturbation,
}

/// A case whose outcome differed from the expected one.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CaseRecord {
    pub case: usize,
    pub kind: CaseKind,
    pub equation: String,
    pub expected: Outcome,
    pub observed: Option<Outcome>,
    pub error: Option<String>,
    pub witness: Option<ReportWitness>,
    pub candidate: serde_json::Value,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FuzzReport {
    pub schema: &'static str,
    pub family: Family,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub equation: Option<EquationId>,
    pub seed: u64,
    /// Two per case: the solution and its perturbation.
    pub cases_run: usize,
    pub holds: usize,
    /// Includes runs that ended in an error.
    pub fails: usize,
    pub unexpected: Vec<CaseRecord>,
}

impl FuzzReport {
    pub fn clean(&self) -> bool {
        self.unexpected.is_empty()
    }
}

struct CaseSetup {
    eq: Equation,
    candidate: Candidate,
    grid: Vec<(Point, Point)>,
    opts: VerifyOptions,
}

fn setup_case(cfg: &FuzzConfig, rng: &mut Lcg64) -> Result<CaseSetup> {
    let n = rng.range_i64(i64::from(cfg.n_min), i64::from(cfg.n_max)) as u32;
    let coin = rng.coin();
    let monomial = cfg.only.map_or(coin, EquationId::is_monomial);
    let (eq, opts, spec) = match cfg.family {
        Family::Radical => {
            let m = rng.range_i64(i64::from(cfg.m_min), i64::from(cfg.m_max)) as u32;
            let id = if monomial { EquationId::Eq1 } else { EquationId::Eq2 };
            let spec = GridSpec::RationalBox {
                max_abs: 3.0,
                max_num: 6,
                max_den: 4,
                count: cfg.pairs,
                seed: rng.next_u64(),
            };
            (Equation::new(id, n, Some(m))?, VerifyOptions::exact(), spec)
        }
        Family::Arcsine => {
            let id = if monomial { EquationId::Eq3 } else { EquationId::Eq4 };
            let spec = GridSpec::FloatBoxAvoidingKpi {
                max_abs: default_float_abs(),
                min_gap: default_gap(),
                count: cfg.pairs,
                seed: rng.next_u64(),
            };
            (Equation::new(id, n, None)?, VerifyOptions::float(cfg.tol), spec)
        }
    };
    let coeffs = if monomial {
        MonomialSum::single(MonomialSpec::power(n, GroupValue::Rational(rng.nonzero_rational(9, 4))))
    } else {
        random_power_sum(rng, n)
    };
    Ok(CaseSetup {
        candidate: solve(&eq, &coeffs)?,
        grid: sample_grid(&spec)?,
        eq,
        opts,
    })
}

/// Tabulates `candidate` at every point `grid` needs and moves one value by
/// `delta`. The target is drawn among points whose net weight in some pair
/// makes the change visible: nonzero in exact mode, and in float mode at
/// least ten times the relative threshold of that pair.
pub fn perturb_candidate(
    eq: &Equation,
    candidate: &Candidate,
    grid: &[(Point, Point)],
    opts: &VerifyOptions,
    delta: &GroupValue,
    rng: &mut Lcg64,
) -> Result<Candidate> {
    let size = delta.as_f64().map(f64::abs).unwrap_or(0.0);
    if !(size > 0.0) {
        return Err(Error::InvalidParameter(format!("perturbation of size {delta} would not change anything")));
    }
    let points = required_points(eq, grid, opts.mode)?;
    let table = tabulate(eq, candidate, &points, opts)?;
    let f = candidate.handle(eq, opts)?;

    let mut visible: Vec<PointKey> = Vec::new();
    for (u, v) in grid {
        let terms = eq.terms(u, v, opts.mode.repr())?;
        let largest = terms
            .lhs
            .iter()
            .chain(&terms.rhs)
            .map(|t| f.eval(&t.point).map(|y| y.as_f64().map(f64::abs).unwrap_or(0.0)))
            .collect::<Result<Vec<f64>>>()?
            .into_iter()
            .fold(1.0, f64::max);
        for (point, weight) in terms.net_weights() {
            let w = weight.abs();
            let seen = w > BigInt::zero()
                && match opts.mode {
                    Mode::Exact => true,
                    Mode::Float => w.to_f64().unwrap_or(f64::INFINITY) * size >= 10.0 * opts.tol * largest,
                };
            if seen && !visible.contains(&point.key()) {
                visible.push(point.key());
            }
        }
    }
    if visible.is_empty() {
        return Err(Error::InvalidInput("no table entry can be perturbed visibly".into()));
    }
    let target = &visible[rng.below(visible.len() as u64) as usize];
    let index = table
        .entries()
        .iter()
        .position(|(p, _)| p.key() == *target)
        .expect("tabulated at every required point");
    let group = opts.codomain()?;
    let moved = group.add(&table.entries()[index].1, &group.coerce(delta)?)?;
    Ok(Candidate::Raw {
        table: table.with_value(index, moved),
    })
}

fn perturb(setup: &CaseSetup, rng: &mut Lcg64) -> Result<Candidate> {
    let delta = match setup.opts.mode {
        Mode::Exact => {
            let magnitude = if rng.coin() { rational(1, 1) } else { rational(1, 2) };
            GroupValue::Rational(if rng.coin() { magnitude } else { -magnitude })
        }
        Mode::Float => {
            let magnitude = 1e4 * setup.opts.tol;
            GroupValue::Float(if rng.coin() { magnitude } else { -magnitude })
        }
    };
    perturb_candidate(&setup.eq, &setup.candidate, &setup.grid, &setup.opts, &delta, rng)
}

/// Runs `cfg.cases` cases; each checks one random canonical solution
/// (expected to hold) and one perturbed copy of it (expected to fail).
pub fn fuzz(cfg: &FuzzConfig) -> Result<FuzzReport> {
    cfg.validate()?;
    let mut report = FuzzReport {
        schema: SCHEMA,
        family: cfg.family,
        equation: cfg.only,
        seed: cfg.seed,
        cases_run: 0,
        holds: 0,
        fails: 0,
        unexpected: Vec::new(),
    };
    for case in 0..cfg.cases {
        let mut rng = Lcg64::for_case(cfg.seed, case as u64);
        let setup = match setup_case(cfg, &mut rng) {
            Ok(s) => s,
            Err(e) => {
                for kind in [CaseKind::Solution, CaseKind::Perturbation] {
                    report.cases_run += 1;
                    report.fails += 1;
                    report.unexpected.push(CaseRecord {
                        case,
                        kind,
                        equation: String::new(),
                        expected: if kind == CaseKind::Solution { Outcome::Holds } else { Outcome::Fails },
                        observed: None,
                        error: Some(e.to_string()),
                        witness: None,
                        candidate: serde_json::Value::Null,
                    });
                }
                continue;
            }
        };
        let perturbed = perturb(&setup, &mut rng);
        let runs = [
            (CaseKind::Solution, Outcome::Holds, Ok(setup.candidate.clone())),
            (CaseKind::Perturbation, Outcome::Fails, perturbed),
        ];
        for (kind, expected, candidate) in runs {
            report.cases_run += 1;
            let result = candidate
                .and_then(|c| verify(&setup.eq, &c, &Grid::U(setup.grid.clone()), &setup.opts).map(|r| (c, r)));
            match result {
                Ok((c, r)) => {
                    let observed = r.verdict;
                    if observed == Outcome::Holds {
                        report.holds += 1;
                    } else {
                        report.fails += 1;
                    }
                    if observed != expected {
                        report.unexpected.push(CaseRecord {
                            case,
                            kind,
                            equation: setup.eq.to_string(),
                            expected,
                            observed: Some(observed),
                            error: None,
                            witness: r.witness,
                            candidate: serde_json::to_value(&c)?,
                        });
                    }
                }
                Err(e) => {
                    report.fails += 1;
                    report.unexpected.push(CaseRecord {
                        case,
                        kind,
                        equation: setup.eq.to_string(),
                        expected,
                        observed: None,
                        error: Some(e.to_string()),
                        witness: None,
                        candidate: serde_json::to_value(&setup.candidate)?,
                    });
                }
            }
        }
    }
    Ok(report)
}
