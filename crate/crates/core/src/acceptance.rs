//! The bundled acceptance suite run by `frechet selftest` and by the
//! `acceptance` test target. Each criterion reports pass/fail together with
//! its wall-clock time against a budget.

use std::time::{Duration, Instant};

use serde::Serialize;

use crate::algebra::{Group, GroupValue, Point, Repr, Semigroup};
use crate::calculus::{decompose, delta, is_monomial, is_polynomial, FunctionHandle, MonomialSpec, MonomialSum};
use crate::equations::{
    recover, same_coefficients, solve, tabulate, triviality_check, verify, Candidate, Equation,
    Extended, Grid, VerifyOptions, DEFAULT_TOL, SCHEMA,
};
use crate::error::Result;
use crate::harness::{
    fuzz, oracle_delta, perturb_candidate, random_power_sum, random_tensor, sample_grid, Family, FuzzConfig,
    GridSpec, Lcg64,
};
use crate::section::SectionPair;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AcceptanceConfig {
    pub seed: u64,
    /// Tolerance for the arcsine criteria.
    pub arcsine_tol: f64,
}

impl Default for AcceptanceConfig {
    fn default() -> Self {
        AcceptanceConfig {
            seed: 20_240_601,
            arcsine_tol: DEFAULT_TOL,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CriterionResult {
    pub id: u32,
    pub name: &'static str,
    pub passed: bool,
    pub elapsed_ms: u128,
    pub budget_ms: Option<u128>,
    pub detail: String,
}

impl CriterionResult {
    pub fn line(&self) -> String {
        let budget = self
            .budget_ms
            .map(|b| format!(" / {b} ms"))
            .unwrap_or_default();
        format!(
            "criterion {} {:<28} {}  ({} ms{budget})  {}",
            self.id,
            self.name,
            if self.passed { "PASS" } else { "FAIL" },
            self.elapsed_ms,
            self.detail
        )
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AcceptanceReport {
    pub schema: &'static str,
    pub passed: bool,
    pub criteria: Vec<CriterionResult>,
}

fn timed(
    id: u32,
    name: &'static str,
    budget: Option<Duration>,
    body: impl FnOnce() -> Result<(bool, String)>,
) -> CriterionResult {
    let start = Instant::now();
    let outcome = body();
    let elapsed = start.elapsed();
    let (ok, detail) = match outcome {
        Ok(r) => r,
        Err(e) => (false, format!("error: {e}")),
    };
    let in_budget = budget.is_none_or(|b| elapsed <= b);
    let detail = if ok && !in_budget {
        format!("{detail}; over the time budget")
    } else {
        detail
    };
    CriterionResult {
        id,
        name,
        passed: ok && in_budget,
        elapsed_ms: elapsed.as_millis(),
        budget_ms: budget.map(|b| b.as_millis()),
        detail,
    }
}

fn secs(s: u64) -> Option<Duration> {
    Some(Duration::from_secs(s))
}

fn rational_grid(rng: &mut Lcg64, count: usize) -> Result<Vec<(Point, Point)>> {
    sample_grid(&GridSpec::RationalBox {
        max_abs: 10.0,
        max_num: 20,
        max_den: 20,
        count,
        seed: rng.next_u64(),
    })
}

fn vector_grid(rng: &mut Lcg64, dim: usize, count: usize) -> Vec<(Point, Point)> {
    let point = |rng: &mut Lcg64| Point::Vector((0..dim).map(|_| rng.rational(20, 20)).collect());
    (0..count).map(|_| (point(rng), point(rng))).collect()
}

fn mod_grid(rng: &mut Lcg64, p: u64, count: usize) -> Vec<(Point, Point)> {
    (0..count)
        .map(|_| {
            (
                Point::Mod { p, value: rng.below(p) },
                Point::Mod { p, value: rng.below(p) },
            )
        })
        .collect()
}

/// A random monomial of degree `j`: power form on the rational line, or a
/// symmetric tensor on `Q^2` / `Q^3`, with a matching grid.
fn random_monomial(rng: &mut Lcg64, j: u32, pairs: usize) -> Result<(FunctionHandle, Vec<(Point, Point)>)> {
    if rng.coin() {
        let spec = MonomialSpec::power(j, GroupValue::Rational(rng.nonzero_rational(9, 5)));
        let line = Semigroup::real_line(Repr::Exact);
        let handle = FunctionHandle::closed(line, Group::rational(), MonomialSum::single(spec))?;
        Ok((handle, rational_grid(rng, pairs)?))
    } else {
        let dim = 2 + rng.below(2) as usize;
        let spec = random_tensor(rng, j, dim);
        let handle = FunctionHandle::closed(Semigroup::rational_vector(dim)?, Group::rational(), MonomialSum::single(spec))?;
        Ok((handle, vector_grid(rng, dim, pairs)))
    }
}

fn random_sum(rng: &mut Lcg64, n: u32, pairs: usize) -> Result<(FunctionHandle, MonomialSum, Vec<(Point, Point)>)> {
    if rng.below(3) < 2 {
        let sum = random_power_sum(rng, n);
        let line = Semigroup::real_line(Repr::Exact);
        let handle = FunctionHandle::closed(line, Group::rational(), sum.clone())?;
        Ok((handle, sum, rational_grid(rng, pairs)?))
    } else {
        let dim = 2;
        let sum = MonomialSum::new((0..=n).map(|j| random_tensor(rng, j, dim)).collect())?;
        let handle = FunctionHandle::closed(Semigroup::rational_vector(dim)?, Group::rational(), sum.clone())?;
        Ok((handle, sum, vector_grid(rng, dim, pairs)))
    }
}

pub fn monomial_identity(cfg: &AcceptanceConfig) -> CriterionResult {
    timed(1, "monomial identity", secs(5), || {
        let mut rng = Lcg64::new(cfg.seed ^ 1);
        for case in 0..200 {
            let j = (case % 5) as u32;
            let (rho, grid) = random_monomial(&mut rng, j, 50)?;
            let v = is_monomial(&rho, j, &grid)?;
            if !v.holds() || v.checked != 50 {
                return Ok((false, format!("case {case} (j = {j}) fails: {:?}", v.witness)));
            }
        }
        Ok((true, "200 monomials, j <= 4, 50 pairs each".into()))
    })
}

pub fn polynomial_annihilation(cfg: &AcceptanceConfig) -> CriterionResult {
    timed(2, "polynomial annihilation", secs(5), || {
        let mut rng = Lcg64::new(cfg.seed ^ 2);
        let mut refuted = 0;
        for case in 0..200 {
            let n = (case % 5) as u32;
            let (rho, sum, grid) = random_sum(&mut rng, n, 50)?;
            if !is_polynomial(&rho, n, &grid)?.holds() {
                return Ok((false, format!("case {case}: Δ^{} does not vanish", n + 1)));
            }
            let top_nonzero = sum
                .component(n)
                .map(|c| c.is_zero(rho.codomain()).map(|z| !z))
                .transpose()?
                .unwrap_or(false);
            if n >= 1 && top_nonzero {
                if is_polynomial(&rho, n - 1, &grid)?.holds() {
                    return Ok((false, format!("case {case}: degree-{n} sum passes at n - 1")));
                }
                refuted += 1;
            }
        }
        Ok((true, format!("200 sums annihilated; {refuted} refuted one degree lower")))
    })
}

pub fn decomposition_round_trip(cfg: &AcceptanceConfig) -> CriterionResult {
    timed(3, "decomposition round-trip", secs(5), || {
        let mut rng = Lcg64::new(cfg.seed ^ 3);
        for case in 0..100 {
            let n = (case % 5) as u32;
            let (rho, sum, grid) = random_sum(&mut rng, n, 12)?;
            let got = decompose(&rho, n, &grid)?;
            if !components_agree(&sum, &got, &grid, rho.codomain())? {
                return Ok((false, format!("rational case {case} differs")));
            }
        }
        let p = 101;
        let z = Semigroup::mod_p(p)?;
        let group = Group::mod_p(p, 6)?;
        for case in 0..100 {
            let n = (case % 5) as u32;
            let coeffs = (0..=n).map(|_| GroupValue::Mod { p, value: rng.below(p) }).collect();
            let sum = MonomialSum::from_power_coefficients(coeffs);
            let rho = FunctionHandle::closed(z, group.clone(), sum.clone())?;
            let grid = mod_grid(&mut rng, p, 12);
            let got = decompose(&rho, n, &grid)?;
            if !components_agree(&sum, &got, &grid, &group)? {
                return Ok((false, format!("mod-{p} case {case} differs")));
            }
        }
        Ok((true, "100 rational and 100 mod-101 cases".into()))
    })
}

fn components_agree(a: &MonomialSum, b: &MonomialSum, grid: &[(Point, Point)], group: &Group) -> Result<bool> {
    let top = a.max_degree().unwrap_or(0).max(b.max_degree().unwrap_or(0));
    for j in 0..=top {
        for (x, y) in grid {
            for p in [x, y] {
                let eval = |s: &MonomialSum| match s.component(j) {
                    Some(c) => c.evaluate(p, group),
                    None => Ok(group.zero()),
                };
                if eval(a)? != eval(b)? {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

fn random_coeffs(rng: &mut Lcg64, eq: &Equation) -> MonomialSum {
    if eq.id().is_monomial() {
        MonomialSum::single(MonomialSpec::power(eq.n(), GroupValue::Rational(rng.nonzero_rational(9, 4))))
    } else {
        random_power_sum(rng, eq.n())
    }
}

pub fn radical_equations(cfg: &AcceptanceConfig) -> CriterionResult {
    timed(4, "radical equations", secs(30), || {
        let mut rng = Lcg64::new(cfg.seed ^ 4);
        let mut worst_float: f64 = 0.0;
        let mut runs = 0;
        for n in 1..=3 {
            for m in 2..=4 {
                for _ in 0..50 {
                    for eq in [Equation::eq1(n, m)?, Equation::eq2(n, m)?] {
                        let coeffs = random_coeffs(&mut rng, &eq);
                        let sol = solve(&eq, &coeffs)?;
                        let grid = Grid::U(sample_grid(&GridSpec::RationalBox {
                            max_abs: 10.0,
                            max_num: 20,
                            max_den: 20,
                            count: 8,
                            seed: rng.next_u64(),
                        })?);
                        let exact = verify(&eq, &sol, &grid, &VerifyOptions::exact())?;
                        if !exact.holds() || exact.max_residual != 0.0 {
                            return Ok((false, format!("{eq}: exact verification fails: {:?}", exact.witness)));
                        }

                        let mut points = vec![Point::int(0)];
                        while points.len() < (n as usize) + 4 {
                            let u = Point::Rational(rng.rational(20, 20));
                            if !points.contains(&u) {
                                points.push(u);
                            }
                        }
                        let table = tabulate(&eq, &sol, &points, &VerifyOptions::exact())?;
                        let back = recover(&eq, &table, &VerifyOptions::exact())?;
                        if !same_coefficients(&back, &coeffs, 0.0) {
                            return Ok((false, format!("{eq}: recover returned different coefficients")));
                        }

                        let float_grid = Grid::U(sample_grid(&GridSpec::FloatBoxAvoidingKpi {
                            max_abs: 10.0,
                            min_gap: 0.0,
                            count: 8,
                            seed: rng.next_u64(),
                        })?);
                        let direct = verify(&eq, &sol, &float_grid, &VerifyOptions::float(DEFAULT_TOL))?;
                        worst_float = worst_float.max(direct.max_residual);
                        if !direct.holds() {
                            return Ok((false, format!("{eq}: float residual {}", direct.max_residual)));
                        }
                        runs += 1;
                    }
                }
            }
        }
        Ok((
            true,
            format!("{runs} solutions exact and recovered; max float residual {worst_float:.2e}"),
        ))
    })
}

pub fn arcsine_equations(cfg: &AcceptanceConfig) -> CriterionResult {
    timed(5, "arcsine equations", secs(10), || {
        let tol = cfg.arcsine_tol;
        let opts = VerifyOptions::float(tol);
        let mut rng = Lcg64::new(cfg.seed ^ 5);
        let mut worst: f64 = 0.0;
        let mut refuted = 0;
        for n in 1..=3 {
            for eq in [Equation::eq3(n)?, Equation::eq4(n)?] {
                for _ in 0..5 {
                    let sol = solve(&eq, &random_coeffs(&mut rng, &eq))?;
                    let pairs = sample_grid(&GridSpec::FloatBoxAvoidingKpi {
                        max_abs: 20.0,
                        min_gap: 1e-3,
                        count: 200,
                        seed: rng.next_u64(),
                    })?;
                    let report = verify(&eq, &sol, &Grid::U(pairs.clone()), &opts)?;
                    worst = worst.max(report.max_residual);
                    if !report.holds() {
                        return Ok((false, format!("{eq}: residual {:.2e} exceeds {tol:e}", report.max_residual)));
                    }
                    let shift = if rng.coin() { 1e-5 } else { -1e-5 };
                    let bad = perturb_candidate(&eq, &sol, &pairs, &opts, &GroupValue::Float(shift), &mut rng)?;
                    if verify(&eq, &bad, &Grid::U(pairs), &opts)?.holds() {
                        return Ok((false, format!("{eq}: perturbation by {shift} not refuted")));
                    }
                    refuted += 1;
                }
            }
        }
        Ok((true, format!("max residual {worst:.2e}; {refuted} perturbations refuted")))
    })
}

pub fn maximal_domain(cfg: &AcceptanceConfig) -> CriterionResult {
    timed(6, "maximal-domain triviality", secs(2), || {
        let tol = cfg.arcsine_tol;
        let mut rng = Lcg64::new(cfg.seed ^ 6);
        let samples: Vec<Point> = sample_grid(&GridSpec::FloatBoxAvoidingKpi {
            max_abs: 20.0,
            min_gap: 1e-3,
            count: 10,
            seed: rng.next_u64(),
        })?
        .into_iter()
        .flat_map(|(a, b)| [a, b])
        .collect();
        let extend = |coeffs: MonomialSum| Extended {
            schema: None,
            candidate: Candidate::Canonical {
                pair: SectionPair::LogAbsSin,
                coeffs,
            },
            pi_multiples: (-2..=2).map(|k| (k, GroupValue::int(0))).collect(),
        };
        let mut flagged = 0;
        for n in 1..=3 {
            for eq in [Equation::eq3(n)?, Equation::eq4(n)?] {
                let zero = triviality_check(&eq, &extend(MonomialSum::default()), &samples, tol)?;
                if !zero.holds() {
                    return Ok((false, format!("{eq}: zero function flagged")));
                }
                for _ in 0..10 {
                    let mut coeffs = random_coeffs(&mut rng, &eq);
                    if coeffs.without_zero_components(&Group::rational())?.components().is_empty() {
                        coeffs = MonomialSum::single(MonomialSpec::power(0, GroupValue::int(1)));
                    }
                    let r = triviality_check(&eq, &extend(coeffs), &samples, tol)?;
                    if r.holds() {
                        return Ok((false, format!("{eq}: nonzero candidate not flagged")));
                    }
                    flagged += 1;
                }
            }
        }
        Ok((true, format!("zero passes; {flagged} nonzero candidates flagged")))
    })
}

pub fn oracle_equivalence(cfg: &AcceptanceConfig) -> CriterionResult {
    timed(7, "oracle equivalence", secs(2), || {
        let mut rng = Lcg64::new(cfg.seed ^ 7);
        let p = 101;
        for case in 0..1000 {
            let j = (case % 7) as u32;
            let degree = rng.below(8) as u32;
            let (rho, x, y) = match case % 3 {
                0 | 1 => {
                    let line = Semigroup::real_line(Repr::Exact);
                    let rho = FunctionHandle::closed(line, Group::rational(), random_power_sum(&mut rng, degree))?;
                    let (x, y) = rational_grid(&mut rng, 1)?.remove(0);
                    (rho, x, y)
                }
                _ => {
                    let coeffs = (0..=degree).map(|_| GroupValue::Mod { p, value: rng.below(p) }).collect();
                    let rho = FunctionHandle::closed(
                        Semigroup::mod_p(p)?,
                        Group::mod_p(p, 6)?,
                        MonomialSum::from_power_coefficients(coeffs),
                    )?;
                    let (x, y) = mod_grid(&mut rng, p, 1).remove(0);
                    (rho, x, y)
                }
            };
            if delta(&rho, j, &x, &y)? != oracle_delta(&rho, j, &x, &y)? {
                return Ok((false, format!("case {case} (j = {j}) differs at x = {x}, y = {y}")));
            }
        }
        Ok((true, "1000 cases, j <= 6".into()))
    })
}

pub fn fuzz_determinism(cfg: &AcceptanceConfig) -> CriterionResult {
    timed(8, "fuzz determinism", None, || {
        for family in [Family::Radical, Family::Arcsine] {
            let mut fc = FuzzConfig::new(family, 20, cfg.seed);
            fc.tol = if family == Family::Arcsine { cfg.arcsine_tol } else { DEFAULT_TOL };
            let first = serde_json::to_string(&fuzz(&fc)?)?;
            let second = serde_json::to_string(&fuzz(&fc)?)?;
            if first != second {
                return Ok((false, format!("{family:?} reports differ")));
            }
        }
        Ok((true, "two runs per family are byte-identical".into()))
    })
}

pub fn run_all(cfg: &AcceptanceConfig) -> AcceptanceReport {
    let criteria = vec![
        monomial_identity(cfg),
        polynomial_annihilation(cfg),
        decomposition_round_trip(cfg),
        radical_equations(cfg),
        arcsine_equations(cfg),
        maximal_domain(cfg),
        oracle_equivalence(cfg),
        fuzz_determinism(cfg),
    ];
    AcceptanceReport {
        schema: SCHEMA,
        passed: criteria.iter().all(|c| c.passed),
        criteria,
    }
}
