//! Worked examples, each compared with a value computed independently here
//! from plain integer, rational or double arithmetic.

use frechet_core::algebra::{difference_weights, Group, GroupValue, Point, Repr, Semigroup};
use frechet_core::calculus::{decompose, delta, is_monomial, is_polynomial, FunctionHandle, MonomialSpec, MonomialSum};
use frechet_core::equations::{
    recover, solve, tabulate, triviality_check, verify, Candidate, Equation, Extended, Grid, VerifyOptions,
};
use frechet_core::harness::{fuzz, oracle_delta, FuzzConfig};
use frechet_core::section::{
    check_characteristic, check_composite, injectivity_witness, lift_canonical, EquationForm, FixedArgument,
    SectionPair,
};
use frechet_core::equations::EquationId;
use num_bigint::BigInt;
use num_rational::BigRational;
use std::f64::consts::PI;

fn line() -> Semigroup {
    Semigroup::real_line(Repr::Exact)
}

fn poly(coeffs: &[i64]) -> FunctionHandle {
    let sum = MonomialSum::from_power_coefficients(coeffs.iter().map(|&c| GroupValue::int(c)).collect());
    FunctionHandle::closed(line(), Group::rational(), sum).unwrap()
}

/// `Σ_i (-1)^(j-i) C(j,i) ρ(x + i y)` over `i64` with a hand-rolled binomial.
fn brute_delta(rho: impl Fn(i64) -> i64, j: i64, x: i64, y: i64) -> i64 {
    let mut c = 1i64;
    let mut total = 0;
    for i in 0..=j {
        let sign = if (j - i) % 2 == 0 { 1 } else { -1 };
        total += sign * c * rho(x + i * y);
        c = c * (j - i) / (i + 1);
    }
    total
}

fn fact(n: i64) -> i64 {
    (1..=n).product()
}

#[test]
fn delta_of_square_and_linear() {
    let square = poly(&[0, 0, 1]);
    let expected = brute_delta(|t| t * t, 2, 1, 3);
    assert_eq!(delta(&square, 2, &Point::int(1), &Point::int(3)).unwrap(), GroupValue::int(expected));
    assert_eq!(expected, fact(2) * 9);

    let five_x = poly(&[0, 5]);
    let expected = brute_delta(|t| 5 * t, 1, 2, 4);
    assert_eq!(delta(&five_x, 1, &Point::int(2), &Point::int(4)).unwrap(), GroupValue::int(expected));
}

#[test]
fn halving_mod_five_by_search() {
    let g = Group::mod_p(5, 4).unwrap();
    let b = (0..5).find(|b| (2 * b) % 5 == 1).unwrap();
    assert_eq!(
        g.divide_by_factorial(&GroupValue::Mod { p: 5, value: 1 }, 2).unwrap(),
        GroupValue::Mod { p: 5, value: b }
    );
}

#[test]
fn cube_is_a_degree_three_monomial() {
    let cube = poly(&[0, 0, 0, 1]);
    let grid: Vec<(Point, Point)> = (-4..=4).flat_map(|x| (-4..=4).map(move |y| (Point::int(x), Point::int(y)))).collect();
    for (x, y) in [(-3i64, 2i64), (1, 4), (0, -5)] {
        assert_eq!(brute_delta(|t| t.pow(3), 3, x, y), 6 * y.pow(3));
    }
    assert!(is_monomial(&cube, 3, &grid).unwrap().holds());
    // Δ_y^3 x^3 = 6 y^3 is nonzero at y = 1, so x^3 is not a 2-polynomial.
    assert_ne!(brute_delta(|t| t.pow(3), 3, 0, 1), 0);
    assert!(!is_polynomial(&cube, 2, &grid).unwrap().holds());
}

#[test]
fn shifted_square_is_not_a_monomial() {
    let rho = poly(&[1, 0, 1]);
    let lhs = brute_delta(|t| t * t + 1, 2, 0, 1);
    let rhs = fact(2) * (1 + 1);
    assert_ne!(lhs, rhs);
    let v = is_monomial(&rho, 2, &[(Point::int(0), Point::int(1))]).unwrap();
    let w = v.witness.expect("witness");
    assert_eq!(w.lhs, GroupValue::int(lhs));
    assert_eq!(w.rhs, GroupValue::int(rhs));
}

#[test]
fn decomposition_by_repeated_differences() {
    let rho = |t: i64| 3 + 2 * t + t * t;
    // Peel degrees off by hand: top coefficient from Δ^2 at 0, then Δ^1, then the value.
    let c2 = brute_delta(rho, 2, 0, 1) / fact(2);
    let after2 = |t: i64| rho(t) - c2 * t * t;
    let c1 = brute_delta(after2, 1, 0, 1);
    let c0 = after2(0);
    let got = decompose(&poly(&[3, 2, 1]), 2, &[(Point::int(1), Point::int(2)), (Point::int(-3), Point::int(5))]).unwrap();
    for (j, c) in [(0, c0), (1, c1), (2, c2)] {
        assert_eq!(got.component(j).unwrap().coefficient(), Some(&GroupValue::int(c)));
    }
}

#[test]
fn identity_mod_five_decomposes_to_its_linear_part() {
    let sum = MonomialSum::from_power_coefficients(vec![GroupValue::Mod { p: 5, value: 0 }, GroupValue::Mod { p: 5, value: 1 }]);
    let rho = FunctionHandle::closed(Semigroup::mod_p(5).unwrap(), Group::mod_p(5, 4).unwrap(), sum).unwrap();
    let grid: Vec<(Point, Point)> = (0..5).map(|x| (Point::Mod { p: 5, value: x }, Point::Mod { p: 5, value: (x * 3) % 5 })).collect();
    let got = decompose(&rho, 1, &grid).unwrap();
    // Δ_1 ρ(0) = ρ(1) - ρ(0) = 1 and ρ(0) = 0.
    let rho_at = |x: u64| x % 5;
    let c1 = (rho_at(1) + 5 - rho_at(0)) % 5;
    assert_eq!(got.component(1).unwrap().coefficient(), Some(&GroupValue::Mod { p: 5, value: c1 }));
    assert_eq!(got.component(0).unwrap().coefficient(), Some(&GroupValue::Mod { p: 5, value: 0 }));
}

#[test]
fn oracle_delta_of_square_at_zero() {
    let expected = brute_delta(|t| t * t, 1, 0, 1);
    assert_eq!(oracle_delta(&poly(&[0, 0, 1]), 1, &Point::int(0), &Point::int(1)).unwrap(), GroupValue::int(expected));
}

#[test]
fn alternating_binomials_cancel() {
    for n in 1..=6 {
        let total: BigInt = difference_weights(n).iter().sum();
        assert_eq!(total, BigInt::from(0));
    }
}

#[test]
fn doubled_log_abs_sin() {
    let x = Semigroup::non_positive(Repr::Float);
    let rho = FunctionHandle::closed(x, Group::float(1e-12).unwrap(), MonomialSum::single(MonomialSpec::power(1, GroupValue::int(2)))).unwrap();
    let f = lift_canonical(&rho, SectionPair::LogAbsSin).unwrap();
    for u in [PI / 2.0, PI / 6.0, 2.0, -1.0] {
        let expected = 2.0 * u.sin().abs().ln();
        let got = f.eval(&Point::Float(u)).unwrap().as_f64().unwrap();
        assert!((got - expected).abs() <= 1e-12, "{u}: {got} vs {expected}");
    }
    let half = SectionPair::LogAbsSin.g(&Point::Float(PI / 6.0)).unwrap().to_f64().unwrap();
    assert!((half - 0.5f64.ln()).abs() < 1e-15);
}

#[test]
fn characteristic_and_composite_counterexamples() {
    // ρ(x) = x + 1 under the degree-1 monomial form: G = Δ_y ρ(0) = y, H = ρ(y) = y + 1.
    let rho = poly(&[1, 1]);
    let v = check_characteristic(&rho, &EquationForm::monomial(1), &[(Point::int(0), Point::int(4))]).unwrap();
    let w = v.witness.expect("witness");
    assert_eq!(w.lhs, GroupValue::int((4 + 1) - (0 + 1)));
    assert_eq!(w.rhs, GroupValue::int(4 + 1));

    // f ≡ 7 against the same form through the cube pair: LHS 7 - 7, RHS 1!·7.
    let pair = SectionPair::power_root(3).unwrap();
    let f = FunctionHandle::closed(pair.u_domain(Repr::Exact), Group::rational(), MonomialSum::single(MonomialSpec::power(0, GroupValue::int(7)))).unwrap();
    let v = check_composite(&f, &EquationForm::monomial(1), pair, &[(Point::int(1), Point::int(2))]).unwrap();
    let w = v.witness.expect("witness");
    assert_eq!((w.lhs, w.rhs), (GroupValue::int(0), GroupValue::int(7)));
}

#[test]
fn injectivity_probes() {
    let f = poly(&[2, 1]);
    let probes: Vec<GroupValue> = (-3..=3).map(GroupValue::int).collect();
    for form in [EquationForm::monomial(2), EquationForm::polynomial(2)] {
        assert!(injectivity_witness(&f, &form, &Point::int(1), &probes).unwrap().holds());
    }
    let flat = EquationForm::custom(
        "flat",
        |rho: &FunctionHandle, _: &Point, _: &Point| Ok(rho.codomain().zero()),
        |g: &Group, _: &GroupValue, _: &GroupValue| Ok(g.zero()),
        FixedArgument::First,
    );
    assert!(!injectivity_witness(&f, &flat, &Point::int(1), &probes).unwrap().holds());
}

#[test]
fn square_root_pair() {
    let pair = SectionPair::power_root(2).unwrap();
    assert_eq!(pair.g(&Point::int(-3)).unwrap(), Point::int(9));
    assert_eq!(pair.section(&Point::int(9)).unwrap(), Point::int(3));
    let cube = SectionPair::power_root(3).unwrap();
    assert_eq!(cube.g(&Point::int(-2)).unwrap(), Point::int(-8));
    assert_eq!(cube.section(&Point::int(-8)).unwrap(), Point::int(-2));
}

/// Evaluates both sides of an equation at `(u, v)` through the library's
/// term list and candidate handle.
fn sides(eq: &Equation, c: &Candidate, u: Point, v: Point, opts: &VerifyOptions) -> (f64, f64) {
    let f = c.handle(eq, opts).unwrap();
    let terms = eq.terms(&u, &v, opts.mode.repr()).unwrap();
    let total = |ts: &[frechet_core::equations::Term]| {
        ts.iter()
            .map(|t| {
                let w: f64 = t.weight.to_string().parse().unwrap();
                w * f.eval(&t.point).unwrap().as_f64().unwrap()
            })
            .sum::<f64>()
    };
    (total(&terms.lhs), total(&terms.rhs))
}

#[test]
fn eq1_cube_pair_substitution() {
    let eq = Equation::eq1(1, 3).unwrap();
    let sol = solve(&eq, &MonomialSum::single(MonomialSpec::power(1, GroupValue::int(2)))).unwrap();
    let f = |u: f64| 2.0 * u.powi(3);
    let expected_lhs = f((1f64 + 8.0).cbrt()) - f(1.0);
    let expected_rhs = f(2.0);
    assert!((expected_lhs - 16.0).abs() < 1e-12 && expected_rhs == 16.0);
    let (lhs, rhs) = sides(&eq, &sol, Point::int(1), Point::int(2), &VerifyOptions::exact());
    assert!((lhs - expected_lhs).abs() < 1e-12 && (rhs - expected_rhs).abs() < 1e-12);
    let r = verify(&eq, &sol, &Grid::U(vec![(Point::int(1), Point::int(2))]), &VerifyOptions::exact()).unwrap();
    assert!(r.holds() && r.max_residual == 0.0);
}

#[test]
fn eq2_quadratic_cancels_symbolically() {
    let (a, b) = (BigRational::new(3.into(), 7.into()), BigRational::new((-5).into(), 2.into()));
    let eq = Equation::eq2(1, 2).unwrap();
    let sol = solve(
        &eq,
        &MonomialSum::from_power_coefficients(vec![GroupValue::Rational(a.clone()), GroupValue::Rational(b.clone())]),
    )
    .unwrap();
    let mut grid = Vec::new();
    for (un, vn) in [(1i64, 2i64), (-3, 5), (7, -1), (0, 4)] {
        let (u, v) = (BigRational::new(un.into(), 3.into()), BigRational::new(vn.into(), 2.into()));
        let (u2, v2) = (&u * &u, &v * &v);
        // a(1 - 2 + 1) + b(u² - 2(u² + v²) + (u² + 2v²))
        let one = BigRational::from_integer(1.into());
        let two = BigRational::from_integer(2.into());
        let residual = &a * (&one - &two + &one) + &b * (&u2 - &two * (&u2 + &v2) + (&u2 + &two * &v2));
        assert_eq!(residual, BigRational::from_integer(0.into()));
        grid.push((Point::Rational(u), Point::Rational(v)));
    }
    assert!(verify(&eq, &sol, &Grid::U(grid), &VerifyOptions::exact()).unwrap().holds());
}

#[test]
fn eq3_logarithm_identity() {
    let eq = Equation::eq3(1).unwrap();
    let sol = solve(&eq, &MonomialSum::single(MonomialSpec::power(1, GroupValue::int(1)))).unwrap();
    let opts = VerifyOptions::float(1e-9);
    for (u, v) in [(0.7f64, 2.3f64), (-1.1, 4.0), (10.0, -0.2)] {
        let arg = (u.sin() * v.sin()).abs().asin();
        let lhs = arg.sin().abs().ln() - u.sin().abs().ln();
        let rhs = v.sin().abs().ln();
        assert!((lhs - rhs).abs() < 1e-12);
        let (l, r) = sides(&eq, &sol, Point::Float(u), Point::Float(v), &opts);
        assert!((l - lhs).abs() < 1e-12 && (r - rhs).abs() < 1e-12);
    }
}

#[test]
fn shifted_power_against_eq1() {
    let eq = Equation::eq1(1, 2).unwrap();
    let f = |u: f64| u * u + 1.0;
    let table: Vec<(Point, GroupValue)> = vec![
        (Point::int(1), GroupValue::int(2)),
        (Point::Root { radicand: BigRational::from_integer(2.into()), index: 2 }, GroupValue::int(3)),
    ];
    let lhs = f(2f64.sqrt()) - f(1.0);
    let rhs = f(1.0);
    assert!((lhs - 1.0).abs() < 1e-12 && rhs == 2.0);
    let c = Candidate::Raw { table: frechet_core::calculus::Table::new(table).unwrap() };
    let r = verify(&eq, &c, &Grid::U(vec![(Point::int(1), Point::int(1))]), &VerifyOptions::exact()).unwrap();
    assert!(!r.holds());
}

#[test]
fn zero_function_solves_everything() {
    // The monomial equations take the zero multiple of a degree-n monomial.
    let zero = |eq: &Equation| {
        let sum = if eq.id().is_monomial() {
            MonomialSum::single(MonomialSpec::power(eq.n(), GroupValue::int(0)))
        } else {
            MonomialSum::default()
        };
        solve(eq, &sum).unwrap()
    };
    for eq in [Equation::eq1(2, 3).unwrap(), Equation::eq2(2, 2).unwrap()] {
        let grid = Grid::U(vec![(Point::rational(1, 2), Point::int(-3))]);
        assert!(verify(&eq, &zero(&eq), &grid, &VerifyOptions::exact()).unwrap().holds());
    }
    for eq in [Equation::eq3(2).unwrap(), Equation::eq4(2).unwrap()] {
        let grid = Grid::U(vec![(Point::Float(0.5), Point::Float(-3.0))]);
        assert!(verify(&eq, &zero(&eq), &grid, &VerifyOptions::float(1e-9)).unwrap().holds());
    }
}

#[test]
fn triviality_with_log_abs_sin() {
    let eq = Equation::eq3(1).unwrap();
    let ext = Extended {
        schema: None,
        candidate: solve(&eq, &MonomialSum::single(MonomialSpec::power(1, GroupValue::int(1)))).unwrap(),
        pi_multiples: vec![(0, GroupValue::int(0)), (1, GroupValue::int(0))],
    };
    let samples: Vec<Point> = [0.4, 2.0, PI / 2.0].into_iter().map(Point::Float).collect();
    let report = triviality_check(&eq, &ext, &samples, 1e-9).unwrap();
    assert!(!report.holds());
    // Every sample with sin v ≠ ±1 breaks 0 = 1!·ln|sin v|.
    let expected: Vec<f64> = [0.4f64, 2.0].iter().map(|v| v.sin().abs().ln()).collect();
    for v in &report.violations {
        let s = v.sample.to_f64().unwrap();
        assert!((s - PI / 2.0).abs() > 1e-9);
        let rhs = v.rhs.as_f64().unwrap();
        assert!(expected.iter().any(|e| (e - rhs).abs() < 1e-12));
    }
    assert_eq!(report.violations.len(), 2 * ext.pi_multiples.len());
}

#[test]
fn recover_fourth_power_and_doubled_log() {
    let eq = Equation::eq1(2, 2).unwrap();
    let entries: Vec<(Point, GroupValue)> = (-2..=3).map(|u: i64| (Point::int(u), GroupValue::int(u.pow(4)))).collect();
    let back = recover(&eq, &frechet_core::calculus::Table::new(entries).unwrap(), &VerifyOptions::exact()).unwrap();
    assert_eq!(back.components().len(), 1);
    assert_eq!(back.component(2).unwrap().coefficient(), Some(&GroupValue::int(1)));

    let eq = Equation::eq3(1).unwrap();
    let opts = VerifyOptions::float(1e-9);
    let entries: Vec<(Point, GroupValue)> = [PI / 2.0, 0.3, 1.0, 2.5, -0.8]
        .into_iter()
        .map(|u| (Point::Float(u), GroupValue::Float(2.0 * u.sin().abs().ln())))
        .collect();
    let back = recover(&eq, &frechet_core::calculus::Table::new(entries).unwrap(), &opts).unwrap();
    let c = back.component(1).unwrap().coefficient().unwrap().as_f64().unwrap();
    assert!((c - 2.0).abs() < 1e-9, "{c}");
    let sol = solve(&eq, &back).unwrap();
    let again = tabulate(&eq, &sol, &[Point::Float(0.3)], &opts).unwrap();
    assert!((again.entries()[0].1.as_f64().unwrap() - 2.0 * 0.3f64.sin().ln()).abs() < 1e-9);
}

#[test]
fn hundred_eq1_cases_split_evenly() {
    let mut cfg = FuzzConfig::for_equation(EquationId::Eq1, 100, 7);
    cfg.m_max = 3;
    let report = fuzz(&cfg).unwrap();
    assert_eq!((report.holds, report.fails, report.cases_run), (100, 100, 200));
    assert!(report.clean());
}
