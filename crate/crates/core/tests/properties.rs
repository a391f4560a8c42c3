use frechet_core::algebra::{Group, GroupValue, Point, Repr, Semigroup};
use frechet_core::calculus::{decompose, delta, is_monomial, is_polynomial, FunctionHandle, MonomialSpec, MonomialSum};
use frechet_core::equations::{
    recover, required_points, same_coefficients, solve, tabulate, verify, Candidate, Equation, Grid, Mode,
    VerifyOptions,
};
use frechet_core::harness::{
    fuzz, oracle_delta, perturb_candidate, random_tensor, sample_grid, Family, FuzzConfig, GridSpec, Lcg64,
};
use frechet_core::section::{check_characteristic, check_composite, lift_canonical, section_defect, EquationForm, SectionPair};
use proptest::prelude::*;

fn q() -> impl Strategy<Value = (i64, i64)> {
    (-20i64..=20, 1i64..=6)
}

fn point((n, d): (i64, i64)) -> Point {
    Point::rational(n, d)
}

fn coeffs(max_degree: usize) -> impl Strategy<Value = Vec<(i64, i64)>> {
    prop::collection::vec((-9i64..=9, 1i64..=4), 1..=max_degree + 1)
}

fn power_sum(c: &[(i64, i64)]) -> MonomialSum {
    MonomialSum::from_power_coefficients(c.iter().map(|&(n, d)| GroupValue::rational(n, d)).collect())
}

fn on_line(sum: MonomialSum) -> FunctionHandle {
    FunctionHandle::closed(Semigroup::real_line(Repr::Exact), Group::rational(), sum).unwrap()
}

fn pairs(raw: &[((i64, i64), (i64, i64))]) -> Vec<(Point, Point)> {
    raw.iter().map(|&(x, y)| (point(x), point(y))).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rational_group_laws(a in q(), b in q(), c in q(), k in 0u32..=6) {
        let g = Group::rational();
        let (a, b, c) = (GroupValue::rational(a.0, a.1), GroupValue::rational(b.0, b.1), GroupValue::rational(c.0, c.1));
        let ab_c = g.add(&g.add(&a, &b).unwrap(), &c).unwrap();
        let a_bc = g.add(&a, &g.add(&b, &c).unwrap()).unwrap();
        prop_assert_eq!(ab_c, a_bc);
        prop_assert_eq!(g.add(&a, &b).unwrap(), g.add(&b, &a).unwrap());
        prop_assert_eq!(g.add(&a, &g.zero()).unwrap(), a.clone());
        prop_assert!(g.is_zero(&g.add(&a, &g.neg(&a).unwrap()).unwrap()).unwrap());
        let back = g.factorial_multiple(&g.divide_by_factorial(&a, k).unwrap(), k).unwrap();
        prop_assert_eq!(back, a);
    }

    #[test]
    fn mod_p_group_laws(p in prop::sample::select(vec![7u64, 11, 13, 101]), a in 0u64..1000, b in 0u64..1000, k in 0u32..=6) {
        let g = Group::mod_p(p, 6).unwrap();
        let (a, b) = (GroupValue::Mod { p, value: a % p }, GroupValue::Mod { p, value: b % p });
        prop_assert_eq!(g.add(&a, &b).unwrap(), g.add(&b, &a).unwrap());
        prop_assert!(g.is_zero(&g.add(&a, &g.neg(&a).unwrap()).unwrap()).unwrap());
        let back = g.factorial_multiple(&g.divide_by_factorial(&a, k).unwrap(), k).unwrap();
        prop_assert_eq!(back, a);
    }

    #[test]
    fn float_group_laws(a in -1e6f64..1e6, b in -1e6f64..1e6, c in -1e6f64..1e6, k in 0u32..=6) {
        let g = Group::float(1e-12).unwrap();
        let (a, b, c) = (GroupValue::Float(a), GroupValue::Float(b), GroupValue::Float(c));
        let ab_c = g.add(&g.add(&a, &b).unwrap(), &c).unwrap();
        let a_bc = g.add(&a, &g.add(&b, &c).unwrap()).unwrap();
        prop_assert!(g.approx_eq(&ab_c, &a_bc).unwrap());
        let back = g.factorial_multiple(&g.divide_by_factorial(&a, k).unwrap(), k).unwrap();
        prop_assert!(g.approx_eq(&back, &a).unwrap());
    }

    #[test]
    fn difference_recurrence(c in coeffs(5), x in q(), y in q(), j in 0u32..=4) {
        let rho = on_line(power_sum(&c));
        let (x, y) = (point(x), point(y));
        let once = rho.step(&y).unwrap();
        prop_assert_eq!(delta(&rho, j + 1, &x, &y).unwrap(), delta(&once, j, &x, &y).unwrap());
    }

    #[test]
    fn differences_commute(c in coeffs(5), x in q(), y in q(), z in q()) {
        let rho = on_line(power_sum(&c));
        let (x, y, z) = (point(x), point(y), point(z));
        let yz = rho.step(&z).unwrap().step(&y).unwrap();
        let zy = rho.step(&y).unwrap().step(&z).unwrap();
        prop_assert_eq!(yz.eval(&x).unwrap(), zy.eval(&x).unwrap());
    }

    #[test]
    fn power_monomials_pass_at_their_degree(j in 0u32..=6, c in (-9i64..=9, 1i64..=4), grid in prop::collection::vec((q(), q()), 1..20)) {
        let spec = MonomialSpec::power(j, GroupValue::rational(c.0, c.1));
        let rho = on_line(MonomialSum::single(spec));
        prop_assert!(is_monomial(&rho, j, &pairs(&grid)).unwrap().holds());
    }

    #[test]
    fn tensor_monomials_pass_at_their_degree(seed in any::<u64>(), j in 0u32..=4, dim in 1usize..=3) {
        let mut rng = Lcg64::new(seed);
        let spec = random_tensor(&mut rng, j, dim);
        let rho = FunctionHandle::closed(Semigroup::rational_vector(dim).unwrap(), Group::rational(), MonomialSum::single(spec)).unwrap();
        let grid: Vec<(Point, Point)> = (0..10)
            .map(|_| {
                let mut v = || Point::Vector((0..dim).map(|_| rng.rational(9, 4)).collect());
                (v(), v())
            })
            .collect();
        prop_assert!(is_monomial(&rho, j, &grid).unwrap().holds());
    }

    #[test]
    fn decomposition_round_trip(c in coeffs(4), grid in prop::collection::vec((q(), q()), 1..10)) {
        let sum = power_sum(&c);
        let n = (c.len() - 1) as u32;
        let rho = on_line(sum.clone());
        let got = decompose(&rho, n, &pairs(&grid)).unwrap();
        let group = Group::rational();
        for (x, y) in pairs(&grid) {
            for p in [&x, &y] {
                for j in 0..=n {
                    let a = sum.component(j).map(|s| s.evaluate(p, &group).unwrap()).unwrap_or_else(|| group.zero());
                    let b = got.component(j).map(|s| s.evaluate(p, &group).unwrap()).unwrap_or_else(|| group.zero());
                    prop_assert_eq!(a, b);
                }
            }
        }
    }

    #[test]
    fn top_degree_is_visible_one_degree_lower(n in 1u32..=5, c in (1i64..=9, 1i64..=4), y in (1i64..=20, 1i64..=6), x in q()) {
        let rho = on_line(MonomialSum::single(MonomialSpec::power(n, GroupValue::rational(c.0, c.1))));
        let grid = vec![(point(x), point(y))];
        prop_assert!(is_polynomial(&rho, n, &grid).unwrap().holds());
        prop_assert!(!is_polynomial(&rho, n - 1, &grid).unwrap().holds());
    }

    #[test]
    fn delta_matches_oracle(c in coeffs(7), x in q(), y in q(), j in 0u32..=6) {
        let rho = on_line(power_sum(&c));
        let (x, y) = (point(x), point(y));
        prop_assert_eq!(delta(&rho, j, &x, &y).unwrap(), oracle_delta(&rho, j, &x, &y).unwrap());
    }

    #[test]
    fn delta_matches_oracle_mod_p(c in prop::collection::vec(0u64..101, 1..6), x in 0u64..101, y in 0u64..101, j in 0u32..=6) {
        let sum = MonomialSum::from_power_coefficients(c.iter().map(|&v| GroupValue::Mod { p: 101, value: v }).collect());
        let rho = FunctionHandle::closed(Semigroup::mod_p(101).unwrap(), Group::mod_p(101, 6).unwrap(), sum).unwrap();
        let (x, y) = (Point::Mod { p: 101, value: x }, Point::Mod { p: 101, value: y });
        prop_assert_eq!(delta(&rho, j, &x, &y).unwrap(), oracle_delta(&rho, j, &x, &y).unwrap());
    }

    #[test]
    fn power_root_section_is_exact(m in 2u32..=6, x in q()) {
        let pair = SectionPair::power_root(m).unwrap();
        let x = if m % 2 == 0 { (x.0.abs(), x.1) } else { x };
        prop_assert_eq!(section_defect(pair, &point(x)).unwrap(), 0.0);
    }

    #[test]
    fn log_abs_sin_section_is_close(x in -30.0f64..=0.0) {
        let d = section_defect(SectionPair::LogAbsSin, &Point::Float(x)).unwrap();
        prop_assert!(d <= 1e-12 * x.abs().max(1.0), "defect {d} at {x}");
    }

    #[test]
    fn lifted_characteristic_solutions_solve_the_composite(n in 1u32..=3, m in 2u32..=4, c in coeffs(3), grid in prop::collection::vec((q(), q()), 1..8)) {
        let pair = SectionPair::power_root(m).unwrap();
        let target = pair.target(Repr::Exact);
        let mut c = c;
        c.truncate(n as usize + 1);
        let rho = FunctionHandle::closed(target, Group::rational(), power_sum(&c)).unwrap();
        let form = EquationForm::polynomial(n);
        let x_grid: Vec<(Point, Point)> = pairs(&grid).into_iter().map(|(u, v)| (pair.g(&u).unwrap(), pair.g(&v).unwrap())).collect();
        prop_assert!(check_characteristic(&rho, &form, &x_grid).unwrap().holds());
        let f = lift_canonical(&rho, pair).unwrap();
        prop_assert!(check_composite(&f, &form, pair, &pairs(&grid)).unwrap().holds());
    }

    #[test]
    fn radical_solutions_verify_and_recover(n in 1u32..=4, m in 2u32..=5, c in coeffs(4), seed in any::<u64>()) {
        let mut c = c;
        c.truncate(n as usize + 1);
        let eq = Equation::eq2(n, m).unwrap();
        let sum = power_sum(&c);
        let sol = solve(&eq, &sum).unwrap();
        let grid = sample_grid(&GridSpec::RationalBox { max_abs: 10.0, max_num: 20, max_den: 20, count: 4, seed }).unwrap();
        prop_assert!(verify(&eq, &sol, &Grid::U(grid), &VerifyOptions::exact()).unwrap().holds());

        let points: Vec<Point> = (0..=(n as i64 + 2)).map(|k| Point::rational(k, 2)).collect();
        let table = tabulate(&eq, &sol, &points, &VerifyOptions::exact()).unwrap();
        let back = recover(&eq, &table, &VerifyOptions::exact()).unwrap();
        let expected = sum.without_zero_components(&Group::rational()).unwrap();
        prop_assert!(same_coefficients(&back, &expected, 0.0), "{back:?} vs {expected:?}");
    }

    #[test]
    fn perturbed_tables_are_refuted(n in 1u32..=3, m in 2u32..=4, c in coeffs(3), seed in any::<u64>(), shift in prop_oneof![Just((1i64, 1i64)), Just((-1, 2)), Just((3, 7))]) {
        let mut c = c;
        c.truncate(n as usize + 1);
        let eq = Equation::eq2(n, m).unwrap();
        let sol = solve(&eq, &power_sum(&c)).unwrap();
        let grid = sample_grid(&GridSpec::RationalBox { max_abs: 3.0, max_num: 6, max_den: 4, count: 3, seed }).unwrap();
        let opts = VerifyOptions::exact();
        let mut rng = Lcg64::new(seed);
        let bad = perturb_candidate(&eq, &sol, &grid, &opts, &GroupValue::rational(shift.0, shift.1), &mut rng).unwrap();
        let report = verify(&eq, &bad, &Grid::U(grid.clone()), &opts).unwrap();
        prop_assert!(!report.holds());
        prop_assert!(report.witness.is_some());
        // the unperturbed table passes on the same grid
        let points = required_points(&eq, &grid, Mode::Exact).unwrap();
        let good = Candidate::Raw { table: tabulate(&eq, &sol, &points, &opts).unwrap() };
        prop_assert!(verify(&eq, &good, &Grid::U(grid), &opts).unwrap().holds());
    }

    #[test]
    fn fuzz_is_deterministic(seed in any::<u64>(), arcsine in any::<bool>()) {
        let family = if arcsine { Family::Arcsine } else { Family::Radical };
        let cfg = FuzzConfig::new(family, 3, seed);
        let a = serde_json::to_string(&fuzz(&cfg).unwrap()).unwrap();
        let b = serde_json::to_string(&fuzz(&cfg).unwrap()).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn grids_are_deterministic_and_avoid_pi_multiples(seed in any::<u64>(), count in 0usize..40) {
        let spec = GridSpec::FloatBoxAvoidingKpi { max_abs: 20.0, min_gap: 1e-3, count, seed };
        let a = sample_grid(&spec).unwrap();
        prop_assert_eq!(&a, &sample_grid(&spec).unwrap());
        for (u, v) in a {
            for p in [u, v] {
                let p = p.to_f64().unwrap();
                prop_assert!(frechet_core::calculus::distance_to_pi_multiple(p) >= 1e-3);
                prop_assert!(p.abs() <= 20.0);
            }
        }
    }
}
