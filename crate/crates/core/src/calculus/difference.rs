use std::collections::HashMap;

use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::algebra::{difference_weights, factorial, Group, GroupValue, Point, SemigroupKind};
use crate::error::{Error, Result};

use super::function::{Domain, FunctionHandle};
use super::monomial::{MonomialSpec, MonomialSum};

/// A pair at which an identity failed, with both sides.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Witness {
    pub x: Point,
    pub y: Point,
    pub lhs: GroupValue,
    pub rhs: GroupValue,
}

/// Outcome of checking an identity over a grid of pairs.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Verdict {
    /// Pairs asked for.
    pub requested: usize,
    /// Pairs whose samples were all available.
    pub checked: usize,
    /// First failing pair, if any.
    pub witness: Option<Witness>,
}

impl Verdict {
    pub fn holds(&self) -> bool {
        self.witness.is_none()
    }

    pub fn coverage(&self) -> f64 {
        if self.requested == 0 {
            0.0
        } else {
            self.checked as f64 / self.requested as f64
        }
    }
}

/// One side of an identity together with the size of the terms that were
/// summed to produce it. Float comparisons scale their tolerance by it.
#[derive(Clone, Debug)]
pub(crate) struct Sided {
    pub value: GroupValue,
    pub scale: f64,
}

impl Sided {
    pub fn plain(group: &Group, value: GroupValue) -> Self {
        let scale = group.magnitude(&value);
        Sided { value, scale }
    }
}

/// Equality in `group`; float tolerances are relative to the larger of
/// both values and the accumulated term sizes.
pub(crate) fn agree(group: &Group, a: &Sided, b: &Sided) -> Result<bool> {
    match (&a.value, &b.value, group.eps()) {
        (GroupValue::Float(x), GroupValue::Float(y), Some(eps)) => {
            let scale = 1f64.max(a.scale).max(b.scale).max(x.abs()).max(y.abs());
            Ok((x - y).abs() <= eps * scale)
        }
        _ => group.approx_eq(&a.value, &b.value),
    }
}

/// Runs `sides` at every pair. Pairs that need an absent table sample are
/// skipped and excluded from `checked`; if none is checkable the first
/// missing-sample error is returned.
pub(crate) fn check_pairs<F>(group: &Group, grid: &[(Point, Point)], mut sides: F) -> Result<Verdict>
where
    F: FnMut(&Point, &Point) -> Result<(Sided, Sided)>,
{
    if grid.is_empty() {
        return Err(Error::InvalidInput("grid is empty".into()));
    }
    let mut checked = 0;
    let mut witness = None;
    let mut first_missing = None;
    for (x, y) in grid {
        match sides(x, y) {
            Ok((lhs, rhs)) => {
                checked += 1;
                if witness.is_none() && !agree(group, &lhs, &rhs)? {
                    witness = Some(Witness {
                        x: x.clone(),
                        y: y.clone(),
                        lhs: lhs.value,
                        rhs: rhs.value,
                    });
                }
            }
            Err(e @ Error::MissingSample { .. }) => {
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
    Ok(Verdict {
        requested: grid.len(),
        checked,
        witness,
    })
}

pub(crate) fn delta_sided(rho: &FunctionHandle, j: u32, x: &Point, y: &Point) -> Result<Sided> {
    let sg = rho.semigroup()?;
    sg.check(x)?;
    sg.check(y)?;
    let group = rho.codomain();
    let mut acc = group.zero();
    let mut scale = 0.0;
    let mut point = x.clone();
    for (i, w) in difference_weights(j).iter().enumerate() {
        if i > 0 {
            point = sg.add(&point, y)?;
        }
        let value = rho.eval(&point).map_err(|e| match e {
            Error::MissingSample { point, .. } => Error::MissingSample { point, index: i as u32 },
            other => other,
        })?;
        let term = group.scale(w, &value)?;
        scale += group.magnitude(&term);
        acc = group.add(&acc, &term)?;
    }
    Ok(Sided { value: acc, scale })
}

/// `Δ_y^j ρ(x) = Σ_{i=0}^{j} (-1)^(j-i) C(j, i) ρ(x + i·y)`.
pub fn delta(rho: &FunctionHandle, j: u32, x: &Point, y: &Point) -> Result<GroupValue> {
    delta_sided(rho, j, x, y).map(|s| s.value)
}

/// Checks `Δ_y^j ρ(x) = (j!) ρ(y)` over the grid.
pub fn is_monomial(rho: &FunctionHandle, j: u32, grid: &[(Point, Point)]) -> Result<Verdict> {
    let group = rho.codomain();
    let bound = group.divisibility_bound();
    if j > bound {
        return Err(Error::UnsupportedDivision { k: j, bound });
    }
    check_pairs(group, grid, |x, y| {
        let lhs = delta_sided(rho, j, x, y)?;
        let rhs = Sided::plain(group, group.factorial_multiple(&rho.eval(y)?, j)?);
        Ok((lhs, rhs))
    })
}

/// Checks `Δ_y^{n+1} ρ(x) = 0` over the grid.
pub fn is_polynomial(rho: &FunctionHandle, n: u32, grid: &[(Point, Point)]) -> Result<Verdict> {
    let group = rho.codomain();
    check_pairs(group, grid, |x, y| {
        let lhs = delta_sided(rho, n + 1, x, y)?;
        Ok((lhs, Sided::plain(group, group.zero())))
    })
}

/// A closed-form handle for one monomial.
pub fn make_monomial(spec: MonomialSpec, domain: impl Into<Domain>, codomain: Group) -> Result<FunctionHandle> {
    FunctionHandle::closed(domain, codomain, MonomialSum::single(spec))
}

fn describe(w: &Witness) -> String {
    format!("x = {}, y = {}: {} vs {}", w.x, w.y, w.lhs, w.rhs)
}

/// Splits an `n`-polynomial into monomials of degrees `0..=n`.
///
/// The top component is `ρ_n(y) = Δ_y^n ρ(0) / n!`; it is read off as a
/// closed form, subtracted, and the rest is handled the same way. The result
/// is checked against `ρ` and the monomial identity on `grid`.
pub fn decompose(rho: &FunctionHandle, n: u32, grid: &[(Point, Point)]) -> Result<MonomialSum> {
    let sg = *rho.semigroup()?;
    let group = rho.codomain().clone();
    let bound = group.divisibility_bound();
    if n > bound {
        return Err(Error::UnsupportedDivision { k: n, bound });
    }
    let pre = is_polynomial(rho, n, grid)?;
    if let Some(w) = &pre.witness {
        return Err(Error::DecompositionInconsistent(format!(
            "not a polynomial of degree {n}: Δ^{} fails at {}",
            n + 1,
            describe(w)
        )));
    }

    let zero = sg.identity();
    let mut residual = rho.clone();
    let mut components = Vec::with_capacity(n as usize + 1);
    for j in (0..=n).rev() {
        let top = |y: &Point| -> Result<GroupValue> {
            let d = delta(&residual, j, &zero, y)?;
            group.divide_by_factorial(&d, j)
        };
        let spec = match sg.unit() {
            Some(unit) => {
                let mut c = top(&unit)?;
                if sg.kind() == SemigroupKind::NonPositive && j % 2 == 1 {
                    c = group.neg(&c)?;
                }
                MonomialSpec::power(j, c)
            }
            None => {
                let SemigroupKind::RationalVector { dim } = sg.kind() else {
                    unreachable!("only vector domains lack a unit")
                };
                polarize(j, dim, top)?
            }
        };
        let component = make_monomial(spec.clone(), sg, group.clone())?;
        residual = residual.minus(&component)?;
        components.push(spec);
    }
    components.reverse();
    let sum = MonomialSum::new(components)?;

    let closed = FunctionHandle::closed(sg, group.clone(), sum.clone())?;
    for (x, y) in grid {
        for p in [x, y] {
            let expected = match rho.eval(p) {
                Ok(v) => v,
                Err(Error::MissingSample { .. }) => continue,
                Err(e) => return Err(e),
            };
            let got = closed.eval(p)?;
            let scale = sum
                .components()
                .iter()
                .map(|c| c.evaluate(p, &group).map(|v| group.magnitude(&v)))
                .sum::<Result<f64>>()?;
            let lhs = Sided { value: got.clone(), scale };
            if !agree(&group, &lhs, &Sided::plain(&group, expected.clone()))? {
                return Err(Error::DecompositionInconsistent(format!(
                    "components sum to {got} at {p}, expected {expected}"
                )));
            }
        }
    }
    for spec in sum.components() {
        let handle = make_monomial(spec.clone(), sg, group.clone())?;
        let v = is_monomial(&handle, spec.degree(), grid)?;
        if let Some(w) = &v.witness {
            return Err(Error::DecompositionInconsistent(format!(
                "component of degree {} is not a monomial: {}",
                spec.degree(),
                describe(w)
            )));
        }
    }
    Ok(sum)
}

/// Recovers the symmetric tensor of a `j`-form `q` on `Q^dim` from its
/// diagonal: `T_{i_1..i_j} = (1/j!) Σ_S (-1)^(j-|S|) q(Σ_{s∈S} e_{i_s})`.
fn polarize<F>(j: u32, dim: usize, q: F) -> Result<MonomialSpec>
where
    F: Fn(&Point) -> Result<GroupValue>,
{
    let mut cache: HashMap<Vec<usize>, BigRational> = HashMap::new();
    let mut failure = None;
    let j_fact = BigRational::from_integer(factorial(j));
    let spec = MonomialSpec::symmetric_tensor(j, dim, |idx| {
        if let Some(v) = cache.get(idx) {
            return v.clone();
        }
        let mut total = BigRational::zero();
        for mask in 0u32..(1 << j) {
            let mut coords = vec![BigRational::zero(); dim];
            for (s, &i) in idx.iter().enumerate() {
                if mask & (1 << s) != 0 {
                    coords[i] += BigRational::one();
                }
            }
            let value = match q(&Point::Vector(coords)) {
                Ok(GroupValue::Rational(r)) => r,
                Ok(other) => {
                    failure.get_or_insert(Error::mismatch("rational codomain for tensor extraction", other.kind_name()));
                    BigRational::zero()
                }
                Err(e) => {
                    failure.get_or_insert(e);
                    BigRational::zero()
                }
            };
            if (j - mask.count_ones()) % 2 == 0 {
                total += value;
            } else {
                total -= value;
            }
        }
        let entry = total / &j_fact;
        cache.insert(idx.to_vec(), entry.clone());
        entry
    });
    if let Some(e) = failure {
        return Err(e);
    }
    spec
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{rational_int, Repr, Semigroup};

    fn q_line() -> Semigroup {
        Semigroup::real_line(Repr::Exact)
    }

    fn poly(coeffs: &[i64]) -> FunctionHandle {
        let sum = MonomialSum::from_power_coefficients(coeffs.iter().map(|&c| GroupValue::int(c)).collect());
        FunctionHandle::closed(q_line(), Group::rational(), sum).unwrap()
    }

    fn grid() -> Vec<(Point, Point)> {
        let pts = [-3, -1, 0, 1, 2, 5];
        pts.iter()
            .flat_map(|&x| pts.iter().map(move |&y| (Point::int(x), Point::int(y))))
            .collect()
    }

    #[test]
    fn delta_examples() {
        let square = poly(&[0, 0, 1]);
        assert_eq!(delta(&square, 2, &Point::int(1), &Point::int(3)).unwrap(), GroupValue::int(18));
        assert_eq!(delta(&square, 0, &Point::int(4), &Point::int(9)).unwrap(), GroupValue::int(16));
        let five_x = poly(&[0, 5]);
        assert_eq!(delta(&five_x, 1, &Point::int(2), &Point::int(4)).unwrap(), GroupValue::int(20));
    }

    #[test]
    fn missing_samples_report_the_term() {
        let t = FunctionHandle::table(
            q_line(),
            Group::rational(),
            vec![(Point::int(0), GroupValue::int(0)), (Point::int(1), GroupValue::int(1))],
        )
        .unwrap();
        let err = delta(&t, 2, &Point::int(0), &Point::int(1)).unwrap_err();
        assert!(matches!(err, Error::MissingSample { index: 2, .. }), "{err}");
    }

    #[test]
    fn monomial_predicate() {
        assert!(is_monomial(&poly(&[0, 0, 0, 1]), 3, &grid()).unwrap().holds());
        let v = is_monomial(&poly(&[1, 0, 1]), 2, &[(Point::int(0), Point::int(1))]).unwrap();
        let w = v.witness.unwrap();
        assert_eq!((w.lhs, w.rhs), (GroupValue::int(2), GroupValue::int(4)));
        assert!(is_monomial(&poly(&[]), 5, &grid()).unwrap().holds());
        assert!(matches!(is_monomial(&poly(&[]), 7, &grid()), Err(Error::UnsupportedDivision { .. })));
    }

    #[test]
    fn polynomial_predicate() {
        assert!(is_polynomial(&poly(&[4, -1, 3]), 2, &grid()).unwrap().holds());
        assert!(!is_polynomial(&poly(&[0, 0, 0, 1]), 2, &grid()).unwrap().holds());
        assert!(is_polynomial(&poly(&[9]), 0, &grid()).unwrap().holds());
        assert!(is_polynomial(&poly(&[9]), 0, &[]).is_err());
    }

    #[test]
    fn decompose_reads_off_coefficients() {
        let sum = decompose(&poly(&[3, 2, 1]), 2, &grid()).unwrap();
        let coeffs: Vec<_> = sum.components().iter().map(|c| c.coefficient().unwrap().clone()).collect();
        assert_eq!(coeffs, vec![GroupValue::int(3), GroupValue::int(2), GroupValue::int(1)]);

        let zero = decompose(&poly(&[]), 3, &grid()).unwrap();
        assert_eq!(zero.components().len(), 4);
        assert!(zero.components().iter().all(|c| c.coefficient() == Some(&GroupValue::int(0))));

        assert!(matches!(
            decompose(&poly(&[0, 0, 0, 1]), 2, &grid()),
            Err(Error::DecompositionInconsistent(_))
        ));
    }

    #[test]
    fn decompose_mod_p_identity() {
        let z5 = Semigroup::mod_p(5).unwrap();
        let g5 = Group::mod_p(5, 4).unwrap();
        let id = FunctionHandle::from_fn(z5, g5.clone(), |x| match x {
            Point::Mod { p, value } => Ok(GroupValue::Mod { p: *p, value: *value }),
            _ => unreachable!(),
        });
        let pts: Vec<_> = (0..5).map(|v| Point::Mod { p: 5, value: v }).collect();
        let grid: Vec<_> = pts.iter().flat_map(|x| pts.iter().map(move |y| (x.clone(), y.clone()))).collect();
        let sum = decompose(&id, 1, &grid).unwrap();
        let coeffs: Vec<_> = sum.components().iter().map(|c| c.coefficient().unwrap().clone()).collect();
        assert_eq!(coeffs, vec![GroupValue::Mod { p: 5, value: 0 }, GroupValue::Mod { p: 5, value: 1 }]);
    }

    #[test]
    fn decompose_on_negative_half_line() {
        let neg = Semigroup::non_positive(Repr::Exact);
        let sum = MonomialSum::from_power_coefficients(vec![GroupValue::int(1), GroupValue::int(-2), GroupValue::int(3)]);
        let rho = FunctionHandle::closed(neg, Group::rational(), sum.clone()).unwrap();
        let pts = [0, -1, -2, -7];
        let grid: Vec<_> = pts.iter().flat_map(|&x| pts.iter().map(move |&y| (Point::int(x), Point::int(y)))).collect();
        assert_eq!(decompose(&rho, 2, &grid).unwrap(), sum);
    }

    #[test]
    fn decompose_vector_quadratic() {
        let v2 = Semigroup::rational_vector(2).unwrap();
        let quad = MonomialSpec::symmetric_tensor(2, 2, |idx| rational_int((1 + idx[0] + idx[1]) as i64)).unwrap();
        let lin = MonomialSpec::tensor(1, 2, vec![rational_int(-1), rational_int(4)]).unwrap();
        let c = MonomialSpec::power(0, GroupValue::int(5));
        let sum = MonomialSum::new(vec![c, lin, quad]).unwrap();
        let rho = FunctionHandle::closed(v2, Group::rational(), sum.clone()).unwrap();
        let pts: Vec<_> = [(0, 0), (1, -2), (3, 1)]
            .iter()
            .map(|&(a, b)| Point::Vector(vec![rational_int(a), rational_int(b)]))
            .collect();
        let grid: Vec<_> = pts.iter().flat_map(|x| pts.iter().map(move |y| (x.clone(), y.clone()))).collect();
        let got = decompose(&rho, 2, &grid).unwrap();
        assert_eq!(got.components()[1..], sum.components()[1..]);
        for p in &pts {
            assert_eq!(got.components()[0].evaluate(p, &Group::rational()).unwrap(), GroupValue::int(5));
        }
    }
}
