use num_rational::BigRational;
use num_traits::Zero;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::Value;

use crate::algebra::{
    format_rational, parse_rational, Group, GroupValue, Point, Scalar, Semigroup, SemigroupKind,
};
use crate::error::{Error, Result};

/// How a `j`-monomial is written down.
#[derive(Clone, Debug, PartialEq)]
pub enum MonomialForm {
    /// `x ↦ c · x^j` on a scalar domain.
    Power { coefficient: GroupValue },
    /// `x ↦ T(x, …, x)` for a symmetric `j`-index tensor over `Q^dim`,
    /// stored row-major with `dim^j` entries.
    Tensor { dim: usize, entries: Vec<BigRational> },
}

/// A finite description of a `j`-monomial.
#[derive(Clone, Debug, PartialEq)]
pub struct MonomialSpec {
    degree: u32,
    form: MonomialForm,
}

fn multi_index(mut flat: usize, dim: usize, degree: u32) -> Vec<usize> {
    let mut idx = vec![0; degree as usize];
    for slot in idx.iter_mut().rev() {
        *slot = flat % dim;
        flat /= dim;
    }
    idx
}

fn flat_index(idx: &[usize], dim: usize) -> usize {
    idx.iter().fold(0, |acc, &i| acc * dim + i)
}

impl MonomialSpec {
    pub fn power(degree: u32, coefficient: GroupValue) -> Self {
        MonomialSpec {
            degree,
            form: MonomialForm::Power { coefficient },
        }
    }

    pub fn tensor(degree: u32, dim: usize, entries: Vec<BigRational>) -> Result<Self> {
        let spec = MonomialSpec {
            degree,
            form: MonomialForm::Tensor { dim, entries },
        };
        spec.validate_shape()?;
        Ok(spec)
    }

    /// Builds a symmetric tensor from a function of sorted multi-indices.
    pub fn symmetric_tensor(degree: u32, dim: usize, mut entry: impl FnMut(&[usize]) -> BigRational) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidSpec("tensor dimension must be positive".into()));
        }
        let len = dim.pow(degree);
        let mut entries = vec![BigRational::zero(); len];
        for (flat, slot) in entries.iter_mut().enumerate() {
            let mut idx = multi_index(flat, dim, degree);
            idx.sort_unstable();
            *slot = entry(&idx);
        }
        MonomialSpec::tensor(degree, dim, entries)
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn form(&self) -> &MonomialForm {
        &self.form
    }

    pub fn coefficient(&self) -> Option<&GroupValue> {
        match &self.form {
            MonomialForm::Power { coefficient } => Some(coefficient),
            MonomialForm::Tensor { .. } => None,
        }
    }

    fn validate_shape(&self) -> Result<()> {
        if let MonomialForm::Tensor { dim, entries } = &self.form {
            if *dim == 0 {
                return Err(Error::InvalidSpec("tensor dimension must be positive".into()));
            }
            let expected = dim.checked_pow(self.degree).ok_or_else(|| {
                Error::InvalidSpec(format!("tensor of degree {} over dim {dim} is too large", self.degree))
            })?;
            if entries.len() != expected {
                return Err(Error::InvalidSpec(format!(
                    "degree-{} tensor over dim {dim} needs {expected} entries, got {}",
                    self.degree,
                    entries.len()
                )));
            }
            for flat in 0..entries.len() {
                let mut idx = multi_index(flat, *dim, self.degree);
                idx.sort_unstable();
                let canonical = flat_index(&idx, *dim);
                if entries[flat] != entries[canonical] {
                    return Err(Error::InvalidSpec(format!(
                        "tensor is not symmetric at index {:?}",
                        multi_index(flat, *dim, self.degree)
                    )));
                }
            }
        }
        Ok(())
    }

    /// Checks the monomial against a domain and codomain.
    pub fn validate(&self, domain: &Semigroup, codomain: &Group) -> Result<()> {
        self.validate_shape()?;
        match &self.form {
            MonomialForm::Power { coefficient } => {
                if !domain.is_scalar() && self.degree > 0 {
                    return Err(Error::InvalidSpec(format!(
                        "power-form monomials need a scalar domain, got {}",
                        domain.name()
                    )));
                }
                codomain.coerce(coefficient)?;
            }
            MonomialForm::Tensor { dim, .. } => {
                if domain.kind() != (SemigroupKind::RationalVector { dim: *dim }) {
                    return Err(Error::InvalidSpec(format!(
                        "tensor over dim {dim} does not match domain {}",
                        domain.name()
                    )));
                }
                codomain.coerce(&GroupValue::Rational(BigRational::zero()))?;
            }
        }
        Ok(())
    }

    pub fn evaluate(&self, x: &Point, codomain: &Group) -> Result<GroupValue> {
        match &self.form {
            MonomialForm::Power { coefficient } => {
                let s = if self.degree == 0 {
                    Scalar::one_rational()
                } else {
                    Scalar::power(x, self.degree)?
                };
                codomain.mul_scalar(coefficient, &s)
            }
            MonomialForm::Tensor { dim, entries } => {
                let Point::Vector(coords) = x else {
                    return Err(Error::mismatch(format!("rational-vector({dim}) point"), x));
                };
                if coords.len() != *dim {
                    return Err(Error::mismatch(format!("rational-vector({dim}) point"), x));
                }
                let mut total = BigRational::zero();
                for (flat, t) in entries.iter().enumerate() {
                    if t.is_zero() {
                        continue;
                    }
                    let term = multi_index(flat, *dim, self.degree)
                        .iter()
                        .fold(t.clone(), |acc, &i| acc * &coords[i]);
                    total += term;
                }
                codomain.coerce(&GroupValue::Rational(total))
            }
        }
    }

    pub fn is_zero(&self, codomain: &Group) -> Result<bool> {
        match &self.form {
            MonomialForm::Power { coefficient } => codomain.is_zero(&codomain.coerce(coefficient)?),
            MonomialForm::Tensor { entries, .. } => Ok(entries.iter().all(Zero::is_zero)),
        }
    }
}

/// `Σ ρ_j` with at most one component per degree, in increasing degree.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct MonomialSum {
    components: Vec<MonomialSpec>,
}

impl MonomialSum {
    pub fn new(components: Vec<MonomialSpec>) -> Result<Self> {
        for w in components.windows(2) {
            if w[0].degree >= w[1].degree {
                return Err(Error::InvalidSpec(format!(
                    "component degrees must be strictly increasing, got {} then {}",
                    w[0].degree, w[1].degree
                )));
            }
        }
        for c in &components {
            c.validate_shape()?;
        }
        Ok(MonomialSum { components })
    }

    /// `Σ c_j x^j` from a coefficient list indexed by degree.
    pub fn from_power_coefficients(coefficients: Vec<GroupValue>) -> Self {
        MonomialSum {
            components: coefficients
                .into_iter()
                .enumerate()
                .map(|(j, c)| MonomialSpec::power(j as u32, c))
                .collect(),
        }
    }

    pub fn single(spec: MonomialSpec) -> Self {
        MonomialSum { components: vec![spec] }
    }

    pub fn components(&self) -> &[MonomialSpec] {
        &self.components
    }

    pub fn component(&self, degree: u32) -> Option<&MonomialSpec> {
        self.components.iter().find(|c| c.degree == degree)
    }

    pub fn max_degree(&self) -> Option<u32> {
        self.components.last().map(|c| c.degree)
    }

    pub fn validate(&self, domain: &Semigroup, codomain: &Group) -> Result<()> {
        self.components.iter().try_for_each(|c| c.validate(domain, codomain))
    }

    pub fn evaluate(&self, x: &Point, codomain: &Group) -> Result<GroupValue> {
        let mut acc = codomain.zero();
        for c in &self.components {
            acc = codomain.add(&acc, &c.evaluate(x, codomain)?)?;
        }
        Ok(acc)
    }

    /// Drops components whose coefficients vanish in `codomain`.
    pub fn without_zero_components(&self, codomain: &Group) -> Result<Self> {
        let mut kept = Vec::new();
        for c in &self.components {
            if !c.is_zero(codomain)? {
                kept.push(c.clone());
            }
        }
        Ok(MonomialSum { components: kept })
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MonomialRepr {
    degree: u32,
    form: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    coefficient: Option<GroupValue>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    dim: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    tensor: Option<Value>,
}

fn nest(entries: &[BigRational], dim: usize, depth: u32) -> Value {
    if depth == 0 {
        return Value::String(format_rational(&entries[0]));
    }
    let stride = entries.len() / dim;
    Value::Array(
        entries
            .chunks(stride)
            .map(|chunk| nest(chunk, dim, depth - 1))
            .collect(),
    )
}

fn flatten(value: &Value, dim: usize, depth: u32, out: &mut Vec<BigRational>) -> Result<()> {
    match (depth, value) {
        (0, Value::String(s)) => {
            out.push(parse_rational(s)?);
            Ok(())
        }
        (d, Value::Array(items)) if d > 0 && items.len() == dim => {
            items.iter().try_for_each(|item| flatten(item, dim, d - 1, out))
        }
        _ => Err(Error::InvalidSpec(format!(
            "tensor must be nested arrays of depth {depth} and width {dim} with rational strings"
        ))),
    }
}

impl TryFrom<MonomialRepr> for MonomialSpec {
    type Error = Error;

    fn try_from(repr: MonomialRepr) -> Result<Self> {
        match repr.form.as_str() {
            "power" => {
                let coefficient = repr
                    .coefficient
                    .ok_or_else(|| Error::InvalidSpec("power form needs \"coefficient\"".into()))?;
                Ok(MonomialSpec::power(repr.degree, coefficient))
            }
            "tensor" => {
                let dim = repr
                    .dim
                    .ok_or_else(|| Error::InvalidSpec("tensor form needs \"dim\"".into()))?;
                let value = repr
                    .tensor
                    .ok_or_else(|| Error::InvalidSpec("tensor form needs \"tensor\"".into()))?;
                let mut entries = Vec::new();
                flatten(&value, dim, repr.degree, &mut entries)?;
                MonomialSpec::tensor(repr.degree, dim, entries)
            }
            other => Err(Error::InvalidSpec(format!("unknown monomial form {other:?}"))),
        }
    }
}

impl From<&MonomialSpec> for MonomialRepr {
    fn from(spec: &MonomialSpec) -> Self {
        match &spec.form {
            MonomialForm::Power { coefficient } => MonomialRepr {
                degree: spec.degree,
                form: "power".into(),
                coefficient: Some(coefficient.clone()),
                dim: None,
                tensor: None,
            },
            MonomialForm::Tensor { dim, entries } => MonomialRepr {
                degree: spec.degree,
                form: "tensor".into(),
                coefficient: None,
                dim: Some(*dim),
                tensor: Some(nest(entries, *dim, spec.degree)),
            },
        }
    }
}

impl Serialize for MonomialSpec {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        MonomialRepr::from(self).serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for MonomialSpec {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let repr = MonomialRepr::deserialize(deserializer)?;
        MonomialSpec::try_from(repr).map_err(serde::de::Error::custom)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SumRepr {
    components: Vec<MonomialSpec>,
}

impl Serialize for MonomialSum {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        SumRepr {
            components: self.components.clone(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for MonomialSum {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let repr = SumRepr::deserialize(deserializer)?;
        MonomialSum::new(repr.components).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{rational, rational_int, Repr};

    #[test]
    fn power_form_evaluates() {
        let q = Group::rational();
        let half_square = MonomialSpec::power(2, GroupValue::rational(1, 2));
        assert_eq!(half_square.evaluate(&Point::int(3), &q).unwrap(), GroupValue::rational(9, 2));
        let seven = MonomialSpec::power(0, GroupValue::int(7));
        assert_eq!(seven.evaluate(&Point::int(0), &q).unwrap(), GroupValue::int(7));
        assert_eq!(seven.evaluate(&Point::rational(-5, 3), &q).unwrap(), GroupValue::int(7));
    }

    #[test]
    fn linear_tensor_is_a_linear_form() {
        let q = Group::rational();
        let spec = MonomialSpec::tensor(1, 2, vec![rational_int(3), rational(-1, 2)]).unwrap();
        let x = Point::Vector(vec![rational_int(2), rational_int(4)]);
        assert_eq!(spec.evaluate(&x, &q).unwrap(), GroupValue::int(4));
    }

    #[test]
    fn asymmetric_tensor_is_rejected() {
        let entries = vec![rational_int(1), rational_int(2), rational_int(3), rational_int(4)];
        assert!(matches!(MonomialSpec::tensor(2, 2, entries), Err(Error::InvalidSpec(_))));
    }

    #[test]
    fn sums_need_increasing_degrees() {
        let a = MonomialSpec::power(2, GroupValue::int(1));
        let b = MonomialSpec::power(1, GroupValue::int(1));
        assert!(MonomialSum::new(vec![a.clone(), b.clone()]).is_err());
        assert!(MonomialSum::new(vec![b, a]).is_ok());
    }

    #[test]
    fn power_form_needs_scalar_domain() {
        let spec = MonomialSpec::power(1, GroupValue::int(1));
        let v2 = Semigroup::rational_vector(2).unwrap();
        assert!(spec.validate(&v2, &Group::rational()).is_err());
        assert!(spec.validate(&Semigroup::real_line(Repr::Exact), &Group::rational()).is_ok());
    }

    #[test]
    fn tensor_json_nests_by_degree() {
        let spec = MonomialSpec::symmetric_tensor(2, 2, |idx| rational_int((idx[0] + 2 * idx[1]) as i64)).unwrap();
        let text = serde_json::to_string(&spec).unwrap();
        assert_eq!(text, r#"{"degree":2,"form":"tensor","dim":2,"tensor":[["0","2"],["2","3"]]}"#);
        let back: MonomialSpec = serde_json::from_str(&text).unwrap();
        assert_eq!(back, spec);
        let bad = r#"{"degree":2,"form":"tensor","dim":2,"tensor":[["0","1"],["2","3"]]}"#;
        assert!(serde_json::from_str::<MonomialSpec>(bad).is_err());
    }
}
