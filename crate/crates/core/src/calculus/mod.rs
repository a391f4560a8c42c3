//! The difference operator `Δ_y^j`, monomial and polynomial predicates, and
//! the decomposition of polynomials into monomials.

mod difference;
mod function;
mod monomial;

pub use difference::{decompose, delta, is_monomial, is_polynomial, make_monomial, Verdict, Witness};
pub(crate) use difference::{check_pairs, delta_sided, Sided};
pub(crate) use function::Body;
pub use function::{distance_to_pi_multiple, pi_multiple, Domain, FunctionHandle, Table, UDomain, TABLE_KEY_TOL};
pub use monomial::{MonomialForm, MonomialSpec, MonomialSum};
