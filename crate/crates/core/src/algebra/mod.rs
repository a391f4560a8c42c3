//! Commutative semigroups (the domains `X`) and `(n!)`-divisible abelian
//! groups (the codomains `Y`), with exact and tolerance-based instances.

mod binomial;
mod group;
mod semigroup;
mod value;

pub use binomial::{difference_weights, factorial, pascal_row};
pub use group::{Group, GroupKind, GroupSpec, DEFAULT_DIVISIBILITY_BOUND};
pub use semigroup::{Repr, Semigroup, SemigroupKind, SemigroupSpec};
pub use value::{
    exact_root, format_rational, parse_rational, rational, rational_int, rational_to_f64, real_root_f64,
    GroupValue, Point, PointKey, Scalar,
};
