//! Numerical toolkit for absolute normalised norms on R^2 and for the geometry
//! of finite-dimensional normed spaces built from them.
//!
//! The crate computes unit-ball boundary curves, dual norms, octahedrality and
//! almost-squareness moduli of direct sums, slice diameters, and Banach-Mazur
//! distance upper bounds. Every certified quantity is reported as an interval
//! bracket together with the Lipschitz/cover margin that justifies it.
//!
//! Determinism: no randomness anywhere in the library, and all parallel scans
//! reduce with associative, commutative operations (min/max with index
//! tie-breaks), so results are identical regardless of thread count.

pub mod norm2;
pub mod geometry;
pub mod dual;
pub mod space;
pub mod sampling;
pub mod verify;
pub mod bm;
pub mod specfile;

mod par;

/// Equality threshold for "attains the extreme value" decisions. Exact
/// equalities like F(c) = 2 cannot be decided in floating point, so they are
/// tested as `>= 2 - EQ_TAU`.
pub const EQ_TAU: f64 = 1e-9;
