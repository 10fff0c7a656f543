//! Certified proofs of univariate inequalities `f(x) ≥ 0` on a closed interval.

pub mod certify;
pub mod expr;
pub mod gfun;
pub mod precision;
pub mod quad;
pub mod remez;

pub use rug;
