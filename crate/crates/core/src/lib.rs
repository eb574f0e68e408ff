//! Exact cobar-complex calculus over `(BP_*, BP_*BP)` and the dual Steenrod
//! algebra, with a verifier for secondary algebraic Novikov differentials.

pub mod algebra;
pub mod catalog;
pub mod cobar;
pub mod coeff;
pub mod expr;
pub mod may;
pub mod structmaps;
pub mod tensor;
pub mod verifier;
