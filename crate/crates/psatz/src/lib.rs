//! Exact rational certificates of polynomial nonnegativity and
//! unsatisfiability via sums of squares.

// Index loops in the matrix code follow the usual row/column presentation of
// the algorithms; iterator rewrites obscure that structure.
#![allow(clippy::needless_range_loop)]

pub mod certificate;
pub mod lattice;
pub mod linalg;
pub mod poly;
pub mod problem;
pub mod psd;
pub mod sdp;
pub mod search;
pub mod sos;
pub mod witness;
