//! Exact and numerical tools for Hecke characters of imaginary quadratic
//! fields, their L-values, root numbers and twist families, together with
//! the p-adic counting experiments used alongside them.

pub mod abelian;
pub mod arith;
pub mod quadfield;
pub mod cyclotomic;
pub mod characters;
pub mod lseries;
pub mod rootnumber;
pub mod family;
pub mod diophantine;
