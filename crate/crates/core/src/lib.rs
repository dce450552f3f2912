//! Computable direct tracts of meromorphic functions: tract detection, growth
//! functionals along circles, Wiman–Valiron style checks, escaping dynamics
//! and order bounds for algebraic differential equations.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dynamics;
pub mod exec;
pub mod functions;
pub mod growth;
pub mod odeorder;
pub mod tower;
pub mod tract;
pub mod wvcheck;

pub use num_complex::Complex64;
