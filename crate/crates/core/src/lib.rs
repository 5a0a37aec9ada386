//! Numerical laboratory for the cubic half-wave and fractional NLS equations.
//!
//! The crate builds explicit solution families (Cauchy kernels, Szegő traveling
//! waves, half-wave ground states), evaluates Sobolev and modulation norms on a
//! periodized line, runs split-step and Picard-series solvers, and computes the
//! exponent geometry that decides where norm inflation can be forced.

// `!(x > 0.0)` is used on purpose: it also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod closed_forms;
pub mod evolution;
pub mod feasibility;
pub mod harness;
pub mod inflation;
pub mod numerics;
pub mod profiles;
pub mod spectral;

pub use num_complex::Complex64 as C64;
