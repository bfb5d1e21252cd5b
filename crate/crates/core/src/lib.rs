//! wparab: a solver and verification harness for the nonlinear weighted
//! parabolic equation (L_f − q − ∂t)w = G(w) on flat weighted tori.
//!
//! The crate solves the equation with explicit RK4 on periodic grids and
//! evaluates gradient, Hessian, Harnack, and Liouville estimates against the
//! computed solutions, reporting signed margins under discretization-aware
//! tolerances.

// Guards are written `!(x > 0.0)` on purpose: the negation is true for NaN,
// so malformed inputs fall into the error branch instead of slipping past.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod estimates;
pub mod geometry;
pub mod harness;
pub mod model;
pub mod solver;
