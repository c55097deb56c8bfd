//! Semilinear Dirichlet problems `−Δu + g(u) = μ` with measure data on
//! box grids, and sparse optimal control of the functional
//! `F(μ) = ‖u − u_d‖_{L^p} + α‖μ‖_M` over discrete measures.
//!
//! Modules, bottom up:
//!
//! - [`domain`]: grids, nodal fields, `−Δ_h`, discrete norms.
//! - [`measures`]: atoms-plus-density measures, mollification, potentials.
//! - [`solver`]: linear, Newton and monotone solvers, truncation, reduced limits.
//! - [`control`]: cost evaluation, adjoint gradients, proximal gradient.
//! - [`experiments`]: scripted numerical experiments with CSV/JSON reports.
//! - [`io`]: field, measure and problem files.

// `!(x >= 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod control;
pub mod domain;
pub mod error;
pub mod experiments;
pub mod io;
pub mod measures;
pub mod solver;

pub use domain::{Grid, Point, ScalarField};
pub use error::{Error, Result};
pub use measures::{Atom, DiscreteMeasure};
pub use solver::{Nonlinearity, SolveReport, SolverOptions};
