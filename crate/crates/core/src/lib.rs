//! Solver laboratory for the logarithmic Schrödinger equation
//! `i u_t + u_xx = lambda u ln|u|^2` and its regularized forms.
//!
//! - [`grid`]: uniform grids, difference operators, discrete norms
//! - [`nonlinearity`]: the log term, its regularizations, energy densities
//! - [`analytic`]: Gaussian and Gausson reference solutions
//! - [`solver`]: the semi-implicit finite-difference time stepper
//! - [`diagnostics`]: conserved quantities, error norms, observed orders
//! - [`harness`]: convergence studies and CSV output

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytic;
pub mod diagnostics;
mod error;
pub mod grid;
pub mod harness;
pub mod nonlinearity;
pub mod solver;

#[cfg(test)]
mod testutil;

pub use error::{Error, Result};
pub use grid::{Grid1D, WaveField};
pub use nonlinearity::RegVariant;
pub use solver::{FirstStep, SolveOutput, SolverParams};
