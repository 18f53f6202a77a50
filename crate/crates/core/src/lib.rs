//! Alternating proximity mapping method for convex-concave saddle-point
//! problems.
//!
//! The solver alternates proximal steps in the two blocks of a
//! convex-concave function, with extrapolation between blocks and
//! per-iteration parameter sequences `(tau_k, sigma_k, alpha_k, beta_k)`
//! that may vary with `k`. For bilinear couplings
//! `f(x, y) = <Kx, y> + g(x) - h(y)` the block proximal steps reduce to
//! closed-form updates driven by the proximity mappings of `g` and `h`.
//!
//! Crate layout:
//!
//! * [`linops`] - dense vectors, matrices, operator-norm estimation;
//! * [`prox`] - constraint sets and proximity mappings;
//! * [`problems`] - saddle-point problem records and the built-in gallery
//!   (matrix game, inequality-form LP Lagrangian, l1 least squares, toy
//!   separable problem);
//! * [`schedule`] - parameter sequences and coupling validation;
//! * [`solver`] - the iterate engine and per-iteration records;
//! * [`trace`] - CSV serialization of solver traces;
//! * [`diagnostics`] - partial primal-dual gap, distance certificates,
//!   saddle certification, and independent reference solvers.

pub mod diagnostics;
mod error;
pub mod linops;
pub mod problems;
pub mod prox;
pub mod schedule;
pub mod solver;
pub mod trace;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
