//! Implicit and inverse function solvers for maps that are differentiable
//! but not necessarily continuously differentiable.
//!
//! The solvers never use derivatives to move: `y = g(x)` for `F(x, y) = 0`
//! is computed by eliminating one unknown at a time with bracketed scalar
//! root finding, which only needs each eliminated section to be continuous
//! and strictly monotone. Derivatives appear in the closed-form Jacobian of
//! the implicit function and in the hypothesis audits.
//!
//! * [`linalg`]: determinants, leading principal minors, solves, inverses.
//! * [`map`]: map handles, box domains, analytic or finite-difference Jacobians.
//! * [`expr`]: textual map definitions.
//! * [`scalar`]: bracketing, bisection and Illinois iterations.
//! * [`implicit`]: nested elimination solver and implicit Jacobians.
//! * [`inverse`]: local inverses of `R^n -> R^n` maps.
//! * [`audit`]: sampling checks of the minor and mixed-determinant hypotheses.
//! * [`example`]: a map with a discontinuous Jacobian that is still invertible.
//! * [`builtins`]: named problems used by the CLI and tests.
//!
//! ```
//! use implicit_core::builtins;
//! use implicit_core::implicit::{implicit_jacobian, solve_implicit, SolverConfig};
//!
//! let p = builtins::circle_problem(SolverConfig::default());
//! let v = solve_implicit(&p, &[0.6]).unwrap();
//! assert!((v.y[0] - 0.8).abs() < 1e-10);
//! let j = implicit_jacobian(&p, &[0.6], v.y.as_slice()).unwrap();
//! assert!((j.get(0, 0) + 0.75).abs() < 1e-9);
//! ```
//!
//! The crate is `no_std` and needs only `alloc`.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod audit;
pub mod builtins;
pub mod example;
pub mod expr;
pub mod halton;
pub mod implicit;
pub mod inverse;
pub mod linalg;
pub mod map;
pub mod scalar;

pub use implicit::{ImplicitProblem, ImplicitValue, SolveError, SolverConfig};
pub use inverse::InverseProblem;
pub use linalg::{Matrix, Vector};
pub use map::{BoxDomain, DifferentiableMap, MapError};
