//! Solvers and verified comparison checks for second-order periodic
//! boundary value problems
//!
//! ```text
//! -u''(t) = f(t, u(t)),   u(0) = u(2pi),   u'(0) = u'(2pi)
//! ```
//!
//! on the fixed interval `[0, 2pi]`.
//!
//! The library is organized around one linear building block and one
//! constructive method:
//!
//! - [`linsolve`] solves `-u'' + M^2 u = sigma` with prescribed boundary
//!   jumps `u(0) - u(2pi) = mu`, `u'(0) - u'(2pi) = lambda` in closed form,
//!   with an independent periodic Green's-kernel evaluation for
//!   cross-checking.
//! - [`monotone`] runs the monotone iteration between a lower solution
//!   `alpha` and an upper solution `beta`, producing the minimal and
//!   maximal solutions of the nonlinear problem. The lower/upper solutions
//!   may violate the periodic boundary conditions: `alpha(0) < alpha(2pi)`
//!   and `beta(0) > beta(2pi)` are required strictly.
//!
//! Around these sit [`compare`] (executable sign-comparison criteria),
//! [`bracket`] (validation of the lower/upper-solution hypotheses),
//! [`oracle`] (an independent finite-difference verifier), [`expr`] (the
//! expression language used in problem definitions), and [`cli`] (the
//! `pbvp` command-line front end).

pub mod bracket;
pub mod cli;
pub mod compare;
pub mod config;
mod error;
pub mod expr;
pub mod grid;
pub mod linsolve;
pub mod monotone;
pub mod oracle;
pub mod quad;

pub use error::{Error, Result};
pub use grid::{Grid, GridFunction, Tolerance, TWO_PI};
