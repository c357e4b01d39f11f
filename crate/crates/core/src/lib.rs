//! Numerical laboratory for the dissipative Hénon family
//! `f(x, y) = (1 - a x^2 + sqrt(b) y, s sqrt(b) x)` at its first bifurcation parameter.
//!
//! The crate locates the tangency parameter `a*`, builds the rectangle `R` with its
//! sub-regions, codes the non-wandering set by the full two-shift, runs the
//! bound/fold period machinery near the tangency, and approximates pressure,
//! Gibbs measures and Lyapunov exponents from periodic orbits.

// `!(x < y)` is how NaN is rejected throughout.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod binding;
pub mod cli;
pub mod coding;
pub mod config;
pub mod error;
pub mod linalg;
pub mod manifolds;
pub mod map;
pub mod shadow;
pub mod thermo;

pub use config::MapConfig;
pub use error::{HenonError, Result};
pub use linalg::{Mat2, Point2, Vec2};
