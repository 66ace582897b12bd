// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

//! Numerical verification of sharp first-eigenvalue lower bounds
//! `λ₁ ≥ α π²/D²` under integral Ricci curvature bounds.
//!
//! The crate works on closed rotationally symmetric manifolds
//! `dt² + f(t)² g_{S^{n-1}}`, where curvature, volume and the Laplace
//! spectrum reduce to one-dimensional problems with controlled error.

pub mod constants;
pub mod error;
pub mod geometry;
pub mod linalg;
pub mod modelode;
pub mod quadrature;
pub mod report;
pub mod spectral;
pub mod verify;

pub use error::{Error, Result};
