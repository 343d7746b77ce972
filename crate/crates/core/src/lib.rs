//! Numerical companion for the linear Kawahara operator
//! `P = ∂t + ∂x + ∂x³ − ∂x⁵`: exact periodic propagation, Carleman
//! certification, observability constants, extension of localized solutions
//! and control synthesis.

pub mod approximation;
pub mod carleman;
pub mod control;
pub mod error;
pub mod harness;
pub mod io;
pub mod linalg;
pub mod observability;
pub mod phase;
pub mod poly;
pub mod profile;
pub mod quadrature;
pub mod rng;
pub mod spectral;

pub use error::{Error, Result};
