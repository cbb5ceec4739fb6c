//! Numerical construction of proper holomorphic maps from the disc (and,
//! experimentally, the annulus) into strongly pseudoconvex domains.
//!
//! The pipeline attaches a family of holomorphic discs along the boundary
//! image of an initial map, replaces the family by a surrogate that is
//! holomorphic in the surface variable, detects the Jordan curves where the
//! discs leave the domain, solves a nonlinear Riemann-Hilbert problem for a
//! function landing on those curves, and composes. Every property of the
//! resulting map is checked numerically in a [`pipeline::ProperMapReport`].

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::too_many_arguments)]

pub mod center;
pub mod config;
pub mod curves;
pub mod disc;
pub mod error;
pub mod exec;
pub mod fourier;
pub mod geometry;
pub mod pipeline;
pub mod rh;
mod scan;

pub use error::{Error, Result, StageError};
pub use exec::Exec;
pub use geometry::{CxPoint, DefiningFunction};

/// Complex scalar used throughout the crate.
pub type C64 = num_complex::Complex64;
