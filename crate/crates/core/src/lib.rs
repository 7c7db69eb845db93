//! Gaussian random equivariant spherical harmonics on S³ and their nodal sets.

// `!(x <= t)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod basis;
pub mod error;
pub mod experiments;
pub mod harmonic;
pub mod hopf;
pub mod kacrice;
pub mod kernels;
pub mod mesh;
pub mod nodal;
pub mod quadrature;
pub mod stats;
pub mod svg;
pub mod zeros;

pub use error::{Error, Result};
