//! Kernels for the learning-based solution of the interior Dirichlet
//! Helmholtz problem `Δu + k²u = 0` with complex wavenumber.
//!
//! The crate is `no_std` and only needs `alloc`. It contains complex Bessel
//! and Hankel functions of integer order, the dense complex linear algebra
//! behind the regularized least-squares fit, parametric boundaries,
//! the normalized Bessel, fundamental-solution and multi-center bases,
//! parameter-selection rules and the learned boundary-to-interior operator.
//!
//! File formats, configuration and the command line front end live in the
//! companion `lbnm` crate.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod basis;
pub mod error;
pub mod geometry;
pub mod linalg;
pub mod metrics;
pub mod operator;
pub mod reference;
pub mod regularization;
pub mod specfun;

#[cfg(test)]
mod testutil;

pub use num_complex::Complex64 as C64;

pub use error::{Error, Result};
pub use geometry::Point;
