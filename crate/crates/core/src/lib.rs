//! Nodal interior-penalty Runge-Kutta discontinuous Galerkin discretization of
//! the two-dimensional compressible Navier-Stokes equations on affine
//! triangles, with a weakly coupled one-degree-of-freedom rigid body.
//!
//! The crate is `no_std` (it needs `alloc`). Enabling the `parallel` feature
//! evaluates residuals with rayon; results are bitwise identical for any
//! worker count.

#![no_std]
// `!(x > 0.0)` rejects NaN along with nonpositive values.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::too_many_arguments)]

extern crate alloc;

pub mod dg;
pub mod error;
pub mod linalg;
pub mod mesh;
pub mod penalty;
pub mod physics;
pub mod refelem;
pub mod time;
pub mod verify;

pub use error::{Error, Quantity, Result, Site};
