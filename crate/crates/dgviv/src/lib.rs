//! File formats, run drivers, and post-processing around [`dgviv_core`]:
//! Gmsh meshes in, legacy VTK, CSV, JSON, and binary checkpoints out.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod checkpoint;
pub mod config;
pub mod drivers;
pub mod error;
pub mod msh;
pub mod series;
pub mod spectrum;
pub mod vtk;

pub use config::SolverConfig;
pub use error::{Error, Result};
