//! Local discontinuous Galerkin (LDG) discretisation of the singularly
//! perturbed reaction–diffusion problem `-ε Δu + b u = f` on the unit square,
//! on Shishkin, Bakhvalov–Shishkin and Bakhvalov-type layer-adapted meshes.

// comparisons are written so that NaN fails them
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod assembly;
pub mod basis;
pub mod dense;
pub mod error;
pub mod experiments;
pub mod field;
pub mod mesh;
pub mod norms;
pub mod parabolic;
pub mod problem;
pub mod projection;
pub mod quadrature;
pub mod solver;
pub mod sparse;

pub use error::{LdgError, Result};
