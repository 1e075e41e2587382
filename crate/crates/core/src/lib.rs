//! Triangle quality metrics, P1 interpolation error, a P1 Poisson solver on
//! anisotropic strip meshes, Schwarz lantern analytics and surface-area
//! convergence studies, all organised around the circumradius condition.

pub mod area;
pub mod error;
pub mod fem;
pub mod field;
pub mod interp;
pub mod lantern;
pub mod mesh;
pub mod quadrature;
pub mod rate;
pub mod report;
pub mod sparse;
pub mod trigeo;

pub use error::{ConformityViolation, Error, Result};
