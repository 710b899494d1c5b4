//! Hybridized polygonal discontinuous Galerkin solver for the Poisson problem
//! with a negative-norm stabilization realized through discrete Neumann liftings
//! on a reference triangle.

pub mod assembler;
pub mod error;
pub mod experiments;
pub mod linalg;
pub mod mesh;
pub mod normtools;
pub mod polybasis;
pub mod refstab;
pub mod solver;

pub use error::{Error, Result};
pub use mesh::{Point2, PolygonalMesh};
