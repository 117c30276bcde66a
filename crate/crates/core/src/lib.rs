//! Multi-frequency Maxwell workbench.
//!
//! Forward solvers for the time-harmonic Maxwell system and its static
//! limit on a staggered unit-cube grid, pointwise non-degeneracy
//! functionals, frequency-set selection with certified thresholds, and
//! three internal-data reconstruction pipelines.

pub mod calculus;
pub mod forward;
pub mod frequency;
pub mod functionals;
pub mod cellops;
pub mod error;
pub mod field;
pub mod grid;
pub mod illum;
pub mod io;
pub mod material;
pub mod poly;
pub mod reconstruct;
pub mod solve;
pub mod tol;
pub mod verify;

pub use error::{Error, Result};
pub use field::{FieldKind, Layout, RealCellField, ScalarField, ScalarLoc, VectorField};
pub use grid::Grid;
pub use illum::Illumination;
pub use material::{MaterialParams, MaterialSpec};
