//! Forward problems: the static (omega = 0) systems, the time-harmonic
//! curl-curl system, and the synthetic measurement generator.

pub mod conductivity;
pub mod magnetostatic;
pub mod maxwell;
pub mod synth;

pub use conductivity::{solve_conductivity, solve_conductivity_with_source, StaticSolution};
pub use magnetostatic::{solve_static_magnetic, StaticMagneticSolution};
pub use maxwell::{solve_maxwell, solve_maxwell_with_boundary, HarmonicSolution, MaxwellOptions};
pub use synth::{
    synthesize_measurements, MeasurementRecord, MeasurementSet, NoiseDescriptor, SynthOptions,
    SyntheticDataset,
};

use crate::field::VectorField;

/// Discrete L2 norm with the h^3 cell-volume weight, so constants have
/// norm ~ 1 on the unit cube regardless of resolution.
pub fn l2h(v: &VectorField) -> f64 {
    let h = v.grid.h();
    v.l2() * (h * h * h).sqrt()
}
