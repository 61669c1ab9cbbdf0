//! Independent checks in the conventional polar formulation.
//!
//! Nothing here uses the split-circuit stamps: the admittance matrix, power
//! mismatches and the reference Newton solver are built from the network
//! model directly.

mod classify;
mod mismatch;
mod polar;
mod ybus;

pub use classify::{classify_solution, SolutionClass, SolutionLabel, PHYSICAL_BAND};
pub use mismatch::{power_mismatch, MismatchReport};
pub use polar::{polar_jacobian, polar_mismatch, polar_nr_reference, PolarError, PolarSolution};
pub use ybus::build_ybus;
