//! Robust AC power flow in split rectangular current-voltage variables.
//!
//! The network is represented as two coupled real-valued circuits (real and
//! imaginary parts). PQ loads and PV generators become nonlinear current
//! sources whose linearizations are stamped into a sparse Jacobian, and the
//! resulting system is solved with Newton-Raphson. Two globalization
//! techniques borrowed from circuit simulation make the solve robust to the
//! initial guess for generator reactive power:
//!
//! * variable limiting, which damps PV-bus voltage steps ([`robust::limit_step`]);
//! * power stepping, a continuation over a scale factor on all scheduled
//!   injections ([`robust::run_power_stepping`]).
//!
//! An independent polar-coordinate solver and power-mismatch checker live in
//! [`oracle`] and are used to classify solutions.

#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x > 0.0)` deliberately rejects NaN

pub mod case;
pub mod circuit;
pub mod error;
pub mod harness;
pub mod oracle;
pub mod par;
pub mod robust;
pub mod solver;

pub use case::{apply_loading, build_network, parse_matpower, NetworkModel, RawCase};
pub use error::{CaseError, DeviceError, LinearSolveError};
pub use oracle::{classify_solution, power_mismatch, SolutionClass, SolutionLabel};
pub use robust::{run_power_stepping, scale_injections, solve_robust};
pub use solver::{run_newton, SolveResult, SolveStatus, SolverOptions, StateVector};
