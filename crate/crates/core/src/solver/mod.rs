//! Global assembly, sparse direct solve and the Newton-Raphson loop.

mod assemble;
mod newton;
mod options;
pub mod sparse;

pub use assemble::{assemble, Assembler};
pub use newton::{run_newton, run_newton_with, ConvergenceTrace, IterationRecord, SolveResult, SolveStatus};
pub use options::{SolverOptions, StateVector};
pub use sparse::{linear_solve, SparseLu, SparseMatrix};

pub(crate) fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| if x.is_nan() { f64::NAN } else { m.max(x.abs()) })
}
