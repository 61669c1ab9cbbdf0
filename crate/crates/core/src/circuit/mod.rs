//! Split real/imaginary equivalent-circuit device models and their stamps.
//!
//! Every bus contributes two KCL rows (real and imaginary). Rows are written
//! as *net injection minus network current*: generator and slack currents
//! enter with a positive sign, load currents and branch currents with a
//! negative sign.

mod devices;
mod layout;
mod stamp;

pub use devices::{
    eval_polynomial_injection, eval_pq_load, eval_pv_source, CurrentPartials, InjectionEval,
    PolyLoadCoeffs, PvSourceEval, VOLTAGE_GUARD,
};
pub use layout::UnknownLayout;
pub use stamp::{
    branch_admittances, stamp_branch, stamp_poly_load, stamp_pq_load, stamp_pv_source,
    stamp_shunt, stamp_slack, BranchAdmittance, DeviceStamp,
};
