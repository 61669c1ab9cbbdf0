//! Globalization: PV-bus variable limiting and power-stepping continuation.

mod limit;
mod stepping;

pub use limit::{limit_step, LimitTrigger, LimiterDecision};
pub use stepping::{
    run_power_stepping, run_power_stepping_with, scale_injections, solve_robust, HomotopySchedule,
};
