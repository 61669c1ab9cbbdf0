use crate::case::NetworkModel;
use crate::circuit::UnknownLayout;
use crate::solver::{run_newton, ConvergenceTrace, SolveResult, SolveStatus, SolverOptions, StateVector};

/// Scales PV real generation, non-slack loads and polynomial loads by `beta`.
/// Slack source, shunts and branches are unchanged.
pub fn scale_injections(net: &NetworkModel, beta: f64) -> NetworkModel {
    let mut out = net.clone();
    out.scale.beta *= beta;
    out
}

/// β schedule for power stepping. Starts at β = 0.
#[derive(Debug, Clone, PartialEq)]
pub struct HomotopySchedule {
    pub beta: f64,
    pub step: f64,
    pub min_step: f64,
}

impl HomotopySchedule {
    pub fn new(step: f64, min_step: f64) -> Self {
        Self { beta: 0.0, step, min_step }
    }

    pub fn done(&self) -> bool {
        self.beta >= 1.0
    }

    pub fn target(&self) -> f64 {
        (self.beta + self.step).min(1.0)
    }

    pub fn accept(&mut self, beta: f64) {
        self.beta = beta;
    }

    /// Halves the increment; false once it drops below the minimum.
    pub fn reject(&mut self) -> bool {
        self.step /= 2.0;
        self.step >= self.min_step
    }
}

/// Continuation from β = 0 up to β = 1, warm-starting each solve from the
/// last accepted solution.
pub fn run_power_stepping(net: &NetworkModel, options: &SolverOptions) -> SolveResult {
    run_power_stepping_with(net, options, |_, _| {})
}

/// [`run_power_stepping`] that reports every accepted `(β, solve)` pair.
pub fn run_power_stepping_with(
    net: &NetworkModel,
    options: &SolverOptions,
    mut on_accept: impl FnMut(f64, &SolveResult),
) -> SolveResult {
    let layout = UnknownLayout::build(net);
    let start = StateVector::initial(net, &layout, options);
    let mut trace = ConvergenceTrace::default();

    let first = run_newton(&scale_injections(net, 0.0), options, start);
    trace.extend(&first.trace);
    if !first.converged() {
        return with_trace(first, trace);
    }
    on_accept(0.0, &first);

    let mut schedule = HomotopySchedule::new(options.beta_step, options.beta_step_min);
    let mut accepted = first;
    while !schedule.done() {
        let target = schedule.target();
        let attempt = run_newton(&scale_injections(net, target), options, accepted.state.clone());
        trace.extend(&attempt.trace);
        if attempt.converged() {
            on_accept(target, &attempt);
            schedule.accept(target);
            accepted = attempt;
        } else if !schedule.reject() {
            return with_trace(attempt, trace);
        }
    }
    with_trace(accepted, trace)
}

fn with_trace(mut result: SolveResult, trace: ConvergenceTrace) -> SolveResult {
    result.iterations = trace.len();
    result.trace = trace;
    result
}

/// Newton with limiting per `options`; on failure, escalates to power
/// stepping when enabled. The returned trace covers both attempts.
pub fn solve_robust(net: &NetworkModel, options: &SolverOptions) -> SolveResult {
    let layout = UnknownLayout::build(net);
    let first = run_newton(net, options, StateVector::initial(net, &layout, options));
    let failed = matches!(
        first.status,
        SolveStatus::Diverged | SolveStatus::MaxIterations | SolveStatus::SingularSystem
    );
    if !(failed && options.enable_stepping) {
        return first;
    }
    let mut trace = first.trace;
    let second = run_power_stepping(net, options);
    trace.extend(&second.trace);
    with_trace(second, trace)
}
