use serde::{Deserialize, Serialize};

use super::mismatch::power_mismatch;
use crate::case::NetworkModel;
use crate::circuit::UnknownLayout;
use crate::solver::{SolveResult, SolveStatus};

/// Voltage magnitudes a correct physical operating point must lie in, pu.
pub const PHYSICAL_BAND: (f64, f64) = (0.5, 1.5);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolutionLabel {
    CorrectPhysical,
    WrongSolution,
    Failed,
}

impl SolutionLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            SolutionLabel::CorrectPhysical => "CorrectPhysical",
            SolutionLabel::WrongSolution => "WrongSolution",
            SolutionLabel::Failed => "Failed",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionClass {
    pub label: SolutionLabel,
    pub reason: String,
}

pub fn classify_solution(result: &SolveResult, net: &NetworkModel, tol: f64) -> SolutionClass {
    if result.status != SolveStatus::Converged {
        return SolutionClass {
            label: SolutionLabel::Failed,
            reason: format!("solver status {}", result.status.as_str()),
        };
    }
    let layout = UnknownLayout::build(net);
    let report = power_mismatch(net, &result.state.bus_voltages(&layout));
    let worst = report.max_mismatch();
    if !(worst < tol) {
        return SolutionClass {
            label: SolutionLabel::WrongSolution,
            reason: format!("power mismatch {worst:e} pu exceeds {tol:e}"),
        };
    }
    let (lo, hi) = PHYSICAL_BAND;
    if let Some((i, v)) = report.vm.iter().enumerate().find(|(_, v)| !(**v >= lo && **v <= hi)) {
        return SolutionClass {
            label: SolutionLabel::WrongSolution,
            reason: format!("bus {} voltage {v:.4} pu outside [{lo}, {hi}]", net.buses[i].id),
        };
    }
    SolutionClass {
        label: SolutionLabel::CorrectPhysical,
        reason: format!("mismatch {worst:e} pu"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::case::{build_network, parse_matpower};
    use crate::circuit::DeviceStamp;
    use crate::solver::{run_newton, run_newton_with, Assembler, ConvergenceTrace, SolverOptions, StateVector};
    use num_complex::Complex64;

    fn net(text: &str) -> NetworkModel {
        build_network(&parse_matpower(text).unwrap()).unwrap()
    }

    /// Two-bus feeder with `P + jQ` drawn at bus 2.
    fn loaded_two_bus(p: f64, q: f64) -> NetworkModel {
        let mut n = net(include_str!("../../fixtures/case2.m"));
        n.buses[1].p_load = p;
        n.buses[1].q_load = q;
        n
    }

    fn converged_at(n: &NetworkModel, v2: Complex64) -> SolveResult {
        let layout = UnknownLayout::build(n);
        let mut state = StateVector::flat_start(n, &layout, 0.0);
        state.values[layout.vr_index(1)] = v2.re;
        state.values[layout.vi_index(1)] = v2.im;
        SolveResult {
            status: SolveStatus::Converged,
            state,
            iterations: 1,
            residual_norm: 0.0,
            trace: ConvergenceTrace::default(),
        }
    }

    /// Both roots of `u² + (2(rP + xQ) − 1)u + |Z|²|S|² = 0` with `u = |V₂|²`,
    /// and `V₂ = u + Z̄·S` for a unit sending-end voltage.
    fn two_bus_roots(r: f64, x: f64, p: f64, q: f64) -> [Complex64; 2] {
        let z = Complex64::new(r, x);
        let s = Complex64::new(p, q);
        let b = 2.0 * (r * p + x * q) - 1.0;
        let c = z.norm_sqr() * s.norm_sqr();
        let disc = (b * b - 4.0 * c).sqrt();
        [(-b + disc) / 2.0, (-b - disc) / 2.0].map(|u| u + z.conj() * s)
    }

    #[test]
    fn non_converged_is_failed() {
        let n = net(include_str!("../../fixtures/case14.m"));
        let opts = SolverOptions { max_iter: 1, ..SolverOptions::default() };
        let layout = UnknownLayout::build(&n);
        let r = run_newton(&n, &opts, StateVector::flat_start(&n, &layout, 0.0));
        assert_eq!(r.status, SolveStatus::MaxIterations);
        assert_eq!(classify_solution(&r, &n, 1e-6).label, SolutionLabel::Failed);

        let diverged = SolveResult { status: SolveStatus::Diverged, ..r };
        assert_eq!(classify_solution(&diverged, &n, 1e-6).label, SolutionLabel::Failed);
    }

    #[test]
    fn low_voltage_root_is_wrong_solution() {
        let n = loaded_two_bus(0.5, 0.2);
        let [high, low] = two_bus_roots(0.01, 0.1, 0.5, 0.2);
        assert!(low.norm() < 0.1);

        let good = classify_solution(&converged_at(&n, high), &n, 1e-6);
        assert_eq!(good.label, SolutionLabel::CorrectPhysical, "{}", good.reason);
        let bad = classify_solution(&converged_at(&n, low), &n, 1e-6);
        assert_eq!(bad.label, SolutionLabel::WrongSolution, "{}", bad.reason);
        assert!(bad.reason.contains("outside"));
    }

    #[test]
    fn solver_agrees_with_the_analytic_root() {
        let n = loaded_two_bus(0.5, 0.2);
        let [high, _] = two_bus_roots(0.01, 0.1, 0.5, 0.2);
        let layout = UnknownLayout::build(&n);
        let r = run_newton(&n, &SolverOptions::default(), StateVector::flat_start(&n, &layout, 0.0));
        assert!(r.converged());
        assert!((r.state.bus_voltages(&layout)[1] - high).norm() < 1e-6);
    }

    /// A deliberately wrong stamp makes the split equations converge to a
    /// state that does not balance power; the oracle must notice.
    #[test]
    fn oracle_flags_a_sign_bug() {
        let n = loaded_two_bus(0.5, 0.2);
        let layout = UnknownLayout::build(&n);
        // flips the sign of the load's real current at nominal voltage
        let bug = DeviceStamp { jacobian: vec![], residual: vec![(layout.vr_index(1), 1.0)] };
        let asm = Assembler::new(&n).unwrap().with_extra_stamp(bug);
        let r = run_newton_with(&asm, &SolverOptions::default(), StateVector::flat_start(&n, &layout, 0.0));
        assert!(r.converged());
        let class = classify_solution(&r, &n, 1e-6);
        assert_eq!(class.label, SolutionLabel::WrongSolution, "{}", class.reason);
    }
}
