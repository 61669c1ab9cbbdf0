use serde::{Deserialize, Serialize};

use crate::circuit::UnknownLayout;
use crate::solver::{SolverOptions, StateVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LimitTrigger {
    None,
    StepTooLarge,
    OutOfBox,
}

/// Damping applied to one bus's voltage step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LimiterDecision {
    pub bus: usize,
    pub alpha: f64,
    pub trigger: LimitTrigger,
}

/// Largest α ∈ [0, 1] such that `v + α·d` does not cross `±bound` in the
/// direction of `d`.
fn box_alpha(v: f64, d: f64, bound: f64) -> f64 {
    // mirror negative steps onto the positive side
    let (v, d) = if d < 0.0 { (-v, -d) } else { (v, d) };
    if v + d <= bound {
        1.0
    } else if v >= bound {
        0.0
    } else {
        (bound - v) / d
    }
}

/// Pulls `d` toward zero until `v + d` lands inside `±bound`; undoes the
/// last-ulp overshoot of `v + ((bound − v) / d)·d`.
fn settle(v: f64, mut d: f64, bound: f64) -> f64 {
    if v.abs() > bound {
        return d;
    }
    while (v + d).abs() > bound {
        d = if d > 0.0 { d.next_down() } else { d.next_up() };
    }
    d
}

/// Damps the voltage components of a Newton step.
///
/// PV buses get `α = min(1, delta_max / max(|ΔV_R|, |ΔV_I|))`, floored at
/// `alpha_min`. Every non-slack bus is further held inside the voltage box.
/// Reactive-power and slack-current components are never touched.
pub fn limit_step(
    step: &[f64],
    state: &StateVector,
    layout: &UnknownLayout,
    options: &SolverOptions,
) -> (Vec<f64>, Vec<LimiterDecision>) {
    let mut out = step.to_vec();
    let x = &state.values;
    let mut decisions = Vec::with_capacity(layout.n_pv());

    let mut is_pv = vec![false; layout.n_bus()];
    for &b in layout.pv_buses() {
        is_pv[b] = true;
    }
    let mut is_slack = vec![false; layout.n_bus()];
    for &b in layout.slack_buses() {
        is_slack[b] = true;
    }

    for bus in 0..layout.n_bus() {
        if is_slack[bus] {
            continue;
        }
        let (ir, ii) = (layout.vr_index(bus), layout.vi_index(bus));
        let (dr, di) = (step[ir], step[ii]);

        let mut alpha = 1.0;
        let mut trigger = LimitTrigger::None;
        if is_pv[bus] {
            let largest = dr.abs().max(di.abs());
            if largest > options.delta_max {
                alpha = (options.delta_max / largest).max(options.alpha_min);
                trigger = LimitTrigger::StepTooLarge;
            }
        }
        let boxed = box_alpha(x[ir], alpha * dr, options.voltage_box)
            .min(box_alpha(x[ii], alpha * di, options.voltage_box));
        if boxed < 1.0 {
            alpha *= boxed;
            trigger = LimitTrigger::OutOfBox;
        }

        if is_pv[bus] || trigger != LimitTrigger::None {
            decisions.push(LimiterDecision { bus, alpha, trigger });
        }
        out[ir] = settle(x[ir], alpha * dr, options.voltage_box);
        out[ii] = settle(x[ii], alpha * di, options.voltage_box);
    }
    (out, decisions)
}
