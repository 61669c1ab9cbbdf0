use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::ybus::build_ybus;
use crate::case::{BusKind, NetworkModel};

/// Power balance at a candidate solution. ΔQ is reported for PQ buses,
/// `|V| − v_set` for PV buses; the slack bus is exempt.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MismatchReport {
    pub dp: Vec<f64>,
    pub dq: Vec<f64>,
    pub dv: Vec<f64>,
    pub vm: Vec<f64>,
    pub max_p_mismatch: f64,
    pub max_q_mismatch: f64,
    pub max_v_mismatch: f64,
}

impl MismatchReport {
    pub fn max_mismatch(&self) -> f64 {
        self.max_p_mismatch.max(self.max_q_mismatch).max(self.max_v_mismatch)
    }
}

/// Complex power drawn by a current-form polynomial load at voltage `v`.
fn poly_power(g_r: &[f64; 6], g_i: &[f64; 6], v: Complex64) -> Complex64 {
    let (a, b) = (v.re, v.im);
    let terms = [1.0, a, b, a * b, a * a, b * b];
    let current = Complex64::new(
        terms.iter().zip(g_r).map(|(t, g)| t * g).sum(),
        terms.iter().zip(g_i).map(|(t, g)| t * g).sum(),
    );
    v * current.conj()
}

pub fn power_mismatch(net: &NetworkModel, voltages: &[Complex64]) -> MismatchReport {
    let n = net.n_bus();
    assert_eq!(voltages.len(), n, "one voltage per bus");
    let y = build_ybus(net);

    // scheduled net injection
    let mut sched: Vec<Complex64> = (0..n).map(|i| -Complex64::new(net.p_load(i), net.q_load(i))).collect();
    for g in 0..net.pv_gens.len() {
        sched[net.pv_gens[g].bus] += net.p_gen(g);
    }
    for k in 0..net.poly_loads.len() {
        let c = net.poly_coeffs(k);
        let bus = net.poly_loads[k].bus;
        sched[bus] -= poly_power(&c.g_r, &c.g_i, voltages[bus]);
    }

    let mut report = MismatchReport {
        dp: vec![0.0; n],
        dq: vec![0.0; n],
        dv: vec![0.0; n],
        vm: voltages.iter().map(|v| v.norm()).collect(),
        max_p_mismatch: 0.0,
        max_q_mismatch: 0.0,
        max_v_mismatch: 0.0,
    };
    for (i, bus) in net.buses.iter().enumerate() {
        if bus.kind == BusKind::Slack {
            continue;
        }
        let current: Complex64 = (0..n).map(|k| y[(i, k)] * voltages[k]).sum();
        let s = voltages[i] * current.conj();
        report.dp[i] = s.re - sched[i].re;
        match bus.kind {
            BusKind::Pq => report.dq[i] = s.im - sched[i].im,
            BusKind::Pv => report.dv[i] = report.vm[i] - bus.v_set,
            BusKind::Slack => {}
        }
    }
    let max_abs = |v: &[f64]| v.iter().fold(0.0f64, |m, x| if x.is_nan() { f64::NAN } else { m.max(x.abs()) });
    report.max_p_mismatch = max_abs(&report.dp);
    report.max_q_mismatch = max_abs(&report.dq);
    report.max_v_mismatch = max_abs(&report.dv);
    report
}
