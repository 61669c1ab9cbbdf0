use ivpf::case::BusKind;
use num_complex::Complex64;
use ivpf::circuit::UnknownLayout;
use ivpf::{power_mismatch, NetworkModel, SolutionClass, SolveResult};
use serde::Serialize;

#[derive(Serialize)]
pub struct BusSolution {
    pub id: i64,
    pub kind: &'static str,
    pub v_r: f64,
    pub v_i: f64,
    pub v_mag: f64,
    pub theta: f64,
}

#[derive(Serialize)]
pub struct GenSolution {
    pub bus: i64,
    pub q_g: f64,
}

/// Power delivered by a slack source, pu.
#[derive(Serialize)]
pub struct SlackSolution {
    pub bus: i64,
    pub p_g: f64,
    pub q_g: f64,
}

#[derive(Serialize)]
pub struct SolutionDoc<'a> {
    pub status: &'static str,
    pub iterations: usize,
    pub residual_norm: f64,
    pub classification: &'a SolutionClass,
    pub mismatch: f64,
    pub buses: Vec<BusSolution>,
    pub generators: Vec<GenSolution>,
    pub slack: Vec<SlackSolution>,
}

impl<'a> SolutionDoc<'a> {
    pub fn new(net: &NetworkModel, result: &SolveResult, class: &'a SolutionClass) -> Self {
        let layout = UnknownLayout::build(net);
        let v = result.state.bus_voltages(&layout);
        let buses = net
            .buses
            .iter()
            .zip(&v)
            .map(|(b, v)| BusSolution {
                id: b.id,
                kind: match b.kind {
                    BusKind::Slack => "slack",
                    BusKind::Pv => "pv",
                    BusKind::Pq => "pq",
                },
                v_r: v.re,
                v_i: v.im,
                v_mag: v.norm(),
                theta: v.arg(),
            })
            .collect();
        let generators = net
            .pv_gens
            .iter()
            .zip(result.state.q_gen(&layout))
            .map(|(g, q_g)| GenSolution { bus: net.buses[g.bus].id, q_g })
            .collect();
        let slack = layout
            .slack_buses()
            .iter()
            .enumerate()
            .map(|(k, &b)| {
                let x = &result.state.values;
                let current = Complex64::new(x[layout.slack_ir_index(k)], x[layout.slack_ii_index(k)]);
                let s = v[b] * current.conj();
                SlackSolution { bus: net.buses[b].id, p_g: s.re, q_g: s.im }
            })
            .collect();
        Self {
            status: result.status.as_str(),
            iterations: result.iterations,
            residual_norm: result.residual_norm,
            classification: class,
            mismatch: power_mismatch(net, &v).max_mismatch(),
            buses,
            generators,
            slack,
        }
    }
}
