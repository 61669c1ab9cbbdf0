#![allow(dead_code)]

use std::path::PathBuf;

use ivpf::case::load_case;
use ivpf::circuit::UnknownLayout;
use ivpf::solver::Assembler;
use ivpf::NetworkModel;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

pub fn two_bus() -> NetworkModel {
    load_case(fixture("case2.m")).unwrap()
}

pub fn ieee14() -> NetworkModel {
    load_case(fixture("case14.m")).unwrap()
}

/// Random states with bus voltage magnitudes in [0.5, 2] (so every component
/// is within ±2 pu), Q_G in [−10, 10] and slack currents in [−5, 5].
pub fn random_states(net: &NetworkModel, n: usize, seed: u64) -> Vec<Vec<f64>> {
    let layout = UnknownLayout::build(net);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let mut x = vec![0.0; layout.n_unknowns()];
            for b in 0..layout.n_bus() {
                let m: f64 = rng.random_range(0.5..=2.0);
                let a: f64 = rng.random_range(-std::f64::consts::PI..std::f64::consts::PI);
                x[layout.vr_index(b)] = m * a.cos();
                x[layout.vi_index(b)] = m * a.sin();
            }
            for g in 0..layout.n_pv() {
                x[layout.q_index(g)] = rng.random_range(-10.0..=10.0);
            }
            for s in 0..layout.n_slack() {
                x[layout.slack_ir_index(s)] = rng.random_range(-5.0..=5.0);
                x[layout.slack_ii_index(s)] = rng.random_range(-5.0..=5.0);
            }
            x
        })
        .collect()
}

#[derive(Debug, Default)]
pub struct FdReport {
    pub checked: usize,
    pub worst_relative: f64,
    /// Largest central difference where the analytic entry is structurally zero.
    pub worst_structural_zero: f64,
}

/// Compares the assembled Jacobian with central differences of the residual.
pub fn finite_difference_check(net: &NetworkModel, x: &[f64], h: f64) -> FdReport {
    let asm = Assembler::new(net).unwrap();
    let (jac, _) = asm.assemble(x).unwrap();
    let n = x.len();
    let mut report = FdReport::default();
    for c in 0..n {
        let mut up = x.to_vec();
        let mut dn = x.to_vec();
        up[c] += h;
        dn[c] -= h;
        let fu = asm.residual(&up).unwrap();
        let fd = asm.residual(&dn).unwrap();
        for r in 0..n {
            let numeric = (fu[r] - fd[r]) / (2.0 * h);
            let analytic = jac.get(r, c);
            if analytic == 0.0 {
                report.worst_structural_zero = report.worst_structural_zero.max(numeric.abs());
                continue;
            }
            let rel = (analytic - numeric).abs() / analytic.abs().max(numeric.abs());
            report.worst_relative = report.worst_relative.max(rel);
            report.checked += 1;
        }
    }
    report
}
