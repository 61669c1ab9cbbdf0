//! Experiment protocols: random initial reactive-power sweeps and loading
//! sweeps over the four on/off combinations of limiting and stepping.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::case::{apply_loading, NetworkModel};
use crate::circuit::UnknownLayout;
use crate::oracle::{classify_solution, power_mismatch, SolutionClass, SolutionLabel};
use crate::par::{map_ordered, Execution};
use crate::robust::solve_robust;
use crate::solver::{SolveResult, SolverOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Scenario {
    pub id: u8,
    pub limiting: bool,
    pub stepping: bool,
}

/// 1: neither technique, 2: stepping only, 3: limiting only, 4: both.
pub const SCENARIOS: [Scenario; 4] = [
    Scenario { id: 1, limiting: false, stepping: false },
    Scenario { id: 2, limiting: false, stepping: true },
    Scenario { id: 3, limiting: true, stepping: false },
    Scenario { id: 4, limiting: true, stepping: true },
];

fn on_off(v: bool) -> &'static str {
    if v {
        "on"
    } else {
        "off"
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub scenario: u8,
    /// q_init (pu) or loading factor.
    pub param: f64,
    pub limiting: &'static str,
    pub stepping: &'static str,
    pub status: &'static str,
    pub iters: usize,
    pub max_v: f64,
    pub mismatch: f64,
    pub class: &'static str,
    /// |V| at the tracked bus (loading sweeps only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tracked_v: Option<f64>,
}

/// One solve of a sweep with everything needed to check it afterwards.
#[derive(Debug, Clone)]
pub struct SweepRun {
    pub row: SweepRow,
    pub class: SolutionClass,
    pub voltages: Vec<Complex64>,
    /// Largest |V_R| or |V_I| over every iterate.
    pub peak_component: f64,
    pub result: SolveResult,
}

#[derive(Debug, Clone, Default)]
pub struct SweepReport {
    pub runs: Vec<SweepRun>,
}

impl SweepReport {
    pub fn rows(&self) -> impl Iterator<Item = &SweepRow> {
        self.runs.iter().map(|r| &r.row)
    }

    pub fn scenario(&self, id: u8) -> impl Iterator<Item = &SweepRun> {
        self.runs.iter().filter(move |r| r.row.scenario == id)
    }

    pub fn to_csv(&self) -> Result<String, csv::Error> {
        let tracked = self.runs.iter().any(|r| r.row.tracked_v.is_some());
        let mut w = csv::Writer::from_writer(Vec::new());
        if self.runs.is_empty() {
            let mut header = vec!["scenario", "param", "limiting", "stepping", "status", "iters", "max_v", "mismatch", "class"];
            if tracked {
                header.push("tracked_v");
            }
            w.write_record(&header)?;
        }
        for row in self.rows() {
            w.serialize(row)?;
        }
        let bytes = w.into_inner().map_err(|e| e.into_error())?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

fn run_one(net: &NetworkModel, options: &SolverOptions, scenario: Scenario, param: f64, track: Option<usize>) -> SweepRun {
    let options = options.clone().with_techniques(scenario.limiting, scenario.stepping);
    let result = solve_robust(net, &options);
    let class = classify_solution(&result, net, options.tol);
    let layout = UnknownLayout::build(net);
    let voltages = result.state.bus_voltages(&layout);
    let mismatch = power_mismatch(net, &voltages).max_mismatch();
    let max_v = voltages.iter().fold(0.0f64, |m, v| m.max(v.norm()));
    SweepRun {
        row: SweepRow {
            scenario: scenario.id,
            param,
            limiting: on_off(scenario.limiting),
            stepping: on_off(scenario.stepping),
            status: result.status.as_str(),
            iters: result.iterations,
            max_v,
            mismatch,
            class: class.label.as_str(),
            tracked_v: track.map(|b| voltages[b].norm()),
        },
        class,
        peak_component: result.trace.peak_component(),
        voltages,
        result,
    }
}

/// `n` initial reactive-power guesses drawn uniformly from `range` with a
/// seeded generator. Rows are ordered by scenario, then by draw.
pub fn draw_q_inits(n: usize, range: (f64, f64), seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.random_range(range.0..=range.1)).collect()
}

pub fn qinit_sweep(
    net: &NetworkModel,
    options: &SolverOptions,
    q_inits: &[f64],
    scenarios: &[Scenario],
    exec: Execution,
) -> SweepReport {
    let jobs: Vec<(Scenario, f64)> =
        scenarios.iter().flat_map(|&s| q_inits.iter().map(move |&q| (s, q))).collect();
    let runs = map_ordered(&jobs, exec, |&(scenario, q)| {
        let opts = SolverOptions { q_init: q, flat_start: true, ..options.clone() };
        run_one(net, &opts, scenario, q, None)
    });
    SweepReport { runs }
}

/// Loading factors `1, 1 + step, ...` up to and including `max` (within
/// half a step of rounding).
pub fn loading_grid(max: f64, step: f64) -> Vec<f64> {
    if !(step > 0.0) || max < 1.0 {
        return vec![1.0];
    }
    let n = ((max - 1.0) / step + 1e-9).floor() as usize;
    (0..=n).map(|i| 1.0 + i as f64 * step).collect()
}

pub fn loading_sweep(
    net: &NetworkModel,
    options: &SolverOptions,
    lambdas: &[f64],
    track_bus: usize,
    scenarios: &[Scenario],
    exec: Execution,
) -> SweepReport {
    let jobs: Vec<(Scenario, f64)> =
        scenarios.iter().flat_map(|&s| lambdas.iter().map(move |&l| (s, l))).collect();
    let runs = map_ordered(&jobs, exec, |&(scenario, lambda)| {
        let loaded = apply_loading(net, lambda);
        let opts = SolverOptions { flat_start: true, ..options.clone() };
        run_one(&loaded, &opts, scenario, lambda, Some(track_bus))
    });
    SweepReport { runs }
}

impl SweepRun {
    pub fn is_correct(&self) -> bool {
        self.class.label == SolutionLabel::CorrectPhysical
    }
}
