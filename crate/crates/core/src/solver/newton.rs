use serde::{Deserialize, Serialize};

use super::assemble::Assembler;
use super::options::{SolverOptions, StateVector};
use super::sparse::linear_solve;
use super::inf_norm;
use crate::case::NetworkModel;
use crate::circuit::UnknownLayout;
use crate::robust::limit_step;

/// Iterates whose largest voltage component exceeds this multiple of the
/// voltage box are declared diverged.
pub const DIVERGENCE_FACTOR: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolveStatus {
    Converged,
    Diverged,
    MaxIterations,
    SingularSystem,
}

impl SolveStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            SolveStatus::Converged => "Converged",
            SolveStatus::Diverged => "Diverged",
            SolveStatus::MaxIterations => "MaxIterations",
            SolveStatus::SingularSystem => "SingularSystem",
        }
    }
}

/// State of one Newton iteration: the state it started from and the step
/// damping applied when leaving it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub k: usize,
    /// Largest bus voltage magnitude.
    pub max_v: f64,
    /// Largest |V_R| or |V_I|.
    pub max_vc: f64,
    /// ∞-norm of the residual.
    pub residual: f64,
    /// Smallest limiter factor applied to the step (1 when undamped).
    pub alpha: f64,
    pub beta: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceTrace {
    pub records: Vec<IterationRecord>,
}

impl ConvergenceTrace {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn extend(&mut self, other: &ConvergenceTrace) {
        self.records.extend_from_slice(&other.records);
    }

    /// Largest voltage component seen in any iterate.
    pub fn peak_component(&self) -> f64 {
        self.records.iter().fold(0.0f64, |m, r| m.max(r.max_vc))
    }

    /// Every β value visited, in order, without repeats.
    pub fn betas(&self) -> Vec<f64> {
        let mut out: Vec<f64> = Vec::new();
        for r in &self.records {
            if out.last() != Some(&r.beta) {
                out.push(r.beta);
            }
        }
        out
    }

    /// `k,max_v,residual,alpha,beta` rows with a header line.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("k,max_v,residual,alpha,beta\n");
        for r in &self.records {
            s.push_str(&format!("{},{},{},{},{}\n", r.k, r.max_v, r.residual, r.alpha, r.beta));
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub status: SolveStatus,
    pub state: StateVector,
    pub iterations: usize,
    pub residual_norm: f64,
    pub trace: ConvergenceTrace,
}

impl SolveResult {
    pub fn converged(&self) -> bool {
        self.status == SolveStatus::Converged
    }
}

/// Newton-Raphson from `initial` on `net`, limiting per `options`.
pub fn run_newton(net: &NetworkModel, options: &SolverOptions, initial: StateVector) -> SolveResult {
    match Assembler::new(net) {
        Ok(asm) => run_newton_with(&asm, options, initial),
        Err(_) => SolveResult {
            status: SolveStatus::SingularSystem,
            iterations: 0,
            residual_norm: f64::INFINITY,
            trace: ConvergenceTrace::default(),
            state: initial,
        },
    }
}

fn record(layout: &UnknownLayout, x: &StateVector, k: usize, residual: f64, alpha: f64, beta: f64) -> IterationRecord {
    IterationRecord {
        k,
        max_v: x.max_magnitude(layout),
        max_vc: x.max_component(layout),
        residual,
        alpha,
        beta,
    }
}

/// Residual threshold that also bounds the power mismatch.
///
/// At a bus, `ΔS = −V·conj(f)`, so `|ΔP|, |ΔQ| ≤ √2·|V|·‖f‖∞`. Dividing
/// `tol` by that factor makes every converged state balance power to `tol`.
fn converged_below(tol: f64, x: &StateVector, layout: &UnknownLayout) -> f64 {
    tol / (std::f64::consts::SQRT_2 * x.max_magnitude(layout).max(1.0))
}

/// Newton-Raphson on a prepared assembler.
pub fn run_newton_with(asm: &Assembler<'_>, options: &SolverOptions, initial: StateVector) -> SolveResult {
    let layout = asm.layout();
    let beta = asm.network().scale.beta;
    let blowup = DIVERGENCE_FACTOR * options.voltage_box;
    let mut x = initial;
    let mut trace = ConvergenceTrace::default();

    let finish = |status, x: StateVector, trace: ConvergenceTrace| {
        let residual_norm = trace.records.last().map_or(f64::INFINITY, |r| r.residual);
        SolveResult { status, iterations: trace.len(), residual_norm, trace, state: x }
    };

    for k in 0..options.max_iter {
        x.iteration = k;
        let (jac, f) = match asm.assemble(&x.values) {
            Ok(sys) => sys,
            Err(_) => {
                trace.records.push(record(layout, &x, k, f64::INFINITY, 1.0, beta));
                return finish(SolveStatus::Diverged, x, trace);
            }
        };
        let norm = inf_norm(&f);
        if norm < converged_below(options.tol, &x, layout) {
            trace.records.push(record(layout, &x, k, norm, 1.0, beta));
            return finish(SolveStatus::Converged, x, trace);
        }
        if !norm.is_finite() {
            trace.records.push(record(layout, &x, k, norm, 1.0, beta));
            return finish(SolveStatus::Diverged, x, trace);
        }
        let step = match linear_solve(&jac, &f) {
            Ok(dx) => dx,
            Err(_) => {
                trace.records.push(record(layout, &x, k, norm, 1.0, beta));
                return finish(SolveStatus::SingularSystem, x, trace);
            }
        };
        let (step, alpha) = if options.enable_limiting {
            let (damped, decisions) = limit_step(&step, &x, layout, options);
            let alpha = decisions.iter().fold(1.0f64, |m, d| m.min(d.alpha));
            (damped, alpha)
        } else {
            (step, 1.0)
        };
        trace.records.push(record(layout, &x, k, norm, alpha, beta));

        for (xi, d) in x.values.iter_mut().zip(&step) {
            *xi += d;
        }
        if !x.is_finite() || x.max_component(layout) > blowup {
            x.iteration = k + 1;
            let residual = asm.residual(&x.values).map_or(f64::INFINITY, |f| inf_norm(&f));
            trace.records.push(record(layout, &x, k + 1, residual, 1.0, beta));
            return finish(SolveStatus::Diverged, x, trace);
        }
    }
    x.iteration = options.max_iter;
    finish(SolveStatus::MaxIterations, x, trace)
}
