mod common;

use common::{fixture, ieee14};
use ivpf::case::{attach_poly_loads, parse_poly_loads};
use ivpf::circuit::UnknownLayout;
use ivpf::oracle::polar_nr_reference;
use ivpf::{
    apply_loading, classify_solution, power_mismatch, run_power_stepping, solve_robust, SolutionLabel,
    SolveStatus, SolverOptions,
};

fn max_voltage_gap(a: &[num_complex::Complex64], b: &[num_complex::Complex64]) -> f64 {
    a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).norm()))
}

#[test]
fn robust_solve_matches_polar_reference() {
    let net = ieee14();
    let layout = UnknownLayout::build(&net);
    let r = solve_robust(&net, &SolverOptions::default());
    assert!(r.converged());
    let v = r.state.bus_voltages(&layout);
    let p = polar_nr_reference(&net, 1e-10, 20).unwrap();
    assert!(p.converged);
    for (i, vi) in v.iter().enumerate() {
        assert!((vi.norm() - p.vm[i]).abs() < 1e-6);
        assert!((vi.arg() - p.va[i]).abs() < 1e-6);
    }
}

#[test]
fn solution_is_close_to_stored_case_voltages() {
    let net = ieee14();
    let layout = UnknownLayout::build(&net);
    let r = solve_robust(&net, &SolverOptions::default());
    for (bus, v) in net.buses.iter().zip(r.state.bus_voltages(&layout)) {
        assert!((v.norm() - bus.vm_case).abs() < 1e-3, "bus {}", bus.id);
        assert!((v.arg() - bus.va_case).abs() < 1e-3, "bus {}", bus.id);
    }
}

#[test]
fn stepping_at_four_times_load() {
    let net = apply_loading(&ieee14(), 4.0);
    let r = run_power_stepping(&net, &SolverOptions::default());
    assert_eq!(r.status, SolveStatus::Converged);
    assert_eq!(*r.trace.betas().last().unwrap(), 1.0);
    let layout = UnknownLayout::build(&net);
    assert!(power_mismatch(&net, &r.state.bus_voltages(&layout)).max_mismatch() < 1e-6);
}

#[test]
fn accepted_betas_never_decrease() {
    // betas of converged sub-solves are the accepted schedule
    let net = apply_loading(&ieee14(), 3.9);
    let opts = SolverOptions::default();
    let r = run_power_stepping(&net, &opts);
    assert!(r.converged());
    let accepted: Vec<f64> = r
        .trace
        .records
        .iter()
        .filter(|rec| rec.residual < opts.tol)
        .map(|rec| rec.beta)
        .collect();
    assert_eq!(accepted.first(), Some(&0.0));
    assert!(accepted.windows(2).all(|w| w[1] >= w[0]), "{accepted:?}");
}

#[test]
fn infeasible_loading_aborts() {
    let net = apply_loading(&ieee14(), 6.0);
    let r = run_power_stepping(&net, &SolverOptions::default());
    assert_ne!(r.status, SolveStatus::Converged);
    assert_eq!(classify_solution(&r, &net, 1e-6).label, SolutionLabel::Failed);
    let r = solve_robust(&net, &SolverOptions::default());
    assert_ne!(r.status, SolveStatus::Converged);
}

#[test]
fn hostile_q_guess_reaches_the_flat_start_solution() {
    let net = ieee14();
    let layout = UnknownLayout::build(&net);
    let flat = solve_robust(&net, &SolverOptions::default());
    let hostile = solve_robust(&net, &SolverOptions { q_init: -10.0, ..SolverOptions::default() });
    assert!(flat.converged() && hostile.converged());
    let gap = max_voltage_gap(&flat.state.bus_voltages(&layout), &hostile.state.bus_voltages(&layout));
    assert!(gap < 1e-6, "{gap}");
}

#[test]
fn limiting_keeps_hostile_runs_in_the_box() {
    for lambda in [1.0, 3.0, 3.5, 4.0] {
        let net = apply_loading(&ieee14(), lambda);
        let opts = SolverOptions { q_init: 10.0, ..SolverOptions::default() }.with_techniques(true, false);
        let r = solve_robust(&net, &opts);
        assert!(r.trace.peak_component() <= opts.voltage_box, "lambda {lambda}");
    }
}

#[test]
fn heavier_load_depresses_pq_voltages() {
    let base = ieee14();
    let layout = UnknownLayout::build(&base);
    let bus14 = base.index_of(14).unwrap();
    let v = |lambda: f64| {
        let net = apply_loading(&base, lambda);
        let r = solve_robust(&net, &SolverOptions::default());
        assert!(r.converged());
        r.state.bus_voltages(&layout)[bus14].norm()
    };
    assert!(v(2.0) < v(1.0));
    assert!(v(3.0) < v(2.0));
}

#[test]
fn polynomial_loads_solve_and_balance() {
    let base = ieee14();
    let entries = parse_poly_loads(&std::fs::read_to_string(fixture("case14_polyloads.json")).unwrap()).unwrap();
    let net = attach_poly_loads(&base, &entries).unwrap();
    let r = solve_robust(&net, &SolverOptions::default());
    let class = classify_solution(&r, &net, 1e-6);
    assert_eq!(class.label, SolutionLabel::CorrectPhysical, "{}", class.reason);
    let layout = UnknownLayout::build(&net);
    let plain = solve_robust(&base, &SolverOptions::default());
    let gap = max_voltage_gap(&r.state.bus_voltages(&layout), &plain.state.bus_voltages(&layout));
    assert!(gap > 1e-4, "the extra load must move the operating point: {gap}");
}
