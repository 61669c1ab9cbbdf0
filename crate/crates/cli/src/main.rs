//! `ivpf`: solve a MATPOWER case or run the random-Q and loading sweeps.
//!
//! Exit codes: 0 when the run yields a correct physical solution (or a sweep
//! completes), 1 when a solve fails or lands on a wrong solution, 2 on bad
//! input.

mod solution;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use ivpf::case::{attach_poly_loads, load_case, parse_poly_loads};
use ivpf::harness::{
    draw_q_inits, loading_grid, loading_sweep, qinit_sweep, Scenario, SweepReport, SCENARIOS,
};
use ivpf::par::Execution;
use ivpf::{classify_solution, solve_robust, NetworkModel, SolutionLabel, SolverOptions};

#[derive(Parser)]
#[command(name = "ivpf", version, about = "Robust AC power flow in split current-voltage form")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one case and write solution.json and trace.csv.
    Solve(SolveArgs),
    /// Solve from random initial generator Q under the four scenarios.
    QinitSweep(QinitArgs),
    /// Scale loads and PV generation over a grid of loading factors.
    LoadingSweep(LoadingArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Toggle {
    On,
    Off,
}

impl From<Toggle> for bool {
    fn from(t: Toggle) -> bool {
        matches!(t, Toggle::On)
    }
}

#[derive(Args)]
struct Common {
    /// MATPOWER case file.
    #[arg(long)]
    case: PathBuf,
    /// JSON sidecar with polynomial loads.
    #[arg(long)]
    poly_loads: Option<PathBuf>,
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    #[arg(long, default_value_t = 100)]
    max_iter: usize,
    /// For sweeps, restricts the scenario matrix to matching rows.
    #[arg(long)]
    limiting: Option<Toggle>,
    /// For sweeps, restricts the scenario matrix to matching rows.
    #[arg(long)]
    stepping: Option<Toggle>,
    /// Initial reactive power of every PV generator, pu.
    #[arg(long, default_value_t = 0.0)]
    q_init: f64,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Output directory, created if missing.
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct QinitArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, default_value_t = 20)]
    n_inits: usize,
}

#[derive(Args)]
struct LoadingArgs {
    #[command(flatten)]
    common: Common,
    /// Zero-based index of the bus whose |V| is recorded.
    #[arg(long, default_value_t = 2)]
    track_bus: usize,
    #[arg(long, default_value_t = 4.0)]
    lambda_max: f64,
    #[arg(long, default_value_t = 0.25)]
    lambda_step: f64,
}

const Q_RANGE: (f64, f64) = (-10.0, 10.0);

/// An error that should map to exit code 2.
#[derive(Debug)]
struct InputError(anyhow::Error);

impl<E: Into<anyhow::Error>> From<E> for InputError {
    fn from(e: E) -> Self {
        InputError(e.into())
    }
}

impl Common {
    fn network(&self) -> Result<NetworkModel> {
        let net = load_case(&self.case).with_context(|| format!("reading case {}", self.case.display()))?;
        let Some(path) = &self.poly_loads else {
            return Ok(net);
        };
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let entries = parse_poly_loads(&text).with_context(|| format!("parsing {}", path.display()))?;
        Ok(attach_poly_loads(&net, &entries)?)
    }

    fn options(&self) -> Result<SolverOptions> {
        let mut opts = SolverOptions { tol: self.tol, max_iter: self.max_iter, q_init: self.q_init, ..Default::default() };
        if let Some(l) = self.limiting {
            opts.enable_limiting = l.into();
        }
        if let Some(s) = self.stepping {
            opts.enable_stepping = s.into();
        }
        opts.validate()?;
        Ok(opts)
    }

    fn scenarios(&self) -> Vec<Scenario> {
        SCENARIOS
            .iter()
            .copied()
            .filter(|s| self.limiting.is_none_or(|l| s.limiting == bool::from(l)))
            .filter(|s| self.stepping.is_none_or(|t| s.stepping == bool::from(t)))
            .collect()
    }

    fn prepare_out(&self) -> Result<()> {
        fs::create_dir_all(&self.out).with_context(|| format!("creating {}", self.out.display()))
    }
}

fn write(dir: &Path, name: &str, contents: &str) -> Result<()> {
    let path = dir.join(name);
    fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))
}

fn cmd_solve(args: &SolveArgs) -> Result<bool, InputError> {
    let c = &args.common;
    let net = c.network()?;
    let opts = c.options()?;
    c.prepare_out()?;

    let result = solve_robust(&net, &opts);
    let class = classify_solution(&result, &net, opts.tol);
    let doc = solution::SolutionDoc::new(&net, &result, &class);
    write(&c.out, "solution.json", &(serde_json::to_string_pretty(&doc)? + "\n"))?;
    write(&c.out, "trace.csv", &result.trace.to_csv())?;

    println!(
        "{}: {} after {} iterations, residual {:.3e}, {}",
        c.case.display(),
        result.status.as_str(),
        result.iterations,
        result.residual_norm,
        class.reason
    );
    println!("classification: {}", class.label.as_str());
    Ok(class.label == SolutionLabel::CorrectPhysical)
}

fn summarize(report: &SweepReport, scenarios: &[Scenario]) {
    for s in scenarios {
        let runs: Vec<_> = report.scenario(s.id).collect();
        let good = runs.iter().filter(|r| r.is_correct()).count();
        println!(
            "scenario {} (limiting {}, stepping {}): {good}/{} CorrectPhysical",
            s.id,
            if s.limiting { "on" } else { "off" },
            if s.stepping { "on" } else { "off" },
            runs.len()
        );
    }
}

fn cmd_qinit_sweep(args: &QinitArgs) -> Result<bool, InputError> {
    let c = &args.common;
    let net = c.network()?;
    let opts = c.options()?;
    if net.pv_gens.is_empty() {
        return Err(anyhow::anyhow!("case has no PV generators; nothing to initialise").into());
    }
    c.prepare_out()?;

    let scenarios = c.scenarios();
    let q = draw_q_inits(args.n_inits, Q_RANGE, c.seed);
    let report = qinit_sweep(&net, &opts, &q, &scenarios, Execution::default());
    write(&c.out, "qinit_sweep.csv", &report.to_csv()?)?;
    summarize(&report, &scenarios);
    Ok(true)
}

fn cmd_loading_sweep(args: &LoadingArgs) -> Result<bool, InputError> {
    let c = &args.common;
    let net = c.network()?;
    let opts = c.options()?;
    if args.track_bus >= net.n_bus() {
        return Err(anyhow::anyhow!("--track-bus {} out of range (case has {} buses)", args.track_bus, net.n_bus()).into());
    }
    if !(args.lambda_step > 0.0 && args.lambda_max >= 1.0) {
        return Err(anyhow::anyhow!("need --lambda-step > 0 and --lambda-max >= 1").into());
    }
    c.prepare_out()?;

    let scenarios = c.scenarios();
    let lambdas = loading_grid(args.lambda_max, args.lambda_step);
    let report = loading_sweep(&net, &opts, &lambdas, args.track_bus, &scenarios, Execution::default());
    write(&c.out, "loading_sweep.csv", &report.to_csv()?)?;
    summarize(&report, &scenarios);
    Ok(true)
}

fn run(cli: &Cli) -> Result<bool, InputError> {
    match &cli.command {
        Command::Solve(a) => cmd_solve(a),
        Command::QinitSweep(a) => cmd_qinit_sweep(a),
        Command::LoadingSweep(a) => cmd_loading_sweep(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(InputError(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
