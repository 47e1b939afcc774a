//! Command-line front end.
//!
//! `run` solves one FCIDUMP and writes `trace.jsonl`, `summary.json` and
//! `rdm2.txt`; `sweep` runs a list of FCIDUMPs and writes `curve.csv`;
//! `resources` reports Cholesky and Trotter costs and measurement groupings.
//! Exit status is 0 on success (including stagnation), 1 when the solver
//! fails and 2 for bad arguments or unreadable input.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::Serialize;

use crate::acse::{run_cqe, CqeConfig, EpsilonStrategy, ResidualMethod, RunSummary, SecondOrder};
use crate::error::{CqeError, Result};
use crate::fock::{Encoding, FockState};
use crate::hamiltonian::{build_reduced_hamiltonian, fci_ground_state, parse_fcidump, IntegralSet};
use crate::resources::{auxiliary_cost_report, measurement_groups, CostModel, GroupingReport, MeasurementTarget};

/// Environment variable capping the worker thread count.
pub const THREADS_ENV: &str = "CQESIM_THREADS";

#[derive(Debug, Parser)]
#[command(name = "cqesim", version, about = "Contracted quantum eigensolver statevector simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve one FCIDUMP.
    Run {
        #[arg(long)]
        fcidump: PathBuf,
        #[command(flatten)]
        solver: SolverArgs,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Solve a list of FCIDUMPs and write a dissociation curve.
    Sweep {
        #[arg(long, num_args = 1.., required = true)]
        fcidump: Vec<PathBuf>,
        #[command(flatten)]
        solver: SolverArgs,
        #[arg(long, default_value = "sweep")]
        out: PathBuf,
    },
    /// Residual-evaluation costs and measurement grouping.
    Resources {
        #[arg(long, num_args = 1..)]
        fcidump: Vec<PathBuf>,
        /// Even qubit counts for the grouping sweep, e.g. `8,12,16`.
        #[arg(long, value_delimiter = ',')]
        grouping: Vec<usize>,
        #[arg(long, default_value = "resources")]
        out: PathBuf,
    },
}

#[derive(Debug, Clone, Args)]
pub struct SolverArgs {
    #[arg(long, default_value = "fermion")]
    pub encoding: Encoding,
    #[arg(long, default_value_t = 0.0)]
    pub sparse_c: f64,
    #[arg(long, default_value_t = 0)]
    pub p_depth: usize,
    #[arg(long, default_value_t = 0.01)]
    pub delta: f64,
    #[arg(long, default_value = "exact")]
    pub residual: ResidualMethod,
    #[arg(long, default_value = "trust")]
    pub epsilon: EpsilonStrategy<f64>,
    #[arg(long, default_value = "none")]
    pub second_order: SecondOrder,
    #[arg(long, default_value_t = 0.01)]
    pub tol: f64,
    #[arg(long, default_value_t = 200)]
    pub max_iter: usize,
    #[arg(long)]
    pub compare_fci: bool,
}

impl SolverArgs {
    pub fn config(&self) -> Result<CqeConfig<f64>> {
        let cfg = CqeConfig {
            encoding: self.encoding,
            sparse_c: self.sparse_c,
            p_depth: self.p_depth,
            delta: self.delta,
            residual_method: self.residual,
            epsilon_strategy: self.epsilon,
            second_order: self.second_order,
            tol_residual_norm: self.tol,
            max_iterations: self.max_iter,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Exit status for an error.
pub fn exit_code(err: &CqeError) -> i32 {
    match err {
        CqeError::Argument(_) | CqeError::Parse { .. } | CqeError::Json(_) | CqeError::Io(_) => 2,
        _ => 1,
    }
}

fn read_integrals(path: &Path) -> Result<IntegralSet<f64>> {
    let text = fs::read_to_string(path)
        .map_err(|e| CqeError::Argument(format!("cannot read {}: {e}", path.display())))?;
    parse_fcidump(&text)
}

/// Result of solving one FCIDUMP.
#[derive(Debug, Clone)]
pub struct PointResult {
    pub summary: RunSummary,
    pub trace_jsonl: String,
    pub rdm_text: String,
}

/// Runs the solver from the Hartree-Fock determinant of `ints`.
pub fn solve(ints: &IntegralSet<f64>, cfg: &CqeConfig<f64>, compare_fci: bool) -> Result<PointResult> {
    let ham = build_reduced_hamiltonian(ints)?;
    let reference = FockState::hartree_fock(ints.n_spatial, ints.n_alpha(), ints.n_beta())?;
    let fci = if compare_fci {
        Some(fci_ground_state(&ham, ints.n_electrons, ints.ms2)?.0)
    } else {
        None
    };
    let trace = run_cqe(&ham, &reference, cfg)?;
    Ok(PointResult {
        summary: trace.summary(fci),
        trace_jsonl: trace.to_jsonl(),
        rdm_text: trace.rdm2.to_text(),
    })
}

fn write_json<S: Serialize>(path: &Path, value: &S) -> Result<()> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    fs::write(path, s)?;
    Ok(())
}

pub fn cmd_run(fcidump: &Path, solver: &SolverArgs, out: &Path) -> Result<RunSummary> {
    let cfg = solver.config()?;
    let ints = read_integrals(fcidump)?;
    let res = solve(&ints, &cfg, solver.compare_fci)?;
    fs::create_dir_all(out)?;
    fs::write(out.join("trace.jsonl"), &res.trace_jsonl)?;
    write_json(&out.join("summary.json"), &res.summary)?;
    fs::write(out.join("rdm2.txt"), &res.rdm_text)?;
    Ok(res.summary)
}

/// One row of `curve.csv`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurvePoint {
    pub label: String,
    pub e_cqe: f64,
    pub e_fci: f64,
    pub delta_e: f64,
    pub iterations: usize,
}

/// Outcome of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepReport {
    pub points: Vec<CurvePoint>,
    /// `max ΔE - min ΔE` over the curve.
    pub nonparallelity: f64,
}

/// Directory name for a `…/name/FCIDUMP` path, else the file stem.
pub fn point_label(path: &Path) -> String {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned());
    match stem.as_deref() {
        Some(s) if s.eq_ignore_ascii_case("fcidump") => path
            .parent()
            .and_then(|p| p.file_name())
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_else(|| s.to_string()),
        Some(s) => s.to_string(),
        None => path.display().to_string(),
    }
}

fn curve_csv(points: &[CurvePoint]) -> String {
    let mut s = String::from("label,E_cqe,E_fci,delta_E,iterations\n");
    for p in points {
        let _ = writeln!(s, "{},{:.12},{:.12},{:.6e},{}", p.label, p.e_cqe, p.e_fci, p.delta_e, p.iterations);
    }
    s
}

/// Solves every point and writes `curve.csv` and `sweep.json`. When a point
/// fails, the points solved so far go to `curve.partial.csv` and the error
/// is returned.
pub fn cmd_sweep(fcidumps: &[PathBuf], solver: &SolverArgs, out: &Path) -> Result<SweepReport> {
    if fcidumps.len() < 2 {
        return Err(CqeError::Argument(format!(
            "a sweep needs at least 2 points, got {}",
            fcidumps.len()
        )));
    }
    let cfg = solver.config()?;
    fs::create_dir_all(out)?;
    let results: Vec<Result<CurvePoint>> = fcidumps
        .par_iter()
        .map(|path| {
            let label = point_label(path);
            let ints = read_integrals(path)?;
            let res = solve(&ints, &cfg, true)?;
            let dir = out.join(&label);
            fs::create_dir_all(&dir)?;
            fs::write(dir.join("trace.jsonl"), &res.trace_jsonl)?;
            write_json(&dir.join("summary.json"), &res.summary)?;
            let e_fci = res.summary.fci_energy.expect("fci requested");
            Ok(CurvePoint {
                label,
                e_cqe: res.summary.final_energy,
                e_fci,
                delta_e: res.summary.final_energy - e_fci,
                iterations: res.summary.iterations,
            })
        })
        .collect();
    let mut points = Vec::new();
    let mut first_err = None;
    for r in results {
        match r {
            Ok(p) => points.push(p),
            Err(e) => {
                first_err.get_or_insert(e);
            }
        }
    }
    if let Some(e) = first_err {
        fs::write(out.join("curve.partial.csv"), curve_csv(&points))?;
        return Err(e);
    }
    let max = points.iter().map(|p| p.delta_e).fold(f64::NEG_INFINITY, f64::max);
    let min = points.iter().map(|p| p.delta_e).fold(f64::INFINITY, f64::min);
    let report = SweepReport {
        points,
        nonparallelity: max - min,
    };
    fs::write(out.join("curve.csv"), curve_csv(&report.points))?;
    write_json(&out.join("sweep.json"), &report)?;
    Ok(report)
}

/// Cost row of one FCIDUMP.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CostRow {
    pub label: String,
    #[serde(flatten)]
    pub report: crate::resources::AuxCostReport,
}

/// Writes `costs.txt`/`costs.jsonl` for the FCIDUMPs and
/// `grouping.txt`/`grouping.jsonl` for the qubit counts.
pub fn cmd_resources(fcidumps: &[PathBuf], grouping: &[usize], out: &Path) -> Result<(Vec<CostRow>, Vec<GroupingReport>)> {
    if fcidumps.is_empty() && grouping.is_empty() {
        return Err(CqeError::Argument(
            "nothing to report: pass --fcidump and/or --grouping".into(),
        ));
    }
    fs::create_dir_all(out)?;
    let mut costs = Vec::new();
    if !fcidumps.is_empty() {
        let mut text = format!("{:<12}  {}\n", "label", crate::resources::AuxCostReport::header());
        let mut jsonl = String::new();
        for path in fcidumps {
            let ints = read_integrals(path)?;
            let ham = build_reduced_hamiltonian(&ints)?;
            let row = CostRow {
                label: point_label(path),
                report: auxiliary_cost_report(&ham, &CostModel)?,
            };
            let _ = writeln!(text, "{:<12}  {}", row.label, row.report.row());
            jsonl.push_str(&serde_json::to_string(&row)?);
            jsonl.push('\n');
            costs.push(row);
        }
        fs::write(out.join("costs.txt"), text)?;
        fs::write(out.join("costs.jsonl"), jsonl)?;
    }
    let mut groups = Vec::new();
    if !grouping.is_empty() {
        let jobs: Vec<(usize, MeasurementTarget)> = grouping
            .iter()
            .flat_map(|&n| [MeasurementTarget::EncodedA, MeasurementTarget::UnencodedA].map(|t| (n, t)))
            .collect();
        let reports: Vec<Result<GroupingReport>> = jobs
            .par_iter()
            .map(|&(n, t)| measurement_groups(n, t).map(|r| r.0))
            .collect();
        for r in reports {
            groups.push(r?);
        }
        let mut text = format!("{}\n", GroupingReport::header());
        let mut jsonl = String::new();
        for r in &groups {
            let _ = writeln!(text, "{}", r.row());
            jsonl.push_str(&serde_json::to_string(r)?);
            jsonl.push('\n');
        }
        fs::write(out.join("grouping.txt"), text)?;
        fs::write(out.join("grouping.jsonl"), jsonl)?;
    }
    Ok((costs, groups))
}

/// Builds the global thread pool from [`THREADS_ENV`] when it is set.
pub fn init_threads() -> Result<()> {
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v
            .trim()
            .parse()
            .map_err(|_| CqeError::Argument(format!("{THREADS_ENV} must be a positive integer, got '{v}'")))?;
        if n == 0 {
            return Err(CqeError::Argument(format!("{THREADS_ENV} must be positive")));
        }
        // a pool built earlier in the process stays in place
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

/// Runs a parsed command line and returns the exit status.
pub fn execute(cli: Cli) -> i32 {
    let result = init_threads().and_then(|_| match &cli.command {
        Command::Run { fcidump, solver, out } => cmd_run(fcidump, solver, out).map(|s| {
            println!("{}", serde_json::to_string(&s).unwrap_or_default());
        }),
        Command::Sweep { fcidump, solver, out } => cmd_sweep(fcidump, solver, out).map(|r| {
            print!("{}", curve_csv(&r.points));
            println!("nonparallelity {:.6e}", r.nonparallelity);
        }),
        Command::Resources { fcidump, grouping, out } => cmd_resources(fcidump, grouping, out).map(|(c, g)| {
            for row in c {
                println!("{:<12}  {}", row.label, row.report.row());
            }
            for r in g {
                println!("{}", r.row());
            }
        }),
    });
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
