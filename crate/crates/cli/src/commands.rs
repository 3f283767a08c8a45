//! Implementations of the `optimize`, `table`, and `simulate` subcommands.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use fastmix_core::bandit::{Bandit, RngStream};
use fastmix_core::coopucb2::{run_episode, TeamRng};
use fastmix_core::graph::Graph;
use fastmix_core::metrics::{self, AggregateCurve, ErrorCurve};
use fastmix_core::optimizer::{solve_fdla, solve_fmmc, SolveOptions};
use fastmix_core::spectral::ConvergenceTime;
use fastmix_core::weights::{
    best_constant_weights, kappa_weights, local_degree_weights, max_degree_weights, WeightMatrix,
    WeightMethod,
};
use rayon::prelude::*;

use crate::config::{parse_method, ExperimentConfig};
use crate::network::resolve_network;
use crate::report::{self, SummaryRow};
use crate::{CliError, Result};

/// Settling threshold: 5% of the largest final error among the compared
/// methods.
pub const SETTLING_FRACTION: f64 = 0.05;

/// A weight matrix plus solver bookkeeping (closed-form methods always
/// "converge").
pub struct WeightBuild {
    pub weights: WeightMatrix,
    pub converged: bool,
    pub trace: Option<Vec<(usize, f64)>>,
}

/// Builds the weight matrix for one method on one graph.
pub fn build_weights(
    g: &Graph,
    method: WeightMethod,
    kappa: f64,
    solve: &SolveOptions,
) -> Result<WeightBuild> {
    let build = match method {
        WeightMethod::Kappa => WeightBuild {
            weights: kappa_weights(g, kappa)?,
            converged: true,
            trace: None,
        },
        WeightMethod::BestConstant => WeightBuild {
            weights: best_constant_weights(g)?,
            converged: true,
            trace: None,
        },
        WeightMethod::MaxDegree => WeightBuild {
            weights: max_degree_weights(g)?,
            converged: true,
            trace: None,
        },
        WeightMethod::LocalDegree => WeightBuild {
            weights: local_degree_weights(g)?,
            converged: true,
            trace: None,
        },
        WeightMethod::Fmmc | WeightMethod::Fdla => {
            let result = if method == WeightMethod::Fmmc {
                solve_fmmc(g, solve)?
            } else {
                solve_fdla(g, solve)?
            };
            WeightBuild {
                weights: result.weights,
                converged: result.converged,
                trace: result.trace,
            }
        }
    };
    Ok(build)
}

pub struct OptimizeArgs {
    /// Built-in name or edge-list path.
    pub network: String,
    pub method: String,
    pub kappa: f64,
    pub solve: SolveOptions,
    pub out: Option<PathBuf>,
    pub trace_out: Option<PathBuf>,
}

pub struct OptimizeOutcome {
    pub network: String,
    pub method: WeightMethod,
    pub rho: f64,
    pub tau: ConvergenceTime,
    pub weights_path: PathBuf,
    pub converged: bool,
}

pub fn cmd_optimize(args: &OptimizeArgs) -> Result<OptimizeOutcome> {
    let (label, graph) = resolve_network(&args.network)?;
    if !graph.is_connected() {
        return Err(CliError::Validation(format!(
            "network `{label}` is not connected; every weight method requires connectivity"
        )));
    }
    let method = parse_method(&args.method)?;
    let mut solve = args.solve;
    solve.record_trace = args.trace_out.is_some();
    let build = build_weights(&graph, method, args.kappa, &solve)?;
    let weights_path = args
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from(format!("weights_{}_{label}.csv", method.tag())));
    report::write_weights_csv(&weights_path, &build.weights)?;
    if let (Some(trace_path), Some(trace)) = (&args.trace_out, &build.trace) {
        report::write_trace_csv(trace_path, trace)?;
    }
    Ok(OptimizeOutcome {
        network: label,
        method,
        rho: build.weights.rho(),
        tau: build.weights.tau(),
        weights_path,
        converged: build.converged,
    })
}

#[derive(Debug, Clone, Copy)]
pub struct TableCell {
    pub rho: f64,
    pub tau: ConvergenceTime,
    pub converged: bool,
}

pub struct TableOutcome {
    pub networks: Vec<String>,
    pub methods: Vec<WeightMethod>,
    /// Indexed `[method][network]`.
    pub cells: Vec<Vec<TableCell>>,
}

impl TableOutcome {
    pub fn cell(&self, method: WeightMethod, network: &str) -> Option<TableCell> {
        let mi = self.methods.iter().position(|&m| m == method)?;
        let ni = self.networks.iter().position(|n| n == network)?;
        Some(self.cells[mi][ni])
    }

    pub fn all_converged(&self) -> bool {
        self.cells.iter().flatten().all(|c| c.converged)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("method");
        for network in &self.networks {
            let _ = write!(out, ",{network}_rho,{network}_tau");
        }
        out.push('\n');
        for (method, row) in self.methods.iter().zip(&self.cells) {
            let _ = write!(out, "{}", method.tag());
            for cell in row {
                let _ = write!(out, ",{},{}", report::fmt_float(cell.rho), report::fmt_tau(cell.tau));
            }
            out.push('\n');
        }
        out
    }

    pub fn render_text(&self) -> String {
        let mut out = format!("{:<14}", "method");
        for network in &self.networks {
            let _ = write!(out, " {:>16} {:>16}", format!("{network}_rho"), format!("{network}_tau"));
        }
        out.push('\n');
        for (method, row) in self.methods.iter().zip(&self.cells) {
            let _ = write!(out, "{:<14}", method.tag());
            for cell in row {
                let tau = match cell.tau {
                    ConvergenceTime::Finite(t) => format!("{t:.3}"),
                    ConvergenceTime::Infinite => "inf".to_string(),
                };
                let _ = write!(out, " {:>16.6} {:>16}", cell.rho, tau);
            }
            out.push('\n');
        }
        out
    }
}

/// Computes the (rho, tau) grid of every method on every network; all values
/// are computed fresh from the graph.
pub fn cmd_table(
    network_specs: &[String],
    method_names: &[String],
    kappa: f64,
    solve: &SolveOptions,
    out: Option<&Path>,
) -> Result<TableOutcome> {
    if network_specs.is_empty() || method_names.is_empty() {
        return Err(CliError::Validation(
            "`table` needs at least one network and one method".into(),
        ));
    }
    let mut networks = Vec::new();
    let mut graphs = Vec::new();
    for spec in network_specs {
        let (label, graph) = resolve_network(spec)?;
        if !graph.is_connected() {
            return Err(CliError::Validation(format!("network `{label}` is not connected")));
        }
        networks.push(label);
        graphs.push(graph);
    }
    let methods: Result<Vec<WeightMethod>> =
        method_names.iter().map(|name| parse_method(name)).collect();
    let methods = methods?;

    let mut cells = Vec::with_capacity(methods.len());
    for &method in &methods {
        let mut row = Vec::with_capacity(graphs.len());
        for graph in &graphs {
            let build = build_weights(graph, method, kappa, solve)?;
            row.push(TableCell {
                rho: build.weights.rho(),
                tau: build.weights.tau(),
                converged: build.converged,
            });
        }
        cells.push(row);
    }
    let outcome = TableOutcome { networks, methods, cells };
    if let Some(path) = out {
        fs::write(path, outcome.to_csv()).map_err(CliError::io(path))?;
    }
    Ok(outcome)
}

pub struct MethodSimulation {
    pub method: WeightMethod,
    pub weights: WeightMatrix,
    pub converged: bool,
    pub curve: AggregateCurve,
    pub final_regret_mean: f64,
}

pub struct SimulateOutcome {
    pub network: String,
    pub rows: Vec<SummaryRow>,
    pub summary_path: PathBuf,
    pub curve_paths: Vec<PathBuf>,
    pub all_converged: bool,
    /// First logged round of the curves (seeding ends at `n_arms`).
    pub first_round: usize,
}

/// Runs the Monte-Carlo experiment described by the config.
///
/// Runs are embarrassingly parallel; per-run RNG streams depend only on
/// `(seed, run, agent)` and the reduction folds runs in index order, so the
/// output bytes do not depend on the worker count.
pub fn cmd_simulate(cfg: &ExperimentConfig) -> Result<SimulateOutcome> {
    cfg.validate()?;
    let (label, graph) = resolve_network(&cfg.network)?;
    if !graph.is_connected() {
        return Err(CliError::Validation(format!("network `{label}` is not connected")));
    }
    let methods = cfg.method_list()?;
    let params = cfg.algo_params()?;
    let team_size = graph.vertex_count();
    let solve = SolveOptions::default();

    let mut simulations = Vec::with_capacity(methods.len());
    for &method in &methods {
        let build = build_weights(&graph, method, cfg.kappa, &solve)?;
        let weights = build.weights;

        let per_run: std::result::Result<Vec<(Vec<f64>, f64)>, fastmix_core::Error> = (0..cfg
            .runs)
            .into_par_iter()
            .map(|run| {
                let run = run as u64;
                let mut env_rng = RngStream::environment(cfg.seed, run).rng();
                let bandit = Bandit::sample(cfg.n_arms, cfg.sigma, &mut env_rng)?;
                let mut team_rng = TeamRng::for_run(cfg.seed, run, team_size);
                let logs = run_episode(&weights, &bandit, &params, cfg.horizon, &mut team_rng)?;
                let deltas: Vec<f64> = logs.iter().map(|log| log.delta).collect();
                let final_regret = logs.last().map(|log| log.cum_regret).unwrap_or(0.0);
                Ok((deltas, final_regret))
            })
            .collect();
        let per_run = per_run?;

        let curves: Vec<ErrorCurve> = per_run
            .iter()
            .enumerate()
            .map(|(run, (deltas, _))| ErrorCurve { run: run as u64, delta: deltas.clone() })
            .collect();
        let curve = metrics::aggregate(&curves)?;
        let final_regret_mean =
            per_run.iter().map(|(_, regret)| regret).sum::<f64>() / cfg.runs as f64;
        simulations.push(MethodSimulation {
            method,
            weights,
            converged: build.converged,
            curve,
            final_regret_mean,
        });
    }

    let aggregate_map: BTreeMap<String, AggregateCurve> = simulations
        .iter()
        .map(|s| (s.method.tag().to_string(), s.curve.clone()))
        .collect();
    let settling = metrics::settling_time(&aggregate_map, SETTLING_FRACTION)?;

    fs::create_dir_all(&cfg.out_dir).map_err(CliError::io(&cfg.out_dir))?;
    let first_round = cfg.n_arms + 1;
    let mut rows = Vec::new();
    let mut curve_paths = Vec::new();
    for sim in &simulations {
        let tag = sim.method.tag();
        let curve_path = cfg.out_dir.join(format!("curve_{tag}.csv"));
        report::write_curve_csv(&curve_path, &sim.curve.mean, &sim.curve.stderr, first_round)?;
        curve_paths.push(curve_path);
        report::write_weights_csv(&cfg.out_dir.join(format!("weights_{tag}.csv")), &sim.weights)?;
        rows.push(SummaryRow {
            method: tag.to_string(),
            network: label.clone(),
            rho: sim.weights.rho(),
            tau: sim.weights.tau(),
            settling_step: settling[tag].settled_index().map(|idx| first_round + idx),
            final_regret_mean: sim.final_regret_mean,
        });
    }
    let summary_path = cfg.out_dir.join("summary.csv");
    report::write_summary_csv(&summary_path, &rows)?;

    let all_converged = simulations.iter().all(|s| s.converged);
    Ok(SimulateOutcome {
        network: label,
        rows,
        summary_path,
        curve_paths,
        all_converged,
        first_round,
    })
}
