use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use fastmix_cli::commands::{cmd_optimize, cmd_simulate, cmd_table, OptimizeArgs};
use fastmix_cli::config::load_config;
use fastmix_cli::report::fmt_tau;
use fastmix_cli::CliError;
use fastmix_core::optimizer::SolveOptions;

#[derive(Parser)]
#[command(
    name = "fastmix",
    version,
    about = "Consensus weight optimization and cooperative bandit simulation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build one weight matrix for a network and write it as CSV.
    Optimize {
        /// Built-in network name (complete<m>, star<m>, cluster<k>x<c>).
        #[arg(long, conflicts_with = "graph")]
        network: Option<String>,
        /// Edge-list file to load instead of a built-in name.
        #[arg(long)]
        graph: Option<PathBuf>,
        /// kappa | best_constant | max_degree | local_degree | fmmc | fdla
        #[arg(long)]
        method: String,
        /// Step-size parameter for the kappa method.
        #[arg(long, default_value_t = 0.02)]
        kappa: f64,
        /// Iteration budget for the fmmc/fdla solvers.
        #[arg(long, default_value_t = 50_000)]
        max_iters: usize,
        /// Target suboptimality gap for the fmmc/fdla solvers.
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        /// Output CSV path (default: weights_<method>_<network>.csv).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write the solver objective trace to this CSV.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Exit with code 2 if the solver did not meet its stopping rule.
        #[arg(long)]
        strict: bool,
    },
    /// Compute the (rho, tau) grid of methods across networks.
    Table {
        /// Comma-separated network names or edge-list paths.
        #[arg(long, value_delimiter = ',', default_value = "complete5,star5")]
        networks: Vec<String>,
        /// Comma-separated method names.
        #[arg(
            long,
            value_delimiter = ',',
            default_value = "kappa,best_constant,max_degree,local_degree,fmmc,fdla"
        )]
        methods: Vec<String>,
        #[arg(long, default_value_t = 0.02)]
        kappa: f64,
        /// Write the grid as CSV to this path.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        strict: bool,
    },
    /// Run the Monte-Carlo team simulation described by a JSON config.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Override the config seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the config run count.
        #[arg(long)]
        runs: Option<usize>,
        /// Override the config output directory.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        strict: bool,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Optimize {
            network,
            graph,
            method,
            kappa,
            max_iters,
            tol,
            out,
            trace,
            strict,
        } => {
            let network = match (network, graph) {
                (Some(name), None) => name,
                (None, Some(path)) => path.to_string_lossy().into_owned(),
                (None, None) => {
                    return Err(CliError::Validation(
                        "pass either --network <name> or --graph <file>".into(),
                    ))
                }
                (Some(_), Some(_)) => unreachable!("clap conflicts_with"),
            };
            let solve = SolveOptions { max_iters, tol, ..SolveOptions::default() };
            let outcome = cmd_optimize(&OptimizeArgs {
                network,
                method,
                kappa,
                solve,
                out,
                trace_out: trace,
            })?;
            println!(
                "network={} method={} rho={:.6e} tau={}",
                outcome.network,
                outcome.method.tag(),
                outcome.rho,
                fmt_tau(outcome.tau)
            );
            println!("weights written to {}", outcome.weights_path.display());
            if strict && !outcome.converged {
                return Err(CliError::NonConvergence(format!(
                    "{} solver returned its best iterate without meeting the stopping rule",
                    outcome.method.tag()
                )));
            }
            Ok(())
        }
        Command::Table { networks, methods, kappa, out, strict } => {
            let outcome =
                cmd_table(&networks, &methods, kappa, &SolveOptions::default(), out.as_deref())?;
            print!("{}", outcome.render_text());
            if let Some(path) = out {
                println!("table written to {}", path.display());
            }
            if strict && !outcome.all_converged() {
                return Err(CliError::NonConvergence(
                    "a solver returned its best iterate without meeting the stopping rule".into(),
                ));
            }
            Ok(())
        }
        Command::Simulate { config, seed, runs, out, strict } => {
            let mut cfg = load_config(&config)?;
            if let Some(seed) = seed {
                cfg.seed = seed;
            }
            if let Some(runs) = runs {
                cfg.runs = runs;
            }
            if let Some(out) = out {
                cfg.out_dir = out;
            }
            let outcome = cmd_simulate(&cfg)?;
            for row in &outcome.rows {
                let settling = row
                    .settling_step
                    .map(|s| s.to_string())
                    .unwrap_or_else(|| "none".to_string());
                println!(
                    "method={} network={} rho={:.6e} tau={} settling_step={} final_regret_mean={:.3}",
                    row.method,
                    row.network,
                    row.rho,
                    fmt_tau(row.tau),
                    settling,
                    row.final_regret_mean
                );
            }
            println!("summary written to {}", outcome.summary_path.display());
            if strict && !outcome.all_converged {
                return Err(CliError::NonConvergence(
                    "a solver returned its best iterate without meeting the stopping rule".into(),
                ));
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
