//! Command-line front end. Exit codes: 0 success, 1 model or runtime error,
//! 2 usage error.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

use crate::analytic::TwoStateModel;
use crate::contracts::{
    linear_grid, sweep, threshold_grid, SweepFamily, SweepOptions, DEFAULT_LINEAR_POINTS,
};
use crate::coverage::CoveragePolicy;
use crate::error::{Error, Result};
use crate::io::{fmt_sig10, load_model, sweep_csv, write_file};
use crate::montecarlo::{simulate_value, SimulationConfig};
use crate::policy::ProtectionPolicy;
use crate::reproduce::{analytic_summary, reproduce, Study};
use crate::solvers::{solve_lp, solve_policy_enumeration, solve_value_iteration};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "cyins", version, about = "Optimal protection and insurance contracts for cyber-risk MDPs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Method {
    Vi,
    Lp,
    Enumerate,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Family {
    Linear,
    Threshold,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Optimal policy and values under a coverage function.
    Solve {
        #[arg(long)]
        model: PathBuf,
        #[arg(long, default_value = "none")]
        coverage: CoveragePolicy,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[arg(long, value_enum, default_value_t = Method::Vi)]
        method: Method,
    },
    /// Contract sweep over a coverage family, written as CSV.
    Sweep {
        #[arg(long)]
        model: PathBuf,
        #[arg(long, value_enum)]
        family: Family,
        #[arg(long, default_value_t = DEFAULT_LINEAR_POINTS)]
        grid: usize,
        #[arg(long)]
        out: PathBuf,
        /// Level paid at or below the cutoff (threshold family).
        #[arg(long, default_value_t = 0.0)]
        low: f64,
        /// Level paid above the cutoff (threshold family).
        #[arg(long, default_value_t = 0.9)]
        high: f64,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
    },
    /// Closed-form analysis of a two-state, two-action model.
    Analytic {
        #[arg(long)]
        model: PathBuf,
        /// Also report the optimal policy and values at this coverage level.
        #[arg(long)]
        at: Option<f64>,
    },
    /// Monte-Carlo estimate of a policy's value.
    Simulate {
        #[arg(long)]
        model: PathBuf,
        #[arg(long, default_value = "none")]
        coverage: CoveragePolicy,
        /// Action names joined by '|' in state order.
        #[arg(long)]
        policy: String,
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Regenerates one of the bundled studies.
    Reproduce {
        #[arg(value_parser = parse_study)]
        study: Study,
        #[arg(long)]
        out: PathBuf,
    },
}

fn parse_study(s: &str) -> std::result::Result<Study, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// Runs the CLI on `args` (including the program name).
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { err.write_all(text.as_bytes()) } else { out.write_all(text.as_bytes()) };
            return code;
        }
    };
    match execute(cli.command, out) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_FAILURE
        }
    }
}

fn io_err(e: std::io::Error) -> Error {
    Error::Io {
        path: PathBuf::from("<stdout>"),
        source: e,
    }
}

fn execute(command: Command, out: &mut dyn Write) -> Result<()> {
    match command {
        Command::Solve { model, coverage, tol, method } => {
            let model = load_model(&model)?;
            let result = match method {
                Method::Vi => solve_value_iteration(&model, &coverage, tol, 10_000_000)?,
                Method::Lp => solve_lp(&model, &coverage)?,
                Method::Enumerate => solve_policy_enumeration(&model, &coverage)?,
            };
            writeln!(out, "policy: {}", result.policy.label(&model)).map_err(io_err)?;
            for (s, spec) in model.states().iter().enumerate() {
                writeln!(out, "V({}) = {}", spec.name, fmt_sig10(result.values[s])).map_err(io_err)?;
            }
            writeln!(out, "iterations: {}", result.iterations).map_err(io_err)?;
            writeln!(out, "residual: {}", fmt_sig10(result.residual)).map_err(io_err)?;
            if !result.converged {
                writeln!(out, "warning: iteration limit reached before convergence").map_err(io_err)?;
            }
        }
        Command::Sweep { model, family, grid, out: path, low, high, tol } => {
            let model = load_model(&model)?;
            let (family, points) = match family {
                Family::Linear => (SweepFamily::Linear, linear_grid(grid)),
                Family::Threshold => (
                    SweepFamily::Threshold { low_level: low, high_level: high },
                    threshold_grid(&model, grid),
                ),
            };
            let options = SweepOptions { tol, ..SweepOptions::from_env() };
            let rows = sweep(&model, family, &points, &options)?;
            write_file(&path, &sweep_csv(&model, &rows, &[], |_, _| vec![]))?;
            writeln!(out, "wrote {} rows to {}", rows.len(), path.display()).map_err(io_err)?;
        }
        Command::Analytic { model, at } => {
            let mdp = load_model(&model)?;
            let m = TwoStateModel::from_mdp(&mdp)?;
            for (k, v) in analytic_summary(&m) {
                writeln!(out, "{k} = {v}").map_err(io_err)?;
            }
            let regions: Vec<String> = m
                .peltzman_regions()
                .iter()
                .map(|r| format!("[{}, {}]", fmt_sig10(r.lo), fmt_sig10(r.hi)))
                .collect();
            writeln!(out, "peltzman = {}", if regions.is_empty() { "none".into() } else { regions.join(" U ") })
                .map_err(io_err)?;
            if let Some(level) = at {
                CoveragePolicy::linear(level)?;
                let policy = m.analytic_policy(level);
                writeln!(out, "policy({}) = {}", fmt_sig10(level), policy.label(&mdp)).map_err(io_err)?;
                let pair = m.analytic_pair(level);
                for s in crate::analytic::TwoState::BOTH {
                    let v = m.vbar(s, pair.at(s), pair.at(s.other()), level);
                    writeln!(out, "V({s:?}) = {}", fmt_sig10(v)).map_err(io_err)?;
                }
            }
        }
        Command::Simulate { model, coverage, policy, samples, seed } => {
            let model = load_model(&model)?;
            let policy = ProtectionPolicy::parse(&model, &policy)?;
            let config = SimulationConfig::for_model(&model, samples, seed);
            let est = simulate_value(&model, &policy, &coverage, &config)?;
            let exact = crate::evaluate::evaluate_policy(&model, &policy, &coverage)[model.initial_state()];
            writeln!(out, "mean = {}", fmt_sig10(est.mean)).map_err(io_err)?;
            writeln!(out, "stderr = {}", fmt_sig10(est.stderr)).map_err(io_err)?;
            writeln!(out, "horizon = {}", config.horizon).map_err(io_err)?;
            writeln!(out, "exact = {}", fmt_sig10(exact)).map_err(io_err)?;
        }
        Command::Reproduce { study, out: dir } => {
            let result = reproduce(study, &dir, &SweepOptions::from_env())?;
            writeln!(out, "wrote {} and {}", result.csv_path.display(), result.summary_path.display())
                .map_err(io_err)?;
            for (k, v) in &result.summary {
                writeln!(out, "{k}={v}").map_err(io_err)?;
            }
        }
    }
    Ok(())
}
