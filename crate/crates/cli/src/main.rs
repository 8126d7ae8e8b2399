use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use serde_json::json;
use svogs_cli::config::load_config;
use svogs_cli::experiment::{build_problem, resolve_constants, run_experiment, ExperimentError, REFERENCE_TOL};
use svogs_cli::{instance, verify_suite, ConfigError};
use svogs_core::metrics::reference_solution;

#[derive(Parser)]
#[command(name = "svogs", version, about = "Distributed minimax experiments under second-order similarity")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment and write per-seed traces, metadata and aggregate.csv.
    Run { config: PathBuf },
    /// Run property suites: similarity, lyapunov, zero-chain,
    /// estimator-unbiasedness, accounting, or all.
    Verify {
        suite: String,
        /// Also write the report as JSON.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print L, delta, mu and the feasible-set diameter.
    Estimate { config: PathBuf },
    /// Write a high-accuracy saddle point as JSON (default: <output>/z_star.json).
    Reference {
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Describe a hard instance, e.g. `make-instance cc-rounds n=9 d=12 delta=1 l=1 r=1`.
    MakeInstance {
        kind: String,
        params: Vec<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn write_json(path: Option<&Path>, value: &serde_json::Value) -> anyhow::Result<()> {
    let text = serde_json::to_string_pretty(value)? + "\n";
    match path {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn execute(cmd: Command) -> anyhow::Result<ExitCode> {
    match cmd {
        Command::Run { config } => {
            let cfg = load_config(&config)?;
            let summary = run_experiment(&cfg)?;
            for s in &summary.seeds {
                println!("seed {}: {} rounds, {} comm units, threshold reached: {}", s.seed, s.rounds, s.comm_units, s.reached_threshold);
            }
            println!("wrote {} files to {}", summary.files.len(), cfg.output.display());
        }
        Command::Verify { suite, out } => {
            let report = verify_suite(&suite);
            print!("{}", report.to_text());
            if let Some(p) = out {
                write_json(Some(&p), &serde_json::to_value(&report)?)?;
            }
            if !report.passed() {
                return Ok(ExitCode::from(3));
            }
        }
        Command::Estimate { config } => {
            let cfg = load_config(&config)?;
            let built = build_problem(&cfg)?;
            let c = resolve_constants(&cfg, &built.problem)?;
            println!("L = {:.16e}", c.l);
            println!("delta = {:.16e}", c.delta);
            println!("mu = {:.16e}", c.mu);
            match c.diameter {
                Some(d) => println!("D = {d:.16e}"),
                None => println!("D = unbounded"),
            }
        }
        Command::Reference { config, out } => {
            let cfg = load_config(&config)?;
            let built = build_problem(&cfg)?;
            let r = reference_solution(&built.problem, REFERENCE_TOL)
                .map_err(|source| ExperimentError::Core { context: "computing reference solution".into(), source })?;
            let path = out.unwrap_or_else(|| cfg.output.join("z_star.json"));
            if let Some(dir) = path.parent() {
                std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
            }
            let value = json!({"x": r.z_star.x(), "y": r.z_star.y(), "residual": r.residual, "tol": REFERENCE_TOL});
            write_json(Some(&path), &value)?;
            println!("residual {:.3e}; wrote {}", r.residual, path.display());
        }
        Command::MakeInstance { kind, params, out } => {
            let inst = instance::make_instance(&kind, &params).map_err(|e| anyhow::anyhow!(e))?;
            write_json(out.as_deref(), &instance::describe(&inst))?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            let config_error = e.downcast_ref::<ConfigError>().is_some()
                || matches!(e.downcast_ref::<ExperimentError>(), Some(ExperimentError::Config(_)));
            ExitCode::from(if config_error { 2 } else { 1 })
        }
    }
}
