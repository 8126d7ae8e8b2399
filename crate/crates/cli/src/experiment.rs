//! Builds the configured problem, resolves constants and parameters, runs
//! every seed and writes traces, metadata and the cross-seed aggregate.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::json;
use svogs_core::algorithms::{
    auto_params_cc, auto_params_scsc, run, Algorithm, EgParams, EpsMode, InnerSolverConfig, OgsParams, RunOptions,
    RunOutput, Stopping, SvogsParams,
};
use svogs_core::data::{synthetic, SyntheticSpec};
use svogs_core::hardinstances::{build_hard_instance, HardInstance, HardParams};
use svogs_core::metrics::{reference_solution, GapMode, LyapunovVariant, Metric};
use svogs_core::problem::{build_robust_regression, RegressionVariant, SaddleProblem};
use svogs_core::Point;
use thiserror::Error;

use crate::config::{AlgorithmSpec, ConfigError, ExperimentConfig, MetricName, ProblemSpec, StoppingSpec, SvogsSpec, VariantSpec};
use crate::libsvm::{parse_libsvm, LibsvmError};
use crate::trace::{emit_trace, format_float};

/// Tolerance of reference solutions used by distance metrics.
pub const REFERENCE_TOL: f64 = 1e-10;
/// Inner steps of the iterative gap.
const GAP_BUDGET: usize = 2000;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("loading data: {0}")]
    Data(#[from] LibsvmError),
    #[error("{context}: {source}")]
    Core { context: String, source: svogs_core::Error },
    #[error("writing {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

fn core_err(context: &str) -> impl FnOnce(svogs_core::Error) -> ExperimentError + '_ {
    move |source| ExperimentError::Core { context: context.to_string(), source }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> ExperimentError + '_ {
    move |source| ExperimentError::Io { path: path.to_path_buf(), source }
}

pub struct BuiltProblem {
    pub problem: SaddleProblem,
    pub hard: Option<HardInstance>,
}

pub fn build_problem(cfg: &ExperimentConfig) -> Result<BuiltProblem, ExperimentError> {
    match &cfg.problem {
        ProblemSpec::RobustRegression(r) => {
            let data = match (&r.path, &r.synthetic) {
                (Some(path), _) => {
                    let file = File::open(path).map_err(io_err(path))?;
                    parse_libsvm(BufReader::new(file), r.dim)?
                }
                (None, Some(s)) => {
                    let mut spec = SyntheticSpec::new(s.rows, s.dim);
                    spec.mean_norm = s.mean_norm;
                    spec.sigma = s.sigma;
                    synthetic(&spec, s.seed).map_err(core_err("generating data"))?
                }
                (None, None) => return Err(ConfigError::Invalid("robust_regression needs a data source".into()).into()),
            };
            let variant = match r.variant {
                VariantSpec::Constrained { r_x, r_y } => RegressionVariant::Constrained { r_x, r_y },
                VariantSpec::Regularized { lambda, beta } => RegressionVariant::Regularized { lambda, beta },
            };
            let problem =
                build_robust_regression(&data, cfg.n, variant, r.partition_seed).map_err(core_err("building problem"))?;
            Ok(BuiltProblem { problem, hard: None })
        }
        ProblemSpec::HardInstance(h) => {
            let params = HardParams { n: cfg.n, d: h.d, delta: h.delta, mu: h.mu, l: h.l, r_x: h.r, r_y: h.r };
            let inst = build_hard_instance(h.kind()?, params).map_err(core_err("building instance"))?;
            Ok(BuiltProblem { problem: inst.problem.clone(), hard: Some(inst) })
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ResolvedConstants {
    pub l: f64,
    pub delta: f64,
    pub mu: f64,
    /// Diameter of the feasible set; `None` when unbounded.
    pub diameter: Option<f64>,
}

/// Declared constants win over estimates; config overrides win over both.
pub fn resolve_constants(cfg: &ExperimentConfig, problem: &SaddleProblem) -> Result<ResolvedConstants, ExperimentError> {
    let est = problem.estimate_constants().map_err(core_err("estimating constants"))?;
    let declared = problem.declared();
    let o = cfg.constants;
    Ok(ResolvedConstants {
        l: o.l.or(declared.l).unwrap_or(est.l),
        delta: o.delta.or(declared.delta).unwrap_or(est.delta),
        mu: o.mu.or(declared.mu).unwrap_or(est.mu),
        diameter: problem.constraint().diameter(),
    })
}

pub struct Resolved {
    pub constants: ResolvedConstants,
    pub algorithm: Algorithm,
    pub z0: Point,
    pub z_star: Option<Point>,
    pub tau: f64,
    pub metrics: Vec<Metric>,
    pub stopping: Stopping,
}

fn needs_reference(cfg: &ExperimentConfig) -> bool {
    let uses = |m: &MetricName| matches!(m, MetricName::Distance | MetricName::DistanceSq | MetricName::Lyapunov);
    cfg.metrics.iter().any(uses)
        || matches!(cfg.stopping, StoppingSpec::Threshold { metric, .. } if uses(&metric))
        || matches!(cfg.algorithm, AlgorithmSpec::Svogs(SvogsSpec::AutoScsc { r0: None }))
}

fn metric_of(name: MetricName, built: &BuiltProblem, c: &ResolvedConstants, tau: f64, z_star: Option<&Point>) -> Metric {
    let z = || z_star.cloned().expect("reference solution resolved");
    match name {
        MetricName::GradMapping => Metric::GradMapping { tau },
        MetricName::Gap => match &built.hard {
            Some(h) if h.kind.is_cc() => Metric::Gap(GapMode::ClosedForm),
            _ => Metric::Gap(GapMode::Iterative { budget: GAP_BUDGET, step: None }),
        },
        MetricName::Distance => Metric::Distance { z_star: z() },
        MetricName::DistanceSq => Metric::DistanceSq { z_star: z() },
        MetricName::Lyapunov => Metric::Lyapunov { z_star: z(), mu: c.mu, variant: LyapunovVariant::Quarter },
    }
}

/// Resolves constants, the reference solution (when a metric needs it) and
/// the algorithm parameters. Everything here is seed-independent.
pub fn resolve(cfg: &ExperimentConfig, built: &BuiltProblem) -> Result<Resolved, ExperimentError> {
    let p = &built.problem;
    let c = resolve_constants(cfg, p)?;
    let z0 = p.zero_point();
    let z_star = if needs_reference(cfg) {
        Some(reference_solution(p, REFERENCE_TOL).map_err(core_err("computing reference solution"))?.z_star)
    } else {
        None
    };
    let algorithm = match cfg.algorithm {
        AlgorithmSpec::Svogs(SvogsSpec::AutoCc { eps }) => {
            let d = c.diameter.ok_or_else(|| ConfigError::Invalid("auto_cc needs a bounded feasible set".into()))?;
            Algorithm::Svogs(auto_params_cc(cfg.n, c.delta, c.l, d, eps, p.max_local_norm(&z0)).map_err(core_err("auto_cc"))?)
        }
        AlgorithmSpec::Svogs(SvogsSpec::AutoScsc { r0 }) => {
            let r0 = r0.unwrap_or_else(|| z_star.as_ref().map_or(0.0, |z| z.dist(&z0)));
            Algorithm::Svogs(auto_params_scsc(cfg.n, c.delta, c.mu, c.l, r0, c.diameter).map_err(core_err("auto_scsc"))?)
        }
        AlgorithmSpec::Svogs(SvogsSpec::Explicit { eta, gamma, p: prob, b, alpha, eps }) => Algorithm::Svogs(SvogsParams {
            eta,
            gamma,
            p: prob,
            b,
            alpha,
            k_max: 0,
            eps_mode: EpsMode::Fixed(eps),
            inner: InnerSolverConfig::new(c.l, eta, c.diameter),
            d_f_init: p.max_local_norm(&z0),
        }),
        AlgorithmSpec::Eg { eta } => Algorithm::Eg(eta.map_or_else(|| EgParams::default_for(c.l), |eta| EgParams { eta })),
        AlgorithmSpec::Ogs { eta, eps } => {
            let eta = eta.unwrap_or(1.0 / (32.0 * c.delta));
            Algorithm::Ogs(OgsParams { eta, eps_mode: EpsMode::Fixed(eps), inner: InnerSolverConfig::new(c.l, eta, c.diameter) })
        }
    };
    let tau = cfg.tau.unwrap_or(1.0 / c.l);
    let metrics = cfg.metrics.iter().map(|m| metric_of(*m, built, &c, tau, z_star.as_ref())).collect();
    let stopping = match cfg.stopping {
        StoppingSpec::Rounds(k) => Stopping::Rounds(k),
        StoppingSpec::Threshold { metric, value, max_rounds } => Stopping::Threshold {
            metric: metric_of(metric, built, &c, tau, z_star.as_ref()),
            threshold: value,
            max_rounds,
        },
    };
    Ok(Resolved { constants: c, algorithm, z0, z_star, tau, metrics, stopping })
}

fn algorithm_params(a: &Algorithm) -> serde_json::Value {
    match a {
        Algorithm::Svogs(p) => {
            let eps = match p.eps_mode {
                EpsMode::Cc { zeta, c_hat } => json!({"mode": "cc", "zeta": zeta, "c_hat": c_hat}),
                EpsMode::Scsc { c } => json!({"mode": "scsc", "c": c}),
                EpsMode::Fixed(e) => json!({"mode": "fixed", "eps": e}),
            };
            json!({
                "eta": p.eta, "gamma": p.gamma, "p": p.p, "b": p.b, "alpha": p.alpha, "eps": eps,
                "inner_step": p.inner.step, "inner_max_iters": p.inner.max_iters, "inner_eps_floor": p.inner.eps_floor,
            })
        }
        Algorithm::Eg(p) => json!({"eta": p.eta}),
        Algorithm::Ogs(p) => json!({"eta": p.eta, "inner_step": p.inner.step}),
    }
}

/// Sidecar metadata of one seed's trace.
pub fn metadata(cfg: &ExperimentConfig, r: &Resolved, seed: u64, out: &RunOutput) -> serde_json::Value {
    json!({
        "software": {"name": env!("CARGO_PKG_NAME"), "version": env!("CARGO_PKG_VERSION")},
        "seed": seed,
        "config": cfg,
        "constants": {"L": r.constants.l, "delta": r.constants.delta, "mu": r.constants.mu, "D": r.constants.diameter},
        "tau": r.tau,
        "algorithm": {
            "name": r.algorithm.name(),
            "fingerprint": r.algorithm.fingerprint(),
            "params": algorithm_params(&r.algorithm),
        },
        "result": {
            "rounds": out.rounds,
            "reached_threshold": out.reached_threshold,
            "inner_failures": out.inner_failures,
            "comm_units": out.ledger.comm_units,
            "grad_calls": out.ledger.grad_calls_total,
            "inner_grad_calls": out.ledger.inner_grad_calls,
            "snapshot_events": out.ledger.snapshot_events,
        },
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct SeedSummary {
    pub seed: u64,
    pub rounds: u64,
    pub comm_units: u64,
    pub reached_threshold: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentSummary {
    pub files: Vec<PathBuf>,
    pub seeds: Vec<SeedSummary>,
}

pub fn trace_path(dir: &Path, seed: u64) -> PathBuf {
    dir.join(format!("seed_{seed}.csv"))
}

pub fn meta_path(dir: &Path, seed: u64) -> PathBuf {
    dir.join(format!("seed_{seed}.meta.json"))
}

pub fn aggregate_path(dir: &Path) -> PathBuf {
    dir.join("aggregate.csv")
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let (lo, hi) = (pos.floor() as usize, pos.ceil() as usize);
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// Per `(round, metric)`: seed count, median comm units and the median and
/// quartiles of the value over the seeds that recorded that row.
pub fn write_aggregate<W: Write>(outputs: &[RunOutput], mut out: W) -> std::io::Result<()> {
    let mut groups: BTreeMap<(u64, &str), (Vec<f64>, Vec<f64>)> = BTreeMap::new();
    for o in outputs {
        for r in &o.trace.rows {
            let g = groups.entry((r.round, r.metric)).or_default();
            g.0.push(r.value);
            g.1.push(r.comm_units as f64);
        }
    }
    writeln!(out, "round,metric,seeds,comm_units_median,value_median,value_q1,value_q3")?;
    for ((round, metric), (mut values, mut comm)) in groups {
        values.sort_by(f64::total_cmp);
        comm.sort_by(f64::total_cmp);
        writeln!(
            out,
            "{round},{metric},{},{},{},{},{}",
            values.len(),
            format_float(quantile(&comm, 0.5)),
            format_float(quantile(&values, 0.5)),
            format_float(quantile(&values, 0.25)),
            format_float(quantile(&values, 0.75)),
        )?;
    }
    out.flush()
}

fn run_seed(built: &BuiltProblem, cfg: &ExperimentConfig, r: &Resolved, seed: u64) -> Result<RunOutput, ExperimentError> {
    let mut opts = RunOptions::rounds(seed, 0);
    opts.stopping = r.stopping.clone();
    opts.cadence = cfg.cadence;
    opts.metrics = r.metrics.clone();
    opts.cache = cfg.cache;
    run(&built.problem, &r.algorithm, &r.z0, &opts).map_err(core_err("running"))
}

fn write_outputs(cfg: &ExperimentConfig, r: &Resolved, outputs: &[RunOutput], written: &mut Vec<PathBuf>) -> Result<(), ExperimentError> {
    let dir = &cfg.output;
    for (seed, out) in cfg.seeds.iter().zip(outputs) {
        let csv = trace_path(dir, *seed);
        written.push(csv.clone());
        emit_trace(&out.trace, &csv).map_err(io_err(&csv))?;
        let meta = meta_path(dir, *seed);
        written.push(meta.clone());
        let text = serde_json::to_string_pretty(&metadata(cfg, r, *seed, out)).expect("metadata serializes");
        std::fs::write(&meta, text + "\n").map_err(io_err(&meta))?;
    }
    let agg = aggregate_path(dir);
    written.push(agg.clone());
    let file = File::create(&agg).map_err(io_err(&agg))?;
    write_aggregate(outputs, BufWriter::new(file)).map_err(io_err(&agg))
}

/// Runs every seed (in parallel) and writes one CSV plus metadata per seed
/// and `aggregate.csv`. On failure, files written by this call are removed.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentSummary, ExperimentError> {
    cfg.validate()?;
    let built = build_problem(cfg)?;
    let resolved = resolve(cfg, &built)?;
    let results: Vec<Result<RunOutput, ExperimentError>> = std::thread::scope(|s| {
        let handles: Vec<_> = cfg.seeds.iter().map(|&seed| s.spawn({
            let (built, resolved) = (&built, &resolved);
            move || run_seed(built, cfg, resolved, seed)
        })).collect();
        handles.into_iter().map(|h| h.join().expect("seed worker panicked")).collect()
    });
    let outputs = results.into_iter().collect::<Result<Vec<_>, _>>()?;

    let dir = &cfg.output;
    let created_dir = !dir.exists();
    std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    let mut written = Vec::new();
    if let Err(e) = write_outputs(cfg, &resolved, &outputs, &mut written) {
        for f in &written {
            let _ = std::fs::remove_file(f);
        }
        if created_dir {
            let _ = std::fs::remove_dir(dir);
        }
        return Err(e);
    }
    let seeds = cfg
        .seeds
        .iter()
        .zip(&outputs)
        .map(|(&seed, o)| SeedSummary { seed, rounds: o.rounds, comm_units: o.ledger.comm_units, reached_threshold: o.reached_threshold })
        .collect();
    Ok(ExperimentSummary { files: written, seeds })
}
