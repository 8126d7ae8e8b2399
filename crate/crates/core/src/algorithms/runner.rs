use alloc::string::String;
use alloc::vec::Vec;

use super::{eg_round, ogs_round, svogs_round, EgParams, EgState, EpsMode, OgsParams, OgsState, SvogsParams, SvogsState};
use crate::error::invalid;
use crate::metrics::{self, LyapunovInputs, Metric, MetricTrace};
use crate::netsim::{BatchMode, GradientCache, OracleLedger, SamplerConfig, Stage};
use crate::problem::SaddleProblem;
use crate::{Point, Result};

#[derive(Clone, Debug, PartialEq)]
pub enum Algorithm {
    Svogs(SvogsParams),
    Eg(EgParams),
    Ogs(OgsParams),
}

impl Algorithm {
    pub fn name(&self) -> &'static str {
        match self {
            Algorithm::Svogs(_) => "svogs",
            Algorithm::Eg(_) => "eg",
            Algorithm::Ogs(_) => "ogs",
        }
    }

    pub fn fingerprint(&self) -> String {
        match self {
            Algorithm::Svogs(p) => alloc::format!("svogs;{}", p.fingerprint()),
            Algorithm::Eg(p) => alloc::format!("eg;eta={:e}", p.eta),
            Algorithm::Ogs(p) => alloc::format!("ogs;eta={:e}", p.eta),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Stopping {
    Rounds(u64),
    /// Stop once `metric` at the reported point is at most `threshold`.
    Threshold { metric: Metric, threshold: f64, max_rounds: u64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunOptions {
    pub seed: u64,
    pub stopping: Stopping,
    /// Metrics are recorded every `cadence` rounds (and after the last one).
    pub cadence: u64,
    pub metrics: Vec<Metric>,
    pub cache: bool,
    pub batch_mode: BatchMode,
    /// Keep per-round iterates and participation for zero-chain checks.
    pub record_history: bool,
}

impl RunOptions {
    pub fn rounds(seed: u64, k: u64) -> Self {
        Self {
            seed,
            stopping: Stopping::Rounds(k),
            cadence: 1,
            metrics: Vec::new(),
            cache: true,
            batch_mode: BatchMode::Iid,
            record_history: false,
        }
    }
}

/// Per-round participation and the iterate it produced.
#[derive(Clone, Debug, PartialEq)]
pub struct RoundReport {
    pub round: u64,
    pub iterate: Point,
    pub stages: Vec<Stage>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunOutput {
    /// `u_avg` for convex-concave SVOGS, the last iterate otherwise.
    pub point: Point,
    pub last_iterate: Point,
    pub trace: MetricTrace,
    pub ledger: OracleLedger,
    pub rounds: u64,
    pub inner_failures: u64,
    pub reached_threshold: bool,
    pub history: Vec<RoundReport>,
}

enum Runner {
    Svogs(SvogsState, SvogsParams, SamplerConfig),
    Eg(EgState, EgParams),
    Ogs(OgsState, OgsParams),
}

impl Runner {
    fn step(&mut self, problem: &SaddleProblem, cache: &mut GradientCache, ledger: &mut OracleLedger) -> Vec<Stage> {
        match self {
            Runner::Svogs(s, p, cfg) => svogs_round(s, p, problem, cfg, cache, ledger).stages,
            Runner::Eg(s, p) => eg_round(s, problem, p, cache, ledger),
            Runner::Ogs(s, p) => ogs_round(s, problem, p, cache, ledger).1,
        }
    }

    fn reported(&self) -> &Point {
        match self {
            Runner::Svogs(s, p, _) if matches!(p.eps_mode, EpsMode::Cc { .. }) => &s.u_avg,
            Runner::Svogs(s, _, _) => &s.z_k,
            Runner::Eg(s, _) => &s.z,
            Runner::Ogs(s, _) => &s.z_k,
        }
    }

    fn last(&self) -> &Point {
        match self {
            Runner::Svogs(s, _, _) => &s.z_k,
            Runner::Eg(s, _) => &s.z,
            Runner::Ogs(s, _) => &s.z_k,
        }
    }

    fn inner_failures(&self) -> u64 {
        match self {
            Runner::Svogs(s, _, _) => s.inner_failures,
            Runner::Eg(..) => 0,
            Runner::Ogs(s, _) => s.inner_failures,
        }
    }

    fn lyapunov_inputs(&self) -> Option<LyapunovInputs<'_>> {
        match self {
            Runner::Svogs(s, p, _) => Some(LyapunovInputs {
                z_k: &s.z_k,
                z_km1: &s.z_km1,
                w_k: &s.w_k,
                w_km1: &s.w_km1,
                eta: p.eta,
                gamma: p.gamma,
                p: p.p,
            }),
            _ => None,
        }
    }
}

/// Runs an algorithm from `z0`, recording metrics against the ledger.
pub fn run(problem: &SaddleProblem, algorithm: &Algorithm, z0: &Point, opts: &RunOptions) -> Result<RunOutput> {
    problem.check_point(z0)?;
    if opts.cadence == 0 {
        return Err(invalid("metric cadence must be positive"));
    }
    let n = problem.n();
    let mut cache = GradientCache::new(opts.cache);
    let mut ledger = OracleLedger::new(n);
    let mut runner = match algorithm {
        Algorithm::Svogs(p) => {
            p.validate(n)?;
            let mut cfg = SamplerConfig::new(opts.seed, p.b, p.p);
            cfg.mode = opts.batch_mode;
            Runner::Svogs(SvogsState::init(problem, z0, &mut cache, &mut ledger), *p, cfg)
        }
        Algorithm::Eg(p) => {
            if !(p.eta > 0.0 && p.eta.is_finite()) {
                return Err(invalid("EG step must be positive"));
            }
            Runner::Eg(EgState::init(problem, z0, &mut cache, &mut ledger), *p)
        }
        Algorithm::Ogs(p) => {
            if !(p.eta > 0.0 && p.eta.is_finite()) {
                return Err(invalid("OGS step must be positive"));
            }
            p.inner.validate()?;
            Runner::Ogs(OgsState::init(problem, z0, &mut cache, &mut ledger), *p)
        }
    };
    let (max_rounds, stop) = match &opts.stopping {
        Stopping::Rounds(k) => (*k, None),
        Stopping::Threshold { metric, threshold, max_rounds } => (*max_rounds, Some((metric, *threshold))),
    };
    let mut trace = MetricTrace::new(algorithm.name(), opts.seed, algorithm.fingerprint());
    let mut history = Vec::new();
    let mut reached = false;
    let mut k = 0;
    while k < max_rounds {
        let stages = runner.step(problem, &mut cache, &mut ledger);
        k += 1;
        if opts.record_history {
            history.push(RoundReport { round: k, iterate: runner.last().clone(), stages });
        }
        let stop_value = match stop {
            Some((m, _)) => Some(metrics::evaluate(m, problem, runner.reported(), runner.lyapunov_inputs().as_ref())?),
            None => None,
        };
        reached = matches!((stop, stop_value), (Some((_, t)), Some(v)) if v <= t);
        if k % opts.cadence == 0 || k == max_rounds || reached {
            for m in &opts.metrics {
                let v = metrics::evaluate(m, problem, runner.reported(), runner.lyapunov_inputs().as_ref())?;
                trace.push(k, &ledger, m.name(), v);
            }
        }
        if reached {
            break;
        }
    }
    Ok(RunOutput {
        point: runner.reported().clone(),
        last_iterate: runner.last().clone(),
        trace,
        rounds: k,
        inner_failures: runner.inner_failures(),
        reached_threshold: reached,
        history,
        ledger,
    })
}
