//! Sub-optimality measures. Every evaluation here is diagnostic and never
//! touches an oracle ledger.

use alloc::string::String;
use alloc::vec::Vec;

use crate::error::invalid;
use crate::hardinstances;
use crate::linalg::DenseLu;
use crate::netsim::OracleLedger;
use crate::problem::SaddleProblem;
use crate::{Error, Point, Result};

/// Gradient mapping `F_tau(z) = (z - P_Z(z - tau F(z))) / tau`.
pub fn grad_mapping(problem: &SaddleProblem, z: &Point, tau: f64) -> Point {
    let f = problem.eval_mean(z);
    let mut step = z.clone();
    step.axpy(-tau, &f);
    problem.constraint().project_in_place(&mut step);
    let mut out = z.sub(&step);
    out.scale(1.0 / tau);
    out
}

pub fn grad_mapping_norm(problem: &SaddleProblem, z: &Point, tau: f64) -> f64 {
    grad_mapping(problem, z, tau).norm()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum GapMode {
    /// Exact for bilinear-plus-linear objectives over Euclidean balls.
    ClosedForm,
    /// Projected gradient on both inner problems, `budget` steps of size `step`
    /// (default `1/L`). Returns a lower estimate of the gap.
    Iterative { budget: usize, step: Option<f64> },
}

/// `Gap(x, y) = max_{y' in Y} f(x, y') - min_{x' in X} f(x', y)`.
pub fn duality_gap(problem: &SaddleProblem, z: &Point, mode: GapMode) -> Result<f64> {
    problem.check_point(z)?;
    match mode {
        GapMode::ClosedForm => hardinstances::bilinear_ball_gap(problem, z),
        GapMode::Iterative { budget, step } => {
            if !problem.concave_in_y() {
                return Err(Error::Unsupported(String::from(
                    "iterative gap needs an objective concave in y; use the gradient mapping instead",
                )));
            }
            let step = match step {
                Some(s) => s,
                None => 1.0 / problem.estimate_constants()?.l.max(f64::MIN_POSITIVE),
            };
            let set = problem.constraint();
            let (x, y) = (z.x(), z.y());
            // max over y' of f(x, .): ascend along grad_y f = -F_y.
            let mut zy = z.clone();
            for _ in 0..budget {
                let f = problem.eval_mean(&zy);
                let mut next = zy.clone();
                for (v, g) in next.y_mut().iter_mut().zip(f.y()) {
                    *v -= step * g;
                }
                next.x_mut().copy_from_slice(x);
                set.project_in_place(&mut next);
                next.x_mut().copy_from_slice(x);
                zy = next;
            }
            // min over x' of f(., y): descend along F_x.
            let mut zx = z.clone();
            for _ in 0..budget {
                let f = problem.eval_mean(&zx);
                let mut next = zx.clone();
                for (v, g) in next.x_mut().iter_mut().zip(f.x()) {
                    *v -= step * g;
                }
                next.y_mut().copy_from_slice(y);
                set.project_in_place(&mut next);
                next.y_mut().copy_from_slice(y);
                zx = next;
            }
            Ok(problem.value(&zy) - problem.value(&zx))
        }
    }
}

/// Weight on `||w^{k-1} - z^k||^2` in the potential.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum LyapunovVariant {
    /// `gamma / (4 eta)`.
    #[default]
    Quarter,
    /// `gamma / (2 eta)`.
    Half,
}

/// Iterate memory and step parameters entering the potential.
#[derive(Clone, Copy, Debug)]
pub struct LyapunovInputs<'a> {
    pub z_k: &'a Point,
    pub z_km1: &'a Point,
    pub w_k: &'a Point,
    pub w_km1: &'a Point,
    pub eta: f64,
    pub gamma: f64,
    pub p: f64,
}

/// ```text
/// Phi = (1/eta + mu) ||z^k - z*||^2
///     + 2 <F(z^{k-1}) - F_1(z^{k-1}) - F(z^k) + F_1(z^k), z^k - z*>
///     + ||z^k - z^{k-1}||^2 / (64 eta)
///     + c_w ||w^{k-1} - z^k||^2
///     + (2 gamma + eta mu) / (2 p eta) ||w^k - z*||^2
/// ```
/// with `c_w = gamma/(4 eta)` or `gamma/(2 eta)` depending on `variant`.
pub fn lyapunov(problem: &SaddleProblem, s: &LyapunovInputs<'_>, z_star: &Point, mu: f64, variant: LyapunovVariant) -> f64 {
    let g = |z: &Point| {
        let mut f1 = problem.zero_point();
        problem.eval_local_into(0, z, &mut f1);
        problem.eval_mean(z).sub(&f1)
    };
    let (eta, gamma, p) = (s.eta, s.gamma, s.p);
    let cross = g(s.z_km1).sub(&g(s.z_k));
    let c_w = match variant {
        LyapunovVariant::Quarter => gamma / (4.0 * eta),
        LyapunovVariant::Half => gamma / (2.0 * eta),
    };
    (1.0 / eta + mu) * s.z_k.dist_sq(z_star)
        + 2.0 * cross.dot(&s.z_k.sub(z_star))
        + s.z_k.dist_sq(s.z_km1) / (64.0 * eta)
        + c_w * s.w_km1.dist_sq(s.z_k)
        + (2.0 * gamma + eta * mu) / (2.0 * p * eta) * s.w_k.dist_sq(z_star)
}

/// A metric recorded along a run.
#[derive(Clone, Debug, PartialEq)]
pub enum Metric {
    GradMapping { tau: f64 },
    Gap(GapMode),
    Distance { z_star: Point },
    DistanceSq { z_star: Point },
    Lyapunov { z_star: Point, mu: f64, variant: LyapunovVariant },
}

impl Metric {
    pub fn name(&self) -> &'static str {
        match self {
            Metric::GradMapping { .. } => "grad_mapping",
            Metric::Gap(_) => "gap",
            Metric::Distance { .. } => "distance",
            Metric::DistanceSq { .. } => "distance_sq",
            Metric::Lyapunov { .. } => "lyapunov",
        }
    }
}

/// Evaluates `metric` at `z`; the potential also needs the iterate memory.
pub fn evaluate(metric: &Metric, problem: &SaddleProblem, z: &Point, state: Option<&LyapunovInputs<'_>>) -> Result<f64> {
    match metric {
        Metric::GradMapping { tau } => Ok(grad_mapping_norm(problem, z, *tau)),
        Metric::Gap(mode) => duality_gap(problem, z, *mode),
        Metric::Distance { z_star } => Ok(z.dist(z_star)),
        Metric::DistanceSq { z_star } => Ok(z.dist_sq(z_star)),
        Metric::Lyapunov { z_star, mu, variant } => {
            let s = state.ok_or_else(|| invalid("the potential is only defined for SVOGS runs"))?;
            Ok(lyapunov(problem, s, z_star, *mu, *variant))
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TraceRow {
    pub round: u64,
    pub comm_units: u64,
    pub grad_calls: u64,
    pub inner_grad_calls: u64,
    pub metric: &'static str,
    pub value: f64,
}

/// Metric values keyed by round and oracle counters.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricTrace {
    pub algorithm: String,
    pub seed: u64,
    pub fingerprint: String,
    pub rows: Vec<TraceRow>,
}

impl MetricTrace {
    pub fn new(algorithm: &str, seed: u64, fingerprint: String) -> Self {
        Self { algorithm: String::from(algorithm), seed, fingerprint, rows: Vec::new() }
    }

    pub fn push(&mut self, round: u64, ledger: &OracleLedger, metric: &'static str, value: f64) {
        self.rows.push(TraceRow {
            round,
            comm_units: ledger.comm_units,
            grad_calls: ledger.grad_calls_total,
            inner_grad_calls: ledger.inner_grad_calls,
            metric,
            value,
        });
    }

    /// Values of one metric in round order.
    pub fn series(&self, metric: &str) -> Vec<(u64, f64)> {
        self.rows.iter().filter(|r| r.metric == metric).map(|r| (r.round, r.value)).collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReferenceSolution {
    pub z_star: Point,
    /// `||F_tau(z_star)||` with `tau = 1/L`.
    pub residual: f64,
}

/// Largest dimension solved by dense factorization.
const DENSE_LIMIT: usize = 4096;

/// High-accuracy solution: a direct solve of `F(z) = 0` for unconstrained
/// quadratics, extragradient with step `1/(2L)` otherwise (requires `mu > 0`).
pub fn reference_solution(problem: &SaddleProblem, tol: f64) -> Result<ReferenceSolution> {
    reference_solution_with_budget(problem, tol, 5_000_000)
}

pub fn reference_solution_with_budget(problem: &SaddleProblem, tol: f64, max_iters: usize) -> Result<ReferenceSolution> {
    let consts = problem.estimate_constants()?;
    let tau = 1.0 / consts.l.max(f64::MIN_POSITIVE);
    if problem.constraint().is_unconstrained() && problem.dim() <= DENSE_LIMIT {
        if let Some(mean) = problem.mean_block() {
            let d = problem.dim();
            let lu = DenseLu::factor(d, mean.jacobian_dense()).ok_or(Error::NoUniqueSaddle)?;
            let f0 = problem.eval_mean(&problem.zero_point());
            let rhs: Vec<f64> = f0.as_slice().iter().map(|v| -v).collect();
            let mut z = Point::from_stacked(lu.solve(&rhs), problem.dx());
            // One step of iterative refinement.
            let r = problem.eval_mean(&z);
            let corr = lu.solve(r.as_slice());
            z.axpy(-1.0, &Point::from_stacked(corr, problem.dx()));
            let residual = grad_mapping_norm(problem, &z, tau);
            if residual > tol {
                return Err(invalid(alloc::format!("direct solve residual {residual:e} above tolerance")));
            }
            return Ok(ReferenceSolution { z_star: z, residual });
        }
    }
    if consts.mu <= 0.0 {
        return Err(Error::NoUniqueSaddle);
    }
    let eta = 1.0 / (2.0 * consts.l);
    let set = problem.constraint();
    let mut z = set.project(&problem.zero_point());
    for it in 0..max_iters {
        if it % 64 == 0 {
            let residual = grad_mapping_norm(problem, &z, tau);
            if residual <= tol {
                return Ok(ReferenceSolution { z_star: z, residual });
            }
        }
        let mut half = z.clone();
        half.axpy(-eta, &problem.eval_mean(&z));
        set.project_in_place(&mut half);
        let mut next = z.clone();
        next.axpy(-eta, &problem.eval_mean(&half));
        set.project_in_place(&mut next);
        z = next;
    }
    let residual = grad_mapping_norm(problem, &z, tau);
    if residual <= tol {
        Ok(ReferenceSolution { z_star: z, residual })
    } else {
        Err(invalid(alloc::format!("reference solver stalled at residual {residual:e}")))
    }
}
