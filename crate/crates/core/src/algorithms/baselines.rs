use alloc::vec::Vec;

use super::{eps_schedule, inner_solve, EpsMode, InnerResult, InnerSolverConfig};
use crate::netsim::{fetch_gradient, GradientCache, OracleLedger, PointId, Stage};
use crate::problem::SaddleProblem;
use crate::Point;

fn full_pass(problem: &SaddleProblem, cache: &mut GradientCache, ledger: &mut OracleLedger, id: PointId, z: &Point) -> Point {
    let mut acc = problem.zero_point();
    for i in 0..problem.n() {
        acc.axpy(1.0, &fetch_gradient(cache, ledger, problem, i, id, z));
    }
    let n = problem.n() as f64;
    acc.as_mut_slice().iter_mut().for_each(|v| *v /= n);
    acc
}

/// Extragradient step size; `1/(2L)` by default.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EgParams {
    pub eta: f64,
}

impl EgParams {
    pub fn default_for(l: f64) -> Self {
        Self { eta: 1.0 / (2.0 * l) }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EgState {
    pub k: u64,
    pub z: Point,
    pub id_z: PointId,
}

impl EgState {
    pub fn init(problem: &SaddleProblem, z0: &Point, cache: &mut GradientCache, ledger: &mut OracleLedger) -> Self {
        let id = cache.publish();
        ledger.account_init(problem.n());
        full_pass(problem, cache, ledger, id, z0);
        Self { k: 0, z: z0.clone(), id_z: id }
    }
}

/// `z^{k+1/2} = P(z^k - eta F(z^k))`, `z^{k+1} = P(z^k - eta F(z^{k+1/2}))`
/// with full participation.
pub fn eg_round(
    state: &mut EgState,
    problem: &SaddleProblem,
    params: &EgParams,
    cache: &mut GradientCache,
    ledger: &mut OracleLedger,
) -> Vec<Stage> {
    let set = problem.constraint();
    let f_z = full_pass(problem, cache, ledger, state.id_z, &state.z);
    let mut half = state.z.clone();
    half.axpy(-params.eta, &f_z);
    set.project_in_place(&mut half);
    let id_half = cache.publish();
    let f_half = full_pass(problem, cache, ledger, id_half, &half);
    let mut next = state.z.clone();
    next.axpy(-params.eta, &f_half);
    set.project_in_place(&mut next);
    ledger.account_full_round(problem.n());
    state.z = next;
    state.id_z = cache.publish();
    state.k += 1;
    cache.retain_points(&[state.id_z]);
    alloc::vec![Stage::all(problem.n()), Stage::all(problem.n())]
}

/// Full-batch optimistic gradient sliding.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OgsParams {
    pub eta: f64,
    pub eps_mode: EpsMode,
    pub inner: InnerSolverConfig,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OgsState {
    pub k: u64,
    pub z_k: Point,
    pub z_km1: Point,
    pub id_z_k: PointId,
    /// `G(z^{k-1}) = F(z^{k-1}) - F_1(z^{k-1})`.
    pub g_km1: Point,
    pub inner_failures: u64,
}

impl OgsState {
    pub fn init(problem: &SaddleProblem, z0: &Point, cache: &mut GradientCache, ledger: &mut OracleLedger) -> Self {
        let id = cache.publish();
        ledger.account_init(problem.n());
        let f = full_pass(problem, cache, ledger, id, z0);
        let f1 = fetch_gradient(cache, ledger, problem, 0, id, z0);
        Self { k: 0, z_k: z0.clone(), z_km1: z0.clone(), id_z_k: id, g_km1: f.sub(&f1), inner_failures: 0 }
    }
}

/// `v = z^k - eta (2 G(z^k) - G(z^{k-1}))` with `G = F - F_1`, followed by
/// the server sub-problem solve.
pub fn ogs_round(
    state: &mut OgsState,
    problem: &SaddleProblem,
    params: &OgsParams,
    cache: &mut GradientCache,
    ledger: &mut OracleLedger,
) -> (InnerResult, Vec<Stage>) {
    let f = full_pass(problem, cache, ledger, state.id_z_k, &state.z_k);
    let f1 = fetch_gradient(cache, ledger, problem, 0, state.id_z_k, &state.z_k);
    let g = f.sub(&f1);
    let mut v = state.z_k.clone();
    v.axpy(-2.0 * params.eta, &g);
    v.axpy(params.eta, &state.g_km1);
    let z_k = state.z_k.clone();
    let target = |u: &Point| eps_schedule(&params.eps_mode, &z_k, u, 0.0);
    let inner = inner_solve(problem, &v, params.eta, &params.inner, &target, ledger, None);
    if !inner.converged {
        state.inner_failures += 1;
    }
    ledger.account_full_round(problem.n());
    state.z_km1 = core::mem::replace(&mut state.z_k, inner.u.clone());
    state.id_z_k = cache.publish();
    state.g_km1 = g;
    state.k += 1;
    cache.retain_points(&[state.id_z_k]);
    let stages = alloc::vec![Stage::all(problem.n()), Stage::server(inner.grad_calls)];
    (inner, stages)
}
