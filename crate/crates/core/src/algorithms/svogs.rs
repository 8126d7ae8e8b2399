use alloc::vec::Vec;

use super::{eps_schedule, inner_solve, InnerResult, SvogsParams};
use crate::netsim::{
    fetch_gradient, sample_batch, snapshot_draw, GradientCache, OracleLedger, PointId, SamplerConfig, Stage,
};
use crate::problem::SaddleProblem;
use crate::Point;

/// Iterate memory of SVOGS after `k` rounds.
#[derive(Clone, Debug, PartialEq)]
pub struct SvogsState {
    pub k: u64,
    pub z_k: Point,
    pub z_km1: Point,
    pub w_k: Point,
    pub w_km1: Point,
    /// `F(w^k)`, used in the next round.
    pub f_w_k: Point,
    /// `F(w^{k-1})`, used in this round.
    pub f_w_km1: Point,
    pub id_z_k: PointId,
    pub id_z_km1: PointId,
    pub id_w_k: PointId,
    pub id_w_km1: PointId,
    pub u_sum: Point,
    /// `(1/k) sum_{t<k} u^t`; equals `z^0` before the first round.
    pub u_avg: Point,
    /// Sub-problem solves that hit the iteration cap.
    pub inner_failures: u64,
}

/// Mean of the fetched local values of every node at a published point.
fn full_pass(problem: &SaddleProblem, cache: &mut GradientCache, ledger: &mut OracleLedger, id: PointId, z: &Point) -> Point {
    let mut acc = problem.zero_point();
    for i in 0..problem.n() {
        let f = fetch_gradient(cache, ledger, problem, i, id, z);
        acc.axpy(1.0, &f);
    }
    let n = problem.n() as f64;
    acc.as_mut_slice().iter_mut().for_each(|v| *v /= n);
    acc
}

impl SvogsState {
    /// `w^{-1} = z^{-1} = w^0 = z^0`; broadcasts `z^0` and gathers `F(z^0)`.
    pub fn init(problem: &SaddleProblem, z0: &Point, cache: &mut GradientCache, ledger: &mut OracleLedger) -> Self {
        let id = cache.publish();
        ledger.account_init(problem.n());
        let f0 = full_pass(problem, cache, ledger, id, z0);
        Self {
            k: 0,
            z_k: z0.clone(),
            z_km1: z0.clone(),
            w_k: z0.clone(),
            w_km1: z0.clone(),
            f_w_k: f0.clone(),
            f_w_km1: f0,
            id_z_k: id,
            id_z_km1: id,
            id_w_k: id,
            id_w_km1: id,
            u_sum: problem.zero_point(),
            u_avg: z0.clone(),
            inner_failures: 0,
        }
    }

    fn live_ids(&self) -> [PointId; 4] {
        [self.id_z_k, self.id_z_km1, self.id_w_k, self.id_w_km1]
    }
}

/// The variance-reduced optimistic estimator
///
/// ```text
/// delta = F(w') - F_1(w') + (1/b) sum_{j in S} (F_j(z) - F_1(z) - F_j(w') + F_1(w'))
///                         + (alpha/b) sum_{j in S} (F_j(z) - F_1(z) - F_j(z') + F_1(z'))
/// ```
///
/// with `z = z^k`, `z' = z^{k-1}`, `w' = w^{k-1}`. All local values go
/// through the node memories.
pub fn estimator(
    problem: &SaddleProblem,
    state: &SvogsState,
    batch: &[usize],
    alpha: f64,
    cache: &mut GradientCache,
    ledger: &mut OracleLedger,
) -> Point {
    let f1_z = fetch_gradient(cache, ledger, problem, 0, state.id_z_k, &state.z_k);
    let f1_zm = fetch_gradient(cache, ledger, problem, 0, state.id_z_km1, &state.z_km1);
    let f1_w = fetch_gradient(cache, ledger, problem, 0, state.id_w_km1, &state.w_km1);
    let mut s1 = problem.zero_point();
    let mut s2 = problem.zero_point();
    for &j in batch {
        let fj_z = fetch_gradient(cache, ledger, problem, j, state.id_z_k, &state.z_k);
        let fj_w = fetch_gradient(cache, ledger, problem, j, state.id_w_km1, &state.w_km1);
        let fj_zm = fetch_gradient(cache, ledger, problem, j, state.id_z_km1, &state.z_km1);
        let it = s1.as_mut_slice().iter_mut().zip(s2.as_mut_slice());
        for (c, (a1, a2)) in it.enumerate() {
            let g_z = fj_z.as_slice()[c] - f1_z.as_slice()[c];
            *a1 += g_z - fj_w.as_slice()[c] + f1_w.as_slice()[c];
            *a2 += g_z - fj_zm.as_slice()[c] + f1_zm.as_slice()[c];
        }
    }
    let b = batch.len() as f64;
    let mut delta = problem.zero_point();
    let parts = delta.as_mut_slice().iter_mut().zip(state.f_w_km1.as_slice()).zip(f1_w.as_slice());
    for (c, ((d, fw), f1w)) in parts.enumerate() {
        *d = (fw - f1w) + s1.as_slice()[c] / b + alpha * s2.as_slice()[c] / b;
    }
    delta
}

/// `E_k[delta] = F(z) - F_1(z) + alpha (F(z) - F_1(z) - F(z') + F_1(z'))`,
/// evaluated outside the ledger.
pub fn estimator_conditional_mean(problem: &SaddleProblem, state: &SvogsState, alpha: f64) -> Point {
    let g = |z: &Point| {
        let mut f1 = problem.zero_point();
        problem.eval_local_into(0, z, &mut f1);
        problem.eval_mean(z).sub(&f1)
    };
    let g_z = g(&state.z_k);
    let g_zm = g(&state.z_km1);
    let mut out = g_z.clone();
    out.axpy(alpha, &g_z);
    out.axpy(-alpha, &g_zm);
    out
}

/// What happened in one SVOGS round.
#[derive(Clone, Debug, PartialEq)]
pub struct SvogsRound {
    pub batch: Vec<usize>,
    pub snapshot: bool,
    pub z_bar: Point,
    pub delta: Point,
    pub v: Point,
    pub inner: InnerResult,
    pub stages: Vec<Stage>,
}

/// One round `k -> k + 1` of SVOGS.
pub fn svogs_round(
    state: &mut SvogsState,
    params: &SvogsParams,
    problem: &SaddleProblem,
    sampler: &SamplerConfig,
    cache: &mut GradientCache,
    ledger: &mut OracleLedger,
) -> SvogsRound {
    let n = problem.n();
    let k = state.k;
    let z_bar = state.z_k.lerp(&state.w_k, params.gamma);
    let batch = sample_batch(sampler, k, n);
    let delta = estimator(problem, state, &batch, params.alpha, cache, ledger);
    let mut v = z_bar.clone();
    v.axpy(-params.eta, &delta);

    let z_k = state.z_k.clone();
    let target = |u: &Point| eps_schedule(&params.eps_mode, &z_k, u, 0.0);
    let inner = inner_solve(problem, &v, params.eta, &params.inner, &target, ledger, None);
    if !inner.converged {
        state.inner_failures += 1;
    }
    let u = inner.u.clone();
    let id_u = cache.publish();

    let snapshot = snapshot_draw(sampler, k);
    let (w_next, id_w_next, f_w_next) = if snapshot {
        let f = full_pass(problem, cache, ledger, id_u, &u);
        (u.clone(), id_u, f)
    } else {
        (state.w_k.clone(), state.id_w_k, state.f_w_k.clone())
    };
    ledger.account_round(batch.len(), snapshot, n);

    let mut first: Vec<usize> = core::iter::once(0).chain(batch.iter().copied()).collect();
    first.sort_unstable();
    first.dedup();
    let mut stages = alloc::vec![Stage { nodes: first, repeats: 1 }, Stage::server(inner.grad_calls)];
    if snapshot {
        stages.push(Stage::all(n));
    }

    state.z_km1 = core::mem::replace(&mut state.z_k, u.clone());
    state.id_z_km1 = core::mem::replace(&mut state.id_z_k, id_u);
    state.w_km1 = core::mem::replace(&mut state.w_k, w_next);
    state.id_w_km1 = core::mem::replace(&mut state.id_w_k, id_w_next);
    state.f_w_km1 = core::mem::replace(&mut state.f_w_k, f_w_next);
    state.u_sum.axpy(1.0, &u);
    state.k += 1;
    state.u_avg = state.u_sum.scaled(1.0 / state.k as f64);
    cache.retain_points(&state.live_ids());

    SvogsRound { batch, snapshot, z_bar, delta, v, inner, stages }
}
