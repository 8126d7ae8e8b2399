//! Star-network simulation with exact oracle accounting.
//!
//! A communication unit is one client-server interaction inside a round
//! (a constant number of vectors each way). A snapshot broadcast and the
//! initial broadcast each cost `n` units. Gradient calls count fresh local
//! operator evaluations only; values already held in a node's memory (the
//! [`GradientCache`]) are free.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use crate::problem::SaddleProblem;
use crate::rng::{CounterRng, Stream};
use crate::Point;

/// How client batches are drawn.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BatchMode {
    /// `b` indices i.i.d. uniform over all `n` nodes, with replacement.
    Iid,
    /// Every node exactly once, in index order (ignores `b`).
    FullDeterministic,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SamplerConfig {
    pub seed: u64,
    pub b: usize,
    pub p: f64,
    pub mode: BatchMode,
}

impl SamplerConfig {
    pub fn new(seed: u64, b: usize, p: f64) -> Self {
        Self { seed, b, p, mode: BatchMode::Iid }
    }
}

/// The client batch `S^k` of round `k`; a pure function of `(seed, k)`.
pub fn sample_batch(cfg: &SamplerConfig, round: u64, n: usize) -> Vec<usize> {
    match cfg.mode {
        BatchMode::FullDeterministic => (0..n).collect(),
        BatchMode::Iid => {
            let rng = CounterRng::new(cfg.seed);
            (0..cfg.b as u64).map(|j| rng.below(Stream::Batch, round, j, n)).collect()
        }
    }
}

/// Bernoulli(`p`) snapshot decision of round `k`. Always consumes exactly
/// one draw of the snapshot stream, whatever `p` is.
pub fn snapshot_draw(cfg: &SamplerConfig, round: u64) -> bool {
    CounterRng::new(cfg.seed).uniform(Stream::Snapshot, round, 0) < cfg.p
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct OracleLedger {
    pub rounds: u64,
    pub comm_units: u64,
    pub grad_calls_total: u64,
    pub grad_calls_per_node: Vec<u64>,
    pub inner_grad_calls: u64,
    pub snapshot_events: u64,
}

/// Snapshot of the ledger counters.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LedgerSummary {
    pub rounds: u64,
    pub comm_units: u64,
    pub grad_calls_total: u64,
    pub grad_calls_per_node: Vec<u64>,
    pub inner_grad_calls: u64,
}

impl OracleLedger {
    pub fn new(n: usize) -> Self {
        Self { grad_calls_per_node: vec![0; n], ..Self::default() }
    }

    /// Initial broadcast of `z^0` to all `n` nodes.
    pub fn account_init(&mut self, n: usize) {
        self.comm_units += n as u64;
    }

    pub fn account_round(&mut self, batch_len: usize, snapshot_taken: bool, n: usize) {
        self.rounds += 1;
        self.comm_units += batch_len as u64;
        if snapshot_taken {
            self.comm_units += n as u64;
            self.snapshot_events += 1;
        }
    }

    /// A round in which every node is contacted once (full-batch baselines).
    pub fn account_full_round(&mut self, n: usize) {
        self.rounds += 1;
        self.comm_units += n as u64;
    }

    pub fn record_local_call(&mut self, node: usize) {
        self.grad_calls_per_node[node] += 1;
        self.grad_calls_total += 1;
    }

    pub fn record_inner_calls(&mut self, calls: u64) {
        self.inner_grad_calls += calls;
        self.grad_calls_total += calls;
    }

    pub fn summary(&self) -> LedgerSummary {
        LedgerSummary {
            rounds: self.rounds,
            comm_units: self.comm_units,
            grad_calls_total: self.grad_calls_total,
            grad_calls_per_node: self.grad_calls_per_node.clone(),
            inner_grad_calls: self.inner_grad_calls,
        }
    }
}

pub fn ledger_summary(ledger: &OracleLedger) -> LedgerSummary {
    ledger.summary()
}

/// One synchronous evaluation step: every listed node evaluates its
/// operator at points already known to the network, `repeats` times in a row.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Stage {
    pub nodes: Vec<usize>,
    pub repeats: u64,
}

impl Stage {
    pub fn all(n: usize) -> Self {
        Self { nodes: (0..n).collect(), repeats: 1 }
    }

    pub fn server(repeats: u64) -> Self {
        Self { nodes: vec![0], repeats }
    }
}

/// Identifier of a point published by the server.
pub type PointId = u64;

/// Per-node memory of operator values, keyed by published point.
#[derive(Clone, Debug)]
pub struct GradientCache {
    enabled: bool,
    entries: BTreeMap<(usize, PointId), Point>,
    next_id: PointId,
}

impl GradientCache {
    pub fn new(enabled: bool) -> Self {
        Self { enabled, entries: BTreeMap::new(), next_id: 0 }
    }

    pub fn enabled(&self) -> bool {
        self.enabled
    }

    /// Fresh id for a newly published iterate.
    pub fn publish(&mut self) -> PointId {
        let id = self.next_id;
        self.next_id += 1;
        id
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn contains(&self, node: usize, id: PointId) -> bool {
        self.entries.contains_key(&(node, id))
    }

    /// Drops every entry whose point is not in `live`.
    pub fn retain_points(&mut self, live: &[PointId]) {
        self.entries.retain(|(_, id), _| live.contains(id));
    }

    pub fn clear(&mut self) {
        self.entries.clear();
    }
}

/// `F_i(z)` through node `i`'s memory: a hit is free, a miss is evaluated,
/// stored and charged to node `i`.
pub fn fetch_gradient(
    cache: &mut GradientCache,
    ledger: &mut OracleLedger,
    problem: &SaddleProblem,
    i: usize,
    id: PointId,
    z: &Point,
) -> Point {
    if let Some(v) = cache.entries.get(&(i, id)) {
        return v.clone();
    }
    let mut out = problem.zero_point();
    problem.eval_local_into(i, z, &mut out);
    ledger.record_local_call(i);
    if cache.enabled {
        cache.entries.insert((i, id), out.clone());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constraint::ConstraintSet;
    use crate::problem::QuadraticBlock;

    #[test]
    fn single_node_batch() {
        let cfg = SamplerConfig::new(9, 1, 0.5);
        assert_eq!(sample_batch(&cfg, 0, 1), vec![0]);
        assert_eq!(sample_batch(&cfg, 17, 1), vec![0]);
    }

    #[test]
    fn batches_replay() {
        let cfg = SamplerConfig::new(42, 5, 0.5);
        assert_eq!(sample_batch(&cfg, 3, 10), sample_batch(&cfg, 3, 10));
        assert_ne!(sample_batch(&cfg, 3, 10), sample_batch(&cfg, 4, 10));
    }

    #[test]
    fn round_accounting() {
        let mut l = OracleLedger::new(16);
        l.account_round(4, true, 16);
        assert_eq!(l.comm_units, 20);
        l.account_round(4, false, 16);
        assert_eq!(l.comm_units, 24);
        assert_eq!((l.rounds, l.snapshot_events), (2, 1));
    }

    #[test]
    fn cache_hits_are_free() {
        let p = SaddleProblem::from_quadratic_blocks(vec![QuadraticBlock::zeros(1, 1); 2], ConstraintSet::unconstrained())
            .unwrap();
        let mut cache = GradientCache::new(true);
        let mut ledger = OracleLedger::new(2);
        let id = cache.publish();
        let z = p.zero_point();
        fetch_gradient(&mut cache, &mut ledger, &p, 1, id, &z);
        assert_eq!(ledger.grad_calls_total, 1);
        fetch_gradient(&mut cache, &mut ledger, &p, 1, id, &z);
        assert_eq!(ledger.grad_calls_total, 1);
        assert_eq!(ledger.grad_calls_per_node, vec![0, 1]);
        cache.retain_points(&[]);
        assert!(cache.is_empty());
    }

    #[test]
    fn fresh_ledger_is_zero() {
        assert_eq!(ledger_summary(&OracleLedger::new(3)), LedgerSummary { grad_calls_per_node: vec![0; 3], ..Default::default() });
    }
}
