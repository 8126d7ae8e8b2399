//! Property suites runnable from the command line. Failures are report
//! entries, not errors.

use serde::Serialize;
use svogs_core::algorithms::{
    auto_params_cc, auto_params_scsc, estimator, estimator_conditional_mean, run, svogs_round, Algorithm, EgParams, EpsMode,
    OgsParams, RunOptions, SvogsState,
};
use svogs_core::data::{synthetic, SyntheticSpec};
use svogs_core::hardinstances::{build_hard_instance, verify_zero_chain, ChainRecord, HardKind, HardParams};
use svogs_core::metrics::{lyapunov, reference_solution, LyapunovInputs, LyapunovVariant};
use svogs_core::netsim::{sample_batch, GradientCache, OracleLedger, SamplerConfig};
use svogs_core::problem::{build_robust_regression, RegressionVariant, SaddleProblem};
use svogs_core::rng::{CounterRng, Lane, Stream};
use svogs_core::Point;

/// Absolute slack for rounding in the averaged operator.
const ROUNDING: f64 = 1e-12;

pub const SUITES: [&str; 5] = ["similarity", "lyapunov", "zero-chain", "estimator-unbiasedness", "accounting"];

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReportEntry {
    pub suite: String,
    pub check: String,
    pub passed: bool,
    pub stats: Vec<(String, f64)>,
    pub note: String,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct VerifyReport {
    pub entries: Vec<ReportEntry>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        !self.entries.is_empty() && self.entries.iter().all(|e| e.passed)
    }

    pub fn stat(&self, check: &str, name: &str) -> Option<f64> {
        let e = self.entries.iter().find(|e| e.check == check)?;
        e.stats.iter().find(|(k, _)| k == name).map(|s| s.1)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for e in &self.entries {
            let stats: Vec<String> = e.stats.iter().map(|(k, v)| format!("{k}={v:.6e}")).collect();
            s.push_str(&format!(
                "{} {}/{} {}{}\n",
                if e.passed { "PASS" } else { "FAIL" },
                e.suite,
                e.check,
                stats.join(" "),
                if e.note.is_empty() { String::new() } else { format!(" ({})", e.note) }
            ));
        }
        s
    }
}

fn entry(suite: &str, check: &str, passed: bool, stats: Vec<(&str, f64)>, note: String) -> ReportEntry {
    ReportEntry {
        suite: suite.into(),
        check: check.into(),
        passed,
        stats: stats.into_iter().map(|(k, v)| (k.to_string(), v)).collect(),
        note,
    }
}

fn lane(counter: u64) -> Lane {
    CounterRng::new(0x5eed).lane(Stream::Diagnostic, counter)
}

fn random_point(l: &mut Lane, dx: usize, dy: usize, scale: f64) -> Point {
    let x: Vec<f64> = (0..dx).map(|_| scale * l.normal()).collect();
    let y: Vec<f64> = (0..dy).map(|_| scale * l.normal()).collect();
    Point::from_parts(&x, &y)
}

/// Largest observed `||(F_i - F)(z1) - (F_i - F)(z2)|| / ||z1 - z2||` over
/// random pairs drawn by `draw`.
pub fn empirical_similarity(problem: &SaddleProblem, pairs: usize, draw: &mut dyn FnMut() -> Point) -> f64 {
    let mut worst: f64 = 0.0;
    for _ in 0..pairs {
        let (z1, z2) = (draw(), draw());
        let dist = z1.dist(&z2);
        if dist == 0.0 {
            continue;
        }
        let (m1, m2) = (problem.eval_mean(&z1), problem.eval_mean(&z2));
        for i in 0..problem.n() {
            let mut a = problem.zero_point();
            let mut b = problem.zero_point();
            problem.eval_local_into(i, &z1, &mut a);
            problem.eval_local_into(i, &z2, &mut b);
            worst = worst.max(a.sub(&m1).dist(&b.sub(&m2)) / dist);
        }
    }
    worst
}

fn similarity(report: &mut VerifyReport) {
    let inst = build_hard_instance(HardKind::CcGrad, HardParams { n: 6, d: 10, delta: 1.0, mu: 0.0, l: 1.0, r_x: 1.0, r_y: 1.0 })
        .expect("valid instance");
    let est = inst.problem.estimate_constants().expect("quadratic");
    let mut l = lane(1);
    let worst = empirical_similarity(&inst.problem, 200, &mut || random_point(&mut l, 10, 10, 1.0));
    report.entries.push(entry(
        "similarity",
        "identical-nodes",
        est.delta == 0.0 && worst <= ROUNDING,
        vec![("delta_est", est.delta), ("max_ratio", worst)],
        "cc-grad instance, every node holds the same block".into(),
    ));

    let data = synthetic(&SyntheticSpec::new(400, 8), 2).expect("synthetic data");
    let beta = 2.0;
    let p = build_robust_regression(&data, 8, RegressionVariant::Regularized { lambda: 1.0, beta }, 0).expect("problem");
    let delta = p.declared().delta.expect("declared");
    let r = (beta / 2.0f64).sqrt();
    let mut l = lane(2);
    let mut draw = || {
        let mut z = random_point(&mut l, 8, 8, 1.0);
        let (nx, ny) = (svogs_core::linalg::norm(z.x()), svogs_core::linalg::norm(z.y()));
        let (sx, sy) = (r * l.uniform() / nx, r * l.uniform() / ny);
        z.x_mut().iter_mut().for_each(|v| *v *= sx);
        z.y_mut().iter_mut().for_each(|v| *v *= sy);
        z
    };
    let worst = empirical_similarity(&p, 1000, &mut draw);
    report.entries.push(entry(
        "similarity",
        "regression-region",
        worst <= delta * (1.0 + 1e-9) + ROUNDING,
        vec![("delta_est", delta), ("max_ratio", worst)],
        "robust regression, 8 nodes, pairs inside the declared region".into(),
    ));
}

fn scsc_instance(n: usize, d: usize) -> SaddleProblem {
    build_hard_instance(HardKind::ScscComm, HardParams { n, d, delta: 1.0, mu: 0.1, l: 1.0, r_x: 1.0, r_y: 1.0 })
        .expect("valid instance")
        .problem
}

fn lyapunov_suite(report: &mut VerifyReport) {
    let p = scsc_instance(4, 6);
    let est = p.estimate_constants().expect("quadratic");
    let z_star = reference_solution(&p, 1e-12).expect("unique saddle").z_star;
    let eta = 1.0 / (32.0 * est.delta);
    let mut l = lane(3);
    let mut worst = f64::INFINITY;
    for _ in 0..1000 {
        let scale = l.range(0.01, 10.0);
        let pts: Vec<Point> = (0..4).map(|_| random_point(&mut l, 6, 6, scale)).collect();
        let gamma = l.range(1e-3, 0.125);
        let s = LyapunovInputs { z_k: &pts[0], z_km1: &pts[1], w_k: &pts[2], w_km1: &pts[3], eta, gamma, p: gamma };
        let norm = pts.iter().map(|z| z.dist_sq(&z_star)).sum::<f64>() / eta;
        for v in [LyapunovVariant::Quarter, LyapunovVariant::Half] {
            worst = worst.min(lyapunov(&p, &s, &z_star, est.mu, v) / norm);
        }
    }
    report.entries.push(entry(
        "lyapunov",
        "nonnegative",
        worst >= -1e-10,
        vec![("min_phi_over_scale", worst), ("eta", eta)],
        "1000 random states, eta = 1/(32 delta)".into(),
    ));
}

fn zero_chain(report: &mut VerifyReport) {
    let inst = build_hard_instance(HardKind::CcRounds, HardParams { n: 9, d: 12, delta: 1.0, mu: 0.0, l: 1.0, r_x: 1.0, r_y: 1.0 })
        .expect("valid instance");
    let p = &inst.problem;
    let diam = p.constraint().diameter().expect("bounded");
    let cc = auto_params_cc(9, 1.0, 1.0, diam, 1e-3, p.max_local_norm(&p.zero_point())).expect("params");
    let ogs = OgsParams { eta: cc.eta, eps_mode: EpsMode::Fixed(1e-12), inner: cc.inner };
    for algo in [Algorithm::Svogs(cc), Algorithm::Eg(EgParams::default_for(1.0)), Algorithm::Ogs(ogs)] {
        let mut opts = RunOptions::rounds(1, 30);
        opts.record_history = true;
        let out = run(p, &algo, &p.zero_point(), &opts).expect("run");
        let records: Vec<ChainRecord> =
            out.history.iter().map(|r| ChainRecord { iterate: r.iterate.clone(), stages: r.stages.clone() }).collect();
        let rep = verify_zero_chain(&inst, &records);
        let log: Vec<String> = rep.observed.iter().zip(&rep.predicted).map(|(o, p)| format!("{o}/{p}")).collect();
        report.entries.push(entry(
            "zero-chain",
            algo.name(),
            rep.passed,
            vec![("final_frontier", *rep.observed.last().unwrap_or(&0) as f64)],
            format!("observed/predicted per round: {}", log.join(" ")),
        ));
    }
}

fn unbiasedness(report: &mut VerifyReport) {
    let p = scsc_instance(8, 3);
    let est = p.estimate_constants().expect("quadratic");
    let params = auto_params_scsc(8, est.delta, est.mu, est.l, 1.0, None).expect("params");
    let cfg = SamplerConfig::new(4, params.b, params.p);
    let mut cache = GradientCache::new(true);
    let mut ledger = OracleLedger::new(8);
    let z0 = random_point(&mut lane(4), 3, 3, 1.0);
    let mut state = SvogsState::init(&p, &z0, &mut cache, &mut ledger);
    for _ in 0..3 {
        svogs_round(&mut state, &params, &p, &cfg, &mut cache, &mut ledger);
    }
    let analytic = estimator_conditional_mean(&p, &state, params.alpha);
    let draws = 20_000u64;
    let dim = p.dim();
    let (mut sum, mut sum_sq) = (vec![0.0; dim], vec![0.0; dim]);
    let resample = SamplerConfig::new(77, params.b, params.p);
    for t in 0..draws {
        let batch = sample_batch(&resample, t, 8);
        let d = estimator(&p, &state, &batch, params.alpha, &mut cache, &mut ledger);
        for (c, v) in d.as_slice().iter().enumerate() {
            sum[c] += v;
            sum_sq[c] += v * v;
        }
    }
    let nd = draws as f64;
    let mut worst: f64 = 0.0;
    for c in 0..dim {
        let m = sum[c] / nd;
        let var = (sum_sq[c] / nd - m * m).max(0.0) * nd / (nd - 1.0);
        let se = (var / nd).sqrt();
        let dev = (m - analytic.as_slice()[c]).abs();
        worst = worst.max(if se > 0.0 { dev / se } else if dev == 0.0 { 0.0 } else { f64::INFINITY });
    }
    report.entries.push(entry(
        "estimator-unbiasedness",
        "conditional-mean",
        worst <= 3.0,
        vec![("max_dev_over_se", worst), ("draws", nd)],
        "frozen state after 3 rounds, coordinatewise".into(),
    ));
}

fn accounting(report: &mut VerifyReport) {
    let n = 25usize;
    let p = scsc_instance(n, 2);
    let est = p.estimate_constants().expect("quadratic");
    let params = auto_params_scsc(n, est.delta, est.mu, est.l, 1.0, None).expect("params");
    let rounds = 10_000u64;
    let out = run(&p, &Algorithm::Svogs(params), &p.zero_point(), &RunOptions::rounds(5, rounds)).expect("run");
    let nf = n as f64;
    let mean = (out.ledger.comm_units as f64 - nf) / rounds as f64;
    let expected = params.b as f64 + params.p * nf;
    let sigma = nf * (params.p * (1.0 - params.p)).sqrt() / (rounds as f64).sqrt();
    report.entries.push(entry(
        "accounting",
        "mean-comm-per-round",
        (mean - expected).abs() <= 3.0 * sigma,
        vec![("mean", mean), ("expected", expected), ("sigma", sigma)],
        "expected b + p n per round".into(),
    ));
}

/// Runs the named suite, or every suite for `all`. Unknown selectors give
/// a single failing entry.
pub fn verify_suite(selector: &str) -> VerifyReport {
    let mut report = VerifyReport::default();
    let selected: Vec<&str> = if selector == "all" { SUITES.to_vec() } else { vec![selector] };
    for s in selected {
        match s {
            "similarity" => similarity(&mut report),
            "lyapunov" => lyapunov_suite(&mut report),
            "zero-chain" => zero_chain(&mut report),
            "estimator-unbiasedness" => unbiasedness(&mut report),
            "accounting" => accounting(&mut report),
            other => report.entries.push(entry(
                other,
                "selector",
                false,
                Vec::new(),
                format!("unknown suite; expected one of {} or all", SUITES.join(", ")),
            )),
        }
    }
    report
}
