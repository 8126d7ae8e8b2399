//! Acceptance checks. Each criterion prints one PASS/FAIL line with the
//! measured values; the process exits non-zero if any criterion fails.

mod common;

use std::time::Instant;

use common::*;
use nalgebra::DMatrix;
use svogs_core::algorithms::{
    auto_params_cc, auto_params_scsc, estimator, estimator_conditional_mean, inner_solve, ogs_round, run, svogs_round,
    Algorithm, EgParams, EpsMode, InnerSolverConfig, OgsParams, OgsState, RunOptions, Stopping, SvogsParams, SvogsState,
};
use svogs_core::constraint::{ConstraintSet, SetPrimitive};
use svogs_core::data::{synthetic, SyntheticSpec};
use svogs_core::hardinstances::{
    build_hard_instance, verify_zero_chain, ChainRecord, HardInstance, HardKind, HardParams,
};
use svogs_core::metrics::{grad_mapping_norm, lyapunov, LyapunovInputs, LyapunovVariant, Metric};
use svogs_core::netsim::{BatchMode, GradientCache, OracleLedger, SamplerConfig};
use svogs_core::problem::{build_robust_regression, RegressionVariant, SaddleProblem};
use svogs_core::Point;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn quantile(v: &[f64], q: f64) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(|a, b| a.total_cmp(b));
    let pos = q * (s.len() - 1) as f64;
    let (lo, hi) = (pos.floor() as usize, pos.ceil() as usize);
    s[lo] + (s[hi] - s[lo]) * (pos - lo as f64)
}

/// Quadratic scsc instance with `mu / delta = ratio`: node blocks share a
/// coupling and differ by symmetric perturbations with zero mean, so the
/// symmetric part of the mean Jacobian is exactly `ratio * delta * I`.
fn scsc_instance(seed: u64, n: usize, dx: usize, dy: usize, ratio: f64) -> (Vec<DenseQuad>, SaddleProblem) {
    let mut quads = random_quads(seed, n, dx, dy, 0.0, 0.5);
    let a_bar = quads.iter().fold(DMatrix::zeros(dx, dx), |acc, q| acc + &q.a) / n as f64;
    let c_bar = quads.iter().fold(DMatrix::zeros(dy, dy), |acc, q| acc + &q.c) / n as f64;
    for q in &mut quads {
        q.a -= &a_bar;
        q.c -= &c_bar;
    }
    let delta = quad_problem(&quads, ConstraintSet::unconstrained()).estimate_constants().unwrap().delta;
    let mu = ratio * delta;
    for q in &mut quads {
        q.a += DMatrix::identity(dx, dx) * mu;
        q.c += DMatrix::identity(dy, dy) * mu;
    }
    let p = quad_problem(&quads, ConstraintSet::unconstrained());
    (quads, p)
}

/// Starting point at unit distance from `z_star`.
fn unit_start(z_star: &Point, seed: u64) -> Point {
    let mut dir = random_point(&mut lane(seed, 77), z_star.x().len(), z_star.y().len(), 1.0);
    dir.scale(1.0 / dir.norm());
    z_star.add(&dir)
}

fn similarity() -> Outcome {
    let data = synthetic(&SyntheticSpec::new(2000, 30), 11).unwrap();
    let beta = 2.0;
    let p = build_robust_regression(&data, 16, RegressionVariant::Regularized { lambda: 1.0, beta }, 3).unwrap();
    let delta = p.declared().delta.unwrap();
    let r = (beta / 2.0f64).sqrt();
    let mut l = lane(1, 0);
    let in_region = |l: &mut svogs_core::rng::Lane| {
        let mut z = random_point(l, 30, 30, 1.0);
        let (nx, ny) = (svogs_core::linalg::norm(z.x()), svogs_core::linalg::norm(z.y()));
        let (sx, sy) = (r * l.uniform() / nx, r * l.uniform() / ny);
        z.x_mut().iter_mut().for_each(|v| *v *= sx);
        z.y_mut().iter_mut().for_each(|v| *v *= sy);
        z
    };
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let (z1, z2) = (in_region(&mut l), in_region(&mut l));
        let (m1, m2) = (p.eval_mean(&z1), p.eval_mean(&z2));
        let gap = z1.dist(&z2);
        for i in 0..p.n() {
            let d1 = p.eval_local(i, &z1).unwrap().sub(&m1);
            let d2 = p.eval_local(i, &z2).unwrap().sub(&m2);
            worst = worst.max(d1.dist(&d2) / gap);
        }
    }
    outcome(worst <= delta * (1.0 + 1e-9), format!("max ratio {worst:.6e}, delta_est {delta:.6e}"))
}

fn potential_nonnegative() -> Outcome {
    let (quads, p) = scsc_instance(21, 8, 5, 5, 0.1);
    let est = p.estimate_constants().unwrap();
    let z_star = point_of(&dense_saddle(&quads), 5);
    let eta = 1.0 / (32.0 * est.delta);
    let mut l = lane(2, 0);
    let mut worst = f64::INFINITY;
    let mut ok = true;
    for _ in 0..1000 {
        let scale_pts = l.range(0.01, 10.0);
        let pts: Vec<Point> = (0..4).map(|_| random_point(&mut l, 5, 5, scale_pts)).collect();
        let gamma = l.range(1e-3, 0.125);
        let s = LyapunovInputs { z_k: &pts[0], z_km1: &pts[1], w_k: &pts[2], w_km1: &pts[3], eta, gamma, p: gamma };
        let scale = pts.iter().map(|z| z.dist_sq(&z_star)).sum::<f64>() / eta;
        for variant in [LyapunovVariant::Quarter, LyapunovVariant::Half] {
            let phi = lyapunov(&p, &s, &z_star, est.mu, variant);
            worst = worst.min(phi / scale);
            ok &= phi >= -1e-10 * scale;
        }
    }
    outcome(ok, format!("min Phi/scale {worst:.3e} over 1000 states"))
}

fn potential_decrease() -> Outcome {
    let (quads, p) = scsc_instance(31, 16, 10, 10, 0.1);
    let est = p.estimate_constants().unwrap();
    let z_star = point_of(&dense_saddle(&quads), 10);
    let z0 = unit_start(&z_star, 31);
    let params = auto_params_scsc(16, est.delta, est.mu, est.l, 1.0, None).unwrap();
    let rho = params.rho(est.mu);
    let seeds = 50u64;
    let rounds = 200usize;
    let mut report = Vec::new();
    let mut passed_any = false;
    for variant in [LyapunovVariant::Quarter, LyapunovVariant::Half] {
        let phi0 = {
            let s = LyapunovInputs { z_k: &z0, z_km1: &z0, w_k: &z0, w_km1: &z0, eta: params.eta, gamma: params.gamma, p: params.p };
            lyapunov(&p, &s, &z_star, est.mu, variant)
        };
        let mut series = vec![vec![phi0; seeds as usize]; rounds + 1];
        for seed in 0..seeds {
            let mut opts = RunOptions::rounds(seed, rounds as u64);
            opts.metrics = vec![Metric::Lyapunov { z_star: z_star.clone(), mu: est.mu, variant }];
            let out = run(&p, &Algorithm::Svogs(params), &z0, &opts).unwrap();
            for (k, v) in out.trace.series("lyapunov") {
                series[k as usize][seed as usize] = v;
            }
        }
        let mut worst_excess = f64::NEG_INFINITY;
        for k in 0..rounds {
            let diffs: Vec<f64> = (0..seeds as usize).map(|s| series[k + 1][s] - rho * series[k][s]).collect();
            let excess = (mean(&diffs) - 3.0 * std_err(&diffs)) / mean(&series[k]);
            worst_excess = worst_excess.max(excess);
        }
        let ok = worst_excess <= 0.0;
        passed_any |= ok;
        report.push(format!("{variant:?}: worst (mean diff - 3 SE)/mean Phi = {worst_excess:.3e}"));
    }
    outcome(passed_any, format!("rho {rho:.6}; {}", report.join("; ")))
}

fn unbiasedness() -> Outcome {
    let (_, p) = scsc_instance(41, 12, 3, 3, 0.1);
    let est = p.estimate_constants().unwrap();
    let params = auto_params_scsc(12, est.delta, est.mu, est.l, 1.0, None).unwrap();
    let cfg = SamplerConfig::new(4, params.b, params.p);
    let mut cache = GradientCache::new(true);
    let mut ledger = OracleLedger::new(12);
    let mut state = SvogsState::init(&p, &random_point(&mut lane(4, 0), 3, 3, 1.0), &mut cache, &mut ledger);
    for _ in 0..5 {
        svogs_round(&mut state, &params, &p, &cfg, &mut cache, &mut ledger);
    }
    let analytic = estimator_conditional_mean(&p, &state, params.alpha);
    let draws = 100_000u64;
    let dim = p.dim();
    let mut sum = vec![0.0; dim];
    let mut sum_sq = vec![0.0; dim];
    let resample = SamplerConfig::new(99, params.b, params.p);
    for t in 0..draws {
        let batch = svogs_core::netsim::sample_batch(&resample, t, 12);
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
        worst = worst.max((m - analytic.as_slice()[c]).abs() / se);
    }
    outcome(worst <= 3.0, format!("max |mean - E|/SE = {worst:.3} over {dim} coordinates"))
}

fn accounting() -> Outcome {
    let (_, p) = scsc_instance(51, 25, 2, 2, 0.1);
    let est = p.estimate_constants().unwrap();
    let params = auto_params_scsc(25, est.delta, est.mu, est.l, 1.0, None).unwrap();
    let rounds = 10_000u64;
    let out = run(&p, &Algorithm::Svogs(params), &p.zero_point(), &RunOptions::rounds(5, rounds)).unwrap();
    let n = 25.0;
    let per_round = (out.ledger.comm_units as f64 - n) / rounds as f64;
    let expected = params.b as f64 + params.p * n;
    let sigma = n * (params.p * (1.0 - params.p)).sqrt() / (rounds as f64).sqrt();
    outcome(
        (per_round - expected).abs() <= 3.0 * sigma,
        format!("mean increment {per_round:.4}, b + pn = {expected:.4}, sigma {sigma:.4}"),
    )
}

fn rounds_to(p: &SaddleProblem, params: &SvogsParams, z0: &Point, z_star: &Point, seed: u64, target: f64, cap: u64) -> u64 {
    let mut opts = RunOptions::rounds(seed, cap);
    opts.stopping = Stopping::Threshold { metric: Metric::DistanceSq { z_star: z_star.clone() }, threshold: target, max_rounds: cap };
    opts.cadence = cap;
    let out = run(p, &Algorithm::Svogs(*params), z0, &opts).unwrap();
    if out.reached_threshold {
        out.rounds
    } else {
        u64::MAX
    }
}

fn linear_rate() -> Outcome {
    let (quads, p) = scsc_instance(31, 16, 10, 10, 0.1);
    let est = p.estimate_constants().unwrap();
    let z_star = point_of(&dense_saddle(&quads), 10);
    let z0 = unit_start(&z_star, 31);
    let params = auto_params_scsc(16, est.delta, est.mu, est.l, 1.0, None).unwrap();
    let rho = params.rho(est.mu);

    // Contraction of the seed-averaged squared distance, fitted over the
    // run until it first reaches 1e-6.
    let seeds = 20u64;
    let rounds = 1000u64;
    let mut mean_sq = vec![0.0; rounds as usize + 1];
    mean_sq[0] = 1.0;
    for seed in 0..seeds {
        let mut opts = RunOptions::rounds(seed, rounds);
        opts.metrics = vec![Metric::DistanceSq { z_star: z_star.clone() }];
        let out = run(&p, &Algorithm::Svogs(params), &z0, &opts).unwrap();
        for (k, v) in out.trace.series("distance_sq") {
            mean_sq[k as usize] += v / seeds as f64;
        }
    }
    let fit: Vec<(f64, f64)> = mean_sq
        .iter()
        .enumerate()
        .skip(1)
        .take_while(|(_, v)| **v > 1e-6)
        .map(|(k, v)| (k as f64, v.ln()))
        .collect();
    let (sx, sy) = fit.iter().fold((0.0, 0.0), |a, (x, y)| (a.0 + x, a.1 + y));
    let m = fit.len() as f64;
    let (mx, my) = (sx / m, sy / m);
    let slope = fit.iter().map(|(x, y)| (x - mx) * (y - my)).sum::<f64>() / fit.iter().map(|(x, _)| (x - mx).powi(2)).sum::<f64>();
    let factor = slope.exp();
    let rate_ok = factor <= rho + 0.05;

    // Rounds to 1e-6 at mu/delta = 0.1 and 0.05, median over seeds.
    let (quads2, p2) = scsc_instance(31, 16, 10, 10, 0.05);
    let est2 = p2.estimate_constants().unwrap();
    let z_star2 = point_of(&dense_saddle(&quads2), 10);
    let z02 = unit_start(&z_star2, 31);
    let params2 = auto_params_scsc(16, est2.delta, est2.mu, est2.l, 1.0, None).unwrap();
    let cap = 200_000;
    let med = |p: &SaddleProblem, params: &SvogsParams, z0: &Point, zs: &Point| {
        let v: Vec<f64> = (0..7).map(|s| rounds_to(p, params, z0, zs, 100 + s, 1e-6, cap) as f64).collect();
        quantile(&v, 0.5)
    };
    let k1 = med(&p, &params, &z0, &z_star);
    let k2 = med(&p2, &params2, &z02, &z_star2);
    let ratio = k2 / k1;
    let scaling_ok = (1.6..=2.6).contains(&ratio);
    outcome(
        rate_ok && scaling_ok,
        format!(
            "fitted factor {factor:.6} vs rho + 0.05 = {:.6}; rounds to 1e-6: {k1} (delta/mu {:.1}) vs {k2} (delta/mu {:.1}), ratio {ratio:.3}",
            rho + 0.05,
            est.delta / est.mu,
            est2.delta / est2.mu
        ),
    )
}

fn cc_instance(d: usize) -> HardInstance {
    build_hard_instance(HardKind::CcRounds, HardParams { n: 9, d, delta: 1.0, mu: 0.0, l: 1.0, r_x: 1.0, r_y: 1.0 }).unwrap()
}

fn sublinear() -> Outcome {
    let inst = cc_instance(40);
    let p = &inst.problem;
    let diam = p.constraint().diameter().unwrap();
    let eps = 2e-3;
    let params = auto_params_cc(9, 1.0, 1.0, diam, eps / 2.0, p.max_local_norm(&p.zero_point())).unwrap();
    let cap = 200_000u64;
    let mut ratios = Vec::new();
    let mut pairs = Vec::new();
    for seed in 0..7 {
        let mut opts = RunOptions::rounds(seed, cap);
        opts.stopping = Stopping::Threshold { metric: Metric::Gap(svogs_core::metrics::GapMode::ClosedForm), threshold: eps / 2.0, max_rounds: cap };
        opts.metrics = vec![Metric::Gap(svogs_core::metrics::GapMode::ClosedForm)];
        let out = run(p, &Algorithm::Svogs(params), &p.zero_point(), &opts).unwrap();
        let series = out.trace.series("gap");
        // Last crossing into each level, so early transients do not count.
        let hit = |level: f64| {
            let last_above = series.iter().rposition(|(_, v)| *v > level);
            last_above.map_or(series[0].0, |i| series.get(i + 1).map_or(u64::MAX, |r| r.0))
        };
        let (k1, k2) = (hit(eps), hit(eps / 2.0));
        pairs.push((k1, k2));
        ratios.push(k2 as f64 / k1 as f64);
    }
    let r = quantile(&ratios, 0.5);
    outcome((1.5..=3.0).contains(&r), format!("median ratio {r:.3}; (K_eps, K_eps/2) per seed {pairs:?}"))
}

fn communication_advantage() -> Outcome {
    let mut spec = SyntheticSpec::new(5000, 40);
    spec.mean_norm = 30.0;
    spec.sigma = 0.05;
    let data = synthetic(&spec, 8).unwrap();
    let p = build_robust_regression(&data, 100, RegressionVariant::Regularized { lambda: 1.0, beta: 2.0 }, 8).unwrap();
    let est = p.estimate_constants().unwrap();
    let target = 1e-4;
    let tau = 1.0 / est.l;
    let cap = 400_000u64;
    let stop = |cap| Stopping::Threshold { metric: Metric::GradMapping { tau }, threshold: target, max_rounds: cap };
    let params = auto_params_scsc(100, est.delta, est.mu, est.l, 1.0, None).unwrap();
    let eg = EgParams::default_for(est.l);
    let mut sv_comm = Vec::new();
    let mut sv_rounds = Vec::new();
    let mut eg_comm = Vec::new();
    let mut eg_rounds = Vec::new();
    let mut all_reached = true;
    for seed in 0..10 {
        let mut opts = RunOptions::rounds(seed, cap);
        opts.stopping = stop(cap);
        let out = run(&p, &Algorithm::Svogs(params), &p.zero_point(), &opts).unwrap();
        all_reached &= out.reached_threshold;
        sv_comm.push(out.ledger.comm_units as f64);
        sv_rounds.push(out.rounds as f64);
    }
    // EG is deterministic; the seed only labels the run.
    let mut opts = RunOptions::rounds(0, cap);
    opts.stopping = stop(cap);
    let out = run(&p, &Algorithm::Eg(eg), &p.zero_point(), &opts).unwrap();
    all_reached &= out.reached_threshold;
    eg_comm.push(out.ledger.comm_units as f64);
    eg_rounds.push(out.rounds as f64);
    let (sc, sr, ec, er) = (quantile(&sv_comm, 0.5), quantile(&sv_rounds, 0.5), eg_comm[0], eg_rounds[0]);
    outcome(
        all_reached && sc <= 0.6 * ec && sr <= er,
        format!(
            "L {:.3e}, delta {:.3e}, mu {:.3e}; SVOGS comm {sc} rounds {sr}; EG comm {ec} rounds {er}; comm ratio {:.3}",
            est.l,
            est.delta,
            est.mu,
            sc / ec
        ),
    )
}

fn zero_chain() -> Outcome {
    let inst = cc_instance(12);
    let p = &inst.problem;
    let diam = p.constraint().diameter().unwrap();
    let cc = auto_params_cc(9, 1.0, 1.0, diam, 1e-3, p.max_local_norm(&p.zero_point())).unwrap();
    let ogs = OgsParams { eta: cc.eta, eps_mode: EpsMode::Fixed(1e-12), inner: cc.inner };
    let algos = [Algorithm::Svogs(cc), Algorithm::Eg(EgParams::default_for(1.0)), Algorithm::Ogs(ogs)];
    let mut ok = true;
    let mut notes = Vec::new();
    let mut last = None;
    for algo in &algos {
        for seed in 0..3 {
            let mut opts = RunOptions::rounds(seed, 40);
            opts.record_history = true;
            let out = run(p, algo, &p.zero_point(), &opts).unwrap();
            let records: Vec<ChainRecord> =
                out.history.iter().map(|r| ChainRecord { iterate: r.iterate.clone(), stages: r.stages.clone() }).collect();
            let rep = verify_zero_chain(&inst, &records);
            ok &= rep.passed;
            if seed == 0 {
                notes.push(format!("{} frontier {}", algo.name(), rep.observed.last().copied().unwrap_or(0)));
            }
            last = Some(records);
        }
    }
    // Forged trace: full support after a server-only round.
    let mut forged = last.unwrap();
    forged.truncate(1);
    forged[0].stages = vec![svogs_core::netsim::Stage::server(1)];
    forged[0].iterate = Point::from_parts(&[1.0; 12], &[1.0; 12]);
    let rejected = !verify_zero_chain(&inst, &forged).passed;
    outcome(ok && rejected, format!("{}; forged trace rejected: {rejected}", notes.join(", ")))
}

fn inner_certificate() -> Outcome {
    let mut worst_ratio: f64 = 0.0;
    let mut all_final = true;
    let mut checks = 0usize;
    for t in 0..100u64 {
        let quads = random_quads(1000 + t, 1, 4, 3, 0.0, 1.0);
        let p = quad_problem(&quads, ConstraintSet::unconstrained());
        let est = p.estimate_constants().unwrap();
        let mut l = lane(10, t);
        let eta = l.range(0.05, 2.0);
        let v = random_point(&mut l, 4, 3, 2.0);
        let j = quads[0].jacobian();
        let sys = DMatrix::<f64>::identity(7, 7) + &j * eta;
        let rhs = dvec(&v) - quads[0].constant() * eta;
        let u_hat = point_of(&sys.lu().solve(&rhs).unwrap(), 4);
        let cfg = InnerSolverConfig::new(est.l, eta, None);
        let mut ledger = OracleLedger::new(1);
        let eps = 10f64.powf(-l.range(4.0, 12.0));
        let mut probe = |u: &Point, bound: f64| {
            checks += 1;
            worst_ratio = worst_ratio.max(u.dist(&u_hat) / bound);
        };
        let r = inner_solve(&p, &v, eta, &cfg, &|_| eps, &mut ledger, Some(&mut probe));
        all_final &= r.converged && r.u.dist_sq(&u_hat) <= r.eps;
    }
    outcome(
        worst_ratio <= 1.0 && all_final,
        format!("max true/certified {worst_ratio:.3} over {checks} checks; final within eps: {all_final}"),
    )
}

fn degenerate() -> Outcome {
    // n = 1: the estimator reduces to F(w) - F_1(w), which vanishes.
    let quads = random_quads(61, 1, 3, 3, 0.2, 0.5);
    let p = quad_problem(&quads, ConstraintSet::unconstrained());
    let l = p.estimate_constants().unwrap().l;
    let params = SvogsParams {
        eta: 0.1,
        gamma: 0.2,
        p: 0.5,
        b: 1,
        alpha: 0.9,
        k_max: 0,
        eps_mode: EpsMode::Fixed(1e-14),
        inner: InnerSolverConfig::new(l, 0.1, None),
        d_f_init: 0.0,
    };
    let cfg = SamplerConfig::new(6, 1, 0.5);
    let mut cache = GradientCache::new(true);
    let mut ledger = OracleLedger::new(1);
    let mut st = SvogsState::init(&p, &random_point(&mut lane(6, 1), 3, 3, 1.0), &mut cache, &mut ledger);
    let mut bitwise = true;
    for _ in 0..20 {
        let direct = p.eval_mean(&st.w_km1).sub(&p.eval_local(0, &st.w_km1).unwrap());
        let r = svogs_round(&mut st, &params, &p, &cfg, &mut cache, &mut ledger);
        bitwise &= r.delta.as_slice().iter().zip(direct.as_slice()).all(|(a, b)| a.to_bits() == b.to_bits());
    }

    // Full deterministic batch with p = 1, gamma = 0, alpha = 1 against OGS.
    let quads = random_quads(62, 6, 3, 3, 0.2, 0.5);
    let p = quad_problem(&quads, ConstraintSet::unconstrained());
    let l = p.estimate_constants().unwrap().l;
    let eps = 1e-20;
    let inner = InnerSolverConfig::new(l, 0.05, None);
    let sv = SvogsParams { eta: 0.05, gamma: 0.0, p: 1.0, b: 6, alpha: 1.0, k_max: 0, eps_mode: EpsMode::Fixed(eps), inner, d_f_init: 0.0 };
    let og = OgsParams { eta: 0.05, eps_mode: EpsMode::Fixed(eps), inner };
    let z0 = random_point(&mut lane(6, 2), 3, 3, 1.0);
    let mut cfg = SamplerConfig::new(7, 6, 1.0);
    cfg.mode = BatchMode::FullDeterministic;
    let (mut c1, mut l1) = (GradientCache::new(true), OracleLedger::new(6));
    let (mut c2, mut l2) = (GradientCache::new(true), OracleLedger::new(6));
    let mut s1 = SvogsState::init(&p, &z0, &mut c1, &mut l1);
    let mut s2 = OgsState::init(&p, &z0, &mut c2, &mut l2);
    let mut worst: f64 = 0.0;
    let mut tol: f64 = 0.0;
    for k in 1..=30 {
        let a = svogs_round(&mut s1, &sv, &p, &cfg, &mut c1, &mut l1);
        let (b, _) = ogs_round(&mut s2, &p, &og, &mut c2, &mut l2);
        worst = worst.max(s1.z_k.dist(&s2.z_k));
        // Each solve is certified to sqrt(eps); deviations accumulate at most linearly.
        tol = 2.0 * k as f64 * (a.inner.certified_sq.sqrt() + b.certified_sq.sqrt()).max(1e-8);
    }
    outcome(
        bitwise && worst <= tol,
        format!("n = 1 bitwise: {bitwise}; full batch max |z_svogs - z_ogs| = {worst:.3e} (tolerance {tol:.1e})"),
    )
}

fn regularization() -> Outcome {
    let mut quads = random_quads(71, 8, 4, 4, 0.0, 0.1);
    for q in &mut quads {
        q.gx *= 0.3;
        q.gy *= 0.3;
    }
    let set = ConstraintSet::new(SetPrimitive::ball(4, 1.0), SetPrimitive::ball(4, 1.0));
    let base = quad_problem(&quads, set);
    let est = base.estimate_constants().unwrap();
    let diam = base.constraint().diameter().unwrap();
    let eps = 1e-4;
    let lambda = (eps / (4.0 * diam * diam)).sqrt();
    let z0 = base.zero_point();
    let reg = base.regularize_for_small_gradient(lambda, &z0).unwrap();
    let reg_est = reg.estimate_constants().unwrap();
    let mu = lambda;
    let delta = reg_est.delta.max(mu);
    let params = auto_params_scsc(8, delta, mu, reg_est.l, diam, Some(diam)).unwrap();
    // Predicted budget: 2 L^2 rho^K ||z^0 - z*||^2 <= eps / 2 with
    // ||z^0 - z*||^2 <= eta Phi^0.
    let rho = params.rho(mu);
    let phi0 = svogs_core::algorithms::phi0_bound(params.eta, params.gamma, params.p, delta, mu, diam);
    let k_pred = ((4.0 * est.l * est.l * params.eta * phi0 / eps).ln() / -rho.ln()).ceil() as u64;
    let tau = 1.0 / est.l;
    let budget = 4 * k_pred;
    // Rounds are doubled until the seed-averaged ||F_tau(z^K)||^2 of the
    // original problem is within eps.
    let mut k = 100u64;
    let (hit, mean_final) = loop {
        let finals: Vec<f64> = (0..5)
            .map(|seed| {
                let out = run(&reg, &Algorithm::Svogs(params), &z0, &RunOptions::rounds(seed, k)).unwrap();
                grad_mapping_norm(&base, &out.last_iterate, tau).powi(2)
            })
            .collect();
        let m = mean(&finals);
        if m <= eps || k >= budget {
            break (m <= eps, m);
        }
        k = (2 * k).min(budget);
    };
    outcome(
        hit && k <= budget,
        format!("lambda {lambda:.3e}, K_pred {k_pred}, budget {budget}; mean ||F_tau(z^K)||^2 = {mean_final:.3e} at K = {k}"),
    )
}

fn main() {
    let criteria: Vec<(&str, fn() -> Outcome)> = vec![
        ("similarity property of local operators", similarity),
        ("potential non-negativity", potential_nonnegative),
        ("expected potential decrease", potential_decrease),
        ("estimator unbiasedness", unbiasedness),
        ("communication accounting law", accounting),
        ("linear convergence rate and delta/mu scaling", linear_rate),
        ("convex-concave sublinear scaling", sublinear),
        ("communication advantage over extragradient", communication_advantage),
        ("zero-chain frontier", zero_chain),
        ("inner-solver certificate", inner_certificate),
        ("degenerate equivalences", degenerate),
        ("regularization for small gradient mapping", regularization),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let results: Vec<(usize, &str, Outcome, f64)> = std::thread::scope(|s| {
        let handles: Vec<_> = criteria
            .iter()
            .enumerate()
            .filter(|(i, _)| filter.is_empty() || filter.iter().any(|f| f == &(i + 1).to_string()))
            .map(|(i, (name, f))| {
                s.spawn(move || {
                    let t = Instant::now();
                    let o = f();
                    (i + 1, *name, o, t.elapsed().as_secs_f64())
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().unwrap()).collect()
    });
    let mut failed = 0;
    for (i, name, o, secs) in &results {
        let tag = if o.passed { "PASS" } else { "FAIL" };
        println!("criterion {i:>2} {tag} {name} [{secs:.1}s]: {}", o.detail);
        failed += usize::from(!o.passed);
    }
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
