//! Chain-structured lower-bound instances.
//!
//! All instances are bilinear-plus-quadratic in `z = [x; y]` with
//! `x, y in R^d`, built from the upper bidiagonal chain
//!
//! ```text
//! A  = I - sum_r e_r e_{r+1}'               (ones on the diagonal, -1 above)
//! A1 = I - 2 sum_{r even} e_r e_{r+1}'      (1-based r)
//! A2 = I - 2 sum_{r odd}  e_r e_{r+1}'
//! ```
//!
//! so that `A1 + A2 = 2A`. A point whose coordinates beyond `k` vanish can
//! only reveal coordinate `k + 1` through a node whose block couples `k` and
//! `k + 1`; [`verify_zero_chain`] replays that argument against recorded runs.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::constraint::{ConstraintSet, SetPrimitive};
use crate::error::invalid;
use crate::linalg::{self, CsrMatrix};
use crate::netsim::Stage;
use crate::problem::{Constants, EstimatedConstants, QuadraticBlock, SaddleProblem};
use crate::{Error, Point, Result};

/// `A`: unit diagonal and `-1` on the superdiagonal.
pub fn chain_a(d: usize) -> CsrMatrix {
    bidiagonal(d, |_| -1.0)
}

/// `A1`: `-2` at superdiagonal slots `(r, r + 1)` with 1-based `r` even.
pub fn chain_a1(d: usize) -> CsrMatrix {
    bidiagonal(d, |r1| if r1 % 2 == 0 { -2.0 } else { 0.0 })
}

/// `A2`: `-2` at superdiagonal slots `(r, r + 1)` with 1-based `r` odd.
pub fn chain_a2(d: usize) -> CsrMatrix {
    bidiagonal(d, |r1| if r1 % 2 == 1 { -2.0 } else { 0.0 })
}

fn bidiagonal(d: usize, sup: impl Fn(usize) -> f64) -> CsrMatrix {
    let mut t = Vec::with_capacity(2 * d);
    for r in 0..d {
        t.push((r, r, 1.0));
        if r + 1 < d {
            t.push((r, r + 1, sup(r + 1)));
        }
    }
    CsrMatrix::from_triplets(d, d, t)
}

/// Anti-diagonal chain: `1` at `(r, d + 1 - r)` and `-1` at `(r, d + 2 - r)`
/// for `r >= 2` (1-based).
pub fn chain_a_tilde(d: usize) -> CsrMatrix {
    let mut t = Vec::with_capacity(2 * d);
    for r in 0..d {
        t.push((r, d - 1 - r, 1.0));
        if r >= 1 {
            t.push((r, d - r, -1.0));
        }
    }
    CsrMatrix::from_triplets(d, d, t)
}

/// 0-based node owning 1-based chain row `j` in the row partition over
/// clients `1..n` (row `j` goes to the client with label `i`, `i - 1 = j mod (n - 1)`).
pub fn row_owner(j: usize, n: usize) -> usize {
    let r = j % (n - 1);
    if r == 0 {
        n - 1
    } else {
        r
    }
}

/// Rows of `A` owned by 0-based client `idx >= 1`: `sum_{j owned} e_j a_j'`.
pub fn chain_rows(d: usize, n: usize, idx: usize) -> CsrMatrix {
    let mut t = Vec::new();
    for j in 1..=d {
        if row_owner(j, n) == idx {
            let r = j - 1;
            t.push((r, r, 1.0));
            if j < d {
                t.push((r, r + 1, -1.0));
            }
        }
    }
    CsrMatrix::from_triplets(d, d, t)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum HardKind {
    /// Three node classes alternating `A1` / `A2` couplings.
    CcRounds,
    /// Chain rows spread over clients, linear term on the server.
    CcComm,
    /// Identical nodes `(L/2) x'Ay - (L R_y / (2 sqrt d)) e1'x`.
    CcGrad,
    /// Row-partitioned chain plus `mu`-strongly monotone terms.
    ScscComm,
    /// Identical nodes on the anti-diagonal chain.
    ScscGrad,
}

impl HardKind {
    pub fn is_cc(self) -> bool {
        matches!(self, HardKind::CcRounds | HardKind::CcComm | HardKind::CcGrad)
    }

    pub fn name(self) -> &'static str {
        match self {
            HardKind::CcRounds => "cc-rounds",
            HardKind::CcComm => "cc-comm",
            HardKind::CcGrad => "cc-grad",
            HardKind::ScscComm => "scsc-comm",
            HardKind::ScscGrad => "scsc-grad",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "cc-rounds" => HardKind::CcRounds,
            "cc-comm" => HardKind::CcComm,
            "cc-grad" => HardKind::CcGrad,
            "scsc-comm" => HardKind::ScscComm,
            "scsc-grad" => HardKind::ScscGrad,
            _ => return None,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HardParams {
    pub n: usize,
    pub d: usize,
    pub delta: f64,
    pub mu: f64,
    pub l: f64,
    pub r_x: f64,
    pub r_y: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct HardInstance {
    pub kind: HardKind,
    pub params: HardParams,
    pub problem: SaddleProblem,
}

fn e1(d: usize, scale: f64) -> Vec<f64> {
    let mut v = vec![0.0; d];
    v[0] = scale;
    v
}

fn scsc_terms(q: &mut QuadraticBlock, d: usize, mu: f64) {
    q.a = CsrMatrix::identity(d, mu);
    q.c = CsrMatrix::identity(d, mu);
}

/// Builds the instance of `kind`. Node `0` is the server.
///
/// Convex-concave kinds live on origin-centered Euclidean balls of radii
/// `r_x`, `r_y`; strongly monotone kinds are unconstrained.
pub fn build_hard_instance(kind: HardKind, params: HardParams) -> Result<HardInstance> {
    let HardParams { n, d, delta, mu, l, r_x, r_y } = params;
    let pos = |v: f64| v > 0.0 && v.is_finite();
    let sqrt_n = libm::sqrt(n as f64);
    let sqrt_d = libm::sqrt(d as f64);
    if kind.is_cc() {
        if d < 3 {
            return Err(invalid("convex-concave chain instances need d >= 3"));
        }
        if !(pos(r_x) && pos(r_y)) {
            return Err(invalid("ball radii must be positive"));
        }
    } else if d < 1 {
        return Err(invalid("dimension must be positive"));
    }
    let min_n = if kind == HardKind::CcRounds { 3 } else { 2 };
    if n < min_n {
        return Err(invalid(alloc::format!("{} needs n >= {min_n}", kind.name())));
    }
    if !(pos(delta) && pos(l)) {
        return Err(invalid("delta and L must be positive"));
    }
    let mut blocks = vec![QuadraticBlock::zeros(d, d); n];
    match kind {
        HardKind::CcRounds => {
            if l < delta {
                return Err(invalid("cc-rounds requires L >= delta"));
            }
            let a1 = chain_a1(d).scaled(delta / 4.0);
            let a2 = chain_a2(d).scaled(delta / 4.0);
            for (idx, q) in blocks.iter_mut().enumerate() {
                match idx % 3 {
                    1 => {
                        q.b = a1.clone();
                        q.gx = e1(d, -delta * r_y / (2.0 * sqrt_d));
                    }
                    2 => q.b = a2.clone(),
                    _ => {}
                }
            }
        }
        HardKind::CcComm => {
            if l < sqrt_n * delta / 4.0 {
                return Err(invalid("cc-comm requires L >= sqrt(n) delta / 4"));
            }
            blocks[0].gx = e1(d, -sqrt_n * delta * r_y / (8.0 * sqrt_d));
            for (idx, q) in blocks.iter_mut().enumerate().skip(1) {
                q.b = chain_rows(d, n, idx).scaled(sqrt_n * delta / 8.0);
            }
        }
        HardKind::CcGrad => {
            let a = chain_a(d).scaled(l / 2.0);
            for q in blocks.iter_mut() {
                q.b = a.clone();
                q.gx = e1(d, -l * r_y / (2.0 * sqrt_d));
            }
        }
        HardKind::ScscComm => {
            if !pos(mu) || mu > delta || delta > l {
                return Err(invalid("scsc-comm requires 0 < mu <= delta <= L"));
            }
            for (idx, q) in blocks.iter_mut().enumerate() {
                scsc_terms(q, d, mu);
                if idx == 0 {
                    q.gy = e1(d, delta * delta / (16.0 * mu));
                } else {
                    q.b = chain_rows(d, n, idx).scaled(delta * sqrt_n / 4.0);
                }
            }
        }
        HardKind::ScscGrad => {
            if !pos(mu) || l < mu.max(delta) {
                return Err(invalid("scsc-grad requires mu > 0 and L >= max(mu, delta)"));
            }
            let at = chain_a_tilde(d).scaled(l / 2.0);
            for q in blocks.iter_mut() {
                scsc_terms(q, d, mu);
                q.b = at.clone();
                q.gy = e1(d, l * l / (4.0 * mu));
            }
        }
    }
    let constraint = if kind.is_cc() {
        ConstraintSet::new(SetPrimitive::ball(d, r_x), SetPrimitive::ball(d, r_y))
    } else {
        ConstraintSet::unconstrained()
    };
    let declared = Constants { l: Some(l), delta: Some(delta), mu: Some(if kind.is_cc() { 0.0 } else { mu }) };
    let problem = SaddleProblem::from_quadratic_blocks(blocks, constraint)?.with_declared(declared);
    Ok(HardInstance { kind, params, problem })
}

impl HardInstance {
    /// Coefficients `(s, g_x, g_y, mu)` of the closed-form global objective
    /// `f = s x'Mz y + g_x e1'x + g_y e1'y + mu/2 ||x||^2 - mu/2 ||y||^2`,
    /// where `M` is `A` or the anti-diagonal chain. `None` for cc-rounds
    /// unless `n` is a multiple of three (otherwise the classes are unequal).
    fn closed_form_coefficients(&self) -> Option<(f64, f64, f64, f64)> {
        let HardParams { n, d, delta, mu, l, r_y, .. } = self.params;
        let sqrt_n = libm::sqrt(n as f64);
        let sqrt_d = libm::sqrt(d as f64);
        Some(match self.kind {
            HardKind::CcRounds => {
                if n % 3 != 0 {
                    return None;
                }
                (delta / 6.0, -delta * r_y / (6.0 * sqrt_d), 0.0, 0.0)
            }
            HardKind::CcComm => (delta / (8.0 * sqrt_n), -delta * r_y / (8.0 * sqrt_n * sqrt_d), 0.0, 0.0),
            HardKind::CcGrad => (l / 2.0, -l * r_y / (2.0 * sqrt_d), 0.0, 0.0),
            HardKind::ScscComm => (delta / (4.0 * sqrt_n), 0.0, delta * delta / (16.0 * n as f64 * mu), mu),
            HardKind::ScscGrad => (l / 2.0, 0.0, l * l / (4.0 * mu), mu),
        })
    }

    fn chain_apply(&self, y: &[f64]) -> Vec<f64> {
        let d = self.params.d;
        (0..d)
            .map(|r| match self.kind {
                HardKind::ScscGrad => y[d - 1 - r] - if r >= 1 { y[d - r] } else { 0.0 },
                _ => y[r] - if r + 1 < d { y[r + 1] } else { 0.0 },
            })
            .collect()
    }

    fn chain_apply_t(&self, x: &[f64]) -> Vec<f64> {
        let d = self.params.d;
        (0..d)
            .map(|c| match self.kind {
                HardKind::ScscGrad => x[d - 1 - c] - if c >= 1 { x[d - c] } else { 0.0 },
                _ => x[c] - if c >= 1 { x[c - 1] } else { 0.0 },
            })
            .collect()
    }

    /// The closed-form global objective, evaluated directly from its display.
    pub fn global_objective(&self, z: &Point) -> Option<f64> {
        let (s, gx, gy, mu) = self.closed_form_coefficients()?;
        let (x, y) = (z.x(), z.y());
        let my = self.chain_apply(y);
        Some(
            s * linalg::dot(x, &my) + gx * x[0] + gy * y[0] + 0.5 * mu * linalg::norm_sq(x)
                - 0.5 * mu * linalg::norm_sq(y),
        )
    }

    /// `[grad_x f; -grad_y f]` of the closed-form global objective.
    pub fn global_operator(&self, z: &Point) -> Option<Point> {
        let (s, gx, gy, mu) = self.closed_form_coefficients()?;
        let (x, y) = (z.x(), z.y());
        let my = self.chain_apply(y);
        let mtx = self.chain_apply_t(x);
        let mut out = Point::zeros(x.len(), y.len());
        for (r, o) in out.x_mut().iter_mut().enumerate() {
            *o = s * my[r] + mu * x[r];
        }
        out.x_mut()[0] += gx;
        for (c, o) in out.y_mut().iter_mut().enumerate() {
            *o = -s * mtx[c] + mu * y[c];
        }
        out.y_mut()[0] -= gy;
        Some(out)
    }

    /// Whether some node in `nodes` can reveal coordinate `m + 1` from points
    /// supported on the first `m` coordinates.
    pub fn can_grow(&self, node: usize, m: usize) -> bool {
        let n = self.params.n;
        match self.kind {
            HardKind::CcRounds => match node % 3 {
                1 => m % 2 == 0,
                2 => m % 2 == 1,
                _ => false,
            },
            HardKind::CcGrad | HardKind::ScscGrad => true,
            HardKind::CcComm | HardKind::ScscComm => {
                if m == 0 {
                    node == 0
                } else {
                    node != 0 && row_owner(m, n) == node
                }
            }
        }
    }

    /// Number of leading chain coordinates that may be nonzero: the largest
    /// 1-based `j` with `|y_j|` or the chain-ordered `x_j` above `1e-14`.
    /// On the anti-diagonal chain `x` fills from the last coordinate.
    pub fn frontier(&self, z: &Point) -> usize {
        const THRESHOLD: f64 = 1e-14;
        let d = self.params.d;
        let last = |v: &[f64], reversed: bool| {
            v.iter()
                .enumerate()
                .filter(|(_, e)| e.abs() > THRESHOLD)
                .map(|(r, _)| if reversed { d - r } else { r + 1 })
                .max()
                .unwrap_or(0)
        };
        last(z.x(), self.kind == HardKind::ScscGrad).max(last(z.y(), false))
    }
}

/// Gap of a bilinear-plus-linear objective `x'My + g_x'x + g_y'y` over a
/// product of Euclidean balls, in closed form:
/// `max_{y'} f(x, y') = g_x'x + <M'x + g_y, c_y> + R_y ||M'x + g_y||` and
/// `min_{x'} f(x', y) = g_y'y + <My + g_x, c_x> - R_x ||My + g_x||`.
pub fn bilinear_ball_gap(problem: &SaddleProblem, z: &Point) -> Result<f64> {
    let mean = problem
        .mean_block()
        .ok_or_else(|| Error::Unsupported(String::from("closed-form gap needs a quadratic problem")))?;
    if !(mean.a.is_zero() && mean.c.is_zero()) {
        return Err(Error::Unsupported(String::from(
            "closed-form gap needs a bilinear objective; use the iterative gap",
        )));
    }
    let set = problem.constraint();
    let (SetPrimitive::EuclideanBall { center: cx, radius: rx }, SetPrimitive::EuclideanBall { center: cy, radius: ry }) =
        (&set.x_set, &set.y_set)
    else {
        return Err(Error::Unsupported(String::from("closed-form gap needs Euclidean ball constraints")));
    };
    let (x, y) = (z.x(), z.y());
    let mut coef_y = mean.b.mul_t(x);
    linalg::axpy(1.0, &mean.gy, &mut coef_y);
    let mut coef_x = mean.b.mul(y);
    linalg::axpy(1.0, &mean.gx, &mut coef_x);
    let max_y = linalg::dot(&mean.gx, x) + linalg::dot(&coef_y, cy) + ry * linalg::norm(&coef_y);
    let min_x = linalg::dot(&mean.gy, y) + linalg::dot(&coef_x, cx) - rx * linalg::norm(&coef_x);
    Ok(max_y - min_x)
}

/// Closed-form gap of a convex-concave instance.
pub fn exact_bilinear_gap(instance: &HardInstance, z: &Point) -> Result<f64> {
    if !instance.kind.is_cc() {
        return Err(Error::Unsupported(String::from(
            "strongly monotone instances have quadratic terms; use metrics::duality_gap",
        )));
    }
    bilinear_ball_gap(&instance.problem, z)
}

/// An iterate together with the evaluation stages that produced it.
#[derive(Clone, Debug, PartialEq)]
pub struct ChainRecord {
    pub iterate: Point,
    pub stages: Vec<Stage>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ZeroChainReport {
    pub passed: bool,
    /// Predicted frontier after each record.
    pub predicted: Vec<usize>,
    /// Observed frontier of each recorded iterate.
    pub observed: Vec<usize>,
    pub first_violation: Option<usize>,
}

/// Replays the participation history from the all-zero start: each stage
/// advances the predicted frontier by one per repeat while some participating
/// node can reveal the next coordinate. Every recorded iterate must stay
/// within the predicted frontier.
pub fn verify_zero_chain(instance: &HardInstance, records: &[ChainRecord]) -> ZeroChainReport {
    let d = instance.params.d;
    let mut m = 0usize;
    let mut predicted = Vec::with_capacity(records.len());
    let mut observed = Vec::with_capacity(records.len());
    let mut first_violation = None;
    for (t, rec) in records.iter().enumerate() {
        for stage in &rec.stages {
            for _ in 0..stage.repeats {
                if m < d && stage.nodes.iter().any(|&i| instance.can_grow(i, m)) {
                    m += 1;
                } else {
                    break;
                }
            }
        }
        let obs = instance.frontier(&rec.iterate);
        if obs > m && first_violation.is_none() {
            first_violation = Some(t);
        }
        predicted.push(m);
        observed.push(obs);
    }
    ZeroChainReport { passed: first_violation.is_none(), predicted, observed, first_violation }
}

#[derive(Clone, Debug, PartialEq)]
pub struct InstanceConstantsReport {
    pub estimated: EstimatedConstants,
    pub l_ok: bool,
    pub delta_ok: bool,
    /// Only checked for strongly monotone kinds.
    pub mu_ok: Option<bool>,
    pub passed: bool,
}

/// Measures `L`, `delta` and `mu` from the Jacobian blocks and compares them
/// with the instance parameters.
pub fn verify_instance_constants(instance: &HardInstance) -> Result<InstanceConstantsReport> {
    let est = instance.problem.estimate_constants()?;
    let HardParams { delta, mu, l, .. } = instance.params;
    let tol = 1e-9;
    let l_ok = est.l <= l * (1.0 + tol);
    let delta_ok = est.delta <= delta * (1.0 + tol);
    let mu_ok = if instance.kind.is_cc() {
        None
    } else {
        Some(est.mu_estimate.unwrap_or(0.0) >= mu * (1.0 - tol))
    };
    let passed = l_ok && delta_ok && mu_ok.unwrap_or(true);
    Ok(InstanceConstantsReport { estimated: est, l_ok, delta_ok, mu_ok, passed })
}
