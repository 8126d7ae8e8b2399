use crate::error::invalid;
use crate::netsim::OracleLedger;
use crate::problem::SaddleProblem;
use crate::{Point, Result};

/// Extragradient settings for the server sub-problem.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InnerSolverConfig {
    /// Extragradient step `s`.
    pub step: f64,
    pub max_iters: usize,
    /// Absolute floor on the accuracy target.
    pub eps_floor: f64,
    /// Lipschitz constant `L + 1/eta` of the sub-problem operator.
    pub l_hat: f64,
    /// Strong monotonicity `1/eta` of the sub-problem operator.
    pub mu_hat: f64,
}

impl InnerSolverConfig {
    /// Step `1/(sqrt 2 (L + 1/eta))` and floor `1e-16 max(1, D^2)`.
    pub fn new(l: f64, eta: f64, diameter: Option<f64>) -> Self {
        let l_hat = l + 1.0 / eta;
        let d2 = diameter.map_or(1.0, |d| d * d);
        Self {
            step: 1.0 / (core::f64::consts::SQRT_2 * l_hat),
            max_iters: 200_000,
            eps_floor: 1e-16 * d2.max(1.0),
            l_hat,
            mu_hat: 1.0 / eta,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.step > 0.0 && self.step <= 1.0 / self.l_hat && self.mu_hat > 0.0 && self.eps_floor > 0.0) {
            return Err(invalid("inner solver needs 0 < step <= 1/L_hat and positive floor"));
        }
        Ok(())
    }

    /// Factor turning the natural residual into a distance bound:
    /// `||u - u_hat|| <= (1 + s L_hat)/(s mu_hat) ||u - P(u - s H(u))||`.
    pub fn certificate_factor(&self) -> f64 {
        (1.0 + self.step * self.l_hat) / (self.step * self.mu_hat)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct InnerResult {
    pub u: Point,
    /// Extragradient iterations performed.
    pub iterations: usize,
    /// Server operator evaluations.
    pub grad_calls: u64,
    /// Certified bound on `||u - u_hat||^2` at the returned iterate.
    pub certified_sq: f64,
    /// Accuracy target in force at the returned iterate.
    pub eps: f64,
    pub converged: bool,
}

/// Approximately solves
/// `min_x max_y f_1(x, y) + ||x - v_x||^2/(2 eta) - ||y - v_y||^2/(2 eta)` over `Z`
/// by extragradient on `H(u) = F_1(u) + (u - v)/eta`, started at `P_Z(v)`.
///
/// Before each step the natural-residual certificate is compared with
/// `target(u_t)` (floored at `cfg.eps_floor`); the loop stops once the
/// certified squared distance is within the target. `probe` sees every
/// checked iterate together with its certified distance bound. Every `F_1`
/// evaluation is charged to the ledger as an inner call.
pub fn inner_solve(
    problem: &SaddleProblem,
    v: &Point,
    eta: f64,
    cfg: &InnerSolverConfig,
    target: &dyn Fn(&Point) -> f64,
    ledger: &mut OracleLedger,
    mut probe: Option<&mut dyn FnMut(&Point, f64)>,
) -> InnerResult {
    let set = problem.constraint();
    let inv_eta = 1.0 / eta;
    let s = cfg.step;
    let factor = cfg.certificate_factor();
    let mut calls = 0u64;
    let mut h = problem.zero_point();
    let eval_h = |u: &Point, out: &mut Point, calls: &mut u64| {
        problem.eval_local_into(0, u, out);
        *calls += 1;
        for ((o, ui), vi) in out.as_mut_slice().iter_mut().zip(u.as_slice()).zip(v.as_slice()) {
            *o += inv_eta * (ui - vi);
        }
    };
    let mut u = set.project(v);
    let mut half = u.clone();
    let mut iterations = 0;
    let (certified_sq, eps, converged) = loop {
        eval_h(&u, &mut h, &mut calls);
        half.as_mut_slice().copy_from_slice(u.as_slice());
        half.axpy(-s, &h);
        set.project_in_place(&mut half);
        let bound = factor * u.dist(&half);
        if let Some(p) = probe.as_mut() {
            p(&u, bound);
        }
        let eps = target(&u).max(cfg.eps_floor);
        let sq = bound * bound;
        if sq <= eps {
            break (sq, eps, true);
        }
        if iterations >= cfg.max_iters {
            break (sq, eps, false);
        }
        eval_h(&half, &mut h, &mut calls);
        u.axpy(-s, &h);
        set.project_in_place(&mut u);
        iterations += 1;
    };
    ledger.record_inner_calls(calls);
    InnerResult { u, iterations, grad_calls: calls, certified_sq, eps, converged }
}
