//! SVOGS, its parameter rules, the inexact server sub-problem solver and the
//! extragradient / optimistic gradient sliding baselines.

mod baselines;
mod inner;
mod runner;
mod svogs;

pub use baselines::{eg_round, ogs_round, EgParams, EgState, OgsParams, OgsState};
pub use inner::{inner_solve, InnerResult, InnerSolverConfig};
pub use runner::{run, Algorithm, RoundReport, RunOptions, RunOutput, Stopping};
pub use svogs::{estimator, estimator_conditional_mean, svogs_round, SvogsRound, SvogsState};

use crate::error::invalid;
use crate::Result;

/// How the inexactness target `eps_k` of the sub-problem is set.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum EpsMode {
    /// `eps_k = min{zeta, min(r, r^2) / c_hat}` with `r = ||u - z^k||`.
    Cc { zeta: f64, c_hat: f64 },
    /// `eps_k = min(r, r^2) / c`.
    Scsc { c: f64 },
    /// A constant target.
    Fixed(f64),
}

/// All scalars of one SVOGS run.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SvogsParams {
    pub eta: f64,
    pub gamma: f64,
    pub p: f64,
    pub b: usize,
    pub alpha: f64,
    pub k_max: u64,
    pub eps_mode: EpsMode,
    pub inner: InnerSolverConfig,
    /// `max_i ||F_i(z^0)||`, the initial local operator scale.
    pub d_f_init: f64,
}

impl SvogsParams {
    /// Contraction factor `max{1 - eta mu / 6, 1 - p eta mu / (2 gamma + eta mu)}`.
    pub fn rho(&self, mu: f64) -> f64 {
        rho(self.eta, self.gamma, self.p, mu)
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        let ok = self.eta > 0.0
            && self.eta.is_finite()
            && (0.0..1.0).contains(&self.gamma)
            && self.p > 0.0
            && self.p <= 1.0
            && self.b >= 1
            && self.b <= n
            && self.alpha > 0.0
            && self.alpha <= 1.0;
        if !ok {
            return Err(invalid("SVOGS parameters out of range"));
        }
        self.inner.validate()
    }

    /// Stable text fingerprint of the resolved scalars.
    pub fn fingerprint(&self) -> alloc::string::String {
        let eps = match self.eps_mode {
            EpsMode::Cc { zeta, c_hat } => alloc::format!("cc(zeta={zeta:e},c_hat={c_hat:e})"),
            EpsMode::Scsc { c } => alloc::format!("scsc(c={c:e})"),
            EpsMode::Fixed(e) => alloc::format!("fixed({e:e})"),
        };
        alloc::format!(
            "eta={:e};gamma={:e};p={:e};b={};alpha={:e};eps={}",
            self.eta,
            self.gamma,
            self.p,
            self.b,
            self.alpha,
            eps
        )
    }
}

pub fn rho(eta: f64, gamma: f64, p: f64, mu: f64) -> f64 {
    (1.0 - eta * mu / 6.0).max(1.0 - p * eta * mu / (2.0 * gamma + eta * mu))
}

/// Upper bound on the initial potential `Phi^0` given `||z^0 - z*|| <= r0`.
///
/// At initialization `z^0 = z^{-1} = w^0 = w^{-1}`, so only the distance
/// terms survive; the cross term is kept with weight `2 delta r0^2`.
pub fn phi0_bound(eta: f64, gamma: f64, p: f64, delta: f64, mu: f64, r0: f64) -> f64 {
    let r2 = r0 * r0;
    (1.0 / eta + mu) * r2 + 2.0 * delta * r2 + (2.0 * gamma + eta * mu) / (2.0 * p * eta) * r2
}

fn positive(name: &str, v: f64) -> Result<()> {
    if !(v > 0.0 && v.is_finite()) {
        return Err(invalid(alloc::format!("{name} must be positive and finite")));
    }
    Ok(())
}

/// Convex-concave parameters: `b = ceil(sqrt n)`, `gamma = p = 1/(sqrt n + 8)`,
/// `eta = min{sqrt(gamma b)/(4 delta), 1/(32 delta)}`, `alpha = 1`, with
/// `zeta = min{eta^2 eps^2 / (16 (9 eta L D + 3 eta D_F + D)^2), eta eps / (4 (12 eta^2 delta^2 + 1))}`
/// and `c_hat = 100 + 2048 eta^2 delta^2 + 64 sqrt(2 eta Phi0)`.
///
/// `l` is also used as the Lipschitz constant of the server operator in the
/// sub-problem solver.
pub fn auto_params_cc(n: usize, delta: f64, l: f64, diameter: f64, eps: f64, d_f_init: f64) -> Result<SvogsParams> {
    if n == 0 {
        return Err(invalid("node count must be positive"));
    }
    positive("delta", delta)?;
    positive("L", l)?;
    positive("D", diameter)?;
    positive("eps", eps)?;
    if !(d_f_init >= 0.0 && d_f_init.is_finite()) {
        return Err(invalid("initial operator norm must be finite"));
    }
    let sqrt_n = libm::sqrt(n as f64);
    let b = (libm::ceil(sqrt_n) as usize).clamp(1, n);
    let gamma = 1.0 / (sqrt_n + 8.0);
    let p = gamma;
    let eta = (libm::sqrt(gamma * b as f64) / (4.0 * delta)).min(1.0 / (32.0 * delta));
    let denom = 9.0 * eta * l * diameter + 3.0 * eta * d_f_init + diameter;
    let zeta = (eta * eta * eps * eps / (16.0 * denom * denom)).min(eta * eps / (4.0 * (12.0 * eta * eta * delta * delta + 1.0)));
    let phi0 = phi0_bound(eta, gamma, p, delta, 0.0, diameter);
    let c_hat = 100.0 + 2048.0 * eta * eta * delta * delta + 64.0 * libm::sqrt(2.0 * eta * phi0);
    Ok(SvogsParams {
        eta,
        gamma,
        p,
        b,
        alpha: 1.0,
        k_max: 0,
        eps_mode: EpsMode::Cc { zeta, c_hat },
        inner: InnerSolverConfig::new(l, eta, Some(diameter)),
        d_f_init,
    })
}

/// Strongly-convex-strongly-concave parameters with `m = min{sqrt n, delta/mu}`:
/// `b = ceil(m)`, `gamma = p = 1/(m + 8)`,
/// `eta = min{sqrt(alpha gamma b)/(4 delta), 1/(32 delta)}`,
/// `alpha = max{1 - eta mu/6, 1 - p eta mu/(2 gamma + eta mu)}` and
/// `c = 100 + 64 eta delta^2/mu + 2048 eta^2 delta^2 + 96 eta mu + 64 sqrt(2 eta Phi0)`.
///
/// The mutual dependence of `eta` and `alpha` is resolved by fixed-point
/// iteration from `alpha = 7/8`. `r0` bounds `||z^0 - z*||` and enters
/// `Phi0`; `diameter` (if any) sets the sub-problem accuracy floor.
pub fn auto_params_scsc(n: usize, delta: f64, mu: f64, l: f64, r0: f64, diameter: Option<f64>) -> Result<SvogsParams> {
    if n == 0 {
        return Err(invalid("node count must be positive"));
    }
    positive("delta", delta)?;
    positive("mu", mu)?;
    positive("L", l)?;
    if !(r0 >= 0.0 && r0.is_finite()) {
        return Err(invalid("initial distance bound must be finite"));
    }
    if mu > delta {
        return Err(invalid("requires mu <= delta"));
    }
    if delta > l {
        return Err(invalid("requires delta <= L"));
    }
    let m = libm::sqrt(n as f64).min(delta / mu);
    let b = (libm::ceil(m) as usize).clamp(1, n);
    let gamma = 1.0 / (m + 8.0);
    let p = gamma;
    let eta_of = |alpha: f64| (libm::sqrt(alpha * gamma * b as f64) / (4.0 * delta)).min(1.0 / (32.0 * delta));
    let mut alpha = 7.0 / 8.0;
    let mut eta = eta_of(alpha);
    for _ in 0..100 {
        let next_alpha = rho(eta, gamma, p, mu);
        let next_eta = eta_of(next_alpha);
        let settled = (next_alpha - alpha).abs() < 1e-12 && (next_eta - eta).abs() < 1e-12;
        alpha = next_alpha;
        eta = next_eta;
        if settled {
            break;
        }
    }
    let phi0 = phi0_bound(eta, gamma, p, delta, mu, r0);
    let c = 100.0 + 64.0 * eta * delta * delta / mu + 2048.0 * eta * eta * delta * delta + 96.0 * eta * mu
        + 64.0 * libm::sqrt(2.0 * eta * phi0);
    Ok(SvogsParams {
        eta,
        gamma,
        p,
        b,
        alpha,
        k_max: 0,
        eps_mode: EpsMode::Scsc { c },
        inner: InnerSolverConfig::new(l, eta, diameter),
        d_f_init: 0.0,
    })
}

/// Target accuracy `eps_k` with the current inner iterate `u` standing in
/// for the exact sub-problem solution, floored at `floor`.
pub fn eps_schedule(mode: &EpsMode, z_k: &crate::Point, u: &crate::Point, floor: f64) -> f64 {
    let r = u.dist(z_k);
    let m = r.min(r * r);
    let eps = match *mode {
        EpsMode::Cc { zeta, c_hat } => zeta.min(m / c_hat),
        EpsMode::Scsc { c } => m / c,
        EpsMode::Fixed(e) => e,
    };
    eps.max(floor)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Point;

    #[test]
    fn cc_rule_for_sixteen_nodes() {
        let p = auto_params_cc(16, 1.0, 4.0, 2.0, 1e-2, 1.0).unwrap();
        assert_eq!(p.b, 4);
        assert!((p.gamma - 1.0 / 12.0).abs() < 1e-15 && p.gamma == p.p);
        assert_eq!(p.eta, 1.0 / 32.0);
        assert_eq!(p.alpha, 1.0);
    }

    #[test]
    fn cc_rule_single_node() {
        let p = auto_params_cc(1, 1.0, 1.0, 1.0, 1.0, 0.0).unwrap();
        assert_eq!(p.b, 1);
        assert!((p.gamma - 1.0 / 9.0).abs() < 1e-15 && (p.p - 1.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn scsc_rule() {
        let p = auto_params_scsc(16, 1.0, 0.5, 2.0, 1.0, None).unwrap();
        assert_eq!(p.b, 2);
        assert!((p.gamma - 0.1).abs() < 1e-15);
        assert!(p.alpha >= 7.0 / 8.0);
        let q = auto_params_scsc(5, 1.0, 1.0, 1.0, 1.0, None).unwrap();
        assert_eq!(q.b, 1);
        assert!(auto_params_scsc(4, 1.0, 2.0, 3.0, 1.0, None).is_err());
        assert!(auto_params_scsc(4, 2.0, 1.0, 1.0, 1.0, None).is_err());
    }

    #[test]
    fn eps_schedule_branches() {
        let z = Point::from_parts(&[0.0], &[0.0]);
        let far = Point::from_parts(&[2.0], &[0.0]);
        assert_eq!(eps_schedule(&EpsMode::Scsc { c: 4.0 }, &z, &far, 0.0), 0.5);
        let near = Point::from_parts(&[0.1], &[0.0]);
        let e = eps_schedule(&EpsMode::Cc { zeta: 1.0, c_hat: 2.0 }, &z, &near, 0.0);
        assert!((e - 0.01 / 2.0).abs() < 1e-15);
        assert_eq!(eps_schedule(&EpsMode::Cc { zeta: 1e-3, c_hat: 2.0 }, &z, &far, 0.0), 1e-3);
        assert_eq!(eps_schedule(&EpsMode::Scsc { c: 4.0 }, &z, &z, 1e-16), 1e-16);
    }
}
