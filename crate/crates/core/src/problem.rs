//! Finite-sum saddle-point problems `min_x max_y (1/n) sum_i f_i(x, y)`.
//!
//! Two operator families are built in: quadratic blocks
//! `f_i = x'A_i x/2 + x'B_i y - y'C_i y/2 + g_x'x + g_y'y` (bilinear and
//! lower-bound instances) and robust least-squares regression.

use alloc::vec;
use alloc::vec::Vec;

use crate::constraint::{ConstraintSet, SetPrimitive};
use crate::data::RegressionData;
use crate::error::invalid;
use crate::linalg::{self, CsrMatrix};
use crate::rng::{CounterRng, Stream};
use crate::{Error, Point, Result};

/// Relative tolerance of every power iteration used for constants.
pub const POWER_TOL: f64 = 1e-9;
pub const POWER_MAX_ITERS: usize = 10_000;
pub const POWER_SEED: u64 = 0x5eed_c0de;

/// Constants a problem may declare. Missing entries are unknown.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Constants {
    pub l: Option<f64>,
    pub delta: Option<f64>,
    pub mu: Option<f64>,
}

/// Result of [`SaddleProblem::estimate_constants`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EstimatedConstants {
    /// Smoothness: largest operator Lipschitz constant over nodes.
    pub l: f64,
    /// Second-order similarity: `max_i ||J_i - J||`.
    pub delta: f64,
    /// Strong monotonicity in effect (declared value when provided).
    pub mu: f64,
    /// Raw estimate of the strong monotonicity modulus, if computable.
    pub mu_estimate: Option<f64>,
    /// Whether every power iteration met its tolerance.
    pub converged: bool,
}

/// `f(x, y) = x'Ax/2 + x'By - y'Cy/2 + gx'x + gy'y + offset` with symmetric `A`, `C`.
///
/// Its operator is `F(z) = [Ax + By + gx; -B'x + Cy - gy]` and the operator
/// Jacobian `J = [[A, B], [-B', C]]`.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadraticBlock {
    pub a: CsrMatrix,
    pub b: CsrMatrix,
    pub c: CsrMatrix,
    pub gx: Vec<f64>,
    pub gy: Vec<f64>,
    pub offset: f64,
}

impl QuadraticBlock {
    pub fn zeros(dx: usize, dy: usize) -> Self {
        Self {
            a: CsrMatrix::zeros(dx, dx),
            b: CsrMatrix::zeros(dx, dy),
            c: CsrMatrix::zeros(dy, dy),
            gx: vec![0.0; dx],
            gy: vec![0.0; dy],
            offset: 0.0,
        }
    }

    pub fn bilinear(b: CsrMatrix) -> Self {
        let mut q = Self::zeros(b.rows(), b.cols());
        q.b = b;
        q
    }

    pub fn dx(&self) -> usize {
        self.a.rows()
    }

    pub fn dy(&self) -> usize {
        self.c.rows()
    }

    fn validate(&self, dx: usize, dy: usize) -> Result<()> {
        let shapes = [
            (self.a.rows(), dx),
            (self.a.cols(), dx),
            (self.b.rows(), dx),
            (self.b.cols(), dy),
            (self.c.rows(), dy),
            (self.c.cols(), dy),
            (self.gx.len(), dx),
            (self.gy.len(), dy),
        ];
        for (found, expected) in shapes {
            if found != expected {
                return Err(Error::DimensionMismatch { expected, found });
            }
        }
        let scale = |m: &CsrMatrix| m.triplets().fold(1.0f64, |s, (_, _, v)| s.max(v.abs()));
        if !self.a.is_symmetric(1e-12 * scale(&self.a)) || !self.c.is_symmetric(1e-12 * scale(&self.c)) {
            return Err(invalid("quadratic blocks A and C must be symmetric"));
        }
        Ok(())
    }

    /// `out = F(z)`.
    pub fn apply(&self, z: &Point, out: &mut Point) {
        let (x, y) = (z.x(), z.y());
        out.fill(0.0);
        {
            let ox = out.x_mut();
            ox.copy_from_slice(&self.gx);
            self.a.mul_add(1.0, x, ox);
            self.b.mul_add(1.0, y, ox);
        }
        let oy = out.y_mut();
        for (o, g) in oy.iter_mut().zip(&self.gy) {
            *o = -g;
        }
        self.b.mul_t_add(-1.0, x, oy);
        self.c.mul_add(1.0, y, oy);
    }

    pub fn value(&self, z: &Point) -> f64 {
        let (x, y) = (z.x(), z.y());
        0.5 * linalg::dot(x, &self.a.mul(x)) + linalg::dot(x, &self.b.mul(y)) - 0.5 * linalg::dot(y, &self.c.mul(y))
            + linalg::dot(&self.gx, x)
            + linalg::dot(&self.gy, y)
            + self.offset
    }

    /// `out += J v` for a stacked direction `v`.
    pub fn jacobian_apply(&self, v: &[f64], out: &mut [f64]) {
        let dx = self.dx();
        let (vx, vy) = v.split_at(dx);
        let (ox, oy) = out.split_at_mut(dx);
        self.a.mul_add(1.0, vx, ox);
        self.b.mul_add(1.0, vy, ox);
        self.b.mul_t_add(-1.0, vx, oy);
        self.c.mul_add(1.0, vy, oy);
    }

    /// `out += J' v`.
    pub fn jacobian_apply_t(&self, v: &[f64], out: &mut [f64]) {
        let dx = self.dx();
        let (vx, vy) = v.split_at(dx);
        let (ox, oy) = out.split_at_mut(dx);
        self.a.mul_t_add(1.0, vx, ox);
        self.b.mul_add(-1.0, vy, ox);
        self.b.mul_t_add(1.0, vx, oy);
        self.c.mul_t_add(1.0, vy, oy);
    }

    /// Dense row-major Jacobian, for small-scale checks.
    pub fn jacobian_dense(&self) -> Vec<f64> {
        let (dx, dy) = (self.dx(), self.dy());
        let d = dx + dy;
        let mut j = vec![0.0; d * d];
        for (r, c, v) in self.a.triplets() {
            j[r * d + c] += v;
        }
        for (r, c, v) in self.b.triplets() {
            j[r * d + dx + c] += v;
            j[(dx + c) * d + r] -= v;
        }
        for (r, c, v) in self.c.triplets() {
            j[(dx + r) * d + dx + c] += v;
        }
        j
    }

    /// Weighted sum of blocks.
    pub fn combine(parts: &[(f64, &QuadraticBlock)], dx: usize, dy: usize) -> Self {
        let mats = |pick: fn(&QuadraticBlock) -> &CsrMatrix, r, c| {
            let list: Vec<(f64, &CsrMatrix)> = parts.iter().map(|(w, q)| (*w, pick(q))).collect();
            CsrMatrix::linear_combination(&list, r, c)
        };
        let mut gx = vec![0.0; dx];
        let mut gy = vec![0.0; dy];
        let mut offset = 0.0;
        for (w, q) in parts {
            linalg::axpy(*w, &q.gx, &mut gx);
            linalg::axpy(*w, &q.gy, &mut gy);
            offset += w * q.offset;
        }
        Self {
            a: mats(|q| &q.a, dx, dx),
            b: mats(|q| &q.b, dx, dy),
            c: mats(|q| &q.c, dy, dy),
            gx,
            gy,
            offset,
        }
    }

    fn spectral_norm(&self) -> linalg::PowerEstimate {
        linalg::spectral_norm(
            self.dx() + self.dy(),
            |v, o| self.jacobian_apply(v, o),
            |v, o| self.jacobian_apply_t(v, o),
            POWER_TOL,
            POWER_MAX_ITERS,
            POWER_SEED,
        )
    }
}

/// Which robust-regression objective to build.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RegressionVariant {
    /// `min_{||x||_1 <= R_x} max_{||y|| <= R_y}` of the mean squared residual.
    Constrained { r_x: f64, r_y: f64 },
    /// Unconstrained with `+ lambda/2 ||x||^2 - beta/2 ||y||^2`.
    Regularized { lambda: f64, beta: f64 },
}

#[derive(Clone, Debug, PartialEq)]
struct RegressionBlock {
    features: Vec<f64>,
    labels: Vec<f64>,
}

impl RegressionBlock {
    fn rows(&self) -> usize {
        self.labels.len()
    }
}

/// Robust regression split over nodes:
/// `f_i(x, y) = mean_{j in block i} (x'(a_j + y) - b_j)^2 / 2 + lambda/2 ||x||^2 - beta/2 ||y||^2`.
#[derive(Clone, Debug, PartialEq)]
pub struct RegressionFamily {
    dim: usize,
    blocks: Vec<RegressionBlock>,
    lambda: f64,
    beta: f64,
    variant: RegressionVariant,
}

impl RegressionFamily {
    pub fn variant(&self) -> RegressionVariant {
        self.variant
    }

    pub fn block_rows(&self, i: usize) -> usize {
        self.blocks[i].rows()
    }

    fn apply(&self, i: usize, z: &Point, out: &mut Point) {
        let blk = &self.blocks[i];
        let (x, y) = (z.x(), z.y());
        let xy = linalg::dot(x, y);
        let inv = 1.0 / blk.rows() as f64;
        out.fill(0.0);
        let mut r_mean = 0.0;
        {
            let ox = out.x_mut();
            for (row, b) in blk.features.chunks_exact(self.dim).zip(&blk.labels) {
                let r = linalg::dot(x, row) + xy - b;
                r_mean += r;
                linalg::axpy(r * inv, row, ox);
            }
            r_mean *= inv;
            linalg::axpy(r_mean, y, ox);
            linalg::axpy(self.lambda, x, ox);
        }
        let oy = out.y_mut();
        for ((o, xi), yi) in oy.iter_mut().zip(x).zip(y) {
            *o = -r_mean * xi + self.beta * yi;
        }
    }

    fn value(&self, i: usize, z: &Point) -> f64 {
        let blk = &self.blocks[i];
        let (x, y) = (z.x(), z.y());
        let xy = linalg::dot(x, y);
        let mut s = 0.0;
        for (row, b) in blk.features.chunks_exact(self.dim).zip(&blk.labels) {
            let r = linalg::dot(x, row) + xy - b;
            s += r * r;
        }
        0.5 * s / blk.rows() as f64 + 0.5 * self.lambda * linalg::norm_sq(x) - 0.5 * self.beta * linalg::norm_sq(y)
    }

    /// Rigorous constants over the region `||x|| <= r_x`, `||y|| <= r_y`.
    ///
    /// With `m_i`, `S_i`, `b_i` the block means of `a`, `aa'` and `b`, the
    /// operator Jacobian of node `i` is
    /// `[[S_i + m_i y' + y m_i' + yy' + lambda I, (m_i + y)x' + r_i I],
    ///   [-(x(m_i + y)' + r_i I), beta I - xx']]` with `r_i = m_i'x + x'y - b_i`.
    /// Bounding each block by the triangle inequality gives `L` and, for the
    /// differences to the global means, the similarity `delta`. The symmetric
    /// part is at least `min(lambda, beta - r_x^2)`.
    pub fn region_constants(&self, r_x: f64, r_y: f64) -> Constants {
        let d = self.dim;
        let total: usize = self.blocks.iter().map(RegressionBlock::rows).sum();
        let mut m = vec![0.0; d];
        let mut b_bar = 0.0;
        let mut s = vec![0.0; d * d];
        for blk in &self.blocks {
            for (row, b) in blk.features.chunks_exact(d).zip(&blk.labels) {
                linalg::axpy(1.0, row, &mut m);
                b_bar += b;
                for (r, &ar) in row.iter().enumerate() {
                    linalg::axpy(ar, row, &mut s[r * d..(r + 1) * d]);
                }
            }
        }
        let inv_total = 1.0 / total as f64;
        linalg::scale(inv_total, &mut m);
        linalg::scale(inv_total, &mut s);
        b_bar *= inv_total;

        let mut l_max: f64 = 0.0;
        let mut delta_max: f64 = 0.0;
        for blk in &self.blocks {
            let inv = 1.0 / blk.rows() as f64;
            let mut mi = vec![0.0; d];
            for row in blk.features.chunks_exact(d) {
                linalg::axpy(inv, row, &mut mi);
            }
            let bi = blk.labels.iter().sum::<f64>() * inv;
            let block_second_moment = |v: &[f64], out: &mut [f64]| {
                for row in blk.features.chunks_exact(d) {
                    linalg::axpy(inv * linalg::dot(row, v), row, out);
                }
            };
            let s_norm = linalg::power_iteration_psd(d, block_second_moment, POWER_TOL, POWER_MAX_ITERS, POWER_SEED).value;
            let diff = |v: &[f64], out: &mut [f64]| {
                block_second_moment(v, out);
                for (r, o) in out.iter_mut().enumerate() {
                    *o -= linalg::dot(&s[r * d..(r + 1) * d], v);
                }
            };
            let ds_norm = linalg::spectral_norm(d, diff, diff, POWER_TOL, POWER_MAX_ITERS, POWER_SEED).value;
            let mi_norm = linalg::norm(&mi);
            let dm = linalg::dist(&mi, &m);
            let db = (bi - b_bar).abs();
            let diag = (s_norm + 2.0 * mi_norm * r_y + r_y * r_y + self.lambda).max(r_x * r_x + self.beta);
            let l_i = diag + 2.0 * r_x * (mi_norm + r_y) + bi.abs();
            let delta_i = ds_norm + 2.0 * dm * (r_x + r_y) + db;
            l_max = l_max.max(l_i);
            delta_max = delta_max.max(delta_i);
        }
        let mu = match self.variant {
            RegressionVariant::Constrained { .. } => 0.0,
            RegressionVariant::Regularized { .. } => self.lambda.min(self.beta - r_x * r_x).max(0.0),
        };
        Constants { l: Some(l_max), delta: Some(delta_max), mu: Some(mu) }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Family {
    Quadratic(Vec<QuadraticBlock>),
    Regression(RegressionFamily),
}

/// Adds `lambda (z - z0)` to every local operator.
#[derive(Clone, Debug, PartialEq)]
struct Shift {
    lambda: f64,
    z0: Point,
}

/// `min_{x in X} max_{y in Y} (1/n) sum_i f_i(x, y)` given through the
/// stacked local operators `F_i`. Node `0` is the server.
#[derive(Clone, Debug, PartialEq)]
pub struct SaddleProblem {
    n: usize,
    dx: usize,
    dy: usize,
    family: Family,
    shift: Option<Shift>,
    constraint: ConstraintSet,
    declared: Constants,
    concave_in_y: bool,
}

impl SaddleProblem {
    pub fn from_quadratic_blocks(blocks: Vec<QuadraticBlock>, constraint: ConstraintSet) -> Result<Self> {
        let first = blocks.first().ok_or_else(|| invalid("at least one node is required"))?;
        let (dx, dy) = (first.dx(), first.dy());
        for q in &blocks {
            q.validate(dx, dy)?;
        }
        constraint.validate(dx, dy)?;
        Ok(Self {
            n: blocks.len(),
            dx,
            dy,
            family: Family::Quadratic(blocks),
            shift: None,
            constraint,
            declared: Constants::default(),
            concave_in_y: true,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dx(&self) -> usize {
        self.dx
    }

    pub fn dy(&self) -> usize {
        self.dy
    }

    pub fn dim(&self) -> usize {
        self.dx + self.dy
    }

    pub fn constraint(&self) -> &ConstraintSet {
        &self.constraint
    }

    pub fn declared(&self) -> Constants {
        self.declared
    }

    pub fn with_declared(mut self, declared: Constants) -> Self {
        self.declared = declared;
        self
    }

    /// Whether `f(x, .)` is concave on `Y`; needed by the iterative gap.
    pub fn concave_in_y(&self) -> bool {
        self.concave_in_y
    }

    pub fn quadratic_blocks(&self) -> Option<&[QuadraticBlock]> {
        match &self.family {
            Family::Quadratic(b) => Some(b),
            Family::Regression(_) => None,
        }
    }

    pub fn regression(&self) -> Option<&RegressionFamily> {
        match &self.family {
            Family::Regression(r) => Some(r),
            Family::Quadratic(_) => None,
        }
    }

    /// `(1/n) sum_i block_i` for quadratic problems.
    pub fn mean_block(&self) -> Option<QuadraticBlock> {
        let blocks = self.quadratic_blocks()?;
        if blocks.iter().all(|q| q == &blocks[0]) {
            return Some(blocks[0].clone());
        }
        let w = 1.0 / self.n as f64;
        let parts: Vec<(f64, &QuadraticBlock)> = blocks.iter().map(|q| (w, q)).collect();
        Some(QuadraticBlock::combine(&parts, self.dx, self.dy))
    }

    pub fn zero_point(&self) -> Point {
        Point::zeros(self.dx, self.dy)
    }

    pub fn check_point(&self, z: &Point) -> Result<()> {
        if z.dx() != self.dx {
            return Err(Error::DimensionMismatch { expected: self.dx, found: z.dx() });
        }
        if z.dy() != self.dy {
            return Err(Error::DimensionMismatch { expected: self.dy, found: z.dy() });
        }
        Ok(())
    }

    fn check_node(&self, i: usize) -> Result<()> {
        if i >= self.n {
            return Err(Error::IndexOutOfRange { index: i, len: self.n });
        }
        Ok(())
    }

    /// `out = F_i(z)`; panics on a bad node index or shape.
    pub fn eval_local_into(&self, i: usize, z: &Point, out: &mut Point) {
        match &self.family {
            Family::Quadratic(blocks) => blocks[i].apply(z, out),
            Family::Regression(r) => r.apply(i, z, out),
        }
        if let Some(s) = &self.shift {
            for ((o, zi), z0) in out.as_mut_slice().iter_mut().zip(z.as_slice()).zip(s.z0.as_slice()) {
                *o += s.lambda * (zi - z0);
            }
        }
    }

    /// The stacked operator `F_i(z) = [grad_x f_i; -grad_y f_i]` of node `i`.
    pub fn eval_local(&self, i: usize, z: &Point) -> Result<Point> {
        self.check_node(i)?;
        self.check_point(z)?;
        let mut out = self.zero_point();
        self.eval_local_into(i, z, &mut out);
        Ok(out)
    }

    /// `F(z) = (1/n) sum_i F_i(z)`, summed in ascending node order and then
    /// divided by `n`.
    pub fn eval_mean(&self, z: &Point) -> Point {
        let mut acc = self.zero_point();
        let mut tmp = self.zero_point();
        for i in 0..self.n {
            self.eval_local_into(i, z, &mut tmp);
            acc.axpy(1.0, &tmp);
        }
        let n = self.n as f64;
        acc.as_mut_slice().iter_mut().for_each(|v| *v /= n);
        acc
    }

    pub fn value_local(&self, i: usize, z: &Point) -> f64 {
        let base = match &self.family {
            Family::Quadratic(blocks) => blocks[i].value(z),
            Family::Regression(r) => r.value(i, z),
        };
        match &self.shift {
            Some(s) => {
                let dx = linalg::dist_sq(z.x(), s.z0.x());
                let dy = linalg::dist_sq(z.y(), s.z0.y());
                base + 0.5 * s.lambda * (dx - dy)
            }
            None => base,
        }
    }

    /// `f(z) = (1/n) sum_i f_i(z)`.
    pub fn value(&self, z: &Point) -> f64 {
        (0..self.n).map(|i| self.value_local(i, z)).sum::<f64>() / self.n as f64
    }

    /// `max_i ||F_i(z)||`.
    pub fn max_local_norm(&self, z: &Point) -> f64 {
        let mut tmp = self.zero_point();
        (0..self.n).fold(0.0, |m: f64, i| {
            self.eval_local_into(i, z, &mut tmp);
            m.max(tmp.norm())
        })
    }

    /// Smoothness, similarity and strong monotonicity constants.
    ///
    /// Quadratic problems are measured from their Jacobian blocks by power
    /// iteration; a declared `mu` overrides the estimate. Other problems
    /// return their declared constants.
    pub fn estimate_constants(&self) -> Result<EstimatedConstants> {
        let Some(blocks) = self.quadratic_blocks() else {
            let (Some(l), Some(delta)) = (self.declared.l, self.declared.delta) else {
                return Err(Error::ConstantsUnavailable);
            };
            return Ok(EstimatedConstants {
                l,
                delta,
                mu: self.declared.mu.unwrap_or(0.0),
                mu_estimate: None,
                converged: true,
            });
        };
        let mean = self.mean_block().expect("quadratic problem");
        let mut converged = true;
        let mut l: f64 = 0.0;
        let mut delta: f64 = 0.0;
        for q in blocks {
            let est = q.spectral_norm();
            converged &= est.converged;
            l = l.max(est.value);
            let diff = QuadraticBlock::combine(&[(1.0, q), (-1.0, &mean)], self.dx, self.dy);
            let est = diff.spectral_norm();
            converged &= est.converged;
            delta = delta.max(est.value);
        }
        let (mu_est, mu_converged) = min_symmetric_eigenvalue(&mean);
        converged &= mu_converged;
        let mu_est = mu_est.max(0.0);
        Ok(EstimatedConstants {
            l,
            delta,
            mu: self.declared.mu.unwrap_or(mu_est),
            mu_estimate: Some(mu_est),
            converged,
        })
    }

    /// The problem with `lambda (z - z0)` added to every local operator,
    /// i.e. `f_i + lambda/2 ||x - x0||^2 - lambda/2 ||y - y0||^2`.
    pub fn regularize_for_small_gradient(&self, lambda: f64, z0: &Point) -> Result<SaddleProblem> {
        if !(lambda >= 0.0 && lambda.is_finite()) {
            return Err(invalid("regularization weight must be finite and nonnegative"));
        }
        self.check_point(z0)?;
        let mut out = self.clone();
        if lambda == 0.0 {
            return Ok(out);
        }
        match &mut out.family {
            Family::Quadratic(blocks) => {
                let (dx, dy) = (self.dx, self.dy);
                let eye_x = CsrMatrix::identity(dx, 1.0);
                let eye_y = CsrMatrix::identity(dy, 1.0);
                for q in blocks.iter_mut() {
                    q.a = CsrMatrix::linear_combination(&[(1.0, &q.a), (lambda, &eye_x)], dx, dx);
                    q.c = CsrMatrix::linear_combination(&[(1.0, &q.c), (lambda, &eye_y)], dy, dy);
                    linalg::axpy(-lambda, z0.x(), &mut q.gx);
                    linalg::axpy(lambda, z0.y(), &mut q.gy);
                    q.offset += 0.5 * lambda * (linalg::norm_sq(z0.x()) - linalg::norm_sq(z0.y()));
                }
            }
            Family::Regression(_) => {
                out.shift = Some(match out.shift.take() {
                    None => Shift { lambda, z0: z0.clone() },
                    Some(s) => {
                        let total = s.lambda + lambda;
                        let mut c = s.z0.scaled(s.lambda / total);
                        c.axpy(lambda / total, z0);
                        Shift { lambda: total, z0: c }
                    }
                });
            }
        }
        out.declared.l = self.declared.l.map(|l| l + lambda);
        out.declared.mu = match (self.declared.mu, self.quadratic_blocks().is_some()) {
            (Some(mu), _) => Some(mu + lambda),
            (None, false) => Some(lambda),
            (None, true) => None,
        };
        Ok(out)
    }
}

/// Smallest eigenvalue of the symmetric part `diag(A, C)` of a block's
/// Jacobian, via power iteration on `sigma I - S` with a Gershgorin shift.
fn min_symmetric_eigenvalue(q: &QuadraticBlock) -> (f64, bool) {
    let d = q.dx() + q.dy();
    if d == 0 {
        return (0.0, true);
    }
    let mut sigma: f64 = 0.0;
    let mut row_abs = vec![0.0; d];
    for (r, _, v) in q.a.triplets() {
        row_abs[r] += v.abs();
    }
    for (r, _, v) in q.c.triplets() {
        row_abs[q.dx() + r] += v.abs();
    }
    for s in &row_abs {
        sigma = sigma.max(*s);
    }
    if sigma == 0.0 {
        return (0.0, true);
    }
    let dx = q.dx();
    let shifted = |v: &[f64], out: &mut [f64]| {
        for (o, vi) in out.iter_mut().zip(v) {
            *o += sigma * vi;
        }
        let (vx, vy) = v.split_at(dx);
        let (ox, oy) = out.split_at_mut(dx);
        q.a.mul_add(-1.0, vx, ox);
        q.c.mul_add(-1.0, vy, oy);
    };
    let est = linalg::power_iteration_psd(d, shifted, POWER_TOL, POWER_MAX_ITERS, POWER_SEED);
    (sigma - est.value, est.converged)
}

/// Splits `data` over `n` nodes and builds the robust regression problem.
///
/// Rows are shuffled with `partition_seed` and cut into contiguous blocks;
/// the first `N mod n` nodes receive one extra row. Constants are declared
/// from [`RegressionFamily::region_constants`] over the feasible region
/// (constrained variant, using `||x||_2 <= ||x||_1`) or over the balls of
/// radius `sqrt(beta / 2)` (regularized variant, giving `mu = min(lambda, beta/2)`).
pub fn build_robust_regression(
    data: &RegressionData,
    n: usize,
    variant: RegressionVariant,
    partition_seed: u64,
) -> Result<SaddleProblem> {
    let region = match variant {
        RegressionVariant::Constrained { r_x, r_y } => (r_x, r_y),
        RegressionVariant::Regularized { beta, .. } => {
            let r = libm::sqrt(beta / 2.0);
            (r, r)
        }
    };
    build_robust_regression_with_region(data, n, variant, partition_seed, region)
}

/// As [`build_robust_regression`] with an explicit region `(r_x, r_y)` for
/// the declared constants.
pub fn build_robust_regression_with_region(
    data: &RegressionData,
    n: usize,
    variant: RegressionVariant,
    partition_seed: u64,
    region: (f64, f64),
) -> Result<SaddleProblem> {
    let rows = data.n_rows();
    if n == 0 {
        return Err(invalid("node count must be positive"));
    }
    if n > rows {
        return Err(invalid("more nodes than data rows"));
    }
    let (constraint, lambda, beta) = match variant {
        RegressionVariant::Constrained { r_x, r_y } => {
            if !(r_x > 0.0 && r_y > 0.0) {
                return Err(invalid("R_x and R_y must be positive"));
            }
            (ConstraintSet::new(SetPrimitive::L1Ball { radius: r_x }, SetPrimitive::ball(data.dim(), r_y)), 0.0, 0.0)
        }
        RegressionVariant::Regularized { lambda, beta } => {
            if !(lambda > 0.0 && beta > 0.0) {
                return Err(invalid("lambda and beta must be positive"));
            }
            (ConstraintSet::unconstrained(), lambda, beta)
        }
    };
    let perm = shuffled_indices(rows, partition_seed);
    let base = rows / n;
    let extra = rows % n;
    let d = data.dim();
    let mut blocks = Vec::with_capacity(n);
    let mut cursor = 0;
    for i in 0..n {
        let len = base + usize::from(i < extra);
        let mut features = Vec::with_capacity(len * d);
        let mut labels = Vec::with_capacity(len);
        for &j in &perm[cursor..cursor + len] {
            features.extend_from_slice(data.row(j));
            labels.push(data.label(j));
        }
        cursor += len;
        blocks.push(RegressionBlock { features, labels });
    }
    let family = RegressionFamily { dim: d, blocks, lambda, beta, variant };
    let declared = family.region_constants(region.0, region.1);
    Ok(SaddleProblem {
        n,
        dx: d,
        dy: d,
        family: Family::Regression(family),
        shift: None,
        constraint,
        declared,
        concave_in_y: false,
    })
}

/// Fisher-Yates shuffle of `0..len` driven by the partition stream.
pub fn shuffled_indices(len: usize, seed: u64) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..len).collect();
    let mut lane = CounterRng::new(seed).lane(Stream::Partition, 0);
    for k in (1..len).rev() {
        let j = lane.below(k + 1);
        perm.swap(k, j);
    }
    perm
}
