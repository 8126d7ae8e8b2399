//! Small dense/sparse linear algebra kit used throughout the crate.

use alloc::vec;
use alloc::vec::Vec;

use crate::rng::{CounterRng, Stream};

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm(a: &[f64]) -> f64 {
    libm::sqrt(dot(a, a))
}

#[inline]
pub fn norm_sq(a: &[f64]) -> f64 {
    dot(a, a)
}

pub fn dist_sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    libm::sqrt(dist_sq(a, b))
}

/// `y += alpha * x`
#[inline]
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub fn scale(alpha: f64, x: &mut [f64]) {
    for v in x {
        *v *= alpha;
    }
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn norm1(a: &[f64]) -> f64 {
    a.iter().map(|v| v.abs()).sum()
}

/// Compressed sparse row matrix. Dense matrices are stored the same way;
/// the structured instances of this crate have O(d) nonzeros.
#[derive(Clone, Debug, PartialEq)]
pub struct CsrMatrix {
    rows: usize,
    cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, row_ptr: vec![0; rows + 1], col_idx: Vec::new(), values: Vec::new() }
    }

    pub fn identity(n: usize, scale: f64) -> Self {
        Self::diagonal(&vec![scale; n])
    }

    pub fn diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        Self::from_triplets(n, n, diag.iter().enumerate().map(|(i, &v)| (i, i, v)))
    }

    /// Builds from `(row, col, value)` triplets; duplicates are summed and
    /// explicit zeros dropped.
    pub fn from_triplets<I>(rows: usize, cols: usize, triplets: I) -> Self
    where
        I: IntoIterator<Item = (usize, usize, f64)>,
    {
        let mut t: Vec<(usize, usize, f64)> = triplets.into_iter().collect();
        t.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut row_ptr = vec![0usize; rows + 1];
        let mut col_idx = Vec::with_capacity(t.len());
        let mut values: Vec<f64> = Vec::with_capacity(t.len());
        let mut last: Option<(usize, usize)> = None;
        let mut row_of = Vec::with_capacity(t.len());
        for (r, c, v) in t {
            assert!(r < rows && c < cols, "triplet ({r}, {c}) outside {rows}x{cols}");
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                col_idx.push(c);
                values.push(v);
                row_of.push(r);
                last = Some((r, c));
            }
        }
        // Drop zeros after summation.
        let mut keep_c = Vec::with_capacity(col_idx.len());
        let mut keep_v = Vec::with_capacity(values.len());
        for ((r, c), v) in row_of.iter().zip(col_idx).zip(values) {
            if v != 0.0 {
                row_ptr[r + 1] += 1;
                keep_c.push(c);
                keep_v.push(v);
            }
        }
        for r in 0..rows {
            row_ptr[r + 1] += row_ptr[r];
        }
        Self { rows, cols, row_ptr, col_idx: keep_c, values: keep_v }
    }

    pub fn from_dense(rows: usize, cols: usize, data: &[f64]) -> Self {
        assert_eq!(data.len(), rows * cols);
        Self::from_triplets(
            rows,
            cols,
            (0..rows).flat_map(|r| (0..cols).map(move |c| (r, c, data[r * cols + c]))),
        )
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn is_zero(&self) -> bool {
        self.values.is_empty()
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.rows).flat_map(move |r| {
            (self.row_ptr[r]..self.row_ptr[r + 1]).map(move |k| (r, self.col_idx[k], self.values[k]))
        })
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        (self.row_ptr[r]..self.row_ptr[r + 1])
            .find(|&k| self.col_idx[k] == c)
            .map_or(0.0, |k| self.values[k])
    }

    /// `out += alpha * self * x`
    pub fn mul_add(&self, alpha: f64, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.cols);
        debug_assert_eq!(out.len(), self.rows);
        for (r, o) in out.iter_mut().enumerate() {
            let mut acc = 0.0;
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.values[k] * x[self.col_idx[k]];
            }
            *o += alpha * acc;
        }
    }

    /// `out += alpha * self^T * x`
    pub fn mul_t_add(&self, alpha: f64, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.rows);
        debug_assert_eq!(out.len(), self.cols);
        for (r, &xr) in x.iter().enumerate() {
            if xr == 0.0 {
                continue;
            }
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                out[self.col_idx[k]] += alpha * self.values[k] * xr;
            }
        }
    }

    pub fn mul(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.rows];
        self.mul_add(1.0, x, &mut out);
        out
    }

    pub fn mul_t(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.cols];
        self.mul_t_add(1.0, x, &mut out);
        out
    }

    pub fn scaled(&self, alpha: f64) -> Self {
        let mut m = self.clone();
        scale(alpha, &mut m.values);
        m
    }

    /// Weighted sum `sum_k w_k * M_k` of equally shaped matrices.
    pub fn linear_combination(parts: &[(f64, &CsrMatrix)], rows: usize, cols: usize) -> Self {
        Self::from_triplets(
            rows,
            cols,
            parts.iter().flat_map(|(w, m)| {
                assert_eq!((m.rows, m.cols), (rows, cols));
                m.triplets().map(move |(r, c, v)| (r, c, w * v))
            }),
        )
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.rows * self.cols];
        for (r, c, v) in self.triplets() {
            d[r * self.cols + c] = v;
        }
        d
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        self.rows == self.cols && self.triplets().all(|(r, c, v)| (self.get(c, r) - v).abs() <= tol)
    }
}

/// Outcome of a power iteration.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PowerEstimate {
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Largest eigenvalue of a symmetric positive semidefinite operator given
/// by its action. Stops once the eigen-residual `||Av - θv||` falls below
/// `rel_tol * θ`.
pub fn power_iteration_psd<F>(dim: usize, apply: F, rel_tol: f64, max_iters: usize, seed: u64) -> PowerEstimate
where
    F: Fn(&[f64], &mut [f64]),
{
    if dim == 0 {
        return PowerEstimate { value: 0.0, iterations: 0, converged: true };
    }
    let rng = CounterRng::new(seed);
    let mut v: Vec<f64> = (0..dim as u64).map(|i| rng.normal(Stream::Diagnostic, 0x5eed, i)).collect();
    let nv = norm(&v);
    scale(1.0 / nv, &mut v);
    let mut av = vec![0.0; dim];
    let mut theta = 0.0;
    for it in 1..=max_iters {
        av.iter_mut().for_each(|x| *x = 0.0);
        apply(&v, &mut av);
        theta = dot(&v, &av);
        let nav = norm(&av);
        if nav == 0.0 {
            return PowerEstimate { value: 0.0, iterations: it, converged: true };
        }
        let resid = libm::sqrt(av.iter().zip(&v).map(|(a, b)| (a - theta * b) * (a - theta * b)).sum::<f64>());
        if resid <= rel_tol * theta.abs() {
            return PowerEstimate { value: theta, iterations: it, converged: true };
        }
        for (vi, ai) in v.iter_mut().zip(&av) {
            *vi = ai / nav;
        }
    }
    PowerEstimate { value: theta, iterations: max_iters, converged: false }
}

/// Spectral norm of a (generally non-symmetric) square operator given its
/// action and the action of its transpose, via power iteration on `M^T M`.
pub fn spectral_norm<F, G>(dim: usize, apply: F, apply_t: G, rel_tol: f64, max_iters: usize, seed: u64) -> PowerEstimate
where
    F: Fn(&[f64], &mut [f64]),
    G: Fn(&[f64], &mut [f64]),
{
    let tmp = core::cell::RefCell::new(vec![0.0; dim]);
    let est = power_iteration_psd(
        dim,
        |v, out| {
            let mut t = tmp.borrow_mut();
            t.iter_mut().for_each(|x| *x = 0.0);
            apply(v, &mut t);
            apply_t(&t, out);
        },
        rel_tol,
        max_iters,
        seed,
    );
    PowerEstimate { value: libm::sqrt(est.value.max(0.0)), ..est }
}

/// Dense row-major LU with partial pivoting. Returns `None` when the matrix
/// is numerically singular.
pub struct DenseLu {
    n: usize,
    lu: Vec<f64>,
    piv: Vec<usize>,
}

impl DenseLu {
    pub fn factor(n: usize, mut a: Vec<f64>) -> Option<Self> {
        assert_eq!(a.len(), n * n);
        let scale_ref = a.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
        let mut piv: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let (p, pv) = (k..n)
                .map(|r| (r, a[r * n + k].abs()))
                .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if pv <= 1e-14 * scale_ref {
                return None;
            }
            if p != k {
                for c in 0..n {
                    a.swap(k * n + c, p * n + c);
                }
                piv.swap(k, p);
            }
            let d = a[k * n + k];
            for r in k + 1..n {
                let f = a[r * n + k] / d;
                if f == 0.0 {
                    continue;
                }
                a[r * n + k] = f;
                for c in k + 1..n {
                    a[r * n + c] -= f * a[k * n + c];
                }
            }
        }
        Some(Self { n, lu: a, piv })
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut x: Vec<f64> = self.piv.iter().map(|&p| b[p]).collect();
        for r in 0..n {
            let mut acc = x[r];
            for c in 0..r {
                acc -= self.lu[r * n + c] * x[c];
            }
            x[r] = acc;
        }
        for r in (0..n).rev() {
            let mut acc = x[r];
            for c in r + 1..n {
                acc -= self.lu[r * n + c] * x[c];
            }
            x[r] = acc / self.lu[r * n + r];
        }
        x
    }
}
