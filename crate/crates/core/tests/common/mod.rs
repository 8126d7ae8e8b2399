#![allow(dead_code)]

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use svogs_core::constraint::ConstraintSet;
use svogs_core::linalg::CsrMatrix;
use svogs_core::problem::{QuadraticBlock, SaddleProblem};
use svogs_core::rng::{CounterRng, Lane, Stream};
use svogs_core::Point;

pub fn lane(seed: u64, counter: u64) -> Lane {
    CounterRng::new(seed).lane(Stream::Diagnostic, counter)
}

pub fn gaussian(lane: &mut Lane, len: usize, scale: f64) -> Vec<f64> {
    (0..len).map(|_| scale * lane.normal()).collect()
}

pub fn random_point(lane: &mut Lane, dx: usize, dy: usize, scale: f64) -> Point {
    Point::from_parts(&gaussian(lane, dx, scale), &gaussian(lane, dy, scale))
}

pub fn dense(lane: &mut Lane, rows: usize, cols: usize, scale: f64) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| scale * lane.normal())
}

/// `G G' / dim + shift I`, symmetric positive semidefinite for `shift >= 0`.
pub fn psd(lane: &mut Lane, dim: usize, scale: f64, shift: f64) -> DMatrix<f64> {
    let g = dense(lane, dim, dim, scale);
    &g * g.transpose() / dim as f64 + DMatrix::identity(dim, dim) * shift
}

pub fn to_csr(m: &DMatrix<f64>) -> CsrMatrix {
    let mut row_major = Vec::with_capacity(m.nrows() * m.ncols());
    for r in 0..m.nrows() {
        for c in 0..m.ncols() {
            row_major.push(m[(r, c)]);
        }
    }
    CsrMatrix::from_dense(m.nrows(), m.ncols(), &row_major)
}

pub fn to_dmatrix(m: &CsrMatrix) -> DMatrix<f64> {
    DMatrix::from_row_slice(m.rows(), m.cols(), &m.to_dense())
}

/// Dense description of one quadratic node: `f = x'Ax/2 + x'By - y'Cy/2 + gx'x + gy'y`.
#[derive(Clone, Debug)]
pub struct DenseQuad {
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub c: DMatrix<f64>,
    pub gx: DVector<f64>,
    pub gy: DVector<f64>,
}

impl DenseQuad {
    pub fn jacobian(&self) -> DMatrix<f64> {
        let (dx, dy) = (self.a.nrows(), self.c.nrows());
        let mut j = DMatrix::zeros(dx + dy, dx + dy);
        j.view_mut((0, 0), (dx, dx)).copy_from(&self.a);
        j.view_mut((0, dx), (dx, dy)).copy_from(&self.b);
        j.view_mut((dx, 0), (dy, dx)).copy_from(&(-self.b.transpose()));
        j.view_mut((dx, dx), (dy, dy)).copy_from(&self.c);
        j
    }

    pub fn constant(&self) -> DVector<f64> {
        let mut v = DVector::zeros(self.gx.len() + self.gy.len());
        v.rows_mut(0, self.gx.len()).copy_from(&self.gx);
        v.rows_mut(self.gx.len(), self.gy.len()).copy_from(&(-&self.gy));
        v
    }

    pub fn block(&self) -> QuadraticBlock {
        let mut q = QuadraticBlock::zeros(self.a.nrows(), self.c.nrows());
        q.a = to_csr(&self.a);
        q.b = to_csr(&self.b);
        q.c = to_csr(&self.c);
        q.gx = self.gx.iter().copied().collect();
        q.gy = self.gy.iter().copied().collect();
        q
    }
}

/// Nodes share a base coupling plus node-specific perturbations of size `spread`.
pub fn random_quads(seed: u64, n: usize, dx: usize, dy: usize, mu: f64, spread: f64) -> Vec<DenseQuad> {
    let mut l = lane(seed, 0);
    let base_b = dense(&mut l, dx, dy, 1.0 / (dx as f64).sqrt());
    (0..n)
        .map(|_| DenseQuad {
            a: psd(&mut l, dx, spread, mu),
            b: &base_b + dense(&mut l, dx, dy, spread / (dx as f64).sqrt()),
            c: psd(&mut l, dy, spread, mu),
            gx: DVector::from_vec(gaussian(&mut l, dx, 1.0)),
            gy: DVector::from_vec(gaussian(&mut l, dy, 1.0)),
        })
        .collect()
}

pub fn quad_problem(quads: &[DenseQuad], constraint: ConstraintSet) -> SaddleProblem {
    SaddleProblem::from_quadratic_blocks(quads.iter().map(DenseQuad::block).collect(), constraint).unwrap()
}

pub fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    m.clone().svd(false, false).singular_values.max()
}

pub fn min_sym_eig(m: &DMatrix<f64>) -> f64 {
    let s = (m + m.transpose()) * 0.5;
    SymmetricEigen::new(s).eigenvalues.min()
}

pub fn mean_jacobian(quads: &[DenseQuad]) -> DMatrix<f64> {
    let mut j = quads[0].jacobian() * 0.0;
    for q in quads {
        j += q.jacobian();
    }
    j / quads.len() as f64
}

pub fn mean_constant(quads: &[DenseQuad]) -> DVector<f64> {
    let mut v = quads[0].constant() * 0.0;
    for q in quads {
        v += q.constant();
    }
    v / quads.len() as f64
}

/// Unconstrained saddle `J z + c = 0` of the mean operator.
pub fn dense_saddle(quads: &[DenseQuad]) -> DVector<f64> {
    mean_jacobian(quads).lu().solve(&(-mean_constant(quads))).expect("nonsingular")
}

pub fn dvec(p: &Point) -> DVector<f64> {
    DVector::from_column_slice(p.as_slice())
}

pub fn point_of(v: &DVector<f64>, dx: usize) -> Point {
    Point::from_stacked(v.iter().copied().collect(), dx)
}

pub fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Standard error of the sample mean.
pub fn std_err(v: &[f64]) -> f64 {
    let m = mean(v);
    let var = v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (v.len() as f64 - 1.0);
    (var / v.len() as f64).sqrt()
}

pub fn median(v: &mut [f64]) -> f64 {
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}
