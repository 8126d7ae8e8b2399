use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::linalg;

/// A primal-dual point `z = [x; y]` stored stacked, with the split recorded.
///
/// Operator values `F(z) = [∇_x f; -∇_y f]` share the same layout and type.
#[derive(Clone, PartialEq)]
pub struct Point {
    data: Vec<f64>,
    dx: usize,
}

impl Point {
    pub fn zeros(dx: usize, dy: usize) -> Self {
        Self { data: vec![0.0; dx + dy], dx }
    }

    pub fn from_parts(x: &[f64], y: &[f64]) -> Self {
        let mut data = Vec::with_capacity(x.len() + y.len());
        data.extend_from_slice(x);
        data.extend_from_slice(y);
        Self { data, dx: x.len() }
    }

    /// Wraps a stacked vector; `dx` entries go to the `x` block.
    pub fn from_stacked(data: Vec<f64>, dx: usize) -> Self {
        assert!(dx <= data.len(), "x block larger than the stacked vector");
        Self { data, dx }
    }

    pub fn dx(&self) -> usize {
        self.dx
    }

    pub fn dy(&self) -> usize {
        self.data.len() - self.dx
    }

    pub fn dim(&self) -> usize {
        self.data.len()
    }

    pub fn x(&self) -> &[f64] {
        &self.data[..self.dx]
    }

    pub fn y(&self) -> &[f64] {
        &self.data[self.dx..]
    }

    pub fn x_mut(&mut self) -> &mut [f64] {
        &mut self.data[..self.dx]
    }

    pub fn y_mut(&mut self) -> &mut [f64] {
        let dx = self.dx;
        &mut self.data[dx..]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn same_shape(&self, other: &Point) -> bool {
        self.dx == other.dx && self.data.len() == other.data.len()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn norm(&self) -> f64 {
        linalg::norm(&self.data)
    }

    pub fn norm_sq(&self) -> f64 {
        linalg::norm_sq(&self.data)
    }

    pub fn dist(&self, other: &Point) -> f64 {
        linalg::dist(&self.data, &other.data)
    }

    pub fn dist_sq(&self, other: &Point) -> f64 {
        linalg::dist_sq(&self.data, &other.data)
    }

    pub fn dot(&self, other: &Point) -> f64 {
        linalg::dot(&self.data, &other.data)
    }

    /// `self += alpha * other`
    pub fn axpy(&mut self, alpha: f64, other: &Point) {
        linalg::axpy(alpha, &other.data, &mut self.data);
    }

    pub fn scale(&mut self, alpha: f64) {
        linalg::scale(alpha, &mut self.data);
    }

    pub fn sub(&self, other: &Point) -> Point {
        Point { data: linalg::sub(&self.data, &other.data), dx: self.dx }
    }

    pub fn add(&self, other: &Point) -> Point {
        Point { data: linalg::add(&self.data, &other.data), dx: self.dx }
    }

    pub fn scaled(&self, alpha: f64) -> Point {
        let mut p = self.clone();
        p.scale(alpha);
        p
    }

    /// `(1 - t) * self + t * other`
    pub fn lerp(&self, other: &Point, t: f64) -> Point {
        let data = self.data.iter().zip(&other.data).map(|(a, b)| (1.0 - t) * a + t * b).collect();
        Point { data, dx: self.dx }
    }

    pub fn fill(&mut self, v: f64) {
        self.data.iter_mut().for_each(|e| *e = v);
    }
}

impl fmt::Debug for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Point").field("x", &self.x()).field("y", &self.y()).finish()
    }
}
