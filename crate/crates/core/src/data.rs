use alloc::vec::Vec;

use crate::error::invalid;
use crate::rng::{CounterRng, Stream};
use crate::{Error, Result};

/// Labelled design matrix `{(a_j, b_j)}`, rows stored densely row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct RegressionData {
    features: Vec<f64>,
    labels: Vec<f64>,
    dim: usize,
}

impl RegressionData {
    pub fn new(features: Vec<f64>, labels: Vec<f64>, dim: usize) -> Result<Self> {
        if labels.is_empty() {
            return Err(invalid("regression data needs at least one row"));
        }
        if dim == 0 {
            return Err(invalid("feature dimension must be positive"));
        }
        if features.len() != labels.len() * dim {
            return Err(Error::DimensionMismatch { expected: labels.len() * dim, found: features.len() });
        }
        if features.iter().chain(&labels).any(|v| !v.is_finite()) {
            return Err(invalid("regression data must be finite"));
        }
        Ok(Self { features, labels, dim })
    }

    pub fn from_rows(rows: &[Vec<f64>], labels: Vec<f64>) -> Result<Self> {
        let dim = rows.first().map_or(0, Vec::len);
        if rows.len() != labels.len() {
            return Err(Error::DimensionMismatch { expected: rows.len(), found: labels.len() });
        }
        let mut features = Vec::with_capacity(rows.len() * dim);
        for r in rows {
            if r.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: r.len() });
            }
            features.extend_from_slice(r);
        }
        Self::new(features, labels, dim)
    }

    pub fn n_rows(&self) -> usize {
        self.labels.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, j: usize) -> &[f64] {
        &self.features[j * self.dim..(j + 1) * self.dim]
    }

    pub fn label(&self, j: usize) -> f64 {
        self.labels[j]
    }

    pub fn labels(&self) -> &[f64] {
        &self.labels
    }

    pub fn features(&self) -> &[f64] {
        &self.features
    }
}

/// Parameters of the synthetic regression generator.
///
/// Rows are `a_j = m + sigma * xi_j` with a shared mean direction `m` of norm
/// `mean_norm` and standard normal `xi_j`; labels are
/// `b_j = a_j^T x_true + label_noise * e_j` with `||x_true|| = signal_norm`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SyntheticSpec {
    pub n_rows: usize,
    pub dim: usize,
    pub mean_norm: f64,
    pub sigma: f64,
    pub signal_norm: f64,
    pub label_noise: f64,
}

impl SyntheticSpec {
    pub fn new(n_rows: usize, dim: usize) -> Self {
        Self { n_rows, dim, mean_norm: 1.0, sigma: 1.0, signal_norm: 1.0, label_noise: 0.1 }
    }
}

pub fn synthetic(spec: &SyntheticSpec, seed: u64) -> Result<RegressionData> {
    if spec.n_rows == 0 || spec.dim == 0 {
        return Err(invalid("synthetic data needs positive row count and dimension"));
    }
    let rng = CounterRng::new(seed);
    let unit = |counter: u64, scale: f64| -> Vec<f64> {
        let mut lane = rng.lane(Stream::Data, counter);
        let mut v: Vec<f64> = (0..spec.dim).map(|_| lane.normal()).collect();
        let nv = crate::linalg::norm(&v);
        let s = if nv > 0.0 { scale / nv } else { 0.0 };
        crate::linalg::scale(s, &mut v);
        v
    };
    let mean = unit(0, spec.mean_norm);
    let x_true = unit(1, spec.signal_norm);
    let mut features = Vec::with_capacity(spec.n_rows * spec.dim);
    let mut labels = Vec::with_capacity(spec.n_rows);
    for j in 0..spec.n_rows {
        let mut lane = rng.lane(Stream::Data, 2 + j as u64);
        let start = features.len();
        for m in &mean {
            features.push(m + spec.sigma * lane.normal());
        }
        let b = crate::linalg::dot(&features[start..], &x_true) + spec.label_noise * lane.normal();
        labels.push(b);
    }
    RegressionData::new(features, labels, spec.dim)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn rejects_ragged_and_empty() {
        assert!(RegressionData::new(vec![], vec![], 3).is_err());
        assert!(RegressionData::from_rows(&[vec![1.0, 2.0], vec![1.0]], vec![0.0, 1.0]).is_err());
    }

    #[test]
    fn synthetic_is_deterministic() {
        let spec = SyntheticSpec::new(20, 4);
        let a = synthetic(&spec, 3).unwrap();
        assert_eq!(a, synthetic(&spec, 3).unwrap());
        assert_ne!(a, synthetic(&spec, 4).unwrap());
        assert_eq!(a.n_rows(), 20);
        assert_eq!(a.row(19).len(), 4);
    }
}
