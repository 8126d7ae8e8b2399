use alloc::vec::Vec;

use crate::error::invalid;
use crate::linalg;
use crate::{Error, Point, Result};

/// A closed convex set in one block (`x` or `y`).
#[derive(Clone, Debug, PartialEq)]
pub enum SetPrimitive {
    Unconstrained,
    EuclideanBall { center: Vec<f64>, radius: f64 },
    /// Origin-centered `l1` ball.
    L1Ball { radius: f64 },
    Box { lo: Vec<f64>, hi: Vec<f64> },
}

impl SetPrimitive {
    pub fn ball(dim: usize, radius: f64) -> Self {
        SetPrimitive::EuclideanBall { center: alloc::vec![0.0; dim], radius }
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        match self {
            SetPrimitive::Unconstrained => Ok(()),
            SetPrimitive::EuclideanBall { center, radius } => {
                check_len(center.len(), dim)?;
                if !(*radius >= 0.0 && radius.is_finite()) {
                    return Err(invalid("ball radius must be finite and nonnegative"));
                }
                Ok(())
            }
            SetPrimitive::L1Ball { radius } => {
                if !(*radius >= 0.0 && radius.is_finite()) {
                    return Err(invalid("l1 radius must be finite and nonnegative"));
                }
                Ok(())
            }
            SetPrimitive::Box { lo, hi } => {
                check_len(lo.len(), dim)?;
                check_len(hi.len(), dim)?;
                if lo.iter().zip(hi).any(|(l, h)| !(l <= h)) {
                    return Err(invalid("box requires lo <= hi"));
                }
                Ok(())
            }
        }
    }

    pub fn is_unconstrained(&self) -> bool {
        matches!(self, SetPrimitive::Unconstrained)
    }

    /// Euclidean diameter, `None` when unbounded.
    pub fn diameter(&self) -> Option<f64> {
        match self {
            SetPrimitive::Unconstrained => None,
            SetPrimitive::EuclideanBall { radius, .. } => Some(2.0 * radius),
            SetPrimitive::L1Ball { radius } => Some(2.0 * radius),
            SetPrimitive::Box { lo, hi } => {
                if lo.iter().chain(hi).all(|v| v.is_finite()) {
                    Some(linalg::dist(lo, hi))
                } else {
                    None
                }
            }
        }
    }

    /// Projects `v` in place.
    pub fn project_in_place(&self, v: &mut [f64]) {
        match self {
            SetPrimitive::Unconstrained => {}
            SetPrimitive::EuclideanBall { center, radius } => {
                let mut r = linalg::dist(v, center);
                // Repeated with a slightly smaller factor if rounding leaves
                // the point outside, so that projection is idempotent.
                let mut slack = 0.0;
                while r > *radius {
                    let t = radius / r * (1.0 - slack);
                    for (vi, ci) in v.iter_mut().zip(center) {
                        *vi = ci + t * (*vi - ci);
                    }
                    r = linalg::dist(v, center);
                    slack = if slack == 0.0 { f64::EPSILON } else { 2.0 * slack };
                }
            }
            SetPrimitive::L1Ball { radius } => project_l1_ball(v, *radius),
            SetPrimitive::Box { lo, hi } => {
                for ((vi, l), h) in v.iter_mut().zip(lo).zip(hi) {
                    *vi = vi.clamp(*l, *h);
                }
            }
        }
    }

    pub fn contains(&self, v: &[f64], tol: f64) -> bool {
        match self {
            SetPrimitive::Unconstrained => true,
            SetPrimitive::EuclideanBall { center, radius } => linalg::dist(v, center) <= radius + tol,
            SetPrimitive::L1Ball { radius } => linalg::norm1(v) <= radius + tol,
            SetPrimitive::Box { lo, hi } => {
                v.iter().zip(lo).zip(hi).all(|((vi, l), h)| *vi >= l - tol && *vi <= h + tol)
            }
        }
    }
}

fn check_len(found: usize, expected: usize) -> Result<()> {
    if found != expected {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

/// Projection onto `{v : ||v||_1 <= radius}` by sorting magnitudes.
///
/// Finds the soft threshold `theta` with `sum_i max(|v_i| - theta, 0) = radius`
/// (Duchi et al., 2008) and shrinks every coordinate towards zero by it.
pub fn project_l1_ball(v: &mut [f64], radius: f64) {
    if linalg::norm1(v) <= radius {
        return;
    }
    if radius <= 0.0 {
        v.iter_mut().for_each(|e| *e = 0.0);
        return;
    }
    let mut mags: Vec<f64> = v.iter().map(|e| e.abs()).collect();
    mags.sort_unstable_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (j, &m) in mags.iter().enumerate() {
        cumsum += m;
        let t = (cumsum - radius) / (j + 1) as f64;
        if m > t {
            theta = t;
        } else {
            break;
        }
    }
    for e in v.iter_mut() {
        let m = (e.abs() - theta).max(0.0);
        *e = if *e < 0.0 { -m } else { m };
    }
    // Rounding in theta can leave the result a few ulps outside; pull it in so
    // that projecting again is the identity.
    let mut s = linalg::norm1(v);
    let mut slack = f64::EPSILON;
    while s > radius {
        linalg::scale(radius / s * (1.0 - slack), v);
        s = linalg::norm1(v);
        slack *= 2.0;
    }
}

/// `Z = X x Y` with independent projections per block.
#[derive(Clone, Debug, PartialEq)]
pub struct ConstraintSet {
    pub x_set: SetPrimitive,
    pub y_set: SetPrimitive,
}

impl ConstraintSet {
    pub fn new(x_set: SetPrimitive, y_set: SetPrimitive) -> Self {
        Self { x_set, y_set }
    }

    pub fn unconstrained() -> Self {
        Self::new(SetPrimitive::Unconstrained, SetPrimitive::Unconstrained)
    }

    pub fn validate(&self, dx: usize, dy: usize) -> Result<()> {
        self.x_set.validate(dx)?;
        self.y_set.validate(dy)
    }

    pub fn is_unconstrained(&self) -> bool {
        self.x_set.is_unconstrained() && self.y_set.is_unconstrained()
    }

    /// Diameter of the product set, `None` if either block is unbounded.
    pub fn diameter(&self) -> Option<f64> {
        let dx = self.x_set.diameter()?;
        let dy = self.y_set.diameter()?;
        Some(libm::hypot(dx, dy))
    }

    pub fn project_in_place(&self, z: &mut Point) {
        self.x_set.project_in_place(z.x_mut());
        self.y_set.project_in_place(z.y_mut());
    }

    pub fn project(&self, z: &Point) -> Point {
        let mut out = z.clone();
        self.project_in_place(&mut out);
        out
    }

    pub fn contains(&self, z: &Point, tol: f64) -> bool {
        self.x_set.contains(z.x(), tol) && self.y_set.contains(z.y(), tol)
    }
}

/// Checked projection: `v` must have the problem's block sizes.
pub fn project(set: &ConstraintSet, v: &Point, dx: usize, dy: usize) -> Result<Point> {
    if v.dx() != dx {
        return Err(Error::DimensionMismatch { expected: dx, found: v.dx() });
    }
    if v.dy() != dy {
        return Err(Error::DimensionMismatch { expected: dy, found: v.dy() });
    }
    Ok(set.project(v))
}
