//! Two-dimensional delay (Takens) embedding.

use alloc::vec::Vec;

use crate::{Error, Result, TimeSeries};

/// A planar point `(x_i, x_{i+τ})`.
pub type Point = [f64; 2];

/// Ordered, non-empty set of finite 2-D points.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    points: Vec<Point>,
}

impl PointCloud {
    pub fn new(points: Vec<Point>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::invalid("point cloud must be non-empty"));
        }
        if points.iter().any(|p| !(p[0].is_finite() && p[1].is_finite())) {
            return Err(Error::invalid("point cloud coordinates must be finite"));
        }
        Ok(PointCloud { points })
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Axis-aligned bounding box as `([min_x, min_y], [max_x, max_y])`.
    pub fn bounds(&self) -> (Point, Point) {
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        for p in &self.points {
            for d in 0..2 {
                lo[d] = lo[d].min(p[d]);
                hi[d] = hi[d].max(p[d]);
            }
        }
        (lo, hi)
    }
}

/// Delay embedding with lag `tau` and delay bound `n_max`.
///
/// Produces `(x_i, x_{i+tau})` for `i = 0 .. t - n_max`, so the number of
/// points depends only on `n_max`: clouds built for different lags under one
/// bound have equal cardinality.
pub fn takens_embed(series: &TimeSeries, tau: usize, n_max: usize) -> Result<PointCloud> {
    if tau == 0 || tau > n_max {
        return Err(Error::param(alloc::format!(
            "delay must satisfy 1 <= tau <= n_max (tau = {tau}, n_max = {n_max})"
        )));
    }
    let x = series.samples();
    if x.len() <= n_max {
        return Err(Error::short(alloc::format!(
            "series of length {} is too short for delay bound {n_max}",
            x.len()
        )));
    }
    let count = x.len() - n_max;
    let points = x[..count]
        .iter()
        .zip(&x[tau..tau + count])
        .map(|(&a, &b)| [a, b])
        .collect();
    Ok(PointCloud { points })
}
