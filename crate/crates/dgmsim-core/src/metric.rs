//! Points of the vertex/state spaces and the metrics on them.
//!
//! All spaces are subsets of a finite-dimensional Euclidean space carrying
//! the metric induced by the l1-norm. Circle-valued coordinates wrap: on a
//! coordinate with period `P` the distance is `min(|a-b|, P - |a-b|)`.

use alloc::boxed::Box;
use alloc::vec::Vec;

use crate::float;

/// A point of a metric space, stored as its ambient coordinates.
///
/// Invariant: every coordinate is finite.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricPoint {
    coords: Vec<f64>,
}

impl MetricPoint {
    /// Panics if any coordinate is non-finite; points come from internal
    /// constructions where that would be a bug, not an input error.
    pub fn new(coords: Vec<f64>) -> Self {
        assert!(
            coords.iter().all(|c| c.is_finite()),
            "MetricPoint coordinates must be finite"
        );
        Self { coords }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }
}

impl From<f64> for MetricPoint {
    fn from(x: f64) -> Self {
        Self::new(alloc::vec![x])
    }
}

/// Distance function on ambient coordinates.
#[derive(Clone, Debug)]
pub enum Metric {
    /// Plain l1 metric on R^d.
    L1,
    /// l1 metric where each coordinate wraps with its own period. A period of
    /// `f64::INFINITY` leaves that coordinate unwrapped.
    Torus { periods: Vec<f64> },
    /// l1 product metric: the first `split` coordinates are measured with
    /// `left`, the rest with `right`.
    Product {
        left: Box<Metric>,
        right: Box<Metric>,
        split: usize,
    },
}

impl Metric {
    /// Circle of circumference `period` in one coordinate.
    pub fn circle(period: f64) -> Self {
        Metric::Torus {
            periods: alloc::vec![period],
        }
    }

    pub fn product(left: Metric, right: Metric, split: usize) -> Self {
        Metric::Product {
            left: Box::new(left),
            right: Box::new(right),
            split,
        }
    }

    pub fn dist(&self, a: &[f64], b: &[f64]) -> f64 {
        debug_assert_eq!(a.len(), b.len());
        match self {
            Metric::L1 => a
                .iter()
                .zip(b)
                .map(|(x, y)| float::abs(x - y))
                .sum(),
            Metric::Torus { periods } => {
                debug_assert_eq!(periods.len(), a.len());
                a.iter()
                    .zip(b)
                    .zip(periods)
                    .map(|((x, y), p)| wrap_dist(*x, *y, *p))
                    .sum()
            }
            Metric::Product { left, right, split } => {
                left.dist(&a[..*split], &b[..*split]) + right.dist(&a[*split..], &b[*split..])
            }
        }
    }

    /// Periods per coordinate (infinite when the coordinate does not wrap).
    pub(crate) fn periods(&self, dim: usize) -> Vec<f64> {
        match self {
            Metric::L1 => alloc::vec![f64::INFINITY; dim],
            Metric::Torus { periods } => periods.clone(),
            Metric::Product { left, right, split } => {
                let mut p = left.periods(*split);
                p.extend(right.periods(dim - *split));
                p
            }
        }
    }
}

fn wrap_dist(x: f64, y: f64, period: f64) -> f64 {
    let d = float::abs(x - y);
    if period.is_finite() {
        let d = d % period;
        d.min(period - d)
    } else {
        d
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn l1_distance() {
        let m = Metric::L1;
        assert_eq!(m.dist(&[0.0, 0.0], &[1.0, 2.0]), 3.0);
    }

    #[test]
    fn circle_distance_wraps() {
        let m = Metric::circle(1.0);
        assert!((m.dist(&[0.1], &[0.9]) - 0.2).abs() < 1e-15);
        assert!((m.dist(&[0.2], &[0.4]) - 0.2).abs() < 1e-15);
    }

    #[test]
    fn product_metric_sums_parts() {
        let m = Metric::product(Metric::circle(1.0), Metric::L1, 1);
        let d = m.dist(&[0.95, 1.0], &[0.05, 3.0]);
        assert!((d - (0.1 + 2.0)).abs() < 1e-15);
    }
}
