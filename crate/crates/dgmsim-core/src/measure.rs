//! Finite positive discrete measures: weighted atoms in a metric space.

use alloc::string::String;
use alloc::vec::Vec;

use crate::metric::{Metric, MetricPoint};
use crate::vertex::Partition;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum MeasureError {
    #[error("atom/weight count mismatch: {atoms} atoms vs {weights} weights")]
    LengthMismatch { atoms: usize, weights: usize },
    #[error("negative weight {weight} at atom {index}")]
    NegativeWeight { index: usize, weight: f64 },
    #[error("non-finite value in measure data")]
    NonFinite,
    #[error("atom dimension {got} does not match measure dimension {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("{0}")]
    Invalid(String),
}

/// A finite positive measure `sum_k w_k * delta(z_k)` with atoms `z_k` in R^d.
///
/// Atom coordinates are stored flat (`len * dim` values) so large ensembles
/// stay cache-friendly. Weights are nonnegative and finite; the empty measure
/// is the zero measure.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteMeasure {
    dim: usize,
    weights: Vec<f64>,
    coords: Vec<f64>,
}

impl DiscreteMeasure {
    /// The zero measure on R^dim.
    pub fn zero(dim: usize) -> Self {
        Self {
            dim,
            weights: Vec::new(),
            coords: Vec::new(),
        }
    }

    pub fn dirac(point: &[f64], weight: f64) -> Result<Self, MeasureError> {
        let mut m = Self::zero(point.len());
        m.push(point, weight)?;
        Ok(m)
    }

    pub fn from_flat(dim: usize, weights: Vec<f64>, coords: Vec<f64>) -> Result<Self, MeasureError> {
        if coords.len() != weights.len() * dim {
            return Err(MeasureError::LengthMismatch {
                atoms: coords.len() / dim.max(1),
                weights: weights.len(),
            });
        }
        for (i, &w) in weights.iter().enumerate() {
            if !w.is_finite() {
                return Err(MeasureError::NonFinite);
            }
            if w < 0.0 {
                return Err(MeasureError::NegativeWeight { index: i, weight: w });
            }
        }
        if !coords.iter().all(|c| c.is_finite()) {
            return Err(MeasureError::NonFinite);
        }
        Ok(Self { dim, weights, coords })
    }

    pub fn from_atoms(atoms: &[(MetricPoint, f64)]) -> Result<Self, MeasureError> {
        let dim = atoms.first().map(|(p, _)| p.dim()).unwrap_or(1);
        let mut m = Self::zero(dim);
        for (p, w) in atoms {
            m.push(p.coords(), *w)?;
        }
        Ok(m)
    }

    pub fn push(&mut self, point: &[f64], weight: f64) -> Result<(), MeasureError> {
        if point.len() != self.dim {
            return Err(MeasureError::DimensionMismatch {
                expected: self.dim,
                got: point.len(),
            });
        }
        if !weight.is_finite() || !point.iter().all(|c| c.is_finite()) {
            return Err(MeasureError::NonFinite);
        }
        if weight < 0.0 {
            return Err(MeasureError::NegativeWeight {
                index: self.weights.len(),
                weight,
            });
        }
        self.weights.push(weight);
        self.coords.extend_from_slice(point);
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn atom(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn atoms(&self) -> impl Iterator<Item = &[f64]> {
        self.coords.chunks_exact(self.dim.max(1))
    }

    /// Total mass `sum_k w_k` (the total variation norm of a positive measure).
    pub fn total_mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Scale all weights by `c >= 0`.
    pub fn scaled(&self, c: f64) -> Result<Self, MeasureError> {
        if !(c >= 0.0) || !c.is_finite() {
            return Err(MeasureError::Invalid(alloc::format!(
                "scale factor must be finite and nonnegative, got {c}"
            )));
        }
        let mut out = self.clone();
        for w in &mut out.weights {
            *w *= c;
        }
        Ok(out)
    }

    /// Normalized copy with total mass 1. Returns `None` for (numerically)
    /// zero measures.
    pub fn normalized(&self) -> Option<Self> {
        let m = self.total_mass();
        if m <= 0.0 {
            return None;
        }
        Some(self.scaled(1.0 / m).expect("1/m is finite positive"))
    }

    /// Merge atoms closer than `tol` in the given metric, summing weights.
    /// Keeps the LP formulations of the measure distances nondegenerate.
    pub fn merged(&self, metric: &Metric, tol: f64) -> Self {
        let mut out = Self::zero(self.dim);
        'next: for i in 0..self.len() {
            let z = self.atom(i);
            for j in 0..out.len() {
                if metric.dist(out.atom(j), z) <= tol {
                    out.weights[j] += self.weights[i];
                    continue 'next;
                }
            }
            out.weights.push(self.weights[i]);
            out.coords.extend_from_slice(z);
        }
        out
    }
}

/// A piecewise-constant measure-valued function on a partitioned vertex
/// space: one fiber measure per cell.
///
/// Invariant: `fibers.len() == partition.len()`.
#[derive(Clone, Debug)]
pub struct FiberFunction {
    partition: Partition,
    fibers: Vec<DiscreteMeasure>,
    /// Metric of the space the fibers live on.
    fiber_metric: Metric,
}

impl FiberFunction {
    pub fn new(
        partition: Partition,
        fibers: Vec<DiscreteMeasure>,
        fiber_metric: Metric,
    ) -> Result<Self, MeasureError> {
        if fibers.len() != partition.len() {
            return Err(MeasureError::Invalid(alloc::format!(
                "expected one fiber per cell: {} fibers vs {} cells",
                fibers.len(),
                partition.len()
            )));
        }
        Ok(Self {
            partition,
            fibers,
            fiber_metric,
        })
    }

    pub fn partition(&self) -> &Partition {
        &self.partition
    }

    pub fn fibers(&self) -> &[DiscreteMeasure] {
        &self.fibers
    }

    pub fn fiber(&self, cell: usize) -> &DiscreteMeasure {
        &self.fibers[cell]
    }

    pub fn fiber_metric(&self) -> &Metric {
        &self.fiber_metric
    }

    pub fn len(&self) -> usize {
        self.fibers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fibers.is_empty()
    }
}
