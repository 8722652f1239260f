//! Closed-form measure descriptors and their deterministic empirical
//! approximations.
//!
//! The `n`-approximation of a descriptor with total mass `w` is the measure
//! `(w/n) sum_j delta(z_j)` whose atoms sit at the quantiles `j/(n+1)` of the
//! normalized target (atoms of circles and full arcs are equally spaced,
//! which is their exact quantile set). A midpoint grid `(2j-1)/(2n)` is
//! available behind [`QuantileRule`].

use alloc::vec;
use alloc::vec::Vec;

use crate::float;
use crate::measure::{DiscreteMeasure, MeasureError};

/// Placement grid for the empirical atoms.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum QuantileRule {
    /// Quantiles at `j/(n+1)`, `j = 1..n`.
    #[default]
    Grid,
    /// Quantiles at `(2j-1)/(2n)`.
    Midpoint,
}

impl QuantileRule {
    fn levels(self, n: usize) -> impl Iterator<Item = f64> {
        let n_f = n as f64;
        (1..=n).map(move |j| match self {
            QuantileRule::Grid => j as f64 / (n_f + 1.0),
            QuantileRule::Midpoint => (2.0 * j as f64 - 1.0) / (2.0 * n_f),
        })
    }
}

/// A finite positive measure in closed form.
#[derive(Clone, Debug)]
pub enum MeasureDescriptor {
    /// `mass *` uniform probability on `[lo, hi]`.
    UniformInterval { lo: f64, hi: f64, mass: f64 },
    /// `mass *` uniform probability on an arc of the unit circle; a full arc
    /// (`len == 1`) is the whole circle.
    UniformArc { start: f64, len: f64, mass: f64 },
    /// `mass *` uniform probability on the straight segment from `a` to `b`.
    UniformSegment { a: Vec<f64>, b: Vec<f64>, mass: f64 },
    /// `mass *` uniform probability on the great circle of the unit sphere
    /// perpendicular to `axis`.
    UniformGreatCircle { axis: [f64; 3], mass: f64 },
    /// `mass * delta(point)`.
    Dirac { point: Vec<f64>, mass: f64 },
    /// An arbitrary finite atomic measure.
    Atomic(DiscreteMeasure),
    /// The Cantor measure pushed onto the arc `[start, start+len)` of the
    /// unit circle, scaled to `mass`.
    CantorArc { start: f64, len: f64, mass: f64 },
    /// The Cantor measure on `[lo, hi]`, scaled to `mass`.
    CantorInterval { lo: f64, hi: f64, mass: f64 },
}

impl MeasureDescriptor {
    pub fn zero(dim: usize) -> Self {
        MeasureDescriptor::Atomic(DiscreteMeasure::zero(dim))
    }

    pub fn total_mass(&self) -> f64 {
        match self {
            MeasureDescriptor::UniformInterval { mass, .. }
            | MeasureDescriptor::UniformArc { mass, .. }
            | MeasureDescriptor::UniformSegment { mass, .. }
            | MeasureDescriptor::UniformGreatCircle { mass, .. }
            | MeasureDescriptor::Dirac { mass, .. }
            | MeasureDescriptor::CantorArc { mass, .. }
            | MeasureDescriptor::CantorInterval { mass, .. } => *mass,
            MeasureDescriptor::Atomic(m) => m.total_mass(),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            MeasureDescriptor::UniformInterval { .. }
            | MeasureDescriptor::UniformArc { .. }
            | MeasureDescriptor::CantorArc { .. }
            | MeasureDescriptor::CantorInterval { .. } => 1,
            MeasureDescriptor::UniformSegment { a, .. } => a.len(),
            MeasureDescriptor::UniformGreatCircle { .. } => 3,
            MeasureDescriptor::Dirac { point, .. } => point.len(),
            MeasureDescriptor::Atomic(m) => m.dim(),
        }
    }
}

/// Deterministic empirical `n`-approximation of a descriptor.
pub fn empirical_approximation(
    target: &MeasureDescriptor,
    n: usize,
    rule: QuantileRule,
) -> Result<DiscreteMeasure, MeasureError> {
    if n == 0 {
        return Err(MeasureError::Invalid(alloc::format!(
            "empirical approximation needs n >= 1"
        )));
    }
    let mass = target.total_mass();
    let w = mass / n as f64;
    let mut out = DiscreteMeasure::zero(target.dim());
    if mass == 0.0 {
        return Ok(out);
    }
    match target {
        MeasureDescriptor::UniformInterval { lo, hi, .. } => {
            for p in rule.levels(n) {
                out.push(&[lo + p * (hi - lo)], w)?;
            }
        }
        MeasureDescriptor::UniformArc { start, len, .. } => {
            if *len >= 1.0 - 1e-12 {
                // Whole circle: equal spacing is the exact quantile set.
                for j in 0..n {
                    out.push(&[float::fract_unit(start + j as f64 / n as f64)], w)?;
                }
            } else {
                for p in rule.levels(n) {
                    out.push(&[float::fract_unit(start + p * len)], w)?;
                }
            }
        }
        MeasureDescriptor::UniformSegment { a, b, .. } => {
            let mut z = vec![0.0; a.len()];
            for p in rule.levels(n) {
                for (i, zi) in z.iter_mut().enumerate() {
                    *zi = a[i] + p * (b[i] - a[i]);
                }
                out.push(&z, w)?;
            }
        }
        MeasureDescriptor::UniformGreatCircle { axis, .. } => {
            let (u, v) = orthonormal_frame(*axis);
            let two_pi = 2.0 * core::f64::consts::PI;
            for j in 0..n {
                let t = two_pi * j as f64 / n as f64;
                let (c, s) = (float::cos(t), float::sin(t));
                out.push(
                    &[
                        c * u[0] + s * v[0],
                        c * u[1] + s * v[1],
                        c * u[2] + s * v[2],
                    ],
                    w,
                )?;
            }
        }
        MeasureDescriptor::Dirac { point, .. } => {
            for _ in 0..n {
                out.push(point, w)?;
            }
        }
        MeasureDescriptor::Atomic(m) => {
            // Quantiles of a sorted atomic measure: smallest atom whose
            // cumulative weight reaches the level.
            let mut order: Vec<usize> = (0..m.len()).collect();
            order.sort_by(|&a, &b| {
                m.atom(a)
                    .iter()
                    .zip(m.atom(b))
                    .map(|(x, y)| x.total_cmp(y))
                    .find(|o| o.is_ne())
                    .unwrap_or(core::cmp::Ordering::Equal)
            });
            let total = m.total_mass();
            let mut cum = Vec::with_capacity(order.len());
            let mut acc = 0.0;
            for &i in &order {
                acc += m.weight(i);
                cum.push(acc);
            }
            for p in rule.levels(n) {
                let target_mass = p * total;
                let idx = cum
                    .iter()
                    .position(|&c| c >= target_mass - 1e-15 * total.max(1.0))
                    .unwrap_or(order.len() - 1);
                out.push(m.atom(order[idx]), w)?;
            }
        }
        MeasureDescriptor::CantorArc { start, len, .. } => {
            for p in rule.levels(n) {
                out.push(&[float::fract_unit(start + len * cantor_quantile(p))], w)?;
            }
        }
        MeasureDescriptor::CantorInterval { lo, hi, .. } => {
            for p in rule.levels(n) {
                out.push(&[lo + (hi - lo) * cantor_quantile(p)], w)?;
            }
        }
    }
    Ok(out)
}

/// Quantile function of the uniform measure on the middle-thirds Cantor set:
/// binary digits of `p` become ternary digits `0 -> 0, 1 -> 2`.
pub fn cantor_quantile(p: f64) -> f64 {
    debug_assert!((0.0..=1.0).contains(&p));
    let mut rest = p;
    let mut value = 0.0;
    let mut scale = 1.0 / 3.0;
    for _ in 0..52 {
        rest *= 2.0;
        if rest >= 1.0 {
            value += 2.0 * scale;
            rest -= 1.0;
        }
        scale /= 3.0;
    }
    value
}

/// Deterministic right-handed frame spanning the plane perpendicular to
/// `axis` (which need not be normalized).
fn orthonormal_frame(axis: [f64; 3]) -> ([f64; 3], [f64; 3]) {
    let norm = float::sqrt(axis.iter().map(|a| a * a).sum::<f64>());
    let a = [axis[0] / norm, axis[1] / norm, axis[2] / norm];
    // Cross with the least-aligned standard basis vector.
    let k = (0..3)
        .min_by(|&i, &j| float::abs(a[i]).total_cmp(&float::abs(a[j])))
        .unwrap();
    let mut e = [0.0; 3];
    e[k] = 1.0;
    let u = cross(a, e);
    let un = float::sqrt(u.iter().map(|x| x * x).sum::<f64>());
    let u = [u[0] / un, u[1] / un, u[2] / un];
    let v = cross(a, u);
    (u, v)
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}
