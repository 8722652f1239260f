//! Compact vertex spaces, their reference probability measures, and the
//! vanishing-diameter partition scheme.
//!
//! Box-like spaces are partitioned by equipartition into `floor(m^(1/r))^r`
//! congruent cells, then the largest cells are split until exactly `m` cells
//! remain, which keeps the diameter bound `2 r R / floor(m^(1/r))`. The
//! remaining spaces have bespoke schemes: arcs on the circle, equal-area
//! band/sector cells on the sphere, congruent sub-triangles for the triangle,
//! and singletons plus one tail cell for the discrete space.

use alloc::vec;
use alloc::vec::Vec;

use crate::float;
use crate::metric::{Metric, MetricPoint};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum VertexError {
    #[error("a partition needs at least one cell (m = 0)")]
    ZeroCells,
}

/// The built-in compact vertex spaces with their reference measures.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VertexSpace {
    /// `[0, 1]` with Lebesgue measure.
    Interval,
    /// The circle `T = [0, 1)` with Haar (arc length) measure.
    Circle,
    /// The unit sphere in `R^3` with normalized surface measure.
    Sphere,
    /// `[0, 1]^2` with Lebesgue measure.
    Square,
    /// The triangle `{ z in R^2_+, |z|_1 <= 1 }` whose reference measure is
    /// the uniform measure on the diagonal segment from the origin to
    /// `(1/2, 1/2)` (singular w.r.t. area).
    Triangle,
    /// `X = {1/k} ∪ {0}` with the atomic measure `sum_{i>=2} 2^(1-i) delta_{1/i}`.
    Discrete,
}

impl VertexSpace {
    pub fn ambient_dim(self) -> usize {
        match self {
            VertexSpace::Interval | VertexSpace::Circle | VertexSpace::Discrete => 1,
            VertexSpace::Square | VertexSpace::Triangle => 2,
            VertexSpace::Sphere => 3,
        }
    }

    pub fn metric(self) -> Metric {
        match self {
            VertexSpace::Circle => Metric::circle(1.0),
            _ => Metric::L1,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            VertexSpace::Interval => "interval",
            VertexSpace::Circle => "circle",
            VertexSpace::Sphere => "sphere",
            VertexSpace::Square => "square",
            VertexSpace::Triangle => "triangle",
            VertexSpace::Discrete => "discrete",
        }
    }
}

/// One partition cell.
#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    /// `[lo, hi)`, or `[lo, hi]` when `closed` (domain boundary).
    Interval { lo: f64, hi: f64, closed: bool },
    /// Arc `[start, start + len)` on the unit circle.
    Arc { start: f64, len: f64 },
    /// Axis-aligned box; the upper side is closed where `closed` is set.
    Box2 {
        lo: [f64; 2],
        hi: [f64; 2],
        closed: [bool; 2],
    },
    /// Triangle with the given vertices.
    Tri { v: [[f64; 2]; 3] },
    /// Sphere patch: `z` in `[zlo, zhi)`, azimuth in `[phi_lo, phi_hi)`
    /// (closed at the top/last patch).
    Patch {
        zlo: f64,
        zhi: f64,
        phi_lo: f64,
        phi_hi: f64,
        closed: bool,
    },
    /// Single point of the discrete space.
    Singleton { point: f64 },
    /// Tail `{ y in X : y <= hi }` of the discrete space.
    Tail { hi: f64 },
}

impl Cell {
    pub fn contains(&self, x: &[f64]) -> bool {
        let tol = 1e-12;
        match self {
            Cell::Interval { lo, hi, closed } => {
                let v = x[0];
                v >= lo - tol && (v < *hi || (*closed && v <= hi + tol))
            }
            Cell::Arc { start, len } => {
                let rel = float::fract_unit(x[0] - start);
                rel < *len || rel > 1.0 - tol
            }
            Cell::Box2 { lo, hi, closed } => (0..2).all(|d| {
                x[d] >= lo[d] - tol && (x[d] < hi[d] || (closed[d] && x[d] <= hi[d] + tol))
            }),
            Cell::Tri { v } => {
                // Barycentric sign test with tolerance.
                let sign = |a: [f64; 2], b: [f64; 2], p: &[f64]| {
                    (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0])
                };
                let area = sign(v[0], v[1], &v[2]);
                let t = 1e-10 * float::abs(area).max(1e-30);
                let s0 = sign(v[0], v[1], x) * area.signum();
                let s1 = sign(v[1], v[2], x) * area.signum();
                let s2 = sign(v[2], v[0], x) * area.signum();
                s0 >= -t && s1 >= -t && s2 >= -t
            }
            Cell::Patch {
                zlo,
                zhi,
                phi_lo,
                phi_hi,
                closed,
            } => {
                let z = x[2];
                let zin = z >= zlo - tol && (z < *zhi || (*closed && z <= zhi + tol));
                if !zin {
                    return false;
                }
                let phi = {
                    let p = float::atan2(x[1], x[0]);
                    if p < 0.0 {
                        p + 2.0 * core::f64::consts::PI
                    } else {
                        p
                    }
                };
                phi >= phi_lo - tol && (phi < *phi_hi || (*closed && phi <= phi_hi + tol))
            }
            Cell::Singleton { point } => float::abs(x[0] - point) <= tol,
            Cell::Tail { hi } => x[0] <= hi + tol,
        }
    }

    /// Diameter in the space metric (wrapped for arcs).
    pub fn diameter(&self) -> f64 {
        match self {
            Cell::Interval { lo, hi, .. } => hi - lo,
            Cell::Arc { len, .. } => len.min(1.0 - len),
            Cell::Box2 { lo, hi, .. } => (hi[0] - lo[0]) + (hi[1] - lo[1]),
            Cell::Tri { v } => {
                let d = |a: [f64; 2], b: [f64; 2]| {
                    float::abs(a[0] - b[0]) + float::abs(a[1] - b[1])
                };
                d(v[0], v[1]).max(d(v[1], v[2])).max(d(v[0], v[2]))
            }
            Cell::Patch {
                zlo,
                zhi,
                phi_lo,
                phi_hi,
                ..
            } => {
                // Coarse l1 bound via the parameter box corners.
                let mut worst = 0.0f64;
                let corners = [
                    (*zlo, *phi_lo),
                    (*zlo, *phi_hi),
                    (*zhi, *phi_lo),
                    (*zhi, *phi_hi),
                ];
                for (za, pa) in corners {
                    for (zb, pb) in corners {
                        let ra = float::sqrt((1.0 - za * za).max(0.0));
                        let rb = float::sqrt((1.0 - zb * zb).max(0.0));
                        let d = float::abs(ra * float::cos(pa) - rb * float::cos(pb))
                            + float::abs(ra * float::sin(pa) - rb * float::sin(pb))
                            + float::abs(za - zb);
                        worst = worst.max(d);
                    }
                }
                worst
            }
            Cell::Singleton { .. } => 0.0,
            Cell::Tail { hi } => *hi,
        }
    }
}

/// A partition of a vertex space: disjoint cells covering `X`, one
/// representative point inside each cell, and the exact reference-measure
/// mass of each cell.
#[derive(Clone, Debug)]
pub struct Partition {
    space: VertexSpace,
    cells: Vec<Cell>,
    reps: Vec<MetricPoint>,
    masses: Vec<f64>,
}

impl Partition {
    pub fn space(&self) -> VertexSpace {
        self.space
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn cell(&self, i: usize) -> &Cell {
        &self.cells[i]
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn representative(&self, i: usize) -> &MetricPoint {
        &self.reps[i]
    }

    pub fn mass(&self, i: usize) -> f64 {
        self.masses[i]
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn max_diameter(&self) -> f64 {
        self.cells
            .iter()
            .map(Cell::diameter)
            .fold(0.0f64, f64::max)
    }

    /// Index of the cell containing `x`, if any.
    pub fn locate(&self, x: &[f64]) -> Option<usize> {
        self.cells.iter().position(|c| c.contains(x))
    }

    pub fn approx_eq(&self, other: &Partition, tol: f64) -> bool {
        if self.space != other.space || self.len() != other.len() {
            return false;
        }
        for (a, b) in self.reps.iter().zip(&other.reps) {
            let d = self
                .space
                .metric()
                .dist(a.coords(), b.coords());
            if d > tol {
                return false;
            }
        }
        self.masses
            .iter()
            .zip(&other.masses)
            .all(|(a, b)| float::abs(a - b) <= tol)
    }
}

/// Exact reference-measure mass of a cell.
pub fn cell_mass(space: VertexSpace, cell: &Cell) -> f64 {
    match (space, cell) {
        (VertexSpace::Interval, Cell::Interval { lo, hi, .. }) => hi - lo,
        (VertexSpace::Circle, Cell::Arc { len, .. }) => *len,
        (VertexSpace::Square, Cell::Box2 { lo, hi, .. }) => {
            (hi[0] - lo[0]) * (hi[1] - lo[1])
        }
        (VertexSpace::Triangle, Cell::Tri { .. }) => {
            let (slo, shi) = diagonal_range(cell);
            2.0 * (shi - slo).max(0.0)
        }
        (VertexSpace::Sphere, Cell::Patch {
            zlo,
            zhi,
            phi_lo,
            phi_hi,
            ..
        }) => (zhi - zlo) / 2.0 * (phi_hi - phi_lo) / (2.0 * core::f64::consts::PI),
        (VertexSpace::Discrete, Cell::Singleton { point }) => {
            let i = (1.0 / point + 0.5) as i32;
            if i >= 2 {
                float::powi(2.0, -i + 1)
            } else {
                0.0
            }
        }
        (VertexSpace::Discrete, Cell::Tail { hi }) => {
            let m = (1.0 / hi + 0.5) as i32;
            float::powi(2.0, -m + 2).min(1.0)
        }
        _ => panic!("cell kind does not belong to this space"),
    }
}

/// Parameter range `[s_lo, s_hi]` of the diagonal `{(s, s)}` inside a
/// triangle cell (empty when it misses the segment from (0,0) to (1/2,1/2)).
///
/// A segment running along a shared cell edge belongs to the cell below the
/// diagonal, so no mass is counted twice.
fn diagonal_range(cell: &Cell) -> (f64, f64) {
    let (lo, hi) = diagonal_range_raw(cell);
    if hi <= lo {
        return (0.0, 0.0);
    }
    let mid = 0.5 * (lo + hi);
    let delta = (hi - lo) * 1e-6 + 1e-15;
    if cell.contains(&[mid + delta, mid - delta]) {
        (lo, hi)
    } else {
        (0.0, 0.0)
    }
}

fn diagonal_range_raw(cell: &Cell) -> (f64, f64) {
    let Cell::Tri { v } = cell else {
        panic!("diagonal_range expects a triangle cell");
    };
    // Clip s in [0, 1/2] against the three half-planes of the triangle,
    // each linear in s along the diagonal (s, s).
    let mut lo = 0.0f64;
    let mut hi = 0.5f64;
    let area = (v[1][0] - v[0][0]) * (v[2][1] - v[0][1])
        - (v[1][1] - v[0][1]) * (v[2][0] - v[0][0]);
    let sgn = area.signum();
    for e in 0..3 {
        let a = v[e];
        let b = v[(e + 1) % 3];
        // inside: sgn * ((b-a) x (p-a)) >= 0 with p = (s, s), linear in s.
        let k = sgn * ((b[0] - a[0]) - (b[1] - a[1]));
        let c0 = sgn * (-(b[0] - a[0]) * a[1] + (b[1] - a[1]) * a[0]);
        // constraint: k*s + c0 >= 0
        if float::abs(k) < 1e-15 {
            if c0 < -1e-15 {
                return (0.0, 0.0);
            }
        } else if k > 0.0 {
            lo = lo.max(-c0 / k);
        } else {
            hi = hi.min(-c0 / k);
        }
    }
    if hi <= lo {
        (0.0, 0.0)
    } else {
        (lo, hi)
    }
}

/// Representative point: the reference-measure barycenter projected into the
/// cell when the cell has positive mass, the geometric center otherwise.
/// Deterministic by construction.
pub fn representative(space: VertexSpace, cell: &Cell) -> MetricPoint {
    match (space, cell) {
        (VertexSpace::Interval, Cell::Interval { lo, hi, .. }) => {
            MetricPoint::from(0.5 * (lo + hi))
        }
        (VertexSpace::Circle, Cell::Arc { start, len }) => {
            MetricPoint::from(float::fract_unit(start + 0.5 * len))
        }
        (VertexSpace::Square, Cell::Box2 { lo, hi, .. }) => MetricPoint::new(vec![
            0.5 * (lo[0] + hi[0]),
            0.5 * (lo[1] + hi[1]),
        ]),
        (VertexSpace::Triangle, Cell::Tri { v }) => {
            let (slo, shi) = diagonal_range(cell);
            if shi > slo {
                let s = 0.5 * (slo + shi);
                MetricPoint::new(vec![s, s])
            } else {
                MetricPoint::new(vec![
                    (v[0][0] + v[1][0] + v[2][0]) / 3.0,
                    (v[0][1] + v[1][1] + v[2][1]) / 3.0,
                ])
            }
        }
        (VertexSpace::Sphere, Cell::Patch {
            zlo,
            zhi,
            phi_lo,
            phi_hi,
            ..
        }) => {
            let z = 0.5 * (zlo + zhi);
            let phi = 0.5 * (phi_lo + phi_hi);
            let r = float::sqrt((1.0 - z * z).max(0.0));
            MetricPoint::new(vec![r * float::cos(phi), r * float::sin(phi), z])
        }
        (VertexSpace::Discrete, Cell::Singleton { point }) => MetricPoint::from(*point),
        // The tail's barycenter is not a point of X; the paper picks 1/m,
        // which is also the cell's maximum.
        (VertexSpace::Discrete, Cell::Tail { hi }) => MetricPoint::from(*hi),
        _ => panic!("cell kind does not belong to this space"),
    }
}

/// Partition the space into exactly `m` cells.
pub fn make_partition(space: VertexSpace, m: usize) -> Result<Partition, VertexError> {
    if m == 0 {
        return Err(VertexError::ZeroCells);
    }
    let cells = match space {
        VertexSpace::Interval => (0..m)
            .map(|i| Cell::Interval {
                lo: i as f64 / m as f64,
                hi: (i + 1) as f64 / m as f64,
                closed: i + 1 == m,
            })
            .collect(),
        VertexSpace::Circle => (0..m)
            .map(|i| Cell::Arc {
                start: i as f64 / m as f64,
                len: 1.0 / m as f64,
            })
            .collect(),
        VertexSpace::Square => square_cells(m),
        VertexSpace::Triangle => triangle_cells(m),
        VertexSpace::Sphere => sphere_cells(m),
        VertexSpace::Discrete => {
            let mut cells: Vec<Cell> = (1..m)
                .map(|i| Cell::Singleton {
                    point: 1.0 / i as f64,
                })
                .collect();
            cells.push(Cell::Tail { hi: 1.0 / m as f64 });
            cells
        }
    };
    let reps = cells.iter().map(|c| representative(space, c)).collect();
    let masses = cells.iter().map(|c| cell_mass(space, c)).collect();
    Ok(Partition {
        space,
        cells,
        reps,
        masses,
    })
}

fn square_cells(m: usize) -> Vec<Cell> {
    let k = int_sqrt(m);
    let mut cells: Vec<Cell> = Vec::with_capacity(m);
    for i in 0..k {
        for j in 0..k {
            cells.push(Cell::Box2 {
                lo: [i as f64 / k as f64, j as f64 / k as f64],
                hi: [(i + 1) as f64 / k as f64, (j + 1) as f64 / k as f64],
                closed: [i + 1 == k, j + 1 == k],
            });
        }
    }
    while cells.len() < m {
        let idx = largest_cell(&cells);
        let Cell::Box2 { lo, hi, closed } = cells[idx].clone() else {
            unreachable!()
        };
        let d = if hi[0] - lo[0] >= hi[1] - lo[1] { 0 } else { 1 };
        let mid = 0.5 * (lo[d] + hi[d]);
        let mut a_hi = hi;
        a_hi[d] = mid;
        let mut a_closed = closed;
        a_closed[d] = false;
        let mut b_lo = lo;
        b_lo[d] = mid;
        cells[idx] = Cell::Box2 {
            lo,
            hi: a_hi,
            closed: a_closed,
        };
        cells.push(Cell::Box2 {
            lo: b_lo,
            hi,
            closed,
        });
    }
    cells
}

fn triangle_cells(m: usize) -> Vec<Cell> {
    let k = int_sqrt(m);
    let h = 1.0 / k as f64;
    let mut cells: Vec<Cell> = Vec::with_capacity(m);
    for p in 0..k {
        for q in 0..k - p {
            let x = p as f64 * h;
            let y = q as f64 * h;
            cells.push(Cell::Tri {
                v: [[x, y], [x + h, y], [x, y + h]],
            });
            if p + q < k - 1 {
                cells.push(Cell::Tri {
                    v: [[x + h, y], [x + h, y + h], [x, y + h]],
                });
            }
        }
    }
    debug_assert_eq!(cells.len(), k * k);
    while cells.len() < m {
        let idx = largest_cell(&cells);
        let Cell::Tri { v } = cells[idx].clone() else {
            unreachable!()
        };
        // Split the longest edge at its midpoint.
        let d = |a: [f64; 2], b: [f64; 2]| float::abs(a[0] - b[0]) + float::abs(a[1] - b[1]);
        let mut e = 0;
        for cand in 1..3 {
            if d(v[cand], v[(cand + 1) % 3]) > d(v[e], v[(e + 1) % 3]) {
                e = cand;
            }
        }
        let a = v[e];
        let b = v[(e + 1) % 3];
        let c = v[(e + 2) % 3];
        let mid = [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])];
        cells[idx] = Cell::Tri { v: [a, mid, c] };
        cells.push(Cell::Tri { v: [mid, b, c] });
    }
    cells
}

fn sphere_cells(m: usize) -> Vec<Cell> {
    let bands = int_sqrt(m).max(1);
    let base = m / bands;
    let extra = m % bands;
    let mut cells = Vec::with_capacity(m);
    let two_pi = 2.0 * core::f64::consts::PI;
    for b in 0..bands {
        let sectors = base + usize::from(b < extra);
        let zhi = 1.0 - 2.0 * b as f64 / bands as f64;
        let zlo = 1.0 - 2.0 * (b + 1) as f64 / bands as f64;
        for s in 0..sectors {
            cells.push(Cell::Patch {
                zlo,
                zhi,
                phi_lo: two_pi * s as f64 / sectors as f64,
                phi_hi: two_pi * (s + 1) as f64 / sectors as f64,
                closed: s + 1 == sectors && b == 0,
            });
        }
    }
    cells
}

fn largest_cell(cells: &[Cell]) -> usize {
    let mut best = 0;
    for i in 1..cells.len() {
        if cells[i].diameter() > cells[best].diameter() + 1e-15 {
            best = i;
        }
    }
    best
}

fn int_sqrt(m: usize) -> usize {
    let mut k = (float::sqrt(m as f64) as usize).max(1);
    while (k + 1) * (k + 1) <= m {
        k += 1;
    }
    while k * k > m {
        k -= 1;
    }
    k.max(1)
}

/// Integral of `f` over a cell with respect to the reference measure.
///
/// Continuous parts use a 64-point composite midpoint rule per parameter
/// (exact for integrands linear along the parametrization, which covers
/// every built-in fiber-mass function); atomic parts are exact finite sums.
pub fn integrate_cell(space: VertexSpace, cell: &Cell, f: &mut dyn FnMut(&[f64]) -> f64) -> f64 {
    const NODES: usize = 64;
    match (space, cell) {
        (VertexSpace::Interval, Cell::Interval { lo, hi, .. }) => {
            let h = (hi - lo) / NODES as f64;
            (0..NODES)
                .map(|j| f(&[lo + (j as f64 + 0.5) * h]) * h)
                .sum()
        }
        (VertexSpace::Circle, Cell::Arc { start, len }) => {
            let h = len / NODES as f64;
            (0..NODES)
                .map(|j| f(&[float::fract_unit(start + (j as f64 + 0.5) * h)]) * h)
                .sum()
        }
        (VertexSpace::Square, Cell::Box2 { lo, hi, .. }) => {
            let k = 8;
            let hx = (hi[0] - lo[0]) / k as f64;
            let hy = (hi[1] - lo[1]) / k as f64;
            let mut acc = 0.0;
            for i in 0..k {
                for j in 0..k {
                    acc += f(&[
                        lo[0] + (i as f64 + 0.5) * hx,
                        lo[1] + (j as f64 + 0.5) * hy,
                    ]) * hx
                        * hy;
                }
            }
            acc
        }
        (VertexSpace::Triangle, Cell::Tri { .. }) => {
            let (slo, shi) = diagonal_range(cell);
            if shi <= slo {
                return 0.0;
            }
            let h = (shi - slo) / NODES as f64;
            (0..NODES)
                .map(|j| {
                    let s = slo + (j as f64 + 0.5) * h;
                    f(&[s, s]) * 2.0 * h
                })
                .sum()
        }
        (VertexSpace::Sphere, Cell::Patch {
            zlo,
            zhi,
            phi_lo,
            phi_hi,
            ..
        }) => {
            let k = 8;
            let hz = (zhi - zlo) / k as f64;
            let hp = (phi_hi - phi_lo) / k as f64;
            let w = hz / 2.0 * hp / (2.0 * core::f64::consts::PI);
            let mut acc = 0.0;
            for i in 0..k {
                for j in 0..k {
                    let z = zlo + (i as f64 + 0.5) * hz;
                    let phi = phi_lo + (j as f64 + 0.5) * hp;
                    let r = float::sqrt((1.0 - z * z).max(0.0));
                    acc += f(&[r * float::cos(phi), r * float::sin(phi), z]) * w;
                }
            }
            acc
        }
        (VertexSpace::Discrete, Cell::Singleton { point }) => {
            f(&[*point]) * cell_mass(space, cell)
        }
        (VertexSpace::Discrete, Cell::Tail { hi }) => {
            let m = (1.0 / hi + 0.5) as i32;
            let mut acc = 0.0;
            for i in m.max(2).. {
                let w = float::powi(2.0, -i + 1);
                if w < 1e-18 {
                    break;
                }
                acc += f(&[1.0 / i as f64]) * w;
            }
            acc
        }
        _ => panic!("cell kind does not belong to this space"),
    }
}

/// Overlay two 1-D partitions (intervals or arcs) of the same space: returns
/// parallel vectors mapping each refined cell to its parent cell in each
/// partition. `None` when the partitions cannot be aligned.
pub fn common_refinement(p1: &Partition, p2: &Partition) -> Option<(Vec<usize>, Vec<usize>)> {
    if p1.space() != p2.space() {
        return None;
    }
    let mut cuts: Vec<f64> = Vec::new();
    for p in [p1, p2] {
        for c in p.cells() {
            match c {
                Cell::Interval { lo, hi, .. } => {
                    cuts.push(*lo);
                    cuts.push(*hi);
                }
                Cell::Arc { start, .. } => cuts.push(*start),
                _ => return None,
            }
        }
    }
    cuts.sort_unstable_by(|a, b| a.total_cmp(b));
    cuts.dedup_by(|a, b| float::abs(*a - *b) < 1e-14);
    let circle = matches!(p1.cells()[0], Cell::Arc { .. });
    let mut i1 = Vec::new();
    let mut i2 = Vec::new();
    let n = cuts.len();
    let segments = if circle { n } else { n - 1 };
    for s in 0..segments {
        let lo = cuts[s];
        let hi = if s + 1 < n { cuts[s + 1] } else { cuts[0] + 1.0 };
        if hi - lo < 1e-14 {
            continue;
        }
        let mid = float::fract_unit(0.5 * (lo + hi));
        let a = p1.locate(&[mid])?;
        let b = p2.locate(&[mid])?;
        i1.push(a);
        i2.push(b);
    }
    Some((i1, i2))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interval_partition_m4() {
        let p = make_partition(VertexSpace::Interval, 4).unwrap();
        assert_eq!(p.len(), 4);
        for i in 0..4 {
            assert!((p.mass(i) - 0.25).abs() < 1e-15);
            assert!((p.cell(i).diameter() - 0.25).abs() < 1e-15);
        }
        assert!((p.representative(1).coords()[0] - 0.375).abs() < 1e-15);
    }

    #[test]
    fn square_partition_m9_is_3x3() {
        let p = make_partition(VertexSpace::Square, 9).unwrap();
        assert_eq!(p.len(), 9);
        for i in 0..9 {
            assert!((p.mass(i) - 1.0 / 9.0).abs() < 1e-15);
            assert!((p.cell(i).diameter() - 2.0 / 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn discrete_partition_m3() {
        let p = make_partition(VertexSpace::Discrete, 3).unwrap();
        assert_eq!(p.len(), 3);
        assert_eq!(p.representative(0).coords()[0], 1.0);
        assert_eq!(p.representative(1).coords()[0], 0.5);
        assert!((p.representative(2).coords()[0] - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(p.mass(0), 0.0);
        assert!((p.mass(1) - 0.5).abs() < 1e-15);
        // Tail mass: geometric series sum_{i>=3} 2^(1-i) = 2^(-1).
        assert!((p.mass(2) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn masses_sum_to_one_for_every_space() {
        for space in [
            VertexSpace::Interval,
            VertexSpace::Circle,
            VertexSpace::Sphere,
            VertexSpace::Square,
            VertexSpace::Triangle,
            VertexSpace::Discrete,
        ] {
            for m in [1, 2, 3, 5, 9, 10, 17, 64] {
                let p = make_partition(space, m).unwrap();
                assert_eq!(p.len(), m);
                let total: f64 = p.masses().iter().sum();
                assert!(
                    (total - 1.0).abs() < 1e-12,
                    "space {:?} m {} total {}",
                    space,
                    m,
                    total
                );
            }
        }
    }

    #[test]
    fn diameter_law_for_box_spaces() {
        // Bound 2 r R / floor(m^(1/r)) with R = 1.
        for m in [4usize, 16, 64, 256] {
            let p = make_partition(VertexSpace::Interval, m).unwrap();
            assert!(p.max_diameter() <= 2.0 / m as f64 + 1e-12);
            let p = make_partition(VertexSpace::Square, m).unwrap();
            let k = int_sqrt(m) as f64;
            assert!(p.max_diameter() <= 4.0 / k + 1e-12);
            let p = make_partition(VertexSpace::Triangle, m).unwrap();
            assert!(p.max_diameter() <= 4.0 / k + 1e-12);
            let p = make_partition(VertexSpace::Circle, m).unwrap();
            assert!(p.max_diameter() <= 2.0 / m as f64 + 1e-12);
        }
    }

    #[test]
    fn triangle_cell_masses_follow_the_diagonal() {
        let p = make_partition(VertexSpace::Triangle, 4).unwrap();
        // Only cells meeting the diagonal from (0,0) to (1/2,1/2) carry mass.
        let mut positive = 0;
        for i in 0..p.len() {
            if p.mass(i) > 0.0 {
                positive += 1;
                let r = p.representative(i);
                assert!(
                    (r.coords()[0] - r.coords()[1]).abs() < 1e-12,
                    "positive-mass representative lies on the diagonal"
                );
            }
        }
        assert!(positive >= 1);
        let total: f64 = p.masses().iter().sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn triangle_zero_mass_cell_example() {
        // m = 16: the grid has cells well off the diagonal.
        let p = make_partition(VertexSpace::Triangle, 16).unwrap();
        let off = p
            .cells()
            .iter()
            .position(|c| {
                let (lo, hi) = (diagonal_range(c).0, diagonal_range(c).1);
                hi <= lo
            })
            .expect("some cell misses the diagonal");
        assert_eq!(cell_mass(VertexSpace::Triangle, p.cell(off)), 0.0);
    }

    #[test]
    fn tail_mass_matches_geometric_series() {
        for m in 2..12 {
            let p = make_partition(VertexSpace::Discrete, m).unwrap();
            let expected: f64 = (m..200).map(|i| 2f64.powi(-(i as i32) + 1)).sum();
            assert!((p.mass(m - 1) - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn partitions_are_reproducible() {
        for space in [VertexSpace::Sphere, VertexSpace::Triangle, VertexSpace::Square] {
            let a = make_partition(space, 13).unwrap();
            let b = make_partition(space, 13).unwrap();
            assert!(a.approx_eq(&b, 0.0));
            for i in 0..a.len() {
                assert_eq!(a.cell(i), b.cell(i));
            }
        }
    }

    #[test]
    fn representatives_sit_inside_their_cells() {
        for space in [
            VertexSpace::Interval,
            VertexSpace::Circle,
            VertexSpace::Sphere,
            VertexSpace::Square,
            VertexSpace::Triangle,
            VertexSpace::Discrete,
        ] {
            let p = make_partition(space, 11).unwrap();
            for i in 0..p.len() {
                assert!(
                    p.cell(i).contains(p.representative(i).coords()),
                    "space {:?} cell {} rep {:?}",
                    space,
                    i,
                    p.representative(i)
                );
            }
        }
    }

    #[test]
    fn locate_finds_unique_cells() {
        let p = make_partition(VertexSpace::Square, 10).unwrap();
        // Probe a grid of interior points; each must land in exactly one cell.
        for a in 0..7 {
            for b in 0..7 {
                let x = [0.07 + a as f64 * 0.13, 0.05 + b as f64 * 0.13];
                let hits = p.cells().iter().filter(|c| c.contains(&x)).count();
                assert_eq!(hits, 1, "point {:?}", x);
            }
        }
    }

    #[test]
    fn refinement_aligns_interval_partitions() {
        let p1 = make_partition(VertexSpace::Interval, 2).unwrap();
        let p2 = make_partition(VertexSpace::Interval, 3).unwrap();
        let (a, b) = common_refinement(&p1, &p2).unwrap();
        assert_eq!(a.len(), b.len());
        assert_eq!(a.len(), 4); // cuts at 0, 1/3, 1/2, 2/3, 1
        assert_eq!(a, vec![0, 0, 1, 1]);
        assert_eq!(b, vec![0, 1, 1, 2]);
    }
}
