//! Exact distances between finite positive discrete measures.
//!
//! `bl_distance` computes the bounded Lipschitz distance
//! `sup { integral f d(mu - nu) : ||f||_inf + Lip(f) <= 1 }` exactly, as a
//! linear program over the union of atoms with variables `(f_k, b, L)` and
//! constraints `|f_k| <= b`, `|f_k - f_l| <= L d(z_k, z_l)`, `b + L <= 1`.
//! Three equivalent routes are used depending on the geometry of the atoms:
//!
//! * atoms on a line (dimension one, or collinear in higher dimension): the
//!   pairwise constraints reduce to adjacent differences, and for a fixed
//!   split `b = 1 - theta, L = theta` the chain program is solved by dynamic
//!   programming over concave piecewise-linear value functions; the value is
//!   concave in `theta`, so a ternary search finishes the job;
//! * atoms on a circle: if all atoms fit in a half circle the problem unrolls
//!   onto a line, otherwise the ring of adjacent constraints (which implies
//!   every pairwise constraint by chaining along both arcs) goes to the
//!   simplex solver;
//! * anything else: the simplex solver with lazily generated pairwise
//!   constraints (violated constraints are added until none remain).
//!
//! The routes are cross-checked against each other in the tests.
//!
//! `kr_distance` is the Kantorovich-Rubinstein distance (only the Lipschitz
//! budget, equal total masses required); on a line it is the classical CDF
//! integral, on a circle the weighted-median formula, otherwise an LP.
//! `tv_distance` is the total variation distance, exact by atom alignment.

use alloc::vec;
use alloc::vec::Vec;

use crate::float;
use crate::lp::{self, Constraint, LpError};
use crate::measure::{DiscreteMeasure, FiberFunction, MeasureError};
use crate::metric::Metric;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum DistanceError {
    #[error("{atoms} combined atoms is too large for exact LP (cap {cap})")]
    TooLarge { atoms: usize, cap: usize },
    #[error("total masses differ: {mu} vs {nu}")]
    MassMismatch { mu: f64, nu: f64 },
    #[error("fiber functions live on different partitions and no common refinement is available")]
    PartitionMismatch,
    #[error("measures have different ambient dimensions: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error(transparent)]
    Measure(#[from] MeasureError),
}

/// Knobs for the exact bounded-Lipschitz solver.
#[derive(Clone, Debug)]
pub struct BlConfig {
    /// Combined-atom cap; beyond it the caller must coarsen first.
    pub max_atoms: usize,
    /// Atoms closer than this are merged before solving.
    pub merge_tol: f64,
}

impl Default for BlConfig {
    fn default() -> Self {
        Self {
            max_atoms: 400,
            merge_tol: 1e-12,
        }
    }
}

/// Union of atoms with signed coefficients `c_k = mu({z_k}) - nu({z_k})`.
struct SignedAtoms {
    dim: usize,
    coords: Vec<f64>,
    c: Vec<f64>,
}

impl SignedAtoms {
    fn atom(&self, k: usize) -> &[f64] {
        &self.coords[k * self.dim..(k + 1) * self.dim]
    }

    fn len(&self) -> usize {
        self.c.len()
    }
}

fn signed_union(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    metric: &Metric,
    cfg: &BlConfig,
) -> Result<SignedAtoms, DistanceError> {
    if !mu.is_empty() && !nu.is_empty() && mu.dim() != nu.dim() {
        return Err(DistanceError::DimensionMismatch(mu.dim(), nu.dim()));
    }
    let dim = if mu.is_empty() { nu.dim() } else { mu.dim() };
    let mu = mu.merged(metric, cfg.merge_tol);
    let nu = nu.merged(metric, cfg.merge_tol);

    let mut out = SignedAtoms {
        dim,
        coords: Vec::new(),
        c: Vec::new(),
    };
    let push = |z: &[f64], c: f64, out: &mut SignedAtoms| {
        for k in 0..out.len() {
            if metric.dist(out.atom(k), z) <= cfg.merge_tol {
                out.c[k] += c;
                return;
            }
        }
        out.coords.extend_from_slice(z);
        out.c.push(c);
    };
    for i in 0..mu.len() {
        push(mu.atom(i), mu.weight(i), &mut out);
    }
    for i in 0..nu.len() {
        push(nu.atom(i), -nu.weight(i), &mut out);
    }
    if out.len() > cfg.max_atoms {
        return Err(DistanceError::TooLarge {
            atoms: out.len(),
            cap: cfg.max_atoms,
        });
    }
    Ok(out)
}

/// Bounded Lipschitz distance with the default configuration.
pub fn bl_distance(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    metric: &Metric,
) -> Result<f64, DistanceError> {
    bl_distance_cfg(mu, nu, metric, &BlConfig::default())
}

pub fn bl_distance_cfg(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    metric: &Metric,
    cfg: &BlConfig,
) -> Result<f64, DistanceError> {
    let u = signed_union(mu, nu, metric, cfg)?;
    if u.len() == 0 || u.c.iter().all(|&c| c == 0.0) {
        return Ok(0.0);
    }
    match route(&u, metric) {
        Route::Line(order, pos) => {
            let c: Vec<f64> = order.iter().map(|&k| u.c[k]).collect();
            Ok(bl_line(&pos, &c))
        }
        Route::Ring(order, gaps) => {
            let c: Vec<f64> = order.iter().map(|&k| u.c[k]).collect();
            Ok(bl_ring(&gaps, &c)?)
        }
        Route::General => bl_general(&u, metric),
    }
}

/// Kantorovich-Rubinstein distance with the default configuration.
pub fn kr_distance(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    metric: &Metric,
) -> Result<f64, DistanceError> {
    kr_distance_cfg(mu, nu, metric, &BlConfig::default())
}

pub fn kr_distance_cfg(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    metric: &Metric,
    cfg: &BlConfig,
) -> Result<f64, DistanceError> {
    let (ma, mb) = (mu.total_mass(), nu.total_mass());
    if float::abs(ma - mb) > 1e-12 * ma.max(mb).max(1.0) {
        return Err(DistanceError::MassMismatch { mu: ma, nu: mb });
    }
    let u = signed_union(mu, nu, metric, cfg)?;
    if u.len() == 0 || u.c.iter().all(|&c| c == 0.0) {
        return Ok(0.0);
    }
    match route(&u, metric) {
        Route::Line(order, pos) => {
            let c: Vec<f64> = order.iter().map(|&k| u.c[k]).collect();
            // Classical 1-D formula: integral of |C(t)| over the line.
            let mut acc = 0.0;
            let mut cum = 0.0;
            for k in 0..pos.len() - 1 {
                cum += c[k];
                acc += float::abs(cum) * (pos[k + 1] - pos[k]);
            }
            Ok(acc)
        }
        Route::Ring(order, gaps) => {
            let c: Vec<f64> = order.iter().map(|&k| u.c[k]).collect();
            Ok(kr_ring(&gaps, &c))
        }
        Route::General => kr_general(&u, metric),
    }
}

/// Total variation distance `sup_A |mu(A) - nu(A)|` over atom subsets.
pub fn tv_distance(mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> f64 {
    let cfg = BlConfig {
        max_atoms: usize::MAX,
        merge_tol: 1e-12,
    };
    let u = signed_union(mu, nu, &Metric::L1, &cfg).expect("tv has no atom cap");
    let pos: f64 = u.c.iter().filter(|&&c| c > 0.0).sum();
    let neg: f64 = -u.c.iter().filter(|&&c| c < 0.0).sum::<f64>();
    pos.max(neg)
}

/// Uniform bounded Lipschitz metric: max over cells of the fiberwise
/// bounded Lipschitz distance.
pub fn d_infinity(eta1: &FiberFunction, eta2: &FiberFunction) -> Result<f64, DistanceError> {
    d_infinity_cfg(eta1, eta2, &BlConfig::default())
}

pub fn d_infinity_cfg(
    eta1: &FiberFunction,
    eta2: &FiberFunction,
    cfg: &BlConfig,
) -> Result<f64, DistanceError> {
    let metric = eta1.fiber_metric();
    if eta1.partition().approx_eq(eta2.partition(), 1e-12) {
        let mut worst = 0.0f64;
        for i in 0..eta1.len() {
            let d = bl_distance_cfg(eta1.fiber(i), eta2.fiber(i), metric, cfg)?;
            worst = worst.max(d);
        }
        return Ok(worst);
    }
    // Align piecewise-constant functions on 1-D partitions of the same space
    // by overlaying cell boundaries.
    let (r1, r2) = crate::vertex::common_refinement(eta1.partition(), eta2.partition())
        .ok_or(DistanceError::PartitionMismatch)?;
    let mut worst = 0.0f64;
    for (i1, i2) in r1.iter().zip(&r2) {
        let d = bl_distance_cfg(eta1.fiber(*i1), eta2.fiber(*i2), metric, cfg)?;
        worst = worst.max(d);
    }
    Ok(worst)
}

/// Identify a piecewise-constant fiber function with a measure on the
/// product space `X x Y`: atoms `(x_i, y)` weighted by `mu_X(A_i) * w`.
/// Returns the product measure together with its l1 product metric.
pub fn product_lift(eta: &FiberFunction, cell_masses: &[f64]) -> (DiscreteMeasure, Metric) {
    let part = eta.partition();
    assert_eq!(cell_masses.len(), part.len());
    let xdim = part.space().ambient_dim();
    let ydim = eta
        .fibers()
        .iter()
        .map(|f| f.dim())
        .find(|_| true)
        .unwrap_or(1);
    let mut m = DiscreteMeasure::zero(xdim + ydim);
    let mut buf = vec![0.0f64; xdim + ydim];
    for i in 0..part.len() {
        let rep = part.representative(i);
        buf[..xdim].copy_from_slice(rep.coords());
        let fiber = eta.fiber(i);
        for j in 0..fiber.len() {
            buf[xdim..].copy_from_slice(fiber.atom(j));
            m.push(&buf, cell_masses[i] * fiber.weight(j))
                .expect("lift atoms are finite");
        }
    }
    let metric = Metric::product(part.space().metric(), eta.fiber_metric().clone(), xdim);
    (m, metric)
}

// ---------------------------------------------------------------------------
// Route selection
// ---------------------------------------------------------------------------

enum Route {
    /// Atoms order + positions on a line (ascending).
    Line(Vec<usize>, Vec<f64>),
    /// Atoms order around a circle + consecutive wrapped gaps
    /// (`gaps[k]` joins atom `k` to `k+1`, last wraps).
    Ring(Vec<usize>, Vec<f64>),
    General,
}

fn route(u: &SignedAtoms, metric: &Metric) -> Route {
    let k = u.len();
    if k == 1 {
        return Route::Line(vec![0], vec![0.0]);
    }
    let periods = metric.periods(u.dim);
    let wrapped = periods.iter().any(|p| p.is_finite());
    if u.dim == 1 && !wrapped {
        let mut order: Vec<usize> = (0..k).collect();
        order.sort_unstable_by(|&a, &b| u.coords[a].total_cmp(&u.coords[b]));
        let pos: Vec<f64> = order.iter().map(|&i| u.coords[i]).collect();
        return Route::Line(order, pos);
    }
    if u.dim == 1 && wrapped {
        let period = periods[0];
        let mut order: Vec<usize> = (0..k).collect();
        let angle = |i: usize| float::fract_unit(u.coords[i] / period) * period;
        order.sort_unstable_by(|&a, &b| angle(*&a).total_cmp(&angle(*&b)));
        let angles: Vec<f64> = order.iter().map(|&i| angle(i)).collect();
        let mut gaps: Vec<f64> = (0..k)
            .map(|j| {
                if j + 1 < k {
                    angles[j + 1] - angles[j]
                } else {
                    period - angles[k - 1] + angles[0]
                }
            })
            .collect();
        // Unroll onto a line when everything fits inside a half circle.
        let (gap_idx, max_gap) = gaps
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, g)| (i, *g))
            .expect("nonempty");
        if period - max_gap <= period / 2.0 + 1e-9 {
            let start = (gap_idx + 1) % k;
            let mut unrolled_order = Vec::with_capacity(k);
            let mut pos = Vec::with_capacity(k);
            let mut t = 0.0;
            for j in 0..k {
                let idx = (start + j) % k;
                unrolled_order.push(order[idx]);
                pos.push(t);
                t += gaps[idx];
            }
            return Route::Line(unrolled_order, pos);
        }
        // Ring constraints use the wrapped distance of each consecutive pair.
        for g in &mut gaps {
            *g = g.min(period - *g);
        }
        return Route::Ring(order, gaps);
    }
    if !wrapped {
        if let Some((order, pos)) = collinear_positions(u) {
            return Route::Line(order, pos);
        }
    }
    Route::General
}

/// If all atoms lie on one line, project them to scalar positions whose
/// differences reproduce the l1 distances exactly.
fn collinear_positions(u: &SignedAtoms) -> Option<(Vec<usize>, Vec<f64>)> {
    let k = u.len();
    let base = u.atom(0);
    let mut dir: Option<Vec<f64>> = None;
    let mut ts = vec![0.0f64; k];
    for i in 1..k {
        let z = u.atom(i);
        let diff: Vec<f64> = z.iter().zip(base).map(|(a, b)| a - b).collect();
        match &dir {
            None => {
                let norm1: f64 = diff.iter().map(|d| float::abs(*d)).sum();
                if norm1 > 0.0 {
                    ts[i] = 1.0;
                    dir = Some(diff);
                }
            }
            Some(d) => {
                let dd: f64 = d.iter().map(|x| x * x).sum();
                let t = diff.iter().zip(d).map(|(a, b)| a * b).sum::<f64>() / dd;
                let scale: f64 = d.iter().map(|x| float::abs(*x)).sum::<f64>().max(1.0);
                for (a, b) in diff.iter().zip(d) {
                    if float::abs(a - t * b) > 1e-10 * scale {
                        return None;
                    }
                }
                ts[i] = t;
            }
        }
    }
    let d = dir?;
    let norm1: f64 = d.iter().map(|x| float::abs(*x)).sum();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_unstable_by(|&a, &b| ts[a].total_cmp(&ts[b]));
    let pos: Vec<f64> = order.iter().map(|&i| ts[i] * norm1).collect();
    Some((order, pos))
}

// ---------------------------------------------------------------------------
// Chain route: concave piecewise-linear dynamic programming
// ---------------------------------------------------------------------------

/// Concave piecewise-linear function given by its breakpoints.
struct ConcavePl {
    xs: Vec<f64>,
    ys: Vec<f64>,
}

impl ConcavePl {
    fn linear(c: f64, lo: f64, hi: f64) -> Self {
        if lo == hi {
            return Self {
                xs: vec![lo],
                ys: vec![c * lo],
            };
        }
        Self {
            xs: vec![lo, hi],
            ys: vec![c * lo, c * hi],
        }
    }

    fn add_linear(&mut self, c: f64) {
        for (x, y) in self.xs.iter().zip(self.ys.iter_mut()) {
            *y += c * x;
        }
    }

    fn max(&self) -> f64 {
        self.ys.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    fn eval(&self, x: f64) -> f64 {
        let n = self.xs.len();
        if x <= self.xs[0] {
            return self.ys[0];
        }
        if x >= self.xs[n - 1] {
            return self.ys[n - 1];
        }
        let mut i = match self.xs.binary_search_by(|v| v.total_cmp(&x)) {
            Ok(i) => return self.ys[i],
            Err(i) => i,
        };
        if i == 0 {
            i = 1;
        }
        let (x0, x1) = (self.xs[i - 1], self.xs[i]);
        let (y0, y1) = (self.ys[i - 1], self.ys[i]);
        y0 + (y1 - y0) * (x - x0) / (x1 - x0)
    }

    /// Replace `V` by `W(f) = max { V(f') : |f' - f| <= w }`.
    fn slide(&mut self, w: f64) {
        if w <= 0.0 || self.xs.len() == 1 {
            if self.xs.len() == 1 {
                // A single point spreads into a plateau.
                let (x, y) = (self.xs[0], self.ys[0]);
                self.xs = vec![x - w, x + w];
                self.ys = vec![y, y];
            }
            return;
        }
        let mut peak_first = 0;
        for i in 1..self.ys.len() {
            if self.ys[i] > self.ys[peak_first] {
                peak_first = i;
            }
        }
        let mut peak_last = peak_first;
        while peak_last + 1 < self.ys.len() && self.ys[peak_last + 1] == self.ys[peak_first] {
            peak_last += 1;
        }
        let n = self.xs.len();
        let mut xs = Vec::with_capacity(n + 2);
        let mut ys = Vec::with_capacity(n + 2);
        for i in 0..=peak_first {
            xs.push(self.xs[i] - w);
            ys.push(self.ys[i]);
        }
        xs.push(self.xs[peak_last] + w);
        ys.push(self.ys[peak_last]);
        for i in peak_last + 1..n {
            xs.push(self.xs[i] + w);
            ys.push(self.ys[i]);
        }
        self.xs = xs;
        self.ys = ys;
    }

    /// Restrict the domain to `[lo, hi]` (assumed to intersect it).
    fn clip(&mut self, lo: f64, hi: f64) {
        let ylo = self.eval(lo);
        let yhi = self.eval(hi);
        let mut xs = Vec::with_capacity(self.xs.len());
        let mut ys = Vec::with_capacity(self.ys.len());
        xs.push(lo);
        ys.push(ylo);
        for i in 0..self.xs.len() {
            if self.xs[i] > lo && self.xs[i] < hi {
                xs.push(self.xs[i]);
                ys.push(self.ys[i]);
            }
        }
        if hi > lo {
            xs.push(hi);
            ys.push(yhi);
        }
        self.xs = xs;
        self.ys = ys;
    }
}

/// Value of the chain program at a fixed budget split `b = 1 - theta`,
/// `L = theta`.
fn chain_value(pos: &[f64], c: &[f64], theta: f64) -> f64 {
    let beta = 1.0 - theta;
    let k = pos.len();
    let mut v = ConcavePl::linear(c[k - 1], -beta, beta);
    for i in (0..k - 1).rev() {
        v.slide(theta * (pos[i + 1] - pos[i]));
        v.clip(-beta, beta);
        v.add_linear(c[i]);
    }
    v.max()
}

/// Bounded Lipschitz distance for atoms on a line. The optimum always uses
/// the full budget `b + L = 1` (scaling any feasible test function up can
/// only help), and the value is concave in the split, so a ternary search
/// over `theta = L` is exact up to machine precision.
fn bl_line(pos: &[f64], c: &[f64]) -> f64 {
    let f = |theta: f64| chain_value(pos, c, theta);
    let mut lo = 0.0f64;
    let mut hi = 1.0f64;
    for _ in 0..160 {
        let m1 = lo + (hi - lo) / 3.0;
        let m2 = hi - (hi - lo) / 3.0;
        if f(m1) < f(m2) {
            lo = m1;
        } else {
            hi = m2;
        }
    }
    let mid = 0.5 * (lo + hi);
    f(0.0).max(f(1.0)).max(f(lo)).max(f(hi)).max(f(mid))
}

// ---------------------------------------------------------------------------
// Simplex routes
// ---------------------------------------------------------------------------

/// Shared LP skeleton: variables `g_k = f_k + b >= 0` (k < K), `b` (index K),
/// `L` (index K+1); rows `g_k <= 2b` and `b + L <= 1`; the caller supplies
/// the pairwise rows. Objective `sum c_k g_k - (sum c_k) b`.
fn bl_lp_base(c: &[f64]) -> (Vec<f64>, Vec<Constraint>) {
    let k = c.len();
    let mut obj = vec![0.0f64; k + 2];
    obj[..k].copy_from_slice(c);
    obj[k] = -c.iter().sum::<f64>();
    let mut rows = Vec::with_capacity(2 * k + 1);
    for i in 0..k {
        rows.push(Constraint {
            coeffs: vec![(i, 1.0), (k, -2.0)],
            rhs: 0.0,
        });
    }
    rows.push(Constraint {
        coeffs: vec![(k, 1.0), (k + 1, 1.0)],
        rhs: 1.0,
    });
    (obj, rows)
}

fn pair_row(k: usize, a: usize, b: usize, d: f64) -> Constraint {
    Constraint {
        coeffs: vec![(a, 1.0), (b, -1.0), (k + 1, -d)],
        rhs: 0.0,
    }
}

/// Ring of atoms: adjacent constraints along the circle imply every pairwise
/// constraint by chaining along either arc.
fn bl_ring(gaps: &[f64], c: &[f64]) -> Result<f64, LpError> {
    let k = c.len();
    let (obj, mut rows) = bl_lp_base(c);
    for i in 0..k {
        let j = (i + 1) % k;
        rows.push(pair_row(k, i, j, gaps[i]));
        rows.push(pair_row(k, j, i, gaps[i]));
    }
    Ok(lp::maximize(k + 2, &obj, &rows)?.value.max(0.0))
}

/// General position: start from the box rows and lazily add violated
/// pairwise constraints until the solution is feasible for all of them.
fn bl_general(u: &SignedAtoms, metric: &Metric) -> Result<f64, DistanceError> {
    let k = u.len();
    let mut dist = vec![0.0f64; k * k];
    for a in 0..k {
        for b in a + 1..k {
            let d = metric.dist(u.atom(a), u.atom(b));
            dist[a * k + b] = d;
            dist[b * k + a] = d;
        }
    }
    let (obj, mut rows) = bl_lp_base(&u.c);
    let mut added = vec![false; k * k];
    for round in 0.. {
        if round > 400 {
            return Err(LpError::IterationLimit(round).into());
        }
        let sol = lp::maximize(k + 2, &obj, &rows)?;
        let l = sol.x[k + 1];
        let mut violated: Vec<(f64, usize, usize)> = Vec::new();
        for a in 0..k {
            for bb in 0..k {
                if a != bb && !added[a * k + bb] {
                    let v = sol.x[a] - sol.x[bb] - l * dist[a * k + bb];
                    if v > 1e-9 {
                        violated.push((v, a, bb));
                    }
                }
            }
        }
        if violated.is_empty() {
            return Ok(sol.value.max(0.0));
        }
        violated.sort_unstable_by(|x, y| y.0.total_cmp(&x.0));
        violated.truncate(2 * k);
        for (_, a, bb) in violated {
            added[a * k + bb] = true;
            rows.push(pair_row(k, a, bb, dist[a * k + bb]));
        }
    }
    unreachable!()
}

/// Circular Kantorovich-Rubinstein distance: minimize
/// `sum |C_k - alpha| gap_k` over the free constant `alpha` (the weighted
/// median of the cumulative sums).
fn kr_ring(gaps: &[f64], c: &[f64]) -> f64 {
    let k = c.len();
    let mut cum = Vec::with_capacity(k);
    let mut acc = 0.0;
    for i in 0..k {
        acc += c[i];
        cum.push(acc);
    }
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_unstable_by(|&a, &b| cum[a].total_cmp(&cum[b]));
    let total: f64 = gaps.iter().sum();
    let mut run = 0.0;
    let mut alpha = cum[order[k - 1]];
    for &i in &order {
        run += gaps[i];
        if run >= total / 2.0 {
            alpha = cum[i];
            break;
        }
    }
    (0..k).map(|i| float::abs(cum[i] - alpha) * gaps[i]).sum()
}

/// KR in general position: `f_k = u_k - s` with `u_k >= 0`; valid because the
/// objective is shift-invariant for equal masses.
fn kr_general(u: &SignedAtoms, metric: &Metric) -> Result<f64, DistanceError> {
    let k = u.len();
    let mut dist = vec![0.0f64; k * k];
    let mut dmax = 0.0f64;
    for a in 0..k {
        for b in a + 1..k {
            let d = metric.dist(u.atom(a), u.atom(b));
            dist[a * k + b] = d;
            dist[b * k + a] = d;
            dmax = dmax.max(d);
        }
    }
    let obj = u.c.clone();
    let mut rows: Vec<Constraint> = (0..k)
        .map(|i| Constraint {
            coeffs: vec![(i, 1.0)],
            rhs: dmax,
        })
        .collect();
    let mut added = vec![false; k * k];
    for round in 0.. {
        if round > 400 {
            return Err(LpError::IterationLimit(round).into());
        }
        let sol = lp::maximize(k, &obj, &rows)?;
        let mut violated: Vec<(f64, usize, usize)> = Vec::new();
        for a in 0..k {
            for b in 0..k {
                if a != b && !added[a * k + b] {
                    let v = sol.x[a] - sol.x[b] - dist[a * k + b];
                    if v > 1e-9 {
                        violated.push((v, a, b));
                    }
                }
            }
        }
        if violated.is_empty() {
            return Ok(sol.value.max(0.0));
        }
        violated.sort_unstable_by(|x, y| y.0.total_cmp(&x.0));
        violated.truncate(2 * k);
        for (_, a, b) in violated {
            added[a * k + b] = true;
            rows.push(Constraint {
                coeffs: vec![(a, 1.0), (b, -1.0)],
                rhs: dist[a * k + b],
            });
        }
    }
    unreachable!()
}
