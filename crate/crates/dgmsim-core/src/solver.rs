//! The coupled particle ODE system, its fixed-step RK4 integrator, flow
//! maps through frozen ensembles, and the Picard fixed-point solver.
//!
//! State layout: `m` cells times `n` particles times `r2` components,
//! flattened cell-major. Cell weights `a_i` never change along a trajectory
//! (mass conservation is structural), so a trajectory is fully described by
//! the weights plus the stored particle states.

use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use crate::dgm::DiscretizedDGM;
use crate::float;
use crate::measure::{DiscreteMeasure, FiberFunction, MeasureError};
use crate::metric::Metric;
use crate::model::{InvariantRegion, ModelError, ModelSpec};
use crate::quantile::{empirical_approximation, MeasureDescriptor, QuantileRule};
use crate::vertex::{integrate_cell, Partition};

#[derive(Debug, thiserror::Error)]
pub enum SolverError {
    #[error("bad time grid: {0}")]
    BadGrid(String),
    #[error("digraph discretizations and the ensemble partition disagree")]
    PartitionMismatch,
    #[error("model has {kernels} coupling kernels but {dgms} digraph measures were supplied")]
    KernelCountMismatch { kernels: usize, dgms: usize },
    #[error("digraph atom {atom:?} lies outside every partition cell")]
    AtomOutsideCells { atom: Vec<f64> },
    #[error("non-finite state at t = {t}")]
    NonFinite { t: f64 },
    #[error("state left the invariant region at t = {t} by {violation:.3e} (> 1e-6); Bony check failed or dt too large")]
    InvarianceViolation { t: f64, violation: f64 },
    #[error("t = {t} is not on the stored time grid")]
    OffGrid { t: f64 },
    #[error("initial distribution is not normalized: integral of fiber mass = {integral}")]
    Unnormalized { integral: f64 },
    #[error("Picard iteration did not converge after {iterations} iterations (residual {residual:.3e})")]
    NonConvergence { iterations: usize, residual: f64 },
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Uniform time grid on `[0, T]`.
#[derive(Clone, Copy, Debug)]
pub struct TimeGrid {
    pub t_end: f64,
    pub dt: f64,
    /// Store every `store_stride`-th step (the initial and final states are
    /// always stored).
    pub store_stride: usize,
}

impl TimeGrid {
    pub fn new(t_end: f64, dt: f64) -> Result<Self, SolverError> {
        Self::with_stride(t_end, dt, 1)
    }

    pub fn with_stride(t_end: f64, dt: f64, store_stride: usize) -> Result<Self, SolverError> {
        if !(t_end > 0.0) || !(dt > 0.0) || !t_end.is_finite() || !dt.is_finite() {
            return Err(SolverError::BadGrid(alloc::format!(
                "need 0 < dt <= T, got dt = {dt}, T = {t_end}"
            )));
        }
        let steps = (t_end / dt + 0.5) as usize;
        if steps == 0 || float::abs(steps as f64 * dt - t_end) > 1e-9 * t_end.max(1.0) {
            return Err(SolverError::BadGrid(alloc::format!(
                "T = {t_end} is not an integer multiple of dt = {dt}"
            )));
        }
        if store_stride == 0 {
            return Err(SolverError::BadGrid(String::from("store_stride must be >= 1")));
        }
        Ok(Self {
            t_end,
            dt,
            store_stride,
        })
    }

    pub fn steps(&self) -> usize {
        (self.t_end / self.dt + 0.5) as usize
    }
}

/// A stored trajectory of the particle ensemble.
#[derive(Clone, Debug)]
pub struct EnsembleTrajectory {
    partition: Partition,
    n: usize,
    r2: usize,
    a: Vec<f64>,
    state_metric: Metric,
    times: Vec<f64>,
    /// `times.len()` blocks of `m * n * r2` states.
    states: Vec<f64>,
}

impl EnsembleTrajectory {
    pub fn partition(&self) -> &Partition {
        &self.partition
    }

    pub fn particles_per_cell(&self) -> usize {
        self.n
    }

    pub fn state_dim(&self) -> usize {
        self.r2
    }

    pub fn cell_weights(&self) -> &[f64] {
        &self.a
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn state(&self, k: usize) -> &[f64] {
        let len = self.block_len();
        &self.states[k * len..(k + 1) * len]
    }

    pub fn final_state(&self) -> &[f64] {
        self.state(self.times.len() - 1)
    }

    fn block_len(&self) -> usize {
        self.partition.len() * self.n * self.r2
    }

    fn stored_index(&self, t: f64) -> Option<usize> {
        let tol = 1e-9 * self.times.last().copied().unwrap_or(1.0).max(1.0);
        self.times.iter().position(|&s| float::abs(s - t) <= tol)
    }

    /// Piecewise-linear interpolation of the particle states at `t`
    /// (clamped to the stored range).
    pub fn interp_state(&self, t: f64, out: &mut [f64]) {
        let len = self.block_len();
        debug_assert_eq!(out.len(), len);
        let times = &self.times;
        if t <= times[0] {
            out.copy_from_slice(self.state(0));
            return;
        }
        if t >= times[times.len() - 1] {
            out.copy_from_slice(self.state(times.len() - 1));
            return;
        }
        let hi = times.partition_point(|&s| s < t).min(times.len() - 1);
        let lo = hi - 1;
        let w = (t - times[lo]) / (times[hi] - times[lo]);
        let (sa, sb) = (self.state(lo), self.state(hi));
        for i in 0..len {
            out[i] = sa[i] + w * (sb[i] - sa[i]);
        }
    }

    /// The measure-valued snapshot at a stored time: per cell,
    /// `(a_i / n) sum_j delta(state_ij)`.
    pub fn ensemble_measure(&self, t: f64) -> Result<FiberFunction, SolverError> {
        let k = self.stored_index(t).ok_or(SolverError::OffGrid { t })?;
        let periods = self.state_metric.periods(self.r2);
        let state = self.state(k);
        let m = self.partition.len();
        let mut fibers = Vec::with_capacity(m);
        let mut buf = vec![0.0; self.r2];
        for i in 0..m {
            let mut fiber = DiscreteMeasure::zero(self.r2);
            let w = self.a[i] / self.n as f64;
            for q in 0..self.n {
                let base = (i * self.n + q) * self.r2;
                for d in 0..self.r2 {
                    let x = state[base + d];
                    buf[d] = if periods[d].is_finite() {
                        float::fract_unit(x / periods[d]) * periods[d]
                    } else {
                        x
                    };
                }
                fiber.push(&buf, w)?;
            }
            fibers.push(fiber);
        }
        Ok(FiberFunction::new(
            self.partition.clone(),
            fibers,
            self.state_metric.clone(),
        )?)
    }
}

/// Initial measure-valued distribution `x -> (nu_0)_x` on the state space.
#[derive(Clone)]
pub enum InitialCondition {
    /// The same fiber over every vertex.
    Constant(MeasureDescriptor),
    /// A fixed probability profile with vertex-dependent mass
    /// `c0 + c1 * x[0]`.
    LinearMass {
        base: MeasureDescriptor,
        c0: f64,
        c1: f64,
    },
    Custom(Arc<dyn Fn(&[f64]) -> MeasureDescriptor + Send + Sync>),
}

impl InitialCondition {
    pub fn fiber(&self, x: &[f64]) -> MeasureDescriptor {
        match self {
            InitialCondition::Constant(d) => d.clone(),
            InitialCondition::LinearMass { base, c0, c1 } => {
                let mut d = base.clone();
                let scale = (c0 + c1 * x[0]).max(0.0);
                scale_descriptor(&mut d, scale);
                d
            }
            InitialCondition::Custom(rule) => rule(x),
        }
    }

    pub fn fiber_mass(&self, x: &[f64]) -> f64 {
        self.fiber(x).total_mass()
    }
}

fn scale_descriptor(d: &mut MeasureDescriptor, to_mass: f64) {
    match d {
        MeasureDescriptor::UniformInterval { mass, .. }
        | MeasureDescriptor::UniformArc { mass, .. }
        | MeasureDescriptor::UniformSegment { mass, .. }
        | MeasureDescriptor::UniformGreatCircle { mass, .. }
        | MeasureDescriptor::Dirac { mass, .. }
        | MeasureDescriptor::CantorArc { mass, .. }
        | MeasureDescriptor::CantorInterval { mass, .. } => *mass = to_mass,
        MeasureDescriptor::Atomic(m) => {
            let total = m.total_mass();
            if total > 0.0 {
                *m = m.scaled(to_mass / total).expect("nonnegative scale");
            }
        }
    }
}

/// Cell weights `a_i` (cell-averaged fiber mass, or the representative's
/// mass on null cells) and initial particle states (fiber quantiles at the
/// representatives).
pub fn discretize_initial(
    ic: &InitialCondition,
    partition: &Partition,
    n: usize,
    rule: QuantileRule,
) -> Result<(Vec<f64>, Vec<f64>), SolverError> {
    let m = partition.len();
    // Normalization: the fiber masses must integrate to 1 over the vertex
    // space.
    let total: f64 = (0..m)
        .map(|i| {
            integrate_cell(partition.space(), partition.cell(i), &mut |x| {
                ic.fiber_mass(x)
            })
        })
        .sum();
    if float::abs(total - 1.0) > 1e-9 {
        return Err(SolverError::Unnormalized { integral: total });
    }
    let mut a = Vec::with_capacity(m);
    let mut states = Vec::new();
    for i in 0..m {
        let rep = partition.representative(i);
        let ai = if partition.mass(i) > 0.0 {
            integrate_cell(partition.space(), partition.cell(i), &mut |x| {
                ic.fiber_mass(x)
            }) / partition.mass(i)
        } else {
            ic.fiber_mass(rep.coords())
        };
        a.push(ai);
        let fiber = ic.fiber(rep.coords());
        let r2 = fiber.dim();
        if fiber.total_mass() > 0.0 {
            let atoms = empirical_approximation(&fiber, n, rule)?;
            for atom in atoms.atoms() {
                states.extend_from_slice(atom);
            }
        } else {
            // Massless fiber: park the particles at the representative's
            // fiber barycenter surrogate (origin); the weight a_i = 0 makes
            // them inert.
            states.extend(core::iter::repeat(0.0).take(n * r2));
        }
    }
    Ok((a, states))
}

/// The right-hand side of the coupled system with the cell-to-cell coupling
/// resolved at build time.
pub struct Rhs {
    model: ModelSpec,
    partition: Partition,
    n: usize,
    a: Vec<f64>,
    /// `coupling[l][i]` lists `(p, coef)` pairs: the l-th digraph sends cell
    /// `i` mass `coef * n` spread over cell `p`'s particles.
    coupling: Vec<Vec<Vec<(usize, f64)>>>,
}

/// Resolve every digraph atom to its containing cell and fold the weights
/// into a sparse cell-to-cell table.
pub fn build_rhs(
    model: &ModelSpec,
    dgms: &[DiscretizedDGM],
    partition: &Partition,
    a: &[f64],
    n: usize,
) -> Result<Rhs, SolverError> {
    if model.kernels.len() != dgms.len() {
        return Err(SolverError::KernelCountMismatch {
            kernels: model.kernels.len(),
            dgms: dgms.len(),
        });
    }
    for dgm in dgms {
        if !dgm.partition().approx_eq(partition, 1e-12) {
            return Err(SolverError::PartitionMismatch);
        }
    }
    let m = partition.len();
    let mut coupling = Vec::with_capacity(dgms.len());
    for dgm in dgms {
        let mut per_cell = Vec::with_capacity(m);
        for i in 0..m {
            let block = dgm.block(i);
            let mut sums = vec![0.0f64; m];
            for j in 0..block.len() {
                let y = block.atom(j);
                let p = partition
                    .locate(y)
                    .ok_or_else(|| SolverError::AtomOutsideCells { atom: y.to_vec() })?;
                sums[p] += block.weight(j);
            }
            let table: Vec<(usize, f64)> = sums
                .iter()
                .enumerate()
                .filter(|(_, &s)| s != 0.0)
                .map(|(p, &s)| (p, s * a[p] / n as f64))
                .collect();
            per_cell.push(table);
        }
        coupling.push(per_cell);
    }
    Ok(Rhs {
        model: model.clone(),
        partition: partition.clone(),
        n,
        a: a.to_vec(),
        coupling,
    })
}

impl Rhs {
    pub fn state_len(&self) -> usize {
        self.partition.len() * self.n * self.model.r2
    }

    pub fn model(&self) -> &ModelSpec {
        &self.model
    }

    pub fn partition(&self) -> &Partition {
        &self.partition
    }

    pub fn cell_weights(&self) -> &[f64] {
        &self.a
    }

    /// Cells coupled into cell `i` by the l-th digraph.
    pub fn coupled_cells(&self, l: usize, i: usize) -> &[(usize, f64)] {
        &self.coupling[l][i]
    }

    /// `out = F(t, state)`, evaluating the coupling against `source`
    /// (identical to `state` for the plain system; the frozen ensemble for
    /// Picard iterations).
    fn eval_against(&self, t: f64, state: &[f64], source: &[f64], out: &mut [f64]) {
        let r2 = self.model.r2;
        let n = self.n;
        let m = self.partition.len();
        out.iter_mut().for_each(|v| *v = 0.0);
        for i in 0..m {
            let x_i = self.partition.representative(i).coords();
            for q in 0..n {
                let base = (i * n + q) * r2;
                let phi = &state[base..base + r2];
                let out_ij = &mut out[base..base + r2];
                for (l, kernel) in self.model.kernels.iter().enumerate() {
                    for &(p, coef) in &self.coupling[l][i] {
                        for q2 in 0..n {
                            let pb = (p * n + q2) * r2;
                            kernel.eval_add(t, &source[pb..pb + r2], phi, coef, out_ij);
                        }
                    }
                }
                self.model.field.eval_add(t, x_i, phi, 1.0, out_ij);
            }
        }
    }

    pub fn eval(&self, t: f64, state: &[f64], out: &mut [f64]) {
        self.eval_against(t, state, state, out);
    }
}

/// Fixed-step classical RK4 with invariance checking.
///
/// With `projection` on, states that overshoot the region by at most `1e-6`
/// are pulled back onto it after each step; larger violations abort (they
/// mean the region is not invariant or `dt` is too coarse).
pub fn integrate(
    rhs: &Rhs,
    y0: &[f64],
    grid: TimeGrid,
    projection: bool,
) -> Result<EnsembleTrajectory, SolverError> {
    integrate_impl(y0, grid, projection, &rhs.model.region, |t, y, out| {
        rhs.eval(t, y, out)
    })
    .map(|(times, states)| EnsembleTrajectory {
        partition: rhs.partition.clone(),
        n: rhs.n,
        r2: rhs.model.r2,
        a: rhs.a.clone(),
        state_metric: rhs.model.region.state_metric(),
        times,
        states,
    })
}

const INVARIANCE_TOL: f64 = 1e-6;

fn integrate_impl(
    y0: &[f64],
    grid: TimeGrid,
    projection: bool,
    region: &InvariantRegion,
    mut f: impl FnMut(f64, &[f64], &mut [f64]),
) -> Result<(Vec<f64>, Vec<f64>), SolverError> {
    let len = y0.len();
    let r2 = region.dim();
    let steps = grid.steps();
    let h = grid.dt;
    let mut y = y0.to_vec();
    let mut k1 = vec![0.0; len];
    let mut k2 = vec![0.0; len];
    let mut k3 = vec![0.0; len];
    let mut k4 = vec![0.0; len];
    let mut tmp = vec![0.0; len];

    let mut times = Vec::new();
    let mut states = Vec::new();
    times.push(0.0);
    states.extend_from_slice(&y);

    for step in 0..steps {
        let t = step as f64 * h;
        f(t, &y, &mut k1);
        for i in 0..len {
            tmp[i] = y[i] + 0.5 * h * k1[i];
        }
        f(t + 0.5 * h, &tmp, &mut k2);
        for i in 0..len {
            tmp[i] = y[i] + 0.5 * h * k2[i];
        }
        f(t + 0.5 * h, &tmp, &mut k3);
        for i in 0..len {
            tmp[i] = y[i] + h * k3[i];
        }
        f(t + h, &tmp, &mut k4);
        for i in 0..len {
            y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        let t_next = (step + 1) as f64 * h;
        if !y.iter().all(|v| v.is_finite()) {
            return Err(SolverError::NonFinite { t: t_next });
        }
        for chunk in y.chunks_exact_mut(r2) {
            let v = region.violation(chunk);
            if v > INVARIANCE_TOL {
                return Err(SolverError::InvarianceViolation {
                    t: t_next,
                    violation: v,
                });
            }
            if projection && v > 0.0 {
                region.project(chunk);
            }
        }
        if (step + 1) % grid.store_stride == 0 || step + 1 == steps {
            times.push(t_next);
            states.extend_from_slice(&y);
        }
    }
    Ok((times, states))
}

/// Integrate a single state through the Vlasov field read off a frozen
/// ensemble (piecewise-linear in time between stored states). Supports
/// backward time; the solution maps form a group, so
/// `flow_map(s, t, flow_map(t, s, phi)) == phi` up to integration error.
pub fn flow_map(
    rhs: &Rhs,
    frozen: &EnsembleTrajectory,
    x_cell: usize,
    t_from: f64,
    t_to: f64,
    phi0: &[f64],
) -> Result<Vec<f64>, SolverError> {
    let r2 = rhs.model.r2;
    if x_cell >= rhs.partition.len() {
        return Err(SolverError::Model(ModelError::CellOutOfRange {
            index: x_cell,
            cells: rhs.partition.len(),
        }));
    }
    let span = t_to - t_from;
    if span == 0.0 {
        return Ok(phi0.to_vec());
    }
    let dt_ref = if frozen.times.len() > 1 {
        frozen.times[1] - frozen.times[0]
    } else {
        float::abs(span)
    };
    let steps = (float::abs(span) / dt_ref + 0.5).max(1.0) as usize;
    let h = span / steps as f64;
    let n = frozen.n;

    let mut y = phi0.to_vec();
    let mut source = vec![0.0; frozen.block_len()];
    let mut last_src_t = f64::INFINITY;
    let mut k = [vec![0.0; r2], vec![0.0; r2], vec![0.0; r2], vec![0.0; r2]];
    let mut tmp = vec![0.0; r2];

    let velocity = |t: f64,
                        phi: &[f64],
                        out: &mut [f64],
                        source: &mut Vec<f64>,
                        last_src_t: &mut f64| {
        if t != *last_src_t {
            frozen.interp_state(t, source);
            *last_src_t = t;
        }
        out.iter_mut().for_each(|v| *v = 0.0);
        for (l, kernel) in rhs.model.kernels.iter().enumerate() {
            for &(p, coef) in &rhs.coupling[l][x_cell] {
                for q2 in 0..n {
                    let pb = (p * n + q2) * r2;
                    kernel.eval_add(t, &source[pb..pb + r2], phi, coef, out);
                }
            }
        }
        rhs.model
            .field
            .eval_add(t, rhs.partition.representative(x_cell).coords(), phi, 1.0, out);
    };

    for step in 0..steps {
        let t = t_from + step as f64 * h;
        velocity(t, &y, &mut k[0], &mut source, &mut last_src_t);
        for i in 0..r2 {
            tmp[i] = y[i] + 0.5 * h * k[0][i];
        }
        velocity(t + 0.5 * h, &tmp, &mut k[1], &mut source, &mut last_src_t);
        for i in 0..r2 {
            tmp[i] = y[i] + 0.5 * h * k[1][i];
        }
        velocity(t + 0.5 * h, &tmp, &mut k[2], &mut source, &mut last_src_t);
        for i in 0..r2 {
            tmp[i] = y[i] + h * k[2][i];
        }
        velocity(t + h, &tmp, &mut k[3], &mut source, &mut last_src_t);
        for i in 0..r2 {
            y[i] += h / 6.0 * (k[0][i] + 2.0 * k[1][i] + 2.0 * k[2][i] + k[3][i]);
        }
        if !y.iter().all(|v| v.is_finite()) {
            return Err(SolverError::NonFinite { t: t + h });
        }
        let v = rhs.model.region.violation(&y);
        if v > INVARIANCE_TOL {
            return Err(SolverError::InvarianceViolation {
                t: t + h,
                violation: v,
            });
        }
        if v > 0.0 {
            rhs.model.region.project(&mut y);
        }
    }
    Ok(y)
}

/// Convergence record of a Picard solve.
#[derive(Clone, Debug)]
pub struct PicardInfo {
    pub iterations: usize,
    /// Upper bounds on `sup_t d_inf` between successive iterates.
    pub residuals: Vec<f64>,
}

/// Solve the fixed-point equation by Picard iteration: push the initial
/// particles forward through the field frozen at the previous iterate until
/// the iterates stop moving.
///
/// The residual is the atom-pairing upper bound
/// `max_i (a_i/n) sum_j 2 d_j / (2 + d_j)` on the fiberwise bounded
/// Lipschitz distance, evaluated at every stored time.
pub fn picard_solve(
    rhs: &Rhs,
    y0: &[f64],
    grid: TimeGrid,
    max_iter: usize,
    tol: f64,
) -> Result<(EnsembleTrajectory, PicardInfo), SolverError> {
    let make_traj = |times: Vec<f64>, states: Vec<f64>| EnsembleTrajectory {
        partition: rhs.partition.clone(),
        n: rhs.n,
        r2: rhs.model.r2,
        a: rhs.a.clone(),
        state_metric: rhs.model.region.state_metric(),
        times,
        states,
    };

    // Zeroth iterate: the initial distribution frozen in time.
    let grid = TimeGrid::with_stride(grid.t_end, grid.dt, 1)?;
    let steps = grid.steps();
    let mut times = Vec::with_capacity(steps + 1);
    let mut states = Vec::with_capacity((steps + 1) * y0.len());
    for k in 0..=steps {
        times.push(k as f64 * grid.dt);
        states.extend_from_slice(y0);
    }
    let mut current = make_traj(times, states);

    let metric = rhs.model.region.state_metric();
    let mut residuals = Vec::new();
    let mut source = vec![0.0; y0.len()];
    for iter in 1..=max_iter {
        let mut last_src_t = f64::INFINITY;
        let (times, states) = {
            let frozen = &current;
            integrate_impl(y0, grid, true, &rhs.model.region, |t, y, out| {
                if t != last_src_t {
                    frozen.interp_state(t, &mut source);
                    last_src_t = t;
                }
                rhs.eval_against(t, y, &source, out)
            })?
        };
        let next = make_traj(times, states);
        let residual = pairing_residual(rhs, &current, &next, &metric);
        residuals.push(residual);
        current = next;
        if residual < tol {
            return Ok((
                current,
                PicardInfo {
                    iterations: iter,
                    residuals,
                },
            ));
        }
    }
    Err(SolverError::NonConvergence {
        iterations: max_iter,
        residual: residuals.last().copied().unwrap_or(f64::INFINITY),
    })
}

/// Upper bound on `sup_t d_inf(a_t, b_t)` by pairing atoms with equal index:
/// each pair contributes at most the two-atom bounded-Lipschitz value.
fn pairing_residual(
    rhs: &Rhs,
    a: &EnsembleTrajectory,
    b: &EnsembleTrajectory,
    metric: &Metric,
) -> f64 {
    let r2 = rhs.model.r2;
    let n = rhs.n;
    let m = rhs.partition.len();
    let mut worst = 0.0f64;
    for k in 0..a.times.len().min(b.times.len()) {
        let (sa, sb) = (a.state(k), b.state(k));
        for i in 0..m {
            let mut cell = 0.0;
            for q in 0..n {
                let base = (i * n + q) * r2;
                let d = metric.dist(&sa[base..base + r2], &sb[base..base + r2]);
                cell += 2.0 * d / (2.0 + d);
            }
            worst = worst.max(rhs.a[i] / n as f64 * cell);
        }
    }
    worst
}
