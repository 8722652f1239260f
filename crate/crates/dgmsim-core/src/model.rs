//! The application models: coupling kernels, intrinsic fields, invariant
//! regions, the discrete Vlasov operator, and the Bony boundary-flux check.
//!
//! Each built-in model fixes the coupling kernels `g_l(t, psi, phi)` (psi is
//! the other particle's state, phi one's own), the intrinsic field
//! `h(t, x, phi)`, and a convex compact invariant region `Y`. Positive
//! invariance rests on Bony's condition: the field never points outward
//! through the boundary of `Y`. `bony_check` probes that condition by
//! sampling boundary points and admissible ensembles; it is a diagnostic,
//! not a proof.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dgm::DiscretizedDGM;
use crate::float;
use crate::vertex::Partition;

pub type Params = BTreeMap<String, f64>;

#[derive(Debug, thiserror::Error)]
pub enum ModelError {
    #[error("unknown model `{0}` (built in: kuramoto, sis, seirs, lotka-volterra, hegselmann-krause)")]
    UnknownModel(String),
    #[error("parameter constraint violated: {0}")]
    ConstraintViolated(String),
    #[error("parameter `{0}` must be finite")]
    BadParam(String),
    #[error("invariant region has an empty vertex set")]
    EmptyRegion,
    #[error("digraph atom {atom:?} lies outside every partition cell")]
    AtomOutsideCells { atom: Vec<f64> },
    #[error("cell index {index} out of range ({cells} cells)")]
    CellOutOfRange { index: usize, cells: usize },
    #[error("kernel `{0}` failed the sampled Lipschitz check (ratio {1:.3e} at scale {2:.1e})")]
    KernelNotLipschitz(String, f64, f64),
}

type KernelFn = Arc<dyn Fn(f64, &[f64], &[f64]) -> Vec<f64> + Send + Sync>;
type FieldFn = Arc<dyn Fn(f64, &[f64], &[f64]) -> Vec<f64> + Send + Sync>;

/// Pairwise coupling kernel `g(t, psi, phi)`.
#[derive(Clone)]
pub enum CouplingKernel {
    /// `sin(psi - phi)` (one-dimensional phase coupling).
    KuramotoSin,
    /// Mass-action transmission `beta0 * psi[i] * phi[s]` flowing mass from
    /// component `minus` to component `plus`. Vanishes when either factor is
    /// zero, as disease transmission must.
    Transmission {
        beta0: f64,
        infected_of_psi: usize,
        susceptible_of_phi: usize,
        minus: usize,
        plus: usize,
    },
    /// `w * (psi[c] - phi[c])` into component `c`; the odd coupling
    /// `W(u) = w u` with `0 <= w <= 1`.
    LinearDiffusion { w: f64, component: usize },
    /// `G(|psi - phi|) (psi - phi)` with the smoothed bounded-confidence
    /// interaction `G(u) = g0 * max(0, 1 - u/radius)^2`.
    BoundedConfidence { g0: f64, radius: f64 },
    Zero,
    Custom { name: String, eval: KernelFn },
}

impl CouplingKernel {
    pub fn eval_add(&self, t: f64, psi: &[f64], phi: &[f64], scale: f64, out: &mut [f64]) {
        match self {
            CouplingKernel::KuramotoSin => {
                out[0] += scale * float::sin(psi[0] - phi[0]);
            }
            CouplingKernel::Transmission {
                beta0,
                infected_of_psi,
                susceptible_of_phi,
                minus,
                plus,
            } => {
                let v = beta0 * psi[*infected_of_psi] * phi[*susceptible_of_phi];
                out[*minus] -= scale * v;
                out[*plus] += scale * v;
            }
            CouplingKernel::LinearDiffusion { w, component } => {
                out[*component] += scale * w * (psi[*component] - phi[*component]);
            }
            CouplingKernel::BoundedConfidence { g0, radius } => {
                let dist: f64 = psi
                    .iter()
                    .zip(phi)
                    .map(|(a, b)| float::abs(a - b))
                    .sum();
                let u = 1.0 - dist / radius;
                if u > 0.0 {
                    let g = g0 * u * u;
                    for (d, o) in out.iter_mut().enumerate() {
                        *o += scale * g * (psi[d] - phi[d]);
                    }
                }
            }
            CouplingKernel::Zero => {}
            CouplingKernel::Custom { eval, .. } => {
                let v = eval(t, psi, phi);
                for (o, vi) in out.iter_mut().zip(v) {
                    *o += scale * vi;
                }
            }
        }
    }

    pub fn name(&self) -> &str {
        match self {
            CouplingKernel::KuramotoSin => "kuramoto-sin",
            CouplingKernel::Transmission { .. } => "transmission",
            CouplingKernel::LinearDiffusion { .. } => "linear-diffusion",
            CouplingKernel::BoundedConfidence { .. } => "bounded-confidence",
            CouplingKernel::Zero => "zero",
            CouplingKernel::Custom { name, .. } => name,
        }
    }
}

/// Intrinsic field `h(t, x, phi)`.
#[derive(Clone)]
pub enum IntrinsicField {
    Zero,
    /// Constant drift (natural frequencies).
    Constant(Vec<f64>),
    /// SIS recovery `gamma0 * I` moving mass from I back to S.
    SisRecovery { gamma0: f64 },
    /// SEIRS demography: inflow `lambda`, latency `iota0 E`, recovery
    /// `gamma0 I`, loss of immunity `sigma0 R`, death rates `d[i]`.
    SeirsDemography {
        lambda: f64,
        iota0: f64,
        gamma0: f64,
        sigma0: f64,
        d: [f64; 4],
    },
    /// Per-patch logistic prey/predator terms.
    LotkaVolterra {
        alpha: f64,
        beta: f64,
        gamma: f64,
        iota: f64,
        sigma: f64,
        theta: f64,
    },
    /// `-rate * phi` (validation model with a closed-form solution).
    LinearDecay { rate: f64 },
    Custom { name: String, eval: FieldFn },
}

impl IntrinsicField {
    pub fn eval_add(&self, t: f64, x: &[f64], phi: &[f64], scale: f64, out: &mut [f64]) {
        match self {
            IntrinsicField::Zero => {}
            IntrinsicField::Constant(v) => {
                for (o, vi) in out.iter_mut().zip(v) {
                    *o += scale * vi;
                }
            }
            IntrinsicField::SisRecovery { gamma0 } => {
                let v = gamma0 * phi[1];
                out[0] += scale * v;
                out[1] -= scale * v;
            }
            IntrinsicField::SeirsDemography {
                lambda,
                iota0,
                gamma0,
                sigma0,
                d,
            } => {
                out[0] += scale * (lambda + sigma0 * phi[3] - d[0] * phi[0]);
                out[1] += scale * (-iota0 * phi[1] - d[1] * phi[1]);
                out[2] += scale * (iota0 * phi[1] - gamma0 * phi[2] - d[2] * phi[2]);
                out[3] += scale * (gamma0 * phi[2] - sigma0 * phi[3] - d[3] * phi[3]);
            }
            IntrinsicField::LotkaVolterra {
                alpha,
                beta,
                gamma,
                iota,
                sigma,
                theta,
            } => {
                out[0] += scale * (phi[0] * (alpha - beta * phi[0] - gamma * phi[1]));
                out[1] += scale * (phi[1] * (-iota + sigma * phi[0] - theta * phi[1]));
            }
            IntrinsicField::LinearDecay { rate } => {
                for (o, p) in out.iter_mut().zip(phi) {
                    *o -= scale * rate * p;
                }
            }
            IntrinsicField::Custom { eval, .. } => {
                let v = eval(t, x, phi);
                for (o, vi) in out.iter_mut().zip(v) {
                    *o += scale * vi;
                }
            }
        }
    }
}

/// Convex compact polytope `{ phi : n_k . phi <= c_k }` with unit normals.
#[derive(Clone, Debug)]
pub struct Polytope {
    dim: usize,
    normals: Vec<Vec<f64>>,
    offsets: Vec<f64>,
    vertices: Vec<Vec<f64>>,
}

impl Polytope {
    /// Build from halfspaces `normal . phi <= offset`. Normals are scaled to
    /// unit Euclidean length and the vertex set is enumerated by intersecting
    /// every `dim`-subset of boundary hyperplanes (desk-scale regions only).
    /// The caller must supply a bounded intersection.
    pub fn from_halfspaces(
        dim: usize,
        halfspaces: &[(Vec<f64>, f64)],
    ) -> Result<Self, ModelError> {
        let mut normals = Vec::with_capacity(halfspaces.len());
        let mut offsets = Vec::with_capacity(halfspaces.len());
        for (n, c) in halfspaces {
            let len = float::sqrt(n.iter().map(|x| x * x).sum::<f64>());
            assert!(len > 0.0, "zero normal");
            normals.push(n.iter().map(|x| x / len).collect::<Vec<f64>>());
            offsets.push(c / len);
        }
        let vertices = enumerate_vertices(dim, &normals, &offsets);
        if vertices.is_empty() {
            return Err(ModelError::EmptyRegion);
        }
        Ok(Self {
            dim,
            normals,
            offsets,
            vertices,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn faces(&self) -> usize {
        self.normals.len()
    }

    pub fn normal(&self, face: usize) -> &[f64] {
        &self.normals[face]
    }

    pub fn vertices(&self) -> &[Vec<f64>] {
        &self.vertices
    }

    /// Vertices lying on the given face.
    pub fn face_vertices(&self, face: usize) -> Vec<&Vec<f64>> {
        self.vertices
            .iter()
            .filter(|v| {
                float::abs(dot(&self.normals[face], v) - self.offsets[face]) <= 1e-9
            })
            .collect()
    }

    /// Largest signed distance outside any face (<= 0 inside).
    pub fn violation(&self, phi: &[f64]) -> f64 {
        self.normals
            .iter()
            .zip(&self.offsets)
            .map(|(n, c)| dot(n, phi) - c)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Cyclic projection onto violated halfspaces; adequate for the tiny
    /// overshoots a stable integrator produces.
    pub fn project(&self, phi: &mut [f64]) {
        for _ in 0..200 {
            let mut worst = 0.0;
            let mut idx = None;
            for (k, (n, c)) in self.normals.iter().zip(&self.offsets).enumerate() {
                let v = dot(n, phi) - c;
                if v > worst {
                    worst = v;
                    idx = Some(k);
                }
            }
            let Some(k) = idx else { return };
            if worst <= 1e-13 {
                return;
            }
            for (p, n) in phi.iter_mut().zip(&self.normals[k]) {
                *p -= worst * n;
            }
        }
    }

    /// Random point of the polytope: a convex combination of its vertices.
    pub fn sample(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        let mut weights: Vec<f64> = (0..self.vertices.len())
            .map(|_| -f64::ln_shim(rng.random_range(1e-12..1.0)))
            .collect();
        let total: f64 = weights.iter().sum();
        for w in &mut weights {
            *w /= total;
        }
        let mut p = vec![0.0; self.dim];
        for (w, v) in weights.iter().zip(&self.vertices) {
            for (pi, vi) in p.iter_mut().zip(v) {
                *pi += w * vi;
            }
        }
        p
    }
}

// ln is only used for Dirichlet weights; route through the shim trait so the
// no_std build picks up libm.
trait LnShim {
    fn ln_shim(self) -> f64;
}
impl LnShim for f64 {
    #[cfg(feature = "std")]
    fn ln_shim(self) -> f64 {
        self.ln()
    }
    #[cfg(all(not(feature = "std"), feature = "libm"))]
    fn ln_shim(self) -> f64 {
        libm::log(self)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn enumerate_vertices(dim: usize, normals: &[Vec<f64>], offsets: &[f64]) -> Vec<Vec<f64>> {
    let m = normals.len();
    let mut verts: Vec<Vec<f64>> = Vec::new();
    let mut combo: Vec<usize> = (0..dim).collect();
    if m < dim {
        return verts;
    }
    loop {
        if let Some(p) = solve_square(dim, normals, offsets, &combo) {
            let feasible = normals
                .iter()
                .zip(offsets)
                .all(|(n, c)| dot(n, &p) <= c + 1e-9);
            if feasible && !verts.iter().any(|v| l1(v, &p) <= 1e-9) {
                verts.push(p);
            }
        }
        // next combination
        let mut i = dim;
        loop {
            if i == 0 {
                return verts;
            }
            i -= 1;
            if combo[i] + 1 <= m - (dim - i) {
                combo[i] += 1;
                for j in i + 1..dim {
                    combo[j] = combo[j - 1] + 1;
                }
                break;
            }
        }
    }
}

fn l1(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| float::abs(x - y)).sum()
}

fn solve_square(
    dim: usize,
    normals: &[Vec<f64>],
    offsets: &[f64],
    rows: &[usize],
) -> Option<Vec<f64>> {
    let mut a = vec![0.0; dim * (dim + 1)];
    for (r, &idx) in rows.iter().enumerate() {
        for c in 0..dim {
            a[r * (dim + 1) + c] = normals[idx][c];
        }
        a[r * (dim + 1) + dim] = offsets[idx];
    }
    // Gaussian elimination with partial pivoting.
    for col in 0..dim {
        let mut piv = col;
        for r in col + 1..dim {
            if float::abs(a[r * (dim + 1) + col]) > float::abs(a[piv * (dim + 1) + col]) {
                piv = r;
            }
        }
        if float::abs(a[piv * (dim + 1) + col]) < 1e-12 {
            return None;
        }
        if piv != col {
            for c in 0..=dim {
                a.swap(piv * (dim + 1) + c, col * (dim + 1) + c);
            }
        }
        let d = a[col * (dim + 1) + col];
        for r in 0..dim {
            if r != col {
                let f = a[r * (dim + 1) + col] / d;
                if f != 0.0 {
                    for c in col..=dim {
                        a[r * (dim + 1) + c] -= f * a[col * (dim + 1) + c];
                    }
                }
            }
        }
    }
    Some(
        (0..dim)
            .map(|r| a[r * (dim + 1) + dim] / a[r * (dim + 1) + r])
            .collect(),
    )
}

/// State space of a model: a torus (no boundary) or a convex polytope.
#[derive(Clone, Debug)]
pub enum InvariantRegion {
    Torus { periods: Vec<f64> },
    Polytope(Polytope),
}

impl InvariantRegion {
    pub fn dim(&self) -> usize {
        match self {
            InvariantRegion::Torus { periods } => periods.len(),
            InvariantRegion::Polytope(p) => p.dim(),
        }
    }

    pub fn violation(&self, phi: &[f64]) -> f64 {
        match self {
            InvariantRegion::Torus { .. } => 0.0,
            InvariantRegion::Polytope(p) => p.violation(phi).max(0.0),
        }
    }

    pub fn project(&self, phi: &mut [f64]) {
        if let InvariantRegion::Polytope(p) = self {
            p.project(phi);
        }
    }

    pub fn sample(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        match self {
            InvariantRegion::Torus { periods } => periods
                .iter()
                .map(|p| rng.random_range(0.0..*p))
                .collect(),
            InvariantRegion::Polytope(p) => p.sample(rng),
        }
    }

    /// Wrap periods per coordinate (infinite for polytopes).
    pub fn periods(&self) -> Vec<f64> {
        match self {
            InvariantRegion::Torus { periods } => periods.clone(),
            InvariantRegion::Polytope(p) => vec![f64::INFINITY; p.dim()],
        }
    }

    pub fn state_metric(&self) -> crate::metric::Metric {
        match self {
            InvariantRegion::Torus { periods } => crate::metric::Metric::Torus {
                periods: periods.clone(),
            },
            InvariantRegion::Polytope(_) => crate::metric::Metric::L1,
        }
    }
}

impl core::fmt::Debug for CouplingKernel {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.name())
    }
}

impl core::fmt::Debug for IntrinsicField {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            IntrinsicField::Zero => f.write_str("zero"),
            IntrinsicField::Constant(v) => write!(f, "constant({v:?})"),
            IntrinsicField::SisRecovery { .. } => f.write_str("sis-recovery"),
            IntrinsicField::SeirsDemography { .. } => f.write_str("seirs-demography"),
            IntrinsicField::LotkaVolterra { .. } => f.write_str("lotka-volterra"),
            IntrinsicField::LinearDecay { rate } => write!(f, "linear-decay({rate})"),
            IntrinsicField::Custom { name, .. } => write!(f, "custom({name})"),
        }
    }
}

impl core::fmt::Debug for ModelSpec {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("ModelSpec")
            .field("name", &self.name)
            .field("r2", &self.r2)
            .field("kernels", &self.kernels)
            .field("field", &self.field)
            .finish_non_exhaustive()
    }
}

/// A model: `r` coupling kernels, the intrinsic field, and the invariant
/// region. The kernels line up with the digraph measures at solve time.
#[derive(Clone)]
pub struct ModelSpec {
    pub name: String,
    pub r2: usize,
    pub kernels: Vec<CouplingKernel>,
    pub field: IntrinsicField,
    pub region: InvariantRegion,
    pub params: Params,
}

fn get(params: &Params, key: &str, default: f64) -> Result<f64, ModelError> {
    let v = params.get(key).copied().unwrap_or(default);
    if !v.is_finite() {
        return Err(ModelError::BadParam(String::from(key)));
    }
    Ok(v)
}

impl ModelSpec {
    pub fn custom(
        name: &str,
        r2: usize,
        kernels: Vec<CouplingKernel>,
        field: IntrinsicField,
        region: InvariantRegion,
    ) -> Self {
        Self {
            name: String::from(name),
            r2,
            kernels,
            field,
            region,
            params: Params::new(),
        }
    }

    pub fn r(&self) -> usize {
        self.kernels.len()
    }

    /// Built-in model with parameter validation.
    pub fn builtin(name: &str, params: &Params) -> Result<Self, ModelError> {
        Self::builtin_impl(name, params, true)
    }

    /// Built-in model without the parameter inequalities; used for negative
    /// controls where `bony_check` is expected to flag the region.
    pub fn builtin_unvalidated(name: &str, params: &Params) -> Result<Self, ModelError> {
        Self::builtin_impl(name, params, false)
    }

    fn builtin_impl(name: &str, params: &Params, validate: bool) -> Result<Self, ModelError> {
        match name {
            "kuramoto" => {
                let omega = get(params, "omega", 0.0)?;
                Ok(Self {
                    name: String::from(name),
                    r2: 1,
                    kernels: vec![CouplingKernel::KuramotoSin],
                    field: if omega == 0.0 {
                        IntrinsicField::Zero
                    } else {
                        IntrinsicField::Constant(vec![omega])
                    },
                    region: InvariantRegion::Torus {
                        periods: vec![2.0 * core::f64::consts::PI],
                    },
                    params: params.clone(),
                })
            }
            "sis" => {
                let beta0 = get(params, "beta0", 1.0)?;
                let gamma0 = get(params, "gamma0", 1.0)?;
                let pop = get(params, "pop", 1.0)?;
                if validate {
                    if beta0 < 0.0 || gamma0 < 0.0 {
                        return Err(ModelError::ConstraintViolated(String::from(
                            "beta0 >= 0 and gamma0 >= 0 required",
                        )));
                    }
                    if pop <= 0.0 {
                        return Err(ModelError::ConstraintViolated(String::from(
                            "pop > 0 required",
                        )));
                    }
                }
                let region = Polytope::from_halfspaces(
                    2,
                    &[
                        (vec![-1.0, 0.0], 0.0),
                        (vec![0.0, -1.0], 0.0),
                        (vec![1.0, 1.0], pop),
                        (vec![-1.0, -1.0], -pop),
                    ],
                )?;
                Ok(Self {
                    name: String::from(name),
                    r2: 2,
                    kernels: vec![CouplingKernel::Transmission {
                        beta0,
                        infected_of_psi: 1,
                        susceptible_of_phi: 0,
                        minus: 0,
                        plus: 1,
                    }],
                    field: IntrinsicField::SisRecovery { gamma0 },
                    region: InvariantRegion::Polytope(region),
                    params: params.clone(),
                })
            }
            "seirs" => {
                let beta0 = get(params, "beta0", 1.0)?;
                let iota0 = get(params, "iota0", 1.0)?;
                let gamma0 = get(params, "gamma0", 1.0)?;
                let sigma0 = get(params, "sigma0", 0.5)?;
                let lambda = get(params, "lambda", 1.0)?;
                let d = [
                    get(params, "d1", 0.5)?,
                    get(params, "d2", 0.5)?,
                    get(params, "d3", 0.5)?,
                    get(params, "d4", 0.5)?,
                ];
                let dmin = d.iter().cloned().fold(f64::INFINITY, f64::min);
                if validate && dmin <= 0.0 {
                    return Err(ModelError::ConstraintViolated(String::from(
                        "d(x) = min_i d_i > 0 required",
                    )));
                }
                let m_cap = lambda / dmin;
                let region = Polytope::from_halfspaces(
                    4,
                    &[
                        (vec![-1.0, 0.0, 0.0, 0.0], 0.0),
                        (vec![0.0, -1.0, 0.0, 0.0], 0.0),
                        (vec![0.0, 0.0, -1.0, 0.0], 0.0),
                        (vec![0.0, 0.0, 0.0, -1.0], 0.0),
                        (vec![1.0, 1.0, 1.0, 1.0], m_cap),
                    ],
                )?;
                Ok(Self {
                    name: String::from(name),
                    r2: 4,
                    kernels: vec![CouplingKernel::Transmission {
                        beta0,
                        infected_of_psi: 2,
                        susceptible_of_phi: 0,
                        minus: 0,
                        plus: 1,
                    }],
                    field: IntrinsicField::SeirsDemography {
                        lambda,
                        iota0,
                        gamma0,
                        sigma0,
                        d,
                    },
                    region: InvariantRegion::Polytope(region),
                    params: params.clone(),
                })
            }
            "lotka-volterra" | "lv" => {
                let alpha = get(params, "alpha", 2.0)?;
                let beta = get(params, "beta", 1.0)?;
                let gamma = get(params, "gamma", 0.5)?;
                let iota = get(params, "iota", 1.0)?;
                let sigma = get(params, "sigma", 1.0)?;
                let theta = get(params, "theta", 1.0)?;
                let lambda1 = get(params, "lambda1", 2.0)?;
                let lambda2 = get(params, "lambda2", 1.0)?;
                let w1 = get(params, "w1", 0.5)?;
                let w2 = get(params, "w2", 0.5)?;
                if validate {
                    if beta <= 0.0 || theta <= 0.0 {
                        return Err(ModelError::ConstraintViolated(String::from(
                            "beta > 0 and theta > 0 required",
                        )));
                    }
                    if lambda1 < alpha / beta - 1e-12 {
                        return Err(ModelError::ConstraintViolated(alloc::format!(
                            "lambda1 >= alpha/beta violated: {lambda1} < {}",
                            alpha / beta
                        )));
                    }
                    if lambda2 < -iota / theta + sigma / theta * lambda1 - 1e-12 {
                        return Err(ModelError::ConstraintViolated(alloc::format!(
                            "lambda2 >= -iota/theta + (sigma/theta) lambda1 violated: {lambda2} < {}",
                            -iota / theta + sigma / theta * lambda1
                        )));
                    }
                    if !(0.0..=1.0).contains(&w1) || !(0.0..=1.0).contains(&w2) {
                        return Err(ModelError::ConstraintViolated(String::from(
                            "0 <= w_i <= 1 required so that 0 <= W_i(u) <= u",
                        )));
                    }
                }
                let region = Polytope::from_halfspaces(
                    2,
                    &[
                        (vec![-1.0, 0.0], 0.0),
                        (vec![0.0, -1.0], 0.0),
                        (vec![1.0, 0.0], lambda1),
                        (vec![0.0, 1.0], lambda2),
                    ],
                )?;
                Ok(Self {
                    name: String::from("lotka-volterra"),
                    r2: 2,
                    kernels: vec![
                        CouplingKernel::LinearDiffusion { w: w1, component: 0 },
                        CouplingKernel::LinearDiffusion { w: w2, component: 1 },
                    ],
                    field: IntrinsicField::LotkaVolterra {
                        alpha,
                        beta,
                        gamma,
                        iota,
                        sigma,
                        theta,
                    },
                    region: InvariantRegion::Polytope(region),
                    params: params.clone(),
                })
            }
            "hegselmann-krause" | "hk" => {
                let g0 = get(params, "g0", 1.0)?;
                let radius = get(params, "radius", 0.5)?;
                let lambda = get(params, "lambda", 1.0)?;
                let dim = get(params, "dim", 1.0)? as usize;
                if validate && (radius <= 0.0 || lambda <= 0.0 || g0 < 0.0 || dim == 0) {
                    return Err(ModelError::ConstraintViolated(String::from(
                        "g0 >= 0, radius > 0, lambda > 0, dim >= 1 required",
                    )));
                }
                let mut halfspaces = Vec::with_capacity(2 * dim);
                for i in 0..dim {
                    let mut n = vec![0.0; dim];
                    n[i] = 1.0;
                    halfspaces.push((n.clone(), lambda));
                    n[i] = -1.0;
                    halfspaces.push((n, lambda));
                }
                let region = Polytope::from_halfspaces(dim, &halfspaces)?;
                Ok(Self {
                    name: String::from("hegselmann-krause"),
                    r2: dim,
                    kernels: vec![CouplingKernel::BoundedConfidence { g0, radius }],
                    field: IntrinsicField::Zero,
                    region: InvariantRegion::Polytope(region),
                    params: params.clone(),
                })
            }
            other => Err(ModelError::UnknownModel(String::from(other))),
        }
    }
}

/// Borrowed view of an ensemble at one instant: `n` particles per cell with
/// cell weights `a_i`, states flattened as `cell * n * r2`.
#[derive(Clone, Copy)]
pub struct ParticleView<'a> {
    pub partition: &'a Partition,
    pub n: usize,
    pub r2: usize,
    pub a: &'a [f64],
    pub states: &'a [f64],
}

impl<'a> ParticleView<'a> {
    pub fn particle(&self, cell: usize, q: usize) -> &'a [f64] {
        let base = (cell * self.n + q) * self.r2;
        &self.states[base..base + self.r2]
    }
}

/// The fully discrete Vlasov operator at `(t, x_i, phi)`:
/// `sum_l sum_j w_{l,i,j} (a_p/n) sum_q g_l(t, phi_{pq}, phi) + h(t, x_i, phi)`
/// where `w_{l,i,j}` is the weight of the j-th atom of the l-th digraph
/// block over cell `i` and `p` the cell containing that atom.
pub fn vlasov_operator(
    model: &ModelSpec,
    dgms: &[DiscretizedDGM],
    view: &ParticleView<'_>,
    t: f64,
    cell: usize,
    phi: &[f64],
) -> Result<Vec<f64>, ModelError> {
    if cell >= view.partition.len() {
        return Err(ModelError::CellOutOfRange {
            index: cell,
            cells: view.partition.len(),
        });
    }
    let mut out = vec![0.0; model.r2];
    for (kernel, dgm) in model.kernels.iter().zip(dgms) {
        let block = dgm.block(cell);
        for j in 0..block.len() {
            let y = block.atom(j);
            let p = view
                .partition
                .locate(y)
                .ok_or_else(|| ModelError::AtomOutsideCells { atom: y.to_vec() })?;
            let coef = block.weight(j) * view.a[p] / view.n as f64;
            if coef == 0.0 {
                continue;
            }
            for q in 0..view.n {
                kernel.eval_add(t, view.particle(p, q), phi, coef, &mut out);
            }
        }
    }
    model
        .field
        .eval_add(t, view.partition.representative(cell).coords(), phi, 1.0, &mut out);
    Ok(out)
}

/// One offending sample from a Bony check.
#[derive(Clone, Debug)]
pub struct BonyCase {
    pub face: usize,
    pub cell: usize,
    pub point: Vec<f64>,
    pub flux: f64,
}

/// Outcome of sampling the boundary flux condition.
#[derive(Clone, Debug)]
pub struct BonyReport {
    pub pass: bool,
    /// True when the region has no boundary (torus states).
    pub skipped: bool,
    pub max_flux: f64,
    pub tolerance: f64,
    pub samples: usize,
    pub worst: Option<BonyCase>,
}

/// Sample Bony's condition `V . nu(phi) <= 0` on the boundary of the model's
/// invariant region: boundary points are face vertices plus random convex
/// combinations, ensembles are vertex-concentrated plus random admissible
/// ones. Report-only; sampling cannot prove invariance, only refute it.
pub fn bony_check(
    model: &ModelSpec,
    dgms: &[DiscretizedDGM],
    partition: &Partition,
    samples: usize,
    seed: u64,
) -> Result<BonyReport, ModelError> {
    let tolerance = 1e-9;
    let poly = match &model.region {
        InvariantRegion::Torus { .. } => {
            return Ok(BonyReport {
                pass: true,
                skipped: true,
                max_flux: 0.0,
                tolerance,
                samples: 0,
                worst: None,
            })
        }
        InvariantRegion::Polytope(p) => p.clone(),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = partition.len();
    let n = 4usize;
    let r2 = model.r2;

    // Admissible ensembles: concentrated at each region vertex, then random.
    let mut ensembles: Vec<(Vec<f64>, Vec<f64>)> = Vec::new();
    let masses = partition.masses();
    let mass_total: f64 = masses.iter().sum();
    let uniform_a = vec![1.0 / mass_total; m];
    for v in poly.vertices() {
        let mut states = Vec::with_capacity(m * n * r2);
        for _ in 0..m * n {
            states.extend_from_slice(v);
        }
        ensembles.push((uniform_a.clone(), states));
    }
    for _ in 0..samples {
        let mut states = Vec::with_capacity(m * n * r2);
        for _ in 0..m * n {
            states.extend(poly.sample(&mut rng));
        }
        let mut raw: Vec<f64> = (0..m).map(|_| rng.random_range(0.1..1.0)).collect();
        let norm: f64 = raw.iter().zip(masses).map(|(u, mu)| u * mu).sum();
        for u in &mut raw {
            *u /= norm;
        }
        ensembles.push((raw, states));
    }

    let mut max_flux = f64::NEG_INFINITY;
    let mut worst = None;
    let mut checked = 0usize;
    for face in 0..poly.faces() {
        let fv = poly.face_vertices(face);
        if fv.is_empty() {
            continue;
        }
        let mut points: Vec<Vec<f64>> = fv.iter().map(|v| (*v).clone()).collect();
        for _ in 0..samples {
            // Random convex combination of the face's vertices.
            let mut ws: Vec<f64> = (0..fv.len())
                .map(|_| rng.random_range(1e-6..1.0))
                .collect();
            let total: f64 = ws.iter().sum();
            for w in &mut ws {
                *w /= total;
            }
            let mut p = vec![0.0; r2];
            for (w, v) in ws.iter().zip(&fv) {
                for (pi, vi) in p.iter_mut().zip(*v) {
                    *pi += w * vi;
                }
            }
            points.push(p);
        }
        for point in &points {
            for (a, states) in &ensembles {
                let view = ParticleView {
                    partition,
                    n,
                    r2,
                    a,
                    states,
                };
                for cell in 0..m {
                    let v = vlasov_operator(model, dgms, &view, 0.0, cell, point)?;
                    let flux = dot(poly.normal(face), &v);
                    checked += 1;
                    if flux > max_flux {
                        max_flux = flux;
                        worst = Some(BonyCase {
                            face,
                            cell,
                            point: point.clone(),
                            flux,
                        });
                    }
                }
            }
        }
    }
    Ok(BonyReport {
        pass: max_flux <= tolerance,
        skipped: false,
        max_flux,
        tolerance,
        samples: checked,
        worst,
    })
}

/// Sampled Lipschitz constants of the kernels and the field over the
/// invariant region (finite differences at global and local scales).
#[derive(Clone, Debug)]
pub struct LipschitzEstimate {
    pub g: Vec<f64>,
    pub h: f64,
}

pub fn sampled_kernel_lipschitz(
    model: &ModelSpec,
    x_samples: &[&[f64]],
    pairs: usize,
    seed: u64,
) -> LipschitzEstimate {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let r2 = model.r2;
    let mut g = vec![0.0f64; model.kernels.len()];
    let mut h = 0.0f64;
    let mut out1 = vec![0.0f64; r2];
    let mut out2 = vec![0.0f64; r2];
    for _ in 0..pairs {
        let psi1 = model.region.sample(&mut rng);
        let phi1 = model.region.sample(&mut rng);
        for scale in [0.0, 1e-3, 1e-6] {
            let (psi2, phi2) = if scale == 0.0 {
                (model.region.sample(&mut rng), model.region.sample(&mut rng))
            } else {
                let perturb = |v: &[f64], rng: &mut ChaCha8Rng| {
                    let mut w: Vec<f64> = v.to_vec();
                    for x in &mut w {
                        *x += rng.random_range(-1.0..1.0) * scale;
                    }
                    let mut c = w.clone();
                    model.region.project(&mut c);
                    c
                };
                (perturb(&psi1, &mut rng), perturb(&phi1, &mut rng))
            };
            let denom = l1(&psi1, &psi2) + l1(&phi1, &phi2);
            if denom < 1e-14 {
                continue;
            }
            for (k, kernel) in model.kernels.iter().enumerate() {
                out1.iter_mut().for_each(|v| *v = 0.0);
                out2.iter_mut().for_each(|v| *v = 0.0);
                kernel.eval_add(0.0, &psi1, &phi1, 1.0, &mut out1);
                kernel.eval_add(0.0, &psi2, &phi2, 1.0, &mut out2);
                g[k] = g[k].max(l1(&out1, &out2) / denom);
            }
            let denom_phi = l1(&phi1, &phi2);
            if denom_phi > 1e-14 {
                for x in x_samples {
                    out1.iter_mut().for_each(|v| *v = 0.0);
                    out2.iter_mut().for_each(|v| *v = 0.0);
                    model.field.eval_add(0.0, x, &phi1, 1.0, &mut out1);
                    model.field.eval_add(0.0, x, &phi2, 1.0, &mut out2);
                    h = h.max(l1(&out1, &out2) / denom_phi);
                }
            }
        }
    }
    LipschitzEstimate { g, h }
}

/// The Lipschitz constant `L1 = ||nu|| sum_l L(g_l) ||eta^l|| + L(h)` of the
/// Vlasov operator in `phi`, from sampled kernel constants and the
/// discretized masses (`||nu|| = max_i a_i`, `||eta^l|| = max_i b_{l,i}`).
pub fn vlasov_l1_bound(lip: &LipschitzEstimate, dgms: &[DiscretizedDGM], nu_norm: f64) -> f64 {
    let coupling: f64 = lip
        .g
        .iter()
        .zip(dgms)
        .map(|(lg, dgm)| {
            let eta_norm = dgm.weights().iter().cloned().fold(0.0f64, f64::max);
            lg * eta_norm
        })
        .sum();
    nu_norm * coupling + lip.h
}

/// Max finite-difference ratio of every kernel at one perturbation scale.
fn kernel_ratio_at_scale(model: &ModelSpec, pairs: usize, scale: f64, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let r2 = model.r2;
    let mut worst = vec![0.0f64; model.kernels.len()];
    let mut out1 = vec![0.0f64; r2];
    let mut out2 = vec![0.0f64; r2];
    for pair in 0..pairs {
        let psi1 = model.region.sample(&mut rng);
        // Every other probe sits at a near-coincidence psi ~= phi, where
        // cusp-type kernels reveal themselves.
        let phi1 = if pair % 2 == 0 {
            model.region.sample(&mut rng)
        } else {
            let mut p = psi1.clone();
            for x in p.iter_mut() {
                *x += rng.random_range(-1.0..1.0) * scale;
            }
            model.region.project(&mut p);
            p
        };
        let mut psi2 = psi1.clone();
        let mut phi2 = phi1.clone();
        for x in psi2.iter_mut().chain(phi2.iter_mut()) {
            *x += rng.random_range(-1.0..1.0) * scale;
        }
        model.region.project(&mut psi2);
        model.region.project(&mut phi2);
        let denom = l1(&psi1, &psi2) + l1(&phi1, &phi2);
        if denom < 1e-14 {
            continue;
        }
        for (k, kernel) in model.kernels.iter().enumerate() {
            out1.iter_mut().for_each(|v| *v = 0.0);
            out2.iter_mut().for_each(|v| *v = 0.0);
            kernel.eval_add(0.0, &psi1, &phi1, 1.0, &mut out1);
            kernel.eval_add(0.0, &psi2, &phi2, 1.0, &mut out2);
            worst[k] = worst[k].max(l1(&out1, &out2) / denom);
        }
    }
    worst
}

/// Heuristic guard for user-registered kernels: the sampled difference ratio
/// of a locally Lipschitz kernel stays flat as the probe scale shrinks; a
/// blow-up marks a cusp.
pub fn validate_kernel_lipschitz(
    model: &ModelSpec,
    pairs: usize,
    seed: u64,
) -> Result<LipschitzEstimate, ModelError> {
    let coarse = kernel_ratio_at_scale(model, pairs, 1e-2, seed);
    let fine = kernel_ratio_at_scale(model, pairs, 1e-8, seed.wrapping_add(1));
    for (k, kernel) in model.kernels.iter().enumerate() {
        if fine[k] > 50.0 * coarse[k] + 10.0 {
            return Err(ModelError::KernelNotLipschitz(
                String::from(kernel.name()),
                fine[k],
                1e-8,
            ));
        }
    }
    let reps: Vec<Vec<f64>> = vec![vec![0.0; 1]];
    let refs: Vec<&[f64]> = reps.iter().map(|v| v.as_slice()).collect();
    Ok(sampled_kernel_lipschitz(model, &refs, pairs, seed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dgm::{catalog, discretize_dgm};
    use crate::quantile::QuantileRule;
    use crate::vertex::{make_partition, VertexSpace};

    #[test]
    fn kuramoto_kernel_is_a_plain_sine() {
        let model = ModelSpec::builtin("kuramoto", &Params::new()).unwrap();
        let mut out = [0.0];
        model.kernels[0].eval_add(0.0, &[1.2], &[0.5], 1.0, &mut out);
        assert!((out[0] - (1.2f64 - 0.5).sin()).abs() < 1e-15);
        assert!(matches!(model.field, IntrinsicField::Zero));
    }

    #[test]
    fn sis_transmission_vanishes_without_contact() {
        let model = ModelSpec::builtin("sis", &Params::new()).unwrap();
        let mut out = [0.0, 0.0];
        // No infected neighbours: beta(t, 0, S) = 0.
        model.kernels[0].eval_add(0.0, &[0.3, 0.0], &[0.7, 0.3], 1.0, &mut out);
        assert_eq!(out, [0.0, 0.0]);
        // No susceptibles at home: beta(t, I, 0) = 0.
        model.kernels[0].eval_add(0.0, &[0.3, 0.5], &[0.0, 1.0], 1.0, &mut out);
        assert_eq!(out, [0.0, 0.0]);
    }

    #[test]
    fn sis_kernel_and_field_conserve_mass_exactly() {
        let model = ModelSpec::builtin("sis", &Params::new()).unwrap();
        let mut out = [0.0, 0.0];
        model.kernels[0].eval_add(0.3, &[0.2, 0.8], &[0.6, 0.4], 0.137, &mut out);
        model.field.eval_add(0.3, &[0.5], &[0.6, 0.4], 1.0, &mut out);
        assert_eq!(out[0] + out[1], 0.0);
    }

    #[test]
    fn lv_with_zero_coupling_reduces_to_the_local_field() {
        let mut p = Params::new();
        p.insert(String::from("w1"), 0.0);
        p.insert(String::from("w2"), 0.0);
        let model = ModelSpec::builtin("lv", &p).unwrap();
        let mut out = [0.0, 0.0];
        for k in &model.kernels {
            k.eval_add(0.0, &[1.0, 0.5], &[0.3, 0.2], 1.0, &mut out);
        }
        assert_eq!(out, [0.0, 0.0]);
    }

    #[test]
    fn lv_parameter_constraints_are_named() {
        let mut p = Params::new();
        p.insert(String::from("alpha"), 2.0);
        p.insert(String::from("beta"), 1.0);
        p.insert(String::from("lambda1"), 1.0); // < alpha/beta = 2
        let err = ModelSpec::builtin("lv", &p).unwrap_err();
        let msg = alloc::format!("{err}");
        assert!(msg.contains("lambda1"), "message: {msg}");
        assert!(ModelSpec::builtin_unvalidated("lv", &p).is_ok());
    }

    #[test]
    fn sis_region_is_the_simplex_segment() {
        let model = ModelSpec::builtin("sis", &Params::new()).unwrap();
        let InvariantRegion::Polytope(p) = &model.region else {
            panic!()
        };
        let mut verts: Vec<Vec<f64>> = p.vertices().to_vec();
        verts.sort_by(|a, b| a[0].total_cmp(&b[0]));
        assert_eq!(verts.len(), 2);
        assert!(l1(&verts[0], &[0.0, 1.0]) < 1e-9);
        assert!(l1(&verts[1], &[1.0, 0.0]) < 1e-9);
    }

    #[test]
    fn vlasov_operator_cancels_on_symmetric_kuramoto_phases() {
        let mut p = Params::new();
        p.insert(String::from("omega"), 0.7);
        let model = ModelSpec::builtin("kuramoto", &p).unwrap();
        let part = make_partition(VertexSpace::Circle, 4).unwrap();
        let ring = catalog("ring").unwrap();
        let dgm = discretize_dgm(&ring, &part, 6, QuantileRule::Grid).unwrap();
        // n-th roots of unity in every cell.
        let n = 6;
        let mut states = Vec::new();
        for _ in 0..part.len() {
            for q in 0..n {
                states.push(2.0 * core::f64::consts::PI * q as f64 / n as f64);
            }
        }
        let a = vec![1.0; 4];
        let view = ParticleView {
            partition: &part,
            n,
            r2: 1,
            a: &a,
            states: &states,
        };
        for cell in 0..4 {
            let v = vlasov_operator(&model, core::slice::from_ref(&dgm), &view, 0.0, cell, &[0.9])
                .unwrap();
            assert!((v[0] - 0.7).abs() < 1e-12, "coupling should cancel: {v:?}");
        }
    }

    #[test]
    fn vlasov_operator_without_infection_is_the_field() {
        let model = ModelSpec::builtin("sis", &Params::new()).unwrap();
        let part = make_partition(VertexSpace::Interval, 2).unwrap();
        let tent = catalog("tent").unwrap();
        let dgm = discretize_dgm(&tent, &part, 3, QuantileRule::Grid).unwrap();
        let n = 3;
        // Every particle fully susceptible: (1, 0).
        let mut states = Vec::new();
        for _ in 0..part.len() * n {
            states.extend_from_slice(&[1.0, 0.0]);
        }
        let a = vec![1.0; 2];
        let view = ParticleView {
            partition: &part,
            n,
            r2: 2,
            a: &a,
            states: &states,
        };
        let phi = [0.4, 0.6];
        let v = vlasov_operator(&model, core::slice::from_ref(&dgm), &view, 0.0, 0, &phi).unwrap();
        // gamma0 * I * (1, -1) with gamma0 = 1, I = 0.6.
        assert!((v[0] - 0.6).abs() < 1e-12);
        assert!((v[1] + 0.6).abs() < 1e-12);
    }

    #[test]
    fn hk_fixed_point_at_a_common_opinion() {
        let model = ModelSpec::builtin("hk", &Params::new()).unwrap();
        let part = make_partition(VertexSpace::Circle, 2).unwrap();
        let g = catalog("circle-graphop").unwrap();
        let dgm = discretize_dgm(&g, &part, 4, QuantileRule::Grid).unwrap();
        let n = 4;
        let states = vec![0.25; part.len() * n];
        let a = vec![1.0; part.len()];
        let view = ParticleView {
            partition: &part,
            n,
            r2: 1,
            a: &a,
            states: &states,
        };
        let v = vlasov_operator(&model, core::slice::from_ref(&dgm), &view, 0.0, 1, &[0.25]).unwrap();
        assert_eq!(v[0], 0.0);
    }

    #[test]
    fn bony_passes_for_the_builtin_models() {
        // SIS on the discrete DGM.
        let model = ModelSpec::builtin("sis", &Params::new()).unwrap();
        let part = make_partition(VertexSpace::Discrete, 3).unwrap();
        let dgm = discretize_dgm(&catalog("discrete").unwrap(), &part, 4, QuantileRule::Grid)
            .unwrap();
        let rep = bony_check(&model, core::slice::from_ref(&dgm), &part, 8, 7).unwrap();
        assert!(rep.pass, "sis flux {}", rep.max_flux);

        // SEIRS on the tent DGM.
        let model = ModelSpec::builtin("seirs", &Params::new()).unwrap();
        let part = make_partition(VertexSpace::Interval, 3).unwrap();
        let dgm =
            discretize_dgm(&catalog("tent").unwrap(), &part, 4, QuantileRule::Grid).unwrap();
        let rep = bony_check(&model, core::slice::from_ref(&dgm), &part, 8, 11).unwrap();
        assert!(rep.pass, "seirs flux {}", rep.max_flux);

        // Lotka-Volterra with two DGMs.
        let model = ModelSpec::builtin("lv", &Params::new()).unwrap();
        let part = make_partition(VertexSpace::Interval, 3).unwrap();
        let d1 =
            discretize_dgm(&catalog("tent").unwrap(), &part, 4, QuantileRule::Grid).unwrap();
        let d2 =
            discretize_dgm(&catalog("star").unwrap(), &part, 4, QuantileRule::Grid).unwrap();
        let rep = bony_check(&model, &[d1, d2], &part, 8, 13).unwrap();
        assert!(rep.pass, "lv flux {}", rep.max_flux);

        // Hegselmann-Krause on the circle graphop.
        let model = ModelSpec::builtin("hk", &Params::new()).unwrap();
        let part = make_partition(VertexSpace::Circle, 3).unwrap();
        let dgm = discretize_dgm(
            &catalog("circle-graphop").unwrap(),
            &part,
            4,
            QuantileRule::Grid,
        )
        .unwrap();
        let rep = bony_check(&model, core::slice::from_ref(&dgm), &part, 8, 17).unwrap();
        assert!(rep.pass, "hk flux {}", rep.max_flux);

        // Kuramoto: torus, nothing to check.
        let model = ModelSpec::builtin("kuramoto", &Params::new()).unwrap();
        let rep = bony_check(&model, &[], &part, 8, 19).unwrap();
        assert!(rep.pass && rep.skipped);
    }

    #[test]
    fn bony_flags_the_lv_negative_control() {
        let mut p = Params::new();
        p.insert(String::from("alpha"), 2.0);
        p.insert(String::from("beta"), 1.0);
        p.insert(String::from("lambda1"), 1.0); // alpha/(2 beta) < alpha/beta
        p.insert(String::from("lambda2"), 1.0);
        let model = ModelSpec::builtin_unvalidated("lv", &p).unwrap();
        let part = make_partition(VertexSpace::Interval, 2).unwrap();
        let d1 =
            discretize_dgm(&catalog("tent").unwrap(), &part, 4, QuantileRule::Grid).unwrap();
        let d2 =
            discretize_dgm(&catalog("star").unwrap(), &part, 4, QuantileRule::Grid).unwrap();
        let rep = bony_check(&model, &[d1, d2], &part, 8, 23).unwrap();
        assert!(!rep.pass);
        // Positive flux at the prey cap: Lambda1 (alpha - beta Lambda1) = 1.
        assert!(rep.max_flux > 0.5, "flux {}", rep.max_flux);
    }

    #[test]
    fn sampled_lipschitz_brackets_the_sine_kernel() {
        let model = ModelSpec::builtin("kuramoto", &Params::new()).unwrap();
        let x = [0.0];
        let lip = sampled_kernel_lipschitz(&model, &[&x], 200, 3);
        assert!(lip.g[0] <= 1.0 + 1e-9, "sin is 1-Lipschitz, got {}", lip.g[0]);
        assert!(lip.g[0] > 0.8, "sampler should come close, got {}", lip.g[0]);
        assert_eq!(lip.h, 0.0);
    }

    #[test]
    fn custom_kernel_guard_accepts_lipschitz_rejects_rough() {
        let smooth = ModelSpec::custom(
            "smooth",
            1,
            vec![CouplingKernel::Custom {
                name: String::from("tanh-like"),
                eval: Arc::new(|_t, psi: &[f64], phi: &[f64]| {
                    vec![(psi[0] - phi[0]) / (1.0 + (psi[0] - phi[0]).abs())]
                }),
            }],
            IntrinsicField::Zero,
            InvariantRegion::Polytope(
                Polytope::from_halfspaces(1, &[(vec![1.0], 1.0), (vec![-1.0], 1.0)]).unwrap(),
            ),
        );
        assert!(validate_kernel_lipschitz(&smooth, 100, 5).is_ok());

        let rough = ModelSpec::custom(
            "rough",
            1,
            vec![CouplingKernel::Custom {
                name: String::from("sqrt-cusp"),
                eval: Arc::new(|_t, psi: &[f64], phi: &[f64]| {
                    vec![(psi[0] - phi[0]).abs().sqrt()]
                }),
            }],
            IntrinsicField::Zero,
            InvariantRegion::Polytope(
                Polytope::from_halfspaces(1, &[(vec![1.0], 1.0), (vec![-1.0], 1.0)]).unwrap(),
            ),
        );
        assert!(validate_kernel_lipschitz(&rough, 100, 5).is_err());
    }
}
