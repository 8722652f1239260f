//! The digraph-measure catalog and its piecewise-constant discretization.
//!
//! A digraph measure maps every vertex `x` to a finite positive measure on
//! the vertex space; the catalog collects the limits of the classical graph
//! sequences (ring, star, binary tree) and the continuous examples (circle
//! graphop, spherical graphop, tent, Cantor, triangle, discrete-harmonic).
//!
//! Discretization replaces the fiber over each partition cell `A_i` by the
//! `n`-atom empirical approximation of the fiber at the cell representative,
//! weighted by the cell-averaged fiber mass
//! `b_i = (1/mu(A_i)) * integral_{A_i} ||eta_x|| dmu` (the representative's
//! mass when the cell is reference-measure null).

use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::distance::{bl_distance_cfg, BlConfig, DistanceError};
use crate::float;
use crate::measure::{DiscreteMeasure, FiberFunction, MeasureError};
use crate::quantile::{empirical_approximation, MeasureDescriptor, QuantileRule};
use crate::vertex::{integrate_cell, Partition, VertexSpace};

#[derive(Debug, thiserror::Error)]
pub enum DgmError {
    #[error("unknown digraph measure `{0}` (catalog: ring, star, binary-tree, circle-graphop, spherical, tent, cantor, triangle, discrete)")]
    UnknownName(String),
    #[error("digraph measure lives on {dgm:?} but the partition covers {partition:?}")]
    SpaceMismatch {
        dgm: VertexSpace,
        partition: VertexSpace,
    },
    #[error("cell {cell} has averaged mass {b} but a zero fiber at its representative")]
    DegenerateFiber { cell: usize, b: f64 },
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error(transparent)]
    Distance(#[from] DistanceError),
}

type FiberRule = Box<dyn Fn(&[f64]) -> MeasureDescriptor + Send + Sync>;

enum Rule {
    Ring,
    Star,
    BinaryTree,
    CircleGraphop,
    Spherical,
    Tent,
    Cantor,
    Triangle,
    Discrete,
    Custom { name: String, rule: FiberRule },
}

/// A digraph measure: a vertex space together with the fiber rule `x -> eta_x`.
pub struct DigraphMeasure {
    space: VertexSpace,
    rule: Rule,
}

/// Catalog lookup by name.
pub fn catalog(name: &str) -> Result<DigraphMeasure, DgmError> {
    let (space, rule) = match name {
        "ring" => (VertexSpace::Circle, Rule::Ring),
        "star" => (VertexSpace::Interval, Rule::Star),
        "binary-tree" => (VertexSpace::Interval, Rule::BinaryTree),
        "circle-graphop" => (VertexSpace::Circle, Rule::CircleGraphop),
        "spherical" => (VertexSpace::Sphere, Rule::Spherical),
        "tent" => (VertexSpace::Interval, Rule::Tent),
        "cantor" => (VertexSpace::Circle, Rule::Cantor),
        "triangle" => (VertexSpace::Triangle, Rule::Triangle),
        "discrete" => (VertexSpace::Discrete, Rule::Discrete),
        other => return Err(DgmError::UnknownName(String::from(other))),
    };
    Ok(DigraphMeasure { space, rule })
}

impl DigraphMeasure {
    /// A user-supplied fiber rule on the given space.
    pub fn custom(
        space: VertexSpace,
        name: &str,
        rule: impl Fn(&[f64]) -> MeasureDescriptor + Send + Sync + 'static,
    ) -> Self {
        DigraphMeasure {
            space,
            rule: Rule::Custom {
                name: String::from(name),
                rule: Box::new(rule),
            },
        }
    }

    pub fn space(&self) -> VertexSpace {
        self.space
    }

    pub fn name(&self) -> &str {
        match &self.rule {
            Rule::Ring => "ring",
            Rule::Star => "star",
            Rule::BinaryTree => "binary-tree",
            Rule::CircleGraphop => "circle-graphop",
            Rule::Spherical => "spherical",
            Rule::Tent => "tent",
            Rule::Cantor => "cantor",
            Rule::Triangle => "triangle",
            Rule::Discrete => "discrete",
            Rule::Custom { name, .. } => name,
        }
    }

    /// The fiber measure at vertex `x`.
    pub fn fiber(&self, x: &[f64]) -> MeasureDescriptor {
        match &self.rule {
            Rule::Ring => MeasureDescriptor::Dirac {
                point: vec![x[0]],
                mass: 2.0,
            },
            // The limit fiber at the hub (x = 0) does not exist; it is
            // completed by the zero measure, so the hub cell contributes no
            // coupling.
            Rule::Star => {
                if x[0] > 0.0 {
                    MeasureDescriptor::Dirac {
                        point: vec![0.0],
                        mass: 1.0,
                    }
                } else {
                    MeasureDescriptor::zero(1)
                }
            }
            Rule::BinaryTree => {
                let mut m = DiscreteMeasure::zero(1);
                if x[0] == 0.0 {
                    m.push(&[0.0], 2.0).unwrap();
                } else if x[0] <= 0.5 {
                    m.push(&[2.0 * x[0]], 2.0).unwrap();
                    m.push(&[x[0] / 2.0], 1.0).unwrap();
                } else {
                    m.push(&[x[0] / 2.0], 1.0).unwrap();
                }
                MeasureDescriptor::Atomic(m)
            }
            Rule::CircleGraphop => {
                let mut m = DiscreteMeasure::zero(1);
                m.push(&[float::fract_unit(x[0] + 0.25)], 1.0).unwrap();
                m.push(&[float::fract_unit(x[0] - 0.25)], 1.0).unwrap();
                MeasureDescriptor::Atomic(m)
            }
            Rule::Spherical => MeasureDescriptor::UniformGreatCircle {
                axis: [x[0], x[1], x[2]],
                mass: 1.0,
            },
            Rule::Tent => {
                let t = x[0];
                if t < 1.0 / 3.0 {
                    MeasureDescriptor::UniformInterval {
                        lo: 1.5 * t,
                        hi: 1.0 - 1.5 * t,
                        mass: 1.0,
                    }
                } else if t <= 2.0 / 3.0 {
                    MeasureDescriptor::Dirac {
                        point: vec![0.5],
                        mass: 1.0,
                    }
                } else {
                    MeasureDescriptor::UniformInterval {
                        lo: 1.5 * (1.0 - t),
                        hi: 1.0 - 1.5 * (1.0 - t),
                        mass: 1.0,
                    }
                }
            }
            Rule::Cantor => MeasureDescriptor::CantorArc {
                start: x[0],
                len: 0.75,
                mass: 1.0,
            },
            Rule::Triangle => {
                let norm = x[0] + x[1];
                if norm <= 0.0 {
                    MeasureDescriptor::zero(2)
                } else {
                    MeasureDescriptor::UniformSegment {
                        a: vec![0.0, 0.0],
                        b: vec![x[0] / norm, x[1] / norm],
                        mass: norm,
                    }
                }
            }
            Rule::Discrete => {
                let v = x[0];
                if v <= 0.0 {
                    return MeasureDescriptor::zero(1);
                }
                let k = (1.0 / v + 0.5) as usize;
                let mut m = DiscreteMeasure::zero(1);
                let w = v / k as f64;
                for j in 1..=k {
                    m.push(&[1.0 / j as f64], w).unwrap();
                }
                MeasureDescriptor::Atomic(m)
            }
            Rule::Custom { rule, .. } => rule(x),
        }
    }

    /// Fiber mass `||eta_x||` without materializing the fiber.
    pub fn fiber_mass(&self, x: &[f64]) -> f64 {
        self.fiber(x).total_mass()
    }
}

/// A discretized digraph measure: per cell, the atom block
/// `(b_i/n) sum_j delta(y_j)`.
#[derive(Clone, Debug)]
pub struct DiscretizedDGM {
    partition: Partition,
    n: usize,
    b: Vec<f64>,
    blocks: Vec<DiscreteMeasure>,
}

impl DiscretizedDGM {
    pub fn partition(&self) -> &Partition {
        &self.partition
    }

    pub fn atoms_per_cell(&self) -> usize {
        self.n
    }

    /// Cell-averaged fiber masses `b_i`.
    pub fn weights(&self) -> &[f64] {
        &self.b
    }

    /// Atom block of cell `i` (empty when `b_i = 0`).
    pub fn block(&self, i: usize) -> &DiscreteMeasure {
        &self.blocks[i]
    }

    pub fn fiber_function(&self) -> FiberFunction {
        FiberFunction::new(
            self.partition.clone(),
            self.blocks.clone(),
            self.partition.space().metric(),
        )
        .expect("one block per cell by construction")
    }
}

/// Discretize a digraph measure on a partition with `n` atoms per cell.
pub fn discretize_dgm(
    eta: &DigraphMeasure,
    partition: &Partition,
    n: usize,
    rule: QuantileRule,
) -> Result<DiscretizedDGM, DgmError> {
    if eta.space() != partition.space() {
        return Err(DgmError::SpaceMismatch {
            dgm: eta.space(),
            partition: partition.space(),
        });
    }
    let mut b = Vec::with_capacity(partition.len());
    let mut blocks = Vec::with_capacity(partition.len());
    for i in 0..partition.len() {
        let rep = partition.representative(i);
        let bi = if partition.mass(i) > 0.0 {
            integrate_cell(partition.space(), partition.cell(i), &mut |x| {
                eta.fiber_mass(x)
            }) / partition.mass(i)
        } else {
            eta.fiber_mass(rep.coords())
        };
        if bi == 0.0 {
            b.push(0.0);
            blocks.push(DiscreteMeasure::zero(eta.space().ambient_dim()));
            continue;
        }
        let fiber = eta.fiber(rep.coords());
        let fiber_mass = fiber.total_mass();
        if fiber_mass <= 0.0 {
            return Err(DgmError::DegenerateFiber { cell: i, b: bi });
        }
        let block = empirical_approximation(&fiber, n, rule)?.scaled(bi / fiber_mass)?;
        b.push(bi);
        blocks.push(block);
    }
    Ok(DiscretizedDGM {
        partition: partition.clone(),
        n,
        b,
        blocks,
    })
}

/// Largest fiberwise bounded-Lipschitz distance over adjacent sample pairs;
/// a sampled stand-in for the continuity modulus of `x -> eta_x`. Fibers are
/// materialized at `resolution` atoms.
pub fn continuity_modulus(
    eta: &DigraphMeasure,
    grid_size: usize,
    resolution: usize,
) -> Result<f64, DgmError> {
    assert!(grid_size >= 2, "need at least two grid points");
    let metric = eta.space().metric();
    let cfg = BlConfig {
        max_atoms: 4 * resolution.max(64),
        merge_tol: 1e-12,
    };
    let sample = |x: &[f64]| -> Result<DiscreteMeasure, DgmError> {
        Ok(empirical_approximation(
            &eta.fiber(x),
            resolution,
            QuantileRule::Grid,
        )?)
    };
    let mut pairs: Vec<(Vec<f64>, Vec<f64>)> = Vec::new();
    match eta.space() {
        VertexSpace::Interval => {
            let g = grid_size;
            for j in 0..g - 1 {
                let a = j as f64 / (g - 1) as f64;
                let b = (j + 1) as f64 / (g - 1) as f64;
                pairs.push((vec![a], vec![b]));
            }
        }
        VertexSpace::Circle => {
            let g = grid_size;
            for j in 0..g {
                let a = j as f64 / g as f64;
                let b = float::fract_unit((j + 1) as f64 / g as f64);
                pairs.push((vec![a], vec![b]));
            }
        }
        VertexSpace::Square => {
            let g = grid_size;
            let at = |i: usize| i as f64 / (g - 1) as f64;
            for i in 0..g {
                for j in 0..g {
                    if i + 1 < g {
                        pairs.push((vec![at(i), at(j)], vec![at(i + 1), at(j)]));
                    }
                    if j + 1 < g {
                        pairs.push((vec![at(i), at(j)], vec![at(i), at(j + 1)]));
                    }
                }
            }
        }
        VertexSpace::Triangle => {
            let g = grid_size;
            let at = |i: usize| i as f64 / g as f64;
            for i in 0..=g {
                for j in 0..=g - i {
                    if i + j < g {
                        pairs.push((vec![at(i), at(j)], vec![at(i + 1), at(j)]));
                        pairs.push((vec![at(i), at(j)], vec![at(i), at(j + 1)]));
                    }
                }
            }
        }
        VertexSpace::Sphere => {
            let g = grid_size;
            let two_pi = 2.0 * core::f64::consts::PI;
            let point = |bi: usize, si: usize| {
                let z = 1.0 - 2.0 * (bi as f64 + 0.5) / g as f64;
                let phi = two_pi * si as f64 / g as f64;
                let r = float::sqrt((1.0 - z * z).max(0.0));
                vec![r * float::cos(phi), r * float::sin(phi), z]
            };
            for bi in 0..g {
                for si in 0..g {
                    pairs.push((point(bi, si), point(bi, (si + 1) % g)));
                    if bi + 1 < g {
                        pairs.push((point(bi, si), point(bi + 1, si)));
                    }
                }
            }
        }
        VertexSpace::Discrete => {
            for k in 1..grid_size {
                pairs.push((vec![1.0 / k as f64], vec![1.0 / (k + 1) as f64]));
            }
        }
    }
    let mut worst = 0.0f64;
    for (a, b) in pairs {
        let d = bl_distance_cfg(&sample(&a)?, &sample(&b)?, &metric, &cfg)?;
        worst = worst.max(d);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vertex::make_partition;

    #[test]
    fn ring_fiber_doubles_the_dirac() {
        let ring = catalog("ring").unwrap();
        let f = ring.fiber(&[0.3]);
        assert!((f.total_mass() - 2.0).abs() < 1e-15);
        let m = empirical_approximation(&f, 3, QuantileRule::Grid).unwrap();
        assert!(m.atoms().all(|a| (a[0] - 0.3).abs() < 1e-15));
    }

    #[test]
    fn binary_tree_fiber_at_inner_vertex() {
        let tree = catalog("binary-tree").unwrap();
        let MeasureDescriptor::Atomic(m) = tree.fiber(&[0.3]) else {
            panic!("tree fibers are atomic")
        };
        assert_eq!(m.len(), 2);
        assert!((m.atom(0)[0] - 0.6).abs() < 1e-15);
        assert!((m.weight(0) - 2.0).abs() < 1e-15);
        assert!((m.atom(1)[0] - 0.15).abs() < 1e-15);
        assert!((m.weight(1) - 1.0).abs() < 1e-15);
        // Leaf side: only the parent edge.
        let MeasureDescriptor::Atomic(m) = tree.fiber(&[0.9]) else {
            panic!()
        };
        assert_eq!(m.len(), 1);
        assert!((m.atom(0)[0] - 0.45).abs() < 1e-15);
    }

    #[test]
    fn circle_graphop_fiber_offsets() {
        let g = catalog("circle-graphop").unwrap();
        let MeasureDescriptor::Atomic(m) = g.fiber(&[0.9]) else {
            panic!()
        };
        let mut atoms: Vec<f64> = m.atoms().map(|a| a[0]).collect();
        atoms.sort_by(f64::total_cmp);
        assert!((atoms[0] - 0.15).abs() < 1e-15);
        assert!((atoms[1] - 0.65).abs() < 1e-15);
    }

    #[test]
    fn star_hub_is_the_zero_measure() {
        let star = catalog("star").unwrap();
        assert_eq!(star.fiber_mass(&[0.0]), 0.0);
        assert_eq!(star.fiber_mass(&[0.4]), 1.0);
    }

    #[test]
    fn unknown_name_is_rejected() {
        assert!(matches!(
            catalog("ring-of-cliques"),
            Err(DgmError::UnknownName(_))
        ));
    }

    #[test]
    fn ring_discretization_m8_n5() {
        let ring = catalog("ring").unwrap();
        let part = make_partition(VertexSpace::Circle, 8).unwrap();
        let disc = discretize_dgm(&ring, &part, 5, QuantileRule::Grid).unwrap();
        for i in 0..8 {
            assert!((disc.weights()[i] - 2.0).abs() < 1e-9);
            let block = disc.block(i);
            assert_eq!(block.len(), 5);
            let rep = part.representative(i).coords()[0];
            for j in 0..5 {
                assert!((block.atom(j)[0] - rep).abs() < 1e-12);
                assert!((block.weight(j) - 0.4).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn spherical_discretization_lies_on_the_orthogonal_circle() {
        let sph = catalog("spherical").unwrap();
        let part = make_partition(VertexSpace::Sphere, 6).unwrap();
        let disc = discretize_dgm(&sph, &part, 10, QuantileRule::Grid).unwrap();
        for i in 0..part.len() {
            assert!((disc.weights()[i] - 1.0).abs() < 1e-9);
            let x = part.representative(i).coords();
            for a in disc.block(i).atoms() {
                let dot: f64 = a.iter().zip(x).map(|(p, q)| p * q).sum();
                assert!(dot.abs() < 1e-9);
            }
        }
    }

    #[test]
    fn triangle_discretization_matches_segment_quantiles() {
        let tri = catalog("triangle").unwrap();
        let part = make_partition(VertexSpace::Triangle, 9).unwrap();
        let n = 7;
        let disc = discretize_dgm(&tri, &part, n, QuantileRule::Grid).unwrap();
        for i in 0..part.len() {
            let rep = part.representative(i).coords();
            let norm = rep[0] + rep[1];
            if disc.weights()[i] == 0.0 {
                assert!(disc.block(i).is_empty());
                continue;
            }
            for (j, atom) in disc.block(i).atoms().enumerate() {
                let frac = (j + 1) as f64 / (n + 1) as f64;
                assert!((atom[0] - frac * rep[0] / norm).abs() < 1e-12);
                assert!((atom[1] - frac * rep[1] / norm).abs() < 1e-12);
            }
        }
        // Positive-mass cells carry the barycenter l1 norm as weight.
        for i in 0..part.len() {
            if part.mass(i) > 0.0 {
                let rep = part.representative(i).coords();
                assert!((disc.weights()[i] - (rep[0] + rep[1])).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn weight_consistency_against_global_integral() {
        for name in ["ring", "tent", "triangle", "discrete", "circle-graphop"] {
            let eta = catalog(name).unwrap();
            let part = make_partition(eta.space(), 12).unwrap();
            let disc = discretize_dgm(&eta, &part, 4, QuantileRule::Grid).unwrap();
            let lhs: f64 = (0..part.len())
                .map(|i| disc.weights()[i] * part.mass(i))
                .sum();
            let rhs: f64 = (0..part.len())
                .map(|i| {
                    integrate_cell(part.space(), part.cell(i), &mut |x| eta.fiber_mass(x))
                })
                .sum();
            assert!(
                (lhs - rhs).abs() < 1e-6,
                "{name}: sum b_i mu_i = {lhs} vs integral {rhs}"
            );
        }
    }

    #[test]
    fn discrete_dgm_blocks_match_the_harmonic_fibers() {
        let eta = catalog("discrete").unwrap();
        let part = make_partition(VertexSpace::Discrete, 4).unwrap();
        let disc = discretize_dgm(&eta, &part, 8, QuantileRule::Grid).unwrap();
        // Cell {1/2}: fiber mass 1/2, atoms over {1, 1/2}.
        assert!((disc.weights()[1] - 0.5).abs() < 1e-12);
        let block = disc.block(1);
        assert!((block.total_mass() - 0.5).abs() < 1e-12);
        for a in block.atoms() {
            assert!(a[0] == 1.0 || (a[0] - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn ring_continuity_modulus_matches_the_two_dirac_formula() {
        let ring = catalog("ring").unwrap();
        let g = 16;
        let modulus = continuity_modulus(&ring, g, 8).unwrap();
        let h = 1.0 / g as f64;
        let expected = 2.0 * (2.0 * h / (2.0 + h));
        assert!(
            (modulus - expected).abs() < 1e-8,
            "modulus {modulus} expected {expected}"
        );
    }

    #[test]
    fn cantor_modulus_is_lipschitz_in_the_arc_distance() {
        let cantor = catalog("cantor").unwrap();
        let g = 12;
        let modulus = continuity_modulus(&cantor, g, 64).unwrap();
        assert!(modulus <= 1.0 / g as f64 + 1e-9, "modulus {modulus}");
    }

    #[test]
    fn constant_dgm_has_zero_modulus() {
        let eta = DigraphMeasure::custom(VertexSpace::Interval, "constant", |_| {
            MeasureDescriptor::Dirac {
                point: vec![0.5],
                mass: 1.0,
            }
        });
        let modulus = continuity_modulus(&eta, 9, 16).unwrap();
        assert_eq!(modulus, 0.0);
    }

    #[test]
    fn tent_fibers_are_probabilities_across_regimes() {
        let tent = catalog("tent").unwrap();
        for x in [0.0, 0.2, 1.0 / 3.0, 0.5, 2.0 / 3.0, 0.8, 1.0] {
            assert!((tent.fiber_mass(&[x]) - 1.0).abs() < 1e-15);
        }
    }
}
