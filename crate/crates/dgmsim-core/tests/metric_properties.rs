//! Property tests for the measure distances: metric axioms, scaling,
//! the closed two-Dirac form, the inequality chain between the three
//! distances, and the product-lift comparison for fiber functions.

use dgmsim_core::{
    bl_distance, d_infinity, kr_distance, product_lift, tv_distance, DiscreteMeasure,
    FiberFunction, Metric,
};
use dgmsim_core::vertex::{make_partition, VertexSpace};
use proptest::prelude::*;

fn measure_1d(atoms: &[(f64, f64)]) -> DiscreteMeasure {
    let mut m = DiscreteMeasure::zero(1);
    for &(x, w) in atoms {
        m.push(&[x], w).unwrap();
    }
    m
}

fn atoms_1d(max_atoms: usize, span: f64) -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((0.0..span, 0.01..1.5f64), 1..=max_atoms)
}

proptest! {
    #[test]
    fn bl_is_a_metric(a in atoms_1d(6, 4.0), b in atoms_1d(6, 4.0), c in atoms_1d(6, 4.0)) {
        let (ma, mb, mc) = (measure_1d(&a), measure_1d(&b), measure_1d(&c));
        let dab = bl_distance(&ma, &mb, &Metric::L1).unwrap();
        let dba = bl_distance(&mb, &ma, &Metric::L1).unwrap();
        let dac = bl_distance(&ma, &mc, &Metric::L1).unwrap();
        let dcb = bl_distance(&mc, &mb, &Metric::L1).unwrap();
        prop_assert!(dab >= 0.0);
        prop_assert!((dab - dba).abs() <= 1e-9, "symmetry: {dab} vs {dba}");
        prop_assert!(dab <= dac + dcb + 1e-9, "triangle: {dab} > {dac} + {dcb}");
        prop_assert!(bl_distance(&ma, &ma, &Metric::L1).unwrap() == 0.0);
    }

    #[test]
    fn bl_scales_linearly(a in atoms_1d(5, 4.0), b in atoms_1d(5, 4.0), c in 0.1..3.0f64) {
        let (ma, mb) = (measure_1d(&a), measure_1d(&b));
        let d1 = bl_distance(&ma, &mb, &Metric::L1).unwrap();
        let d2 = bl_distance(&ma.scaled(c).unwrap(), &mb.scaled(c).unwrap(), &Metric::L1).unwrap();
        prop_assert!((d2 - c * d1).abs() <= 1e-9 * (1.0 + c), "{d2} vs {c} * {d1}");
    }

    #[test]
    fn tv_satisfies_the_half_l1_identity(
        ws in prop::collection::vec((0.01..1.0f64, 0.01..1.0f64), 1..8)
    ) {
        // Shared atoms, equal masses after normalization: the total variation
        // distance is exactly half the l1 distance of the weight vectors.
        let ta: f64 = ws.iter().map(|w| w.0).sum();
        let tb: f64 = ws.iter().map(|w| w.1).sum();
        let mut a = DiscreteMeasure::zero(1);
        let mut b = DiscreteMeasure::zero(1);
        for (i, (wa, wb)) in ws.iter().enumerate() {
            a.push(&[i as f64], wa / ta).unwrap();
            b.push(&[i as f64], wb / tb).unwrap();
        }
        let l1: f64 = ws
            .iter()
            .map(|(wa, wb)| (wa / ta - wb / tb).abs())
            .sum();
        let tv = tv_distance(&a, &b);
        prop_assert!((tv - 0.5 * l1).abs() <= 1e-12, "{tv} vs half of {l1}");
    }

    #[test]
    fn two_dirac_closed_form(x in -5.0..5.0f64, gap in 1e-6..8.0f64) {
        let a = DiscreteMeasure::dirac(&[x], 1.0).unwrap();
        let b = DiscreteMeasure::dirac(&[x + gap], 1.0).unwrap();
        let d = bl_distance(&a, &b, &Metric::L1).unwrap();
        let expect = 2.0 * gap / (2.0 + gap);
        prop_assert!((d - expect).abs() <= 1e-8, "{d} vs {expect}");
    }

    #[test]
    fn distance_chain_for_probability_measures(
        a in atoms_1d(6, 1.0),
        b in atoms_1d(6, 1.0),
    ) {
        // Probability measures on a diameter-one space: the bounded Lipschitz
        // distance is below the Kantorovich-Rubinstein distance, which is
        // below twice either of the bounded Lipschitz and total variation
        // distances.
        let ma = measure_1d(&a).normalized().unwrap();
        let mb = measure_1d(&b).normalized().unwrap();
        let bl = bl_distance(&ma, &mb, &Metric::L1).unwrap();
        let kr = kr_distance(&ma, &mb, &Metric::L1).unwrap();
        let tv = tv_distance(&ma, &mb);
        prop_assert!(bl <= kr + 1e-9, "bl {bl} > kr {kr}");
        prop_assert!(kr <= 2.0 * bl.min(tv) + 1e-9, "kr {kr} > 2 min({bl}, {tv})");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn uniform_metric_dominates_the_product_lift(
        fibers_a in prop::collection::vec(atoms_1d(8, 1.0), 4),
        fibers_b in prop::collection::vec(atoms_1d(8, 1.0), 4),
    ) {
        let part = make_partition(VertexSpace::Interval, 4).unwrap();
        let make = |data: &[Vec<(f64, f64)>]| {
            let fibers: Vec<DiscreteMeasure> = data.iter().map(|f| measure_1d(f)).collect();
            FiberFunction::new(part.clone(), fibers, Metric::L1).unwrap()
        };
        let eta1 = make(&fibers_a);
        let eta2 = make(&fibers_b);
        let dinf = d_infinity(&eta1, &eta2).unwrap();
        let (lift1, metric) = product_lift(&eta1, part.masses());
        let (lift2, _) = product_lift(&eta2, part.masses());
        let dbl = bl_distance(&lift1, &lift2, &metric).unwrap();
        prop_assert!(dinf >= dbl - 1e-9, "d_inf {dinf} < d_bl(lift) {dbl}");
    }
}

#[test]
fn d_infinity_examples() {
    let part = make_partition(VertexSpace::Interval, 3).unwrap();
    let d0 = DiscreteMeasure::dirac(&[0.0], 1.0).unwrap();
    let d1 = DiscreteMeasure::dirac(&[1.0], 1.0).unwrap();
    let same = FiberFunction::new(
        part.clone(),
        vec![d0.clone(), d0.clone(), d1.clone()],
        Metric::L1,
    )
    .unwrap();
    assert_eq!(d_infinity(&same, &same).unwrap(), 0.0);

    // Identical except one cell holding delta_0 vs delta_1: the two-Dirac LP.
    let other = FiberFunction::new(
        part.clone(),
        vec![d0.clone(), d1.clone(), d1.clone()],
        Metric::L1,
    )
    .unwrap();
    let d = d_infinity(&same, &other).unwrap();
    assert!((d - 2.0 / 3.0).abs() < 1e-9, "got {d}");
}

#[test]
fn d_infinity_aligns_refinable_partitions() {
    // Piecewise-constant functions on different interval partitions of the
    // same space are compared after overlaying the cell boundaries.
    let p2 = make_partition(VertexSpace::Interval, 2).unwrap();
    let p3 = make_partition(VertexSpace::Interval, 3).unwrap();
    let d0 = DiscreteMeasure::dirac(&[0.25], 1.0).unwrap();
    let d1 = DiscreteMeasure::dirac(&[0.75], 1.0).unwrap();
    let f2 = FiberFunction::new(p2, vec![d0.clone(), d0.clone()], Metric::L1).unwrap();
    let f3 = FiberFunction::new(p3, vec![d0.clone(), d0.clone(), d1], Metric::L1).unwrap();
    // They differ exactly on [2/3, 1] where the fibers are delta_{1/4} vs
    // delta_{3/4}: the two-Dirac value at gap 1/2.
    let d = d_infinity(&f2, &f3).unwrap();
    let expect = 2.0 * 0.5 / (2.0 + 0.5);
    assert!((d - expect).abs() < 1e-9, "got {d}, expected {expect}");
}

#[test]
fn product_lift_examples() {
    // Single cell of mass one lifting delta_y.
    let p1 = make_partition(VertexSpace::Interval, 1).unwrap();
    let fiber = DiscreteMeasure::dirac(&[0.3], 1.0).unwrap();
    let eta = FiberFunction::new(p1.clone(), vec![fiber], Metric::L1).unwrap();
    let (lift, _) = product_lift(&eta, p1.masses());
    assert_eq!(lift.len(), 1);
    assert_eq!(lift.atom(0), &[0.5, 0.3]);
    assert!((lift.weight(0) - 1.0).abs() < 1e-15);

    // Two half-mass cells lifting delta_a, delta_b.
    let p2 = make_partition(VertexSpace::Interval, 2).unwrap();
    let eta = FiberFunction::new(
        p2.clone(),
        vec![
            DiscreteMeasure::dirac(&[0.1], 1.0).unwrap(),
            DiscreteMeasure::dirac(&[0.9], 1.0).unwrap(),
        ],
        Metric::L1,
    )
    .unwrap();
    let (lift, _) = product_lift(&eta, p2.masses());
    assert_eq!(lift.len(), 2);
    assert!(lift.weights().iter().all(|&w| (w - 0.5).abs() < 1e-15));

    // Total mass of a lift equals sum of cell mass times fiber mass.
    let (lift, _) = product_lift(&eta, p2.masses());
    assert!((lift.total_mass() - 1.0).abs() < 1e-12);
}

/// The fiber metric example from the stronger-topology comparison: fibers
/// `delta_{f_n(x)}` vs `delta_{f(x)}` at x = 1 are delta_0 vs delta_1, whose
/// exact bounded Lipschitz distance under the budget `||f|| + Lip(f) <= 1`
/// is 2/3 (the two-Dirac program), not 1.
#[test]
fn stronger_topology_example_has_the_lp_value() {
    let d0 = DiscreteMeasure::dirac(&[0.0], 1.0).unwrap();
    let d1 = DiscreteMeasure::dirac(&[1.0], 1.0).unwrap();
    let d = bl_distance(&d0, &d1, &Metric::L1).unwrap();
    assert!((d - 2.0 / 3.0).abs() < 1e-9);
}
