//! Property tests over randomized instances and trees.

use proptest::prelude::*;
use qwb_core::backtrack::{build_tree, BacktrackTree, BuildOptions};
use qwb_core::csp::{KSatInstance, NaiveHeuristic, PartialAssignment, Predicate, PredicateVerdict};
use qwb_core::spectral::{decompose_orthogonal, eigendecompose};
use qwb_core::walk::build_walk;

fn arb_instance(n: usize, max_m: usize) -> impl Strategy<Value = KSatInstance> {
    let clause = (
        proptest::sample::subsequence((1..=n).collect::<Vec<_>>(), 3),
        any::<u8>(),
    )
        .prop_map(|(vars, signs)| {
            vars.iter()
                .enumerate()
                .map(|(i, &v)| {
                    if signs >> i & 1 == 1 {
                        v as i32
                    } else {
                        -(v as i32)
                    }
                })
                .collect::<Vec<i32>>()
        });
    proptest::collection::vec(clause, 0..max_m)
        .prop_map(move |clauses| KSatInstance::new(n, 3, clauses).unwrap())
}

fn assignment_prefix(n: usize, bits: u32, len: usize) -> PartialAssignment {
    let pairs = (1..=len.min(n))
        .map(|i| (i, (bits >> (i - 1) & 1) as u8))
        .collect();
    PartialAssignment::from_pairs(n, pairs).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn false_is_monotone_under_extension(
        inst in arb_instance(6, 14),
        bits in any::<u32>(),
        len in 0usize..6,
    ) {
        let x = assignment_prefix(6, bits, len);
        if inst.evaluate(&x).unwrap() == PredicateVerdict::False {
            for next in len..6 {
                let y = assignment_prefix(6, bits, next + 1);
                prop_assert_eq!(inst.evaluate(&y).unwrap(), PredicateVerdict::False);
            }
        }
    }

    #[test]
    fn complete_assignments_are_decided(inst in arb_instance(5, 12), bits in any::<u32>()) {
        let x = assignment_prefix(5, bits, 5);
        prop_assert_ne!(inst.evaluate(&x).unwrap(), PredicateVerdict::Indeterminate);
    }

    #[test]
    fn tree_json_roundtrip(inst in arb_instance(5, 10)) {
        let tree = build_tree(&inst, &NaiveHeuristic, &BuildOptions::default()).unwrap();
        let back = BacktrackTree::from_json(&tree.to_json()).unwrap();
        prop_assert_eq!(tree, back);
    }

    #[test]
    fn reflections_preserve_norm_and_square_to_identity(
        inst in arb_instance(6, 12),
        raw in proptest::collection::vec(-1.0f64..1.0, 1 << 7),
    ) {
        let tree = build_tree(&inst, &NaiveHeuristic, &BuildOptions::default()).unwrap();
        if tree.root().marked {
            return Ok(());
        }
        let walk = build_walk(&tree, 6).unwrap();
        let v = nalgebra::DVector::from_fn(tree.len(), |i, _| raw[i % raw.len()]);
        let mut w = v.clone();
        walk.apply_r_a(&mut w);
        prop_assert!((w.norm() - v.norm()).abs() <= 1e-10 * (1.0 + v.norm()));
        walk.apply_r_a(&mut w);
        prop_assert!((&w - &v).norm() <= 1e-10 * (1.0 + v.norm()));
        let mut u = v.clone();
        walk.apply_r_b(&mut u);
        prop_assert!((u.norm() - v.norm()).abs() <= 1e-10 * (1.0 + v.norm()));
        walk.apply_r_b(&mut u);
        prop_assert!((&u - &v).norm() <= 1e-10 * (1.0 + v.norm()));
    }

    #[test]
    fn spectrum_satisfies_parseval(
        inst in arb_instance(5, 10),
        raw in proptest::collection::vec(-1.0f64..1.0, 1 << 6),
    ) {
        let tree = build_tree(&inst, &NaiveHeuristic, &BuildOptions::default()).unwrap();
        if tree.root().marked || tree.len() < 2 {
            return Ok(());
        }
        let walk = build_walk(&tree, 5).unwrap();
        let decomp = eigendecompose(&walk, 4096).unwrap();
        let v = nalgebra::DVector::from_fn(tree.len(), |i, _| raw[i % raw.len()]);
        let total: f64 = decomp.overlaps(&v).iter().map(|l| l.norm_sqr()).sum();
        prop_assert!((total - v.norm_squared()).abs() <= 1e-9 * (1.0 + v.norm_squared()));
    }

    #[test]
    fn decomposition_handles_plain_rotations(angle in 0.001f64..3.0) {
        // direct 2x2 rotation: eigenphases must be +-angle/2
        let m = nalgebra::DMatrix::from_row_slice(2, 2, &[
            angle.cos(), -angle.sin(),
            angle.sin(), angle.cos(),
        ]);
        let decomp = decompose_orthogonal(&m).unwrap();
        let mut phases: Vec<f64> = decomp.phases().to_vec();
        phases.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let expected = [-angle / 2.0, angle / 2.0];
        for (p, e) in phases.iter().zip(&expected) {
            prop_assert!((p - e).abs() < 1e-9, "phases {:?} vs {:?}", phases, expected);
        }
    }
}
