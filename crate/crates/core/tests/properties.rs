use num_integer::Integer;
use proptest::prelude::*;

use cpsum::cli::doc::{emit_tree, parse_tree};
use cpsum::modular::{child_weight, reduce_weight, Modulus, PointSite, Rotation};
use cpsum::models::{LinearModel, ModelKind, Relabeling};
use cpsum::realize::{enumerate_trees, necessary_conditions, Rejection, SearchBudget, Verdict};
use cpsum::singular::{permutation_module, singular_profile};
use cpsum::tree::{canonical_encode, validate_tree, EquivariantTree, TreeNode, TreeType};

/// An effective rotation pair over an odd modulus up to 1001.
fn rotation() -> impl Strategy<Value = Rotation> {
    (0u64..500)
        .prop_map(|k| 2 * k + 1)
        .prop_flat_map(|m| (Just(m), 0..m, 0..m))
        .prop_filter("effective", |(m, a, b)| a.gcd(b).gcd(m) == 1)
        .prop_map(|(m, a, b)| Rotation::new(a as i64, b as i64, Modulus::new(m).unwrap()))
}

fn kind() -> impl Strategy<Value = ModelKind> {
    prop_oneof![Just(ModelKind::Cp2), Just(ModelKind::S4)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn fixed_set_euler_characteristic(r in rotation(), kind in kind()) {
        let model = LinearModel::new(kind, r).unwrap();
        for d in r.modulus().nontrivial_divisors() {
            prop_assert_eq!(model.fix_structure(d).unwrap().euler(), kind.euler());
        }
    }

    #[test]
    fn reduction_commutes_with_propagation(r in rotation(), which in 0usize..3) {
        let site = [PointSite::P1, PointSite::P2, PointSite::P3][which];
        for d in r.modulus().divisors() {
            let reduced_first = child_weight(r.reduce(d).unwrap(), site).unwrap();
            let reduced_after = reduce_weight(&child_weight(r, site).unwrap(), d).unwrap();
            prop_assert_eq!(reduced_first, reduced_after);
        }
    }

    #[test]
    fn relabeling_preserves_fixed_data(r in rotation(), kind in kind()) {
        let model = LinearModel::new(kind, r).unwrap();
        let sorted = |m: &LinearModel| {
            let mut orders: Vec<u64> = m.spheres().iter().map(|s| s.order).collect();
            orders.sort_unstable();
            let mut rots: Vec<Rotation> = m.fixed_points().iter().map(|p| p.rotation.canonical()).collect();
            rots.sort();
            (orders, rots)
        };
        for g in Relabeling::all(kind) {
            let moved = model.relabel(&g);
            prop_assert_eq!(sorted(&moved), sorted(&model));
            prop_assert_eq!(moved.orbit_type_count(), model.orbit_type_count());
        }
    }

    #[test]
    fn single_vertex_round_trip(r in rotation(), kind in kind()) {
        let tree_type = if kind == ModelKind::Cp2 { TreeType::I } else { TreeType::II };
        let t = EquivariantTree {
            m: r.modulus().get(),
            tree_type,
            nodes: vec![TreeNode::new(0, LinearModel::new(kind, r).unwrap())],
            edges: vec![],
        };
        let back = parse_tree(&emit_tree(&t)).unwrap();
        prop_assert_eq!(&back, &t);
        prop_assert_eq!(canonical_encode(&validate_tree(&back).unwrap()), canonical_encode(&validate_tree(&t).unwrap()));
    }
}

fn all_trees() -> Vec<EquivariantTree> {
    let mut out = Vec::new();
    for m in [9, 15, 27] {
        let e = enumerate_trees(Modulus::new(m).unwrap(), SearchBudget { n_max: 6, node_cap: u64::MAX });
        assert!(e.complete);
        out.extend(e.trees);
    }
    out
}

#[test]
fn realized_modules_pass_the_necessary_conditions() {
    for t in all_trees() {
        let v = validate_tree(&t).unwrap();
        let module = permutation_module(&v);
        // the bare S4 has no second homology; the conditions reject the empty module
        if module.is_empty() {
            assert!(v.is_bare_s4(), "{t:?}");
            assert_eq!(necessary_conditions(&module), Verdict::Reject(Rejection::Empty));
            continue;
        }
        assert_eq!(necessary_conditions(&module), Verdict::Accept, "{module} from {t:?}");
    }
}

#[test]
fn components_of_fix_cd_have_isotropy_divisible_by_d() {
    for t in all_trees() {
        let v = validate_tree(&t).unwrap();
        for s in singular_profile(&v).subgroups {
            for c in &s.components {
                assert_eq!(c.isotropy % s.d, 0);
                assert!(c.count > 0);
                assert!(c.provenance.windows(2).all(|w| w[0] < w[1]));
            }
        }
    }
}
