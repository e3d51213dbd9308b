use super::*;
use crate::configs::{
    detect_compatible_order, detect_ip_shattering, detect_order_property, downward_closed_families, is_sharp,
    OrderConvention, ShatterMode, T0Config,
};
use crate::formula::{parse_formula, Signature};
use crate::localize::Bounds;
use crate::models::{gen_dense_order, gen_random_graph, gen_subset_lattice, GraphMode};

fn dense(v: usize) -> CharSequence {
    gen_dense_order(v).unwrap().sequence()
}

fn sampled_graph(v: usize, seed: u64) -> crate::models::ExamplePackage {
    gen_random_graph(v, GraphMode::Sampled { seed, p: 0.5 }).unwrap()
}

#[test]
fn universal_witnesses_realize_small_families() {
    for x in (1..=3).flat_map(downward_closed_families) {
        let n = x.maximal().len() + x.v;
        let r = universal_witness(&x, n).unwrap();
        assert!(r.validation.passed, "{x:?}");
        assert_eq!(r.output.len(), x.v);
    }
    let open = T0Config::new(2, [vec![0, 1]]).unwrap();
    assert!(universal_witness(&open, 6).is_err());
    assert!(universal_witness(&T0Config::empty_graph(3), 5).is_err());
}

#[test]
fn support_failures() {
    for k in [1, 2, 3] {
        let r = support_failure_witness(k, 6).unwrap();
        assert!(r.validation.passed && r.output.subsets_hold && r.output.whole_fails);
        assert_eq!(r.output.params.len(), k + 1);
    }
    assert!(support_failure_witness(0, 6).is_err());
    assert!(support_failure_witness(5, 5).is_err());
}

#[test]
fn planted_arrays_sharpen() {
    let cs = gen_subset_lattice(PLANT_POINTS).unwrap().sequence();
    for (variant, _, _, a) in planted_arrays(7).into_iter().step_by(6) {
        assert!(a.is_valid(&cs), "{variant:?}");
        assert!(!is_sharp(&cs, &a, 6).unwrap().sharp);
        let r = sharpen_array(&cs, &a, &[], DEFAULT_SPACING).unwrap();
        assert!(r.validation.passed, "{:?}", r.validation.checks);
        assert_eq!(r.output.rounds.len(), 1);
        let (cols, added) = match variant {
            PlantVariant::SameColumn => (8, 0),
            PlantVariant::CrossColumn => (5, 1),
        };
        assert_eq!((r.output.array.cols(), r.output.array.rows, r.output.a_bar.len()), (cols, 2, added));
    }
}

#[test]
fn springboard() {
    let cs = gen_subset_lattice(PLANT_POINTS).unwrap().sequence();
    let a = springboard_planted_array();
    assert!(a.is_valid(&cs));
    let three = springboard_check(&cs, &a, 3, 3).unwrap();
    assert!(three.sharp_at_mu && three.passes);
    let four = springboard_check(&cs, &a, 3, 4).unwrap();
    assert!(!four.passes);
    assert!(four.failing.is_some() && four.dividing.is_some());
}

#[test]
fn independence_and_arrays() {
    let pkg = sampled_graph(32, 1);
    let cs_theta = pkg.sequence();
    let phi = parse_formula("phi(x; y) := R(x,y)", &Signature::of(&pkg.structure)).unwrap();
    let cs_phi = CharSequence::new(pkg.structure.clone(), phi).unwrap();
    let seq = find_ip_sequence(&cs_phi, &cs_theta, 5, 2).unwrap().unwrap();
    assert_eq!(seq.len(), 10);
    let r = array_from_ip(&cs_phi, &cs_theta, &seq, 5, 2).unwrap();
    assert!(r.validation.passed, "{:?}", r.validation.checks);
    assert!(r.output.is_valid(&cs_theta) && r.output.sharp);
    assert_eq!((r.output.cols(), r.output.rows), (5, 2));
    let w = ip_from_sharp_array(&cs_theta, &r.output, 1).unwrap();
    assert!(w.validation.passed);
    let shatter = detect_ip_shattering(&cs_theta, 2, ShatterMode::ExactK, cs_theta.p1_set()).unwrap().unwrap();
    assert!(shatter.validate(&cs_theta));
}

#[test]
fn dividing_from_an_order() {
    let cs = dense(12);
    let w = detect_order_property(&cs, 5, OrderConvention::Strict, None, cs.p1_set()).unwrap().unwrap();
    let d = dividing_from_order_property(&cs, &w).unwrap();
    assert!(d.validation.passed);
    assert_eq!(d.output.tuples.len(), 4);
}

#[test]
fn compatible_order_trees() {
    assert_eq!(interval_supply(1, 3), 4);
    assert_eq!(interval_supply(2, 2), 5);
    assert_eq!(interval_supply(2, 3), 10);
    let cs = dense(12);
    let co = detect_compatible_order(&cs, interval_supply(2, 2), 3).unwrap().unwrap();
    let r = sop2_tree_from_compatible_order(&cs, &co, 2, 2).unwrap();
    assert!(r.validation.passed, "{:?}", r.validation.checks);
    assert_eq!(r.output.labels.len(), 7);
    assert!(sop2_tree_from_compatible_order(&cs, &co, 2, 3).is_err());
}

#[test]
fn order_trees_are_audited() {
    let cs = dense(30);
    let r = tree_from_persistent_order(&cs, 2, 3, &Bounds::new(2, 2, 3)).unwrap();
    assert!(r.validation.passed, "{:?}", r.validation.checks);
    let tree = r.output.built().unwrap();
    assert_eq!(tree.labels.len(), 3 + 9);
    assert!(!r.trace.is_empty());
    assert!(tree_from_persistent_order(&cs, 2, 1, &Bounds::new(2, 2, 3)).is_err());
    assert!(tree_from_persistent_order(&cs, 4, 2, &Bounds::new(2, 2, 3)).is_err());
}

#[test]
fn staged_arrays() {
    let cs = gen_random_graph(0, GraphMode::Paley { q: 61 }).unwrap().sequence();
    let r = array_from_persistent_empty_tuple(&cs, 2, 4, 3, &Bounds::new(2, 2, 3), &[]).unwrap();
    assert!(r.validation.passed, "{:?}", r.validation.checks);
    let a = r.output.built().unwrap();
    assert_eq!((a.cols(), a.rows), (4, 2));
    assert!(a.is_valid(&cs));
    let blocked = array_from_persistent_empty_tuple(&sampled_graph(16, 1).sequence(), 2, 4, 4, &Bounds::new(2, 2, 3), &[]).unwrap();
    let o = blocked.output.obstruction().unwrap();
    assert!(o.stage < 4, "{o:?}");
    assert!(array_from_persistent_empty_tuple(&cs, 1, 4, 3, &Bounds::new(2, 2, 3), &[]).is_err());
}

#[test]
fn staged_trees_over_empty_graphs() {
    // Every one-point extension of the root interval contains its only point.
    let cs = dense(16);
    let r = tree_from_persistent_empty_graph(&cs, 1, 2, 2, &Bounds::new(2, 2, 3), &[]).unwrap();
    let o = r.output.obstruction().unwrap();
    assert_eq!((o.stage, o.base.clone()), (0, vec![vec![0, 2]]));
    assert!(r.validation.passed);
    let tp2 = crate::models::gen_eq_relations(3, 3, 9).unwrap().sequence();
    let r = tree_from_persistent_empty_graph(&tp2, 1, 2, 2, &Bounds::new(2, 2, 3), &[]).unwrap();
    assert!(r.output.built().unwrap().validate(&tp2));
    assert!(r.validation.passed, "{:?}", r.validation.checks);
    assert_eq!(r.trace.len(), 3);
}

#[test]
fn random_graph_solution_extension() {
    let cs = gen_random_graph(0, GraphMode::Paley { q: 61 }).unwrap().sequence();
    let r = rg_solution_extension(&cs, &[0], &[1], 2).unwrap();
    assert!(r.validation.passed, "{:?}", r.validation.checks);
    assert!(r.output.base_in_g && r.output.g_pairwise_complete);
    assert_eq!(r.output.base, vec![vec![0, 1]]);
    assert!(rg_solution_extension(&dense(10), &[0], &[1], 2).is_ok());
}

#[test]
fn coding_matches_the_case_description() {
    let pkg = gen_random_graph(5, GraphMode::Sampled { seed: 3, p: 0.5 }).unwrap();
    let phi = parse_formula("phi(x; y) := R(x,y)", &Signature::of(&pkg.structure)).unwrap();
    let r = verify_coding(pkg.structure.clone(), &phi, 2).unwrap();
    assert!(r.passed(), "{:?}", r.cases);
    assert_eq!(r.cases.len(), 3);
    assert!(r.cases.iter().all(|c| c.checked > 0));
}
