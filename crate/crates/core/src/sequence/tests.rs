use std::sync::Arc;

use proptest::prelude::*;

use super::*;
use crate::formula::{parse_formula, Signature};
use crate::models::{gen_dense_order, gen_eq_relations, gen_random_graph, gen_subset_lattice, GraphMode};
use crate::structure::StructureBuilder;

fn paley(q: u32) -> CharSequence {
    gen_random_graph(0, GraphMode::Paley { q }).unwrap().sequence()
}

fn lattice(n: usize) -> CharSequence {
    gen_subset_lattice(n).unwrap().sequence()
}

fn graph_sequence(v: usize, edges: &[(u32, u32)]) -> CharSequence {
    let tuples = edges.iter().flat_map(|&(a, b)| [vec![a, b], vec![b, a]]);
    let s = StructureBuilder::new().sort("V", v).relation("R", &["V", "V"], tuples).build().unwrap();
    let phi = parse_formula("phi(x; y,z) := R(x,y) & !R(x,z)", &Signature::of(&s)).unwrap();
    CharSequence::new(Arc::new(s), phi).unwrap()
}

#[test]
fn random_graph_levels() {
    let cs = paley(13);
    assert!(cs.holds(&[vec![0, 1]]).unwrap());
    assert!(!cs.holds(&[vec![0, 1], vec![2, 0]]).unwrap());
    let t = vec![3, 7];
    assert_eq!(cs.holds(&[t.clone(), t.clone(), t.clone()]).unwrap(), cs.holds(&[t]).unwrap());
}

#[test]
fn p1_of_random_graph_by_brute_force() {
    let pkg = gen_random_graph(0, GraphMode::Paley { q: 13 }).unwrap();
    let cs = pkg.sequence();
    let r = pkg.structure.relation("R").unwrap();
    let expected: Vec<Tuple> = (0..13u32)
        .flat_map(|y| (0..13u32).map(move |z| vec![y, z]))
        .filter(|t| (0..13u32).any(|x| r.contains(&[x, t[0]]) && !r.contains(&[x, t[1]])))
        .collect();
    assert_eq!(cs.p1_set(), expected.as_slice());
    assert_eq!(cs.p1_set().len(), 13 * 12);
}

#[test]
fn p1_of_small_lattice_by_brute_force() {
    let cs = lattice(2);
    let expected: Vec<Tuple> = (0..4u32)
        .flat_map(|y| (0..4u32).map(move |z| vec![y, z]))
        .filter(|t| (0..4u32).any(|x| x & !t[0] == 0 && x & !t[1] != 0))
        .collect();
    assert_eq!(cs.p1_set(), expected.as_slice());
    assert!(cs.p1_set().iter().all(|t| t[0] != 0 && t[0] & !t[1] != 0));
}

#[test]
fn contradictory_formula_has_empty_p1() {
    let s = StructureBuilder::new().sort("V", 4).build().unwrap();
    let phi = parse_formula("phi(x; y) := !(x = x) & y = y", &Signature::of(&s)).unwrap();
    let cs = CharSequence::new(Arc::new(s), phi).unwrap();
    assert!(cs.p1_set().is_empty());
}

#[test]
fn lattice_meet_escaping_joins() {
    let cs = lattice(5);
    // y1 = {0,1}, z1 = {2}; y2 = {1,2}, z2 = {3}: the meet {1} escapes both.
    assert!(cs.holds(&[vec![0b11, 0b100], vec![0b110, 0b1000]]).unwrap());
    assert_eq!(cs.witness(&[vec![0b11, 0b100], vec![0b110, 0b1000]]).unwrap(), Some(vec![0b10]));
}

#[test]
fn level_cap_and_range_errors() {
    let cs = paley(13).with_level_cap(2);
    assert!(matches!(cs.holds(&[vec![0, 1], vec![0, 2], vec![0, 3]]), Err(Error::LevelCap { size: 3, cap: 2 })));
    assert!(cs.holds(&[vec![0, 1], vec![0, 1], vec![0, 2]]).is_ok());
    assert!(cs.holds(&[vec![0, 13]]).is_err());
}

#[test]
fn basic_properties_on_packages() {
    for cs in [paley(13), lattice(3), gen_dense_order(9).unwrap().sequence()] {
        let r = cs.verify_basic_properties(4, SamplePolicy::Sampled { seed: 9, count: 300 });
        assert!(r.passed(), "{:?}", r.violations);
        assert_eq!(r.queries, 300);
    }
    let r = lattice(2).verify_basic_properties(3, SamplePolicy::Exhaustive);
    assert!(r.passed());
}

#[test]
fn support_fails_on_triple_intersection() {
    let cs = lattice(7);
    let s = [vec![0b110, 0b1_0000], vec![0b101, 0b10_0000], vec![0b011, 0b100_0000]];
    assert!(s.iter().cloned().combinations(2).all(|c| cs.holds_raw(&c)));
    assert!(!cs.holds_raw(&s));
    let small = lattice(3);
    let r = small.support(2, 3, SamplePolicy::Exhaustive).unwrap();
    assert!(!r.supported);
    let c = r.counterexample.unwrap();
    assert!(c.iter().cloned().combinations(2).all(|p| small.holds_raw(&p)) && !small.holds_raw(&c));
}

#[test]
fn support_at_its_own_arity_is_trivial() {
    let cs = lattice(3);
    let r = cs.support(2, 2, SamplePolicy::Exhaustive).unwrap();
    assert!(r.supported && r.sets_checked == 0);
    assert!(cs.support(3, 2, SamplePolicy::Exhaustive).is_err());
}

#[test]
fn complete_graphs() {
    let dense = gen_dense_order(10).unwrap().sequence();
    let nested = [vec![1, 8], vec![2, 7], vec![3, 6]];
    let r = dense.complete_graph_check(&nested, 3).unwrap();
    assert!(r.complete && r.realized && r.consistent());
    assert_eq!(r.witness, Some(vec![4]));
    let rg = paley(13);
    let r = rg.complete_graph_check(&[vec![0, 1], vec![1, 0]], 2).unwrap();
    assert!(!r.complete && !r.realized && r.consistent());
}

#[test]
fn dividing_columns_in_equivalence_relations() {
    let pkg = gen_eq_relations(3, 3, 9).unwrap();
    let cs = pkg.sequence();
    let crate::models::Oracle::EqRelations { classes, .. } = &pkg.oracle else { unreachable!() };
    // One partition, one representative per class as z, a fixed w outside.
    let x = 0usize;
    let reps: Vec<u32> = (0..3).map(|c| classes[x].iter().position(|&l| l == c).unwrap() as u32).collect();
    let w = (0..27u32).find(|&p| classes[x][p as usize] != classes[x][reps[0] as usize] && classes[x][p as usize] != classes[x][reps[1] as usize]).unwrap();
    let column: Vec<Tuple> = reps[..2].iter().map(|&z| vec![x as u32, z, w]).collect();
    let d = cs.extract_dividing_witness(&column, 1, 2).unwrap();
    assert!(d.is_some(), "{column:?}");
    assert!(cs.extract_dividing_witness(&[vec![0, 0, 0]], 1, 2).is_err());
}

#[test]
fn random_graph_has_no_large_dividing_pairs() {
    let cs = paley(61);
    let p1 = cs.p1_set();
    // Levels up to 2 are exact on this graph, and no four members are pairwise inconsistent.
    let ys = vec![p1[0].clone(), p1[100].clone(), p1[2000].clone(), p1[3000].clone()];
    assert_eq!(cs.extract_dividing_witness(&ys, 1, 2).unwrap(), None);
}

#[test]
fn cache_audits_and_dump() {
    let cs = paley(13);
    let p1 = cs.p1_set().to_vec();
    for c in p1.iter().take(20).cloned().combinations(3) {
        cs.holds(&c).unwrap();
    }
    assert_eq!(cs.audit_downward_closure(), None);
    assert!(cs.audit_witnesses().is_empty());
    let dump = cs.dump_levels(&p1[..3], 2).unwrap();
    let lines: Vec<&str> = dump.lines().collect();
    assert_eq!(lines.len(), 6);
    assert!(lines[0].starts_with("1\t[[0,1]]\t1\t"));
    cs.clear_cache();
    assert_eq!(cs.cache_len(), 0);
}

#[test]
fn relative_levels_add_parameters() {
    let cs = paley(13);
    let a = vec![0, 1];
    let rel = Relative::new(&cs, std::slice::from_ref(&a));
    let t = vec![2, 3];
    assert_eq!(rel.holds_refs(&[&t]), cs.holds(&[t.clone(), a.clone()]).unwrap());
    assert_eq!(rel.level_cap(), cs.level_cap() - 1);
}

fn edges_strategy() -> impl Strategy<Value = (usize, Vec<(u32, u32)>)> {
    (4usize..8).prop_flat_map(|v| {
        let pairs: Vec<(u32, u32)> = (0..v as u32).flat_map(|a| (a + 1..v as u32).map(move |b| (a, b))).collect();
        (Just(v), proptest::sample::subsequence(pairs.clone(), 0..=pairs.len()))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn cached_levels_match_direct_evaluation((v, edges) in edges_strategy(), picks in proptest::collection::vec((0u32..8, 0u32..8), 1..5)) {
        let cs = graph_sequence(v, &edges);
        let list: Vec<Tuple> = picks.iter().map(|&(a, b)| vec![a % v as u32, b % v as u32]).collect();
        let direct = cs.holds_raw(&list);
        prop_assert_eq!(cs.holds(&list).unwrap(), direct);
        let mut rev = list.clone();
        rev.reverse();
        prop_assert_eq!(cs.holds(&rev).unwrap(), direct);
        let mut doubled = list.clone();
        doubled.extend(list.iter().cloned());
        prop_assert_eq!(cs.holds_raw(&doubled), direct);
        if direct {
            for sub in list.iter().cloned().combinations(list.len() - 1).filter(|s| !s.is_empty()) {
                prop_assert!(cs.holds(&sub).unwrap());
            }
            let w = cs.witness(&list).unwrap().unwrap();
            prop_assert!(list.iter().all(|t| cs.compiled().satisfies(cs.structure(), &w, t)));
        }
        prop_assert_eq!(cs.audit_downward_closure(), None);
    }

    #[test]
    fn lattice_levels_follow_the_meet((ys, zs) in (proptest::collection::vec(0u32..16, 1..4), proptest::collection::vec(0u32..16, 1..4))) {
        let cs = lattice(4);
        let list: Vec<Tuple> = ys.iter().zip(&zs).map(|(&y, &z)| vec![y, z]).collect();
        let meet = ys.iter().take(list.len()).fold(15u32, |m, y| m & y);
        let expected = list.iter().all(|t| meet & !t[1] != 0);
        prop_assert_eq!(cs.holds(&list).unwrap(), expected);
    }
}
