use super::*;

#[test]
fn generator_arguments_are_checked() {
    assert!(gen_random_graph(3, GraphMode::Sampled { seed: 1, p: 0.5 }).is_err());
    assert!(gen_random_graph(8, GraphMode::Sampled { seed: 1, p: 1.5 }).is_err());
    for q in [3, 7, 21, 25] {
        assert!(gen_random_graph(0, GraphMode::Paley { q }).is_err(), "q={q}");
    }
    assert!(gen_subset_lattice(1).is_err() && gen_subset_lattice(13).is_err());
    assert!(gen_dense_order(7).is_err());
    assert!(gen_eq_relations(1, 3, 3).is_err());
    assert!(gen_eq_relations(4, 3, 3).is_err());
    assert!(gen_eq_relations(3, 3, 9).is_ok());
}

#[test]
fn sampled_graphs_are_reproducible() {
    let a = gen_random_graph(20, GraphMode::Sampled { seed: 5, p: 0.5 }).unwrap();
    let b = gen_random_graph(20, GraphMode::Sampled { seed: 5, p: 0.5 }).unwrap();
    let c = gen_random_graph(20, GraphMode::Sampled { seed: 6, p: 0.5 }).unwrap();
    assert_eq!(a.sequence().p1_set(), b.sequence().p1_set());
    assert_ne!(a.structure.relation("R").unwrap().tuples(), c.structure.relation("R").unwrap().tuples());
}

#[test]
fn paley_pairs_are_exact_at_61() {
    let pkg = gen_random_graph(0, GraphMode::Paley { q: 61 }).unwrap();
    let cs = pkg.sequence();
    let r = oracle_check(&pkg, &cs, 2, 1, SamplePolicy::Exhaustive);
    assert_eq!(r.disagreements.len(), 0);
    // Smaller Paley graphs miss some pairs.
    let pkg = gen_random_graph(0, GraphMode::Paley { q: 13 }).unwrap();
    let r = oracle_check(&pkg, &pkg.sequence(), 2, 2, SamplePolicy::Exhaustive);
    assert!(r.missing_witness() > 0 && r.spurious() == 0);
}

#[test]
fn random_graph_disagreements_are_missing_witnesses() {
    for seed in [1, 2] {
        let pkg = gen_random_graph(16, GraphMode::Sampled { seed, p: 0.5 }).unwrap();
        let cs = pkg.sequence();
        let r = oracle_check(&pkg, &cs, 4, 2, SamplePolicy::Sampled { seed, count: 300 });
        assert_eq!(r.spurious(), 0);
        assert_eq!(r.unpredicted, 0);
        assert!(r.disagreements.iter().all(|d| d.witness.is_none()));
    }
}

#[test]
fn lattice_prediction_is_exact() {
    let pkg = gen_subset_lattice(3).unwrap();
    let r = oracle_check(&pkg, &pkg.sequence(), 3, 3, SamplePolicy::Exhaustive);
    assert_eq!(r.sets_checked, 64 + 64 * 63 / 2 + 64 * 63 * 62 / 6);
    assert!(r.disagreements.is_empty());
    let pkg = gen_subset_lattice(4).unwrap();
    let r = oracle_check(&pkg, &pkg.sequence(), 4, 2, SamplePolicy::Sampled { seed: 3, count: 2000 });
    assert!(r.disagreements.is_empty());
}

#[test]
fn literal_lattice_form_is_stronger() {
    // The meet {0,1} lies inside the join {0} | {1}, yet {0,1} itself escapes both.
    let set = vec![vec![0b11, 0b01], vec![0b11, 0b10]];
    assert!(!subset_lattice_literal_form(&set));
    let pkg = gen_subset_lattice(2).unwrap();
    assert!(pkg.sequence().holds(&set).unwrap());
    assert_eq!(pkg.predict(&set), Some(true));
}

#[test]
fn dense_order_prediction_is_exact() {
    let pkg = gen_dense_order(10).unwrap();
    let r = oracle_check(&pkg, &pkg.sequence(), 4, 3, SamplePolicy::Sampled { seed: 1, count: 3000 });
    assert!(r.disagreements.is_empty());
}

#[test]
fn eq_relations_first_levels() {
    let pkg = gen_eq_relations(3, 3, 9).unwrap();
    let cs = pkg.sequence();
    let Oracle::EqRelations { classes, .. } = &pkg.oracle else { unreachable!() };
    // Product sizes: any classes of distinct partitions meet.
    for (a, b) in (0..3).tuple_combinations() {
        for (ca, cb) in (0..3).cartesian_product(0..3) {
            assert!((0..27).any(|p| classes[a][p] == ca && classes[b][p] == cb));
        }
    }
    // P_1 is "z and w in different classes": 3 partitions, 27 choices of z, 18 of w.
    assert_eq!(cs.p1_set().len(), 3 * 27 * 18);
    let r = oracle_check(&pkg, &cs, 3, 1, SamplePolicy::Sampled { seed: 2, count: 3000 });
    assert!(r.disagreements.is_empty());
    assert!(r.unpredicted > 0);
}

#[test]
fn eq_relations_off_product_sizes() {
    let pkg = gen_eq_relations(2, 3, 4).unwrap();
    let Oracle::EqRelations { classes, .. } = &pkg.oracle else { unreachable!() };
    assert_eq!(classes.len(), 2);
    assert!(classes.iter().all(|l| (0..3).all(|c| l.iter().filter(|&&x| x == c).count() == 4)));
    let r = oracle_check(&pkg, &pkg.sequence(), 2, 2, SamplePolicy::Exhaustive);
    assert_eq!(r.spurious(), 0);
}
