use super::*;
use crate::models::gen_dense_order;

fn dense(v: usize) -> CharSequence {
    gen_dense_order(v).unwrap().sequence()
}

/// Some point lies strictly inside every interval.
fn meet(set: &[&Tuple]) -> bool {
    let lo = set.iter().map(|t| t[0]).max().unwrap();
    let hi = set.iter().map(|t| t[1]).min().unwrap();
    lo + 1 < hi
}

#[test]
fn conjuncts_serialize_with_one_based_positions() {
    let c = Conjunct::new(vec![0], vec![vec![3, 5]]);
    assert_eq!(c.level, 2);
    let json = serde_json::to_string(&c).unwrap();
    assert_eq!(json, "[2,[1],[[3,5]]]");
    assert_eq!(serde_json::from_str::<Conjunct>(&json).unwrap(), c);
    assert!(serde_json::from_str::<Conjunct>("[2,[0],[[3,5]]]").is_err());
    let f = Localization::consistent_with(&[vec![3, 5], vec![2, 6]]);
    let back: Localization = serde_json::from_str(&serde_json::to_string(&f).unwrap()).unwrap();
    assert_eq!(back, f);
}

#[test]
fn localization_builders() {
    assert_eq!(Localization::jointly_consistent(&[]), Localization::empty(1));
    let f = Localization::jointly_consistent(&[vec![4, 6], vec![1, 9], vec![4, 6]]);
    assert_eq!(f.conjuncts.len(), 1);
    assert_eq!(f.conjuncts[0].level, 3);
    assert_eq!(f.parameter_set(), vec![vec![1, 9], vec![4, 6]]);
    let g = Localization::consistent_with(&[vec![1, 9], vec![4, 6]]);
    assert_eq!(g.parameter_set(), f.parameter_set());
    assert!(f.order_key() < g.order_key());
}

#[test]
fn localized_sets_by_brute_force() {
    let cs = dense(10);
    assert_eq!(localized_set(&cs, &Localization::empty(1)).unwrap(), cs.p1_set());
    let params = [vec![3, 5], vec![1, 8]];
    for f in [Localization::consistent_with(&params), Localization::jointly_consistent(&params)] {
        let expected: Vec<Tuple> = cs
            .p1_set()
            .iter()
            .filter(|t| {
                f.conjuncts.iter().all(|c| {
                    let mut set: Vec<&Tuple> = c.params.iter().collect();
                    set.push(t);
                    meet(&set)
                })
            })
            .cloned()
            .collect();
        assert_eq!(localized_set(&cs, &f).unwrap(), expected);
        // Every interval here contains 4, so any subset is complete.
        assert_eq!(nontrivial_certificate(&cs, &f, 3).unwrap().map(|c| c.len()), Some(3));
    }
}

#[test]
fn localization_errors() {
    let cs = dense(10);
    let f = Localization::consistent_with(&[vec![3, 5]]);
    assert!(matches!(apply_localization(&cs, &f, &[]), Err(Error::Arity { expected: 1, found: 0 })));
    let not_p1 = Localization::consistent_with(&[vec![5, 3]]);
    assert!(matches!(apply_localization(&cs, &not_p1, &[vec![1, 8]]), Err(Error::NotInP1(_))));
    let mut bad_level = f.clone();
    bad_level.conjuncts[0].level = 3;
    assert!(apply_localization(&cs, &bad_level, &[vec![1, 8]]).is_err());
    let mut bad_pos = f.clone();
    bad_pos.conjuncts[0].positions = vec![1];
    assert!(apply_localization(&cs, &bad_pos, &[vec![1, 8]]).is_err());
    let binary = Localization { arity: 2, conjuncts: vec![Conjunct::new(vec![0, 1], vec![])] };
    assert!(localized_set(&cs, &binary).is_err());
    assert!(apply_localization(&cs, &binary, &[vec![1, 8], vec![2, 4]]).unwrap());
    assert!(!apply_localization(&cs, &binary, &[vec![1, 3], vec![3, 6]]).unwrap());
}

#[test]
fn complete_subsets() {
    let cs = dense(10);
    let set = [vec![0, 2], vec![1, 4], vec![2, 5], vec![3, 6]];
    assert_eq!(find_complete_subset(&cs, &set, 2), Some(vec![vec![1, 4], vec![2, 5]]));
    assert_eq!(find_complete_subset(&cs, &set, 3), None);
    assert_eq!(find_complete_subset(&cs, &set, 0), Some(vec![]));
}

#[test]
fn one_point_extensions_by_brute_force() {
    let cs = dense(10);
    let a = vec![vec![2, 7], vec![3, 9]];
    let ext = one_point_extensions(&cs, &a, cs.p1_set()).unwrap();
    let expected: Vec<Tuple> = cs.p1_set().iter().filter(|t| meet(&[&a[0], &a[1], t])).cloned().collect();
    assert_eq!(ext, expected);
    assert!(matches!(one_point_extensions(&cs, &[vec![0, 2], vec![2, 4]], cs.p1_set()), Err(Error::NotComplete(_))));
}

#[test]
fn enumerated_localizations_are_distinct_and_nontrivial() {
    let cs = dense(10);
    let a = vec![vec![2, 7]];
    let bounds = Bounds::new(2, 2, 3);
    let entries = enumerate_localizations(&cs, &a, &bounds).unwrap();
    assert_eq!(entries[0].localization, Localization::empty(1));
    let mut seen = HashSet::new();
    for e in &entries {
        assert_eq!(localized_set(&cs, &e.localization).unwrap(), e.extension);
        assert!(e.extension.contains(&a[0]));
        assert!(seen.insert(e.extension.clone()));
        assert_eq!(e.certificate.len(), 3);
        assert!(cs.holds(&e.certificate).unwrap());
        assert!(e.localization.conjuncts.len() <= 2 && e.localization.parameter_set().len() <= 2);
    }
    assert!(entries.windows(2).all(|w| w[0].localization.order_key() <= w[1].localization.order_key()));
    let region = vec![vec![3, 5], vec![4, 8]];
    let restricted = enumerate_localizations(&cs, &a, &bounds.clone().with_region(region.clone())).unwrap();
    assert!(restricted.iter().all(|e| e.localization.parameter_set().iter().all(|p| region.contains(p))));
    let tight = bounds.with_memory_budget(Some(1));
    assert!(matches!(enumerate_localizations(&cs, &a, &tight), Err(Error::ResourceBudget(_))));
}

#[test]
fn persistence_on_the_dense_order() {
    let cs = dense(10);
    let a = vec![vec![2, 7]];
    let bounds = Bounds::new(1, 1, 2);
    let complete = persistence_search(&cs, &T0Config::complete(2), &a, &bounds).unwrap();
    assert_eq!(complete.status, PersistenceStatus::PersistsAtScale);
    assert_eq!(complete.witnesses.len(), complete.localizations_checked);
    let empty = persistence_search(&cs, &T0Config::empty_graph(2), &a, &bounds).unwrap();
    assert_eq!(empty.status, PersistenceStatus::Killed);
    let killer = empty.killer.unwrap();
    let ext = localized_set(&cs, &killer.localization).unwrap();
    assert_eq!(ext.len(), killer.extension_size);
    assert!(find_embedding(&cs, &killer.fragment, &ext, EmbedMode::Exact).unwrap().is_none());
    assert_eq!(killer.fragment, induced(&T0Config::empty_graph(2), &killer.fragment_vertices));
    assert_eq!(empty.witnesses.len(), killer.index);
    assert!(persistence_search(&cs, &T0Config::empty_graph(2), &[vec![0, 2], vec![2, 4]], &bounds).is_err());
}

#[test]
fn induced_configurations() {
    let x = T0Config::generated(4, &[vec![0, 1, 2], vec![2, 3]]).unwrap();
    let y = induced(&x, &[1, 2, 3]);
    assert_eq!(y, T0Config::generated(3, &[vec![0, 1], vec![1, 2]]).unwrap());
}

#[test]
fn complete_localizations() {
    let cs = dense(10);
    let a = vec![vec![2, 7]];
    let e = find_complete_localization(&cs, &a, 2, &Bounds::new(1, 1, 2)).unwrap().unwrap();
    assert!(e.extension.iter().combinations(2).all(|c| meet(&c)));
    assert!(find_complete_localization(&cs, &a, 0, &Bounds::new(1, 1, 2)).is_err());
}

#[test]
fn star_localization_identity() {
    let cs = dense(10);
    let f = Localization::consistent_with(&[vec![3, 5]]);
    let a_bar = vec![vec![1, 8]];
    let star = star_localized_sequence(&cs, &f, &a_bar).unwrap();
    let p1 = cs.p1_set();
    let mut samples: Vec<Vec<Tuple>> = p1.iter().map(|t| vec![t.clone()]).collect();
    samples.extend(p1.iter().step_by(3).cloned().tuple_combinations().map(|(x, y)| vec![x, y]));
    assert!(star_identity_mismatches(&cs, &star, &f, &a_bar, &samples).unwrap().is_empty());
}
