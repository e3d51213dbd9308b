use itertools::Itertools;

use super::*;
use crate::models::{gen_dense_order, gen_random_graph, gen_subset_lattice, GraphMode};
use crate::sequence::{CharSequence, Levels};
use crate::structure::Tuple;

fn paley13() -> CharSequence {
    gen_random_graph(0, GraphMode::Paley { q: 13 }).unwrap().sequence()
}

fn dense(v: usize) -> CharSequence {
    gen_dense_order(v).unwrap().sequence()
}

#[test]
fn column_count_order() {
    let c = |v: &[usize]| ColumnCount(v.to_vec());
    assert_eq!(gap(&c(&[2, 1, 1])).unwrap(), 2);
    assert_eq!(lex_predecessor(&c(&[2, 1, 1])).unwrap(), Some(c(&[1, 1, 1, 1])));
    assert_eq!(lex_successor(&c(&[2, 1, 1])).unwrap(), Some(c(&[2, 2])));
    assert_eq!(gap(&c(&[3, 1])).unwrap(), 3);
    assert_eq!(lex_successor(&c(&[4])).unwrap(), None);
    assert_eq!(lex_predecessor(&c(&[1, 1, 1, 1])).unwrap(), None);
    assert!(gap(&c(&[1, 1])).is_err());
    assert!(lex_successor(&c(&[1, 2])).is_err());
    assert!(lex_successor(&c(&[])).is_err());
    // Walking successors from the least count visits every partition of 6 once.
    let mut cur = c(&[1; 6]);
    let mut seen = 1;
    while let Some(next) = lex_successor(&cur).unwrap() {
        assert!(next > cur);
        cur = next;
        seen += 1;
    }
    assert_eq!((seen, cur), (11, c(&[6])));
}

#[test]
fn column_count_of_cells() {
    let cells = [Cell { col: 0, row: 0 }, Cell { col: 2, row: 1 }, Cell { col: 2, row: 0 }, Cell { col: 5, row: 3 }];
    assert_eq!(column_count(&cells), ColumnCount(vec![2, 1, 1]));
    assert_eq!(column_count(&cells).size(), 4);
}

#[test]
fn paths_of_small_grids() {
    let t = |a: u32| vec![a, a];
    let a = ArrayConfig::new(vec![vec![t(0), t(1)], vec![t(2), t(3)]], 2).unwrap();
    // One cell or none per column, at least one overall.
    assert_eq!(paths(&a, 2).len(), 8);
    assert_eq!(paths(&a, 1).len(), 4);
    let b = ArrayConfig::new(vec![vec![t(0), t(1), t(2)]; 3], 3).unwrap();
    // Per column: up to two of three rows, 7 choices; 7^3 - 1 nonempty, less those above size 3.
    let brute = (0..3)
        .map(|_| (0..=2usize).flat_map(|s| (0..3).combinations(s)).collect::<Vec<_>>())
        .multi_cartesian_product()
        .filter(|p| (1..=3).contains(&p.iter().map(Vec::len).sum::<usize>()))
        .count();
    assert_eq!(paths(&b, 3).len(), brute);
    assert!(ArrayConfig::new(vec![vec![t(0)], vec![t(1), t(2)]], 2).is_err());
}

#[test]
fn embeddings_match_brute_force() {
    let cs = paley13();
    let region: Vec<Tuple> = cs.p1_set()[..7].to_vec();
    let configs = [
        T0Config::empty_graph(2),
        T0Config::complete(3),
        T0Config::generated(3, &[vec![0, 1], vec![2]]).unwrap(),
        T0Config::generated(3, &[vec![0, 1], vec![1, 2]]).unwrap(),
    ];
    for x in &configs {
        let brute: Vec<Vec<Tuple>> = region.iter().cloned().permutations(x.v).filter(|a| matches_exactly(&cs, x, a)).collect();
        let mut found = find_all_embeddings(&cs, x, &region, EmbedMode::Exact, usize::MAX).unwrap();
        found.sort();
        let mut brute_sorted = brute.clone();
        brute_sorted.sort();
        assert_eq!(found, brute_sorted, "{x:?}");
        assert_eq!(find_embedding(&cs, x, &region, EmbedMode::Exact).unwrap(), found.first().cloned());
        let monotone = find_all_embeddings(&cs, x, &region, EmbedMode::Monotone, usize::MAX).unwrap();
        assert!(monotone.len() >= found.len());
        for a in &monotone {
            assert!(x.e.iter().all(|s| cs.holds_refs(&s.iter().map(|&i| &a[i]).collect::<Vec<_>>())));
        }
    }
}

#[test]
fn embedding_errors() {
    let cs = paley13();
    let bad = T0Config::new(2, [vec![0, 1]]).unwrap();
    assert!(find_embedding(&cs, &bad, cs.p1_set(), EmbedMode::Exact).is_err());
    assert!(find_embedding(&cs, &T0Config::empty_graph(2), &[], EmbedMode::Exact).is_err());
    let p1 = cs.p1_set().to_vec();
    assert!(find_embedding(&cs.with_level_cap(2), &T0Config::complete(3), &p1, EmbedMode::Monotone).is_err());
}

#[test]
fn empty_tuples_and_graphs() {
    let cs = dense(8);
    let t = detect_empty_tuple(&cs, 2, cs.p1_set()).unwrap().unwrap();
    assert!(t.iter().all(|x| cs.holds_refs(&[x])));
    assert!(!cs.holds_refs(&t.iter().collect::<Vec<_>>()));
    let g = detect_empty_graph(&cs, 2, 3, cs.p1_set()).unwrap().unwrap();
    assert_eq!(g.len(), 3);
    assert!(g.iter().tuple_combinations().all(|(a, b)| !cs.holds_refs(&[a, b])));
    // Pairwise inconsistent intervals have disjoint interiors, and there are six interior points.
    assert!(detect_empty_graph(&cs, 2, 6, cs.p1_set()).unwrap().is_some());
    assert_eq!(detect_empty_graph(&cs, 2, 7, cs.p1_set()).unwrap(), None);
    assert!(detect_empty_graph(&cs, 1, 3, cs.p1_set()).is_err());
    assert!(detect_empty_graph(&cs, 3, 2, cs.p1_set()).is_err());
}

#[test]
fn order_witnesses() {
    let cs = dense(12);
    for conv in [OrderConvention::Strict, OrderConvention::NonStrict] {
        let w = detect_order_property(&cs, 4, conv, None, cs.p1_set()).unwrap().unwrap();
        assert!(w.validate(&cs));
        assert_eq!(w.length, 4);
    }
    let w = detect_order_property(&cs, 3, OrderConvention::Strict, Some((1, 3)), cs.p1_set()).unwrap().unwrap();
    assert!(w.validate(&cs));
    assert!(w.a.iter().all(|a| a.len() == 1) && w.b.iter().all(|b| b.len() == 2));
    assert!(detect_order_property(&cs, 1, OrderConvention::Strict, None, cs.p1_set()).is_err());
    assert!(detect_order_property(&cs, 3, OrderConvention::Strict, Some((2, 2)), cs.p1_set()).is_err());
}

#[test]
fn compatible_orders() {
    let cs = dense(10);
    let co = detect_compatible_order(&cs, 3, 3).unwrap().unwrap();
    assert_eq!(co.len(), 3);
    assert!(co.validate(&cs, 3));
    for (i, j) in (0..3).cartesian_product(0..3) {
        assert_eq!(cs.holds_refs(&[&co.pair(i, j)]), i < j);
    }
    let lattice = gen_subset_lattice(2).unwrap().sequence();
    assert!(detect_compatible_order(&lattice, 0, 2).is_err());
}

#[test]
fn shattering() {
    let pkg = gen_random_graph(32, GraphMode::Sampled { seed: 1, p: 0.5 }).unwrap();
    let cs = pkg.sequence();
    let w = detect_ip_shattering(&cs, 2, ShatterMode::ExactK, cs.p1_set()).unwrap().unwrap();
    assert!(w.validate(&cs));
    assert_eq!((w.params.len(), w.realizers.len()), (4, 6));
    let w = detect_ip_shattering(&cs, 1, ShatterMode::FullShatter, cs.p1_set()).unwrap().unwrap();
    assert!(w.validate(&cs));
    assert_eq!(w.realizers.len(), 4);
    let mut broken = w.clone();
    broken.realizers.swap(0, 1);
    assert!(!broken.validate(&cs));
    assert!(detect_ip_shattering(&cs, 0, ShatterMode::ExactK, cs.p1_set()).is_err());
}

#[test]
fn trees_and_diagrams() {
    let cs = dense(16);
    for strict in [false, true] {
        let t = detect_tree(&cs, 2, 2, 2, strict, cs.p1_set()).unwrap().unwrap();
        assert!(t.validate(&cs));
        assert_eq!(t.labels.len(), tree_nodes(2, 2).len());
        assert_eq!(t.branch(&[1, 0]).len(), 3);
    }
    let d = detect_diagram(&cs, 2, cs.p1_set()).unwrap().unwrap();
    assert!(d.validate(&cs));
    assert_eq!(tree_nodes(2, 3).len(), 1 + 3 + 9);
    assert_eq!(tree_nodes(1, 2), vec![vec![], vec![0], vec![1]]);
    assert!(detect_tree(&cs, 2, 0, 2, false, cs.p1_set()).is_err());
    assert!(detect_tree(&cs, 2, 2, 1, false, cs.p1_set()).is_err());
}

#[test]
fn arrays_and_sharpness() {
    let cs = gen_subset_lattice(4).unwrap().sequence();
    let a = detect_array(&cs, 2, 2, 2, cs.p1_set()).unwrap().unwrap();
    assert_eq!((a.rows, a.cols()), (2, 2));
    assert!(a.is_valid(&cs));
    let report = is_sharp(&cs, &a, 2).unwrap();
    assert_eq!(report.paths_checked, 8);
    if let Some(p) = &report.failing {
        assert!(!cs.holds_refs(&a.tuples(p).iter().collect::<Vec<_>>()));
        assert_eq!(report.column_count.as_ref(), Some(&column_count(p)));
    }
    let mut repeated = a.clone();
    repeated.columns[1][0] = repeated.columns[0][0].clone();
    assert_eq!(repeated.violation(&cs).unwrap().reason, "repeated entry");
    let one_row = a.restrict(&[0], &[0, 1]);
    assert_eq!(one_row.violation(&cs).unwrap().reason, "column holds");
    assert!(detect_array(&cs, 1, 2, 2, cs.p1_set()).is_err());
    assert!(detect_array(&cs, 2, 0, 2, cs.p1_set()).is_err());
}

#[test]
fn trees_serialize_as_node_label_pairs() {
    let cs = dense(16);
    let t = detect_tree(&cs, 2, 2, 2, false, cs.p1_set()).unwrap().unwrap();
    let json = serde_json::to_value(&t).unwrap();
    assert_eq!(json["labels"][0][0], serde_json::json!([]));
    let back: TreeConfig = serde_json::from_value(json).unwrap();
    assert_eq!(back, t);
}
