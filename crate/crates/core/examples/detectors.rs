//! Search for empty graphs, order witnesses, trees, arrays and shattering.

use charseq::configs::{
    detect_array, detect_compatible_order, detect_empty_graph, detect_ip_shattering, detect_order_property, detect_tree,
    is_sharp, OrderConvention, ShatterMode,
};
use charseq::models::{gen_dense_order, gen_random_graph, gen_subset_lattice, GraphMode};

fn main() -> charseq::Result<()> {
    let dense = gen_dense_order(12)?.sequence();
    let p1 = dense.p1_set();

    let g = detect_empty_graph(&dense, 2, 5, p1)?;
    println!("P_2-empty graph of size 5: {g:?}");

    let w = detect_order_property(&dense, 4, OrderConvention::Strict, None, p1)?.expect("dense orders have the order property");
    println!("order witness of length {}: a = {:?}", w.length, w.a);

    let co = detect_compatible_order(&dense, 4, 3)?;
    println!("compatible order of length 4: {}", co.is_some());

    let tree = detect_tree(&dense, 2, 2, 2, true, p1)?.expect("strict tree");
    for (node, label) in &tree.labels {
        println!("  tree node {node:?} -> {label:?}");
    }

    let lattice = gen_subset_lattice(4)?.sequence();
    let a = detect_array(&lattice, 2, 2, 2, lattice.p1_set())?.expect("array");
    println!("array {:?}, sharp: {}", a.columns, is_sharp(&lattice, &a, 2)?.sharp);

    let rg = gen_random_graph(32, GraphMode::Sampled { seed: 1, p: 0.5 })?.sequence();
    let s = detect_ip_shattering(&rg, 2, ShatterMode::ExactK, rg.p1_set())?;
    println!("2-shattered family: {:?}", s.map(|s| s.params));
    Ok(())
}
