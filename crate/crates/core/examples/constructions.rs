//! Staged constructions: each run either builds its configuration or names
//! the stage and localization that block it.

use charseq::configs::{detect_compatible_order, detect_order_property, OrderConvention};
use charseq::constructions::{
    array_from_persistent_empty_tuple, dividing_from_order_property, interval_supply, sop2_tree_from_compatible_order,
    tree_from_persistent_empty_graph, tree_from_persistent_order, Staged,
};
use charseq::localize::Bounds;
use charseq::models::{gen_dense_order, gen_eq_relations, gen_random_graph, GraphMode};

fn describe<T>(name: &str, out: &Staged<T>, passed: bool) {
    match out {
        Staged::Built(_) => println!("{name}: built, validation {}", if passed { "passed" } else { "FAILED" }),
        Staged::Obstructed(o) => println!("{name}: obstructed at stage {} ({})", o.stage, o.reason),
    }
}

fn main() -> charseq::Result<()> {
    let bounds = Bounds::new(2, 2, 3);

    let dense = gen_dense_order(12)?.sequence();
    let w = detect_order_property(&dense, 5, OrderConvention::Strict, None, dense.p1_set())?.expect("order witness");
    let d = dividing_from_order_property(&dense, &w)?;
    println!("dividing family of {} from a length-5 order", d.output.tuples.len());

    let co = detect_compatible_order(&dense, interval_supply(2, 2), 3)?.expect("compatible order");
    let t = sop2_tree_from_compatible_order(&dense, &co, 2, 2)?;
    println!("tree with {} labels from a compatible order", t.output.labels.len());

    let r = tree_from_persistent_order(&gen_dense_order(30)?.sequence(), 2, 3, &bounds)?;
    describe("order tree on a 30-chain", &r.output, r.validation.passed);

    let paley = gen_random_graph(0, GraphMode::Paley { q: 61 })?.sequence();
    let r = array_from_persistent_empty_tuple(&paley, 2, 4, 3, &bounds, &[])?;
    describe("array on Paley 61", &r.output, r.validation.passed);

    let rg = gen_random_graph(16, GraphMode::Sampled { seed: 1, p: 0.5 })?.sequence();
    let r = array_from_persistent_empty_tuple(&rg, 2, 4, 4, &bounds, &[])?;
    describe("array on a 16-vertex random graph", &r.output, r.validation.passed);

    let eq = gen_eq_relations(3, 3, 9)?.sequence();
    let r = tree_from_persistent_empty_graph(&eq, 1, 2, 2, &bounds, &[])?;
    describe("tree over equivalence relations", &r.output, r.validation.passed);
    for line in &r.trace {
        println!("  {line}");
    }
    Ok(())
}
