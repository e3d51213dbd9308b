//! Compare computed levels with the closed forms of the example packages.

use charseq::models::{gen_dense_order, gen_eq_relations, gen_random_graph, gen_subset_lattice, oracle_check, GraphMode};
use charseq::sequence::SamplePolicy;

fn main() -> charseq::Result<()> {
    let packages = [
        gen_random_graph(0, GraphMode::Paley { q: 61 })?,
        gen_random_graph(16, GraphMode::Sampled { seed: 1, p: 0.5 })?,
        gen_subset_lattice(3)?,
        gen_dense_order(10)?,
        gen_eq_relations(3, 3, 9)?,
    ];
    for pkg in &packages {
        let cs = pkg.sequence();
        let r = oracle_check(pkg, &cs, 3, 2, SamplePolicy::Sampled { seed: 7, count: 300 });
        println!(
            "{:<40} sets {:>7}  spurious {:>4}  missing witness {:>5}",
            pkg.name,
            r.sets_checked,
            r.spurious(),
            r.missing_witness()
        );
    }
    Ok(())
}
