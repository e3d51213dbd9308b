//! Ask whether a configuration survives every bounded localization around a
//! complete base set.

use charseq::configs::T0Config;
use charseq::localize::{enumerate_localizations, persistence_search, Bounds};
use charseq::models::{gen_dense_order, gen_eq_relations};

fn main() -> charseq::Result<()> {
    let dense = gen_dense_order(10)?.sequence();
    let base = vec![vec![2, 7]];
    let bounds = Bounds::new(1, 1, 2);
    println!("{} localizations around {base:?}", enumerate_localizations(&dense, &base, &bounds)?.len());

    for (name, x) in [("complete pair", T0Config::complete(2)), ("empty pair", T0Config::empty_graph(2))] {
        let v = persistence_search(&dense, &x, &base, &bounds)?;
        print!("dense order, {name}: {:?} after {}", v.status, v.localizations_checked);
        match v.killer {
            Some(k) => println!(", killed by {} (extension of {})", serde_json::to_string(&k.localization).unwrap(), k.extension_size),
            None => println!(),
        }
    }

    let eq = gen_eq_relations(3, 3, 9)?.sequence();
    let v = persistence_search(&eq, &T0Config::empty_graph(3), &[], &Bounds::new(2, 2, 3))?;
    println!("equivalence relations, empty triple: {:?} after {}", v.status, v.localizations_checked);
    Ok(())
}
