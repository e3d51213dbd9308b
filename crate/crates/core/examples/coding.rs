//! Check the coding of `phi_n` instances against the levels on a small graph.

use charseq::constructions::verify_coding;
use charseq::formula::{parse_formula, Signature};
use charseq::models::{gen_random_graph, GraphMode};

fn main() -> charseq::Result<()> {
    let pkg = gen_random_graph(6, GraphMode::Sampled { seed: 3, p: 0.5 })?;
    let phi = parse_formula("phi(x; y) := R(x,y)", &Signature::of(&pkg.structure))?;
    let r = verify_coding(pkg.structure.clone(), &phi, 3)?;
    println!("{}", serde_json::to_string_pretty(&r).unwrap());
    println!("passed: {}", r.passed());
    Ok(())
}
