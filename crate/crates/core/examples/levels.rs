//! Build a small structure by hand, compute its characteristic sequence and
//! print a few levels.

use std::sync::Arc;

use charseq::formula::{parse_formula, Signature};
use charseq::sequence::SamplePolicy;
use charseq::{CharSequence, StructureBuilder};

fn main() -> charseq::Result<()> {
    // A 6-cycle.
    let edges = (0..6u32).flat_map(|i| [vec![i, (i + 1) % 6], vec![(i + 1) % 6, i]]);
    let s = StructureBuilder::new().sort("V", 6).relation("R", &["V", "V"], edges).build()?;
    let phi = parse_formula("phi(x; y) := R(x,y)", &Signature::of(&s))?;
    let cs = CharSequence::new(Arc::new(s), phi)?;

    println!("P_1 has {} members", cs.p1_set().len());
    println!("P_2(0, 2) = {}", cs.holds(&[vec![0], vec![2]])?);
    println!("P_2(0, 1) = {}", cs.holds(&[vec![0], vec![1]])?);
    println!("P_3(0, 2, 4) = {}", cs.holds(&[vec![0], vec![2], vec![4]])?);
    println!("witness for {{0, 2}}: {:?}", cs.witness(&[vec![0], vec![2]])?);

    print!("{}", cs.dump_levels(&cs.p1_set()[..3], 3)?);

    let support = cs.support(2, 3, SamplePolicy::Exhaustive)?;
    println!("P_2 determines P_3: {}, counterexample {:?}", support.supported, support.counterexample);
    Ok(())
}
