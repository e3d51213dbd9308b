//! Sharpen planted arrays in the subset lattice and run the springboard check.

use charseq::configs::is_sharp;
use charseq::constructions::{planted_arrays, sharpen_array, springboard_check, springboard_planted_array, DEFAULT_SPACING, PLANT_POINTS};
use charseq::models::gen_subset_lattice;

fn main() -> charseq::Result<()> {
    let cs = gen_subset_lattice(PLANT_POINTS)?.sequence();
    for (variant, _, _, a) in planted_arrays(7).into_iter().step_by(6) {
        let before = is_sharp(&cs, &a, 6)?;
        let r = sharpen_array(&cs, &a, &[], DEFAULT_SPACING)?;
        println!(
            "{variant:?}: {} cols, sharp {} -> {} cols after {} round(s), a_bar {:?}, valid {}",
            a.cols(),
            before.sharp,
            r.output.array.cols(),
            r.output.rounds.len(),
            r.output.a_bar,
            r.validation.passed
        );
    }

    let a = springboard_planted_array();
    for l_check in [3, 4] {
        let r = springboard_check(&cs, &a, 3, l_check)?;
        println!("springboard mu=3, checked to {l_check}: passes {}, dividing {:?}", r.passes, r.dividing.map(|d| d.tuples.len()));
    }
    Ok(())
}
