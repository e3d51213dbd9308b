//! Acceptance suite: one PASS/FAIL line per criterion. Runs without the test
//! harness so every line is printed; exits nonzero when any criterion fails.
//! `ACCEPTANCE_ONLY=<id>` runs a single criterion.

use std::process::ExitCode;
use std::time::Instant;

use charseq::verify::criteria;

fn main() -> ExitCode {
    let only: Option<usize> = std::env::var("ACCEPTANCE_ONLY").ok().and_then(|s| s.parse().ok());
    let mut failed = Vec::new();
    for c in criteria() {
        if only.is_some_and(|o| o != c.id) {
            continue;
        }
        let start = Instant::now();
        let outcome = (c.run)();
        let verdict = if outcome.pass { "PASS" } else { "FAIL" };
        println!("criterion {:>2} {verdict} {} ({:.1?})", c.id, c.name, start.elapsed());
        for note in &outcome.notes {
            println!("      {note}");
        }
        if !outcome.pass {
            failed.push(c.id);
        }
    }
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        println!("failed criteria: {failed:?}");
        ExitCode::FAILURE
    }
}
