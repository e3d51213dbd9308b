//! Assemble the JSON report the command-line tool prints, here for a support
//! check on a sampled random graph.

use charseq::models::{gen_random_graph, GraphMode};
use charseq::report::{Report, Status};
use charseq::sequence::SamplePolicy;
use serde_json::json;

fn main() -> charseq::Result<()> {
    let mut report = Report::new(json!({ "package": "random-graph", "vertices": 12, "seed": 4, "k": 2, "n_max": 4 }));
    let cs = report.timed("load", || gen_random_graph(12, GraphMode::Sampled { seed: 4, p: 0.5 }).map(|p| p.sequence()))?;
    let r = report.timed("check", || cs.support(2, 4, SamplePolicy::Sampled { seed: 1, count: 2000 }))?;
    let status = if r.supported { Status::Pass } else { Status::Fail };
    report.verdict("support(2, 4)", status, json!({ "sets_checked": r.sets_checked }));
    if let Some(c) = r.counterexample {
        report.witnesses.push(json!(c));
    }
    println!("{}", report.to_json(true));
    std::process::exit(report.exit_code());
}
