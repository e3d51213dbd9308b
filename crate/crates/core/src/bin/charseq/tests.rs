use super::*;

fn run(args: &[&str]) -> (Report, i32) {
    run_with_budget(args, None)
}

fn run_with_budget(args: &[&str], budget: Option<usize>) -> (Report, i32) {
    let cli = Cli::try_parse_from(std::iter::once("charseq").chain(args.iter().copied())).unwrap();
    let (mut report, code) = execute_with_budget(&cli, Ok(budget));
    report.timings.clear();
    (report, code)
}

fn statuses(r: &Report) -> Vec<Status> {
    r.verdicts.iter().map(|v| v.status).collect()
}

#[test]
fn usage_errors_are_rejected_by_the_parser() {
    assert!(Cli::try_parse_from(["charseq", "detect"]).is_err());
    assert!(Cli::try_parse_from(["charseq", "detect", "--config", "nonsense"]).is_err());
    assert!(Cli::try_parse_from(["charseq", "frobnicate"]).is_err());
}

#[test]
fn detection_exit_codes() {
    let (r, code) = run(&["detect", "--package", "dense-order", "--vertices", "8", "--config", "empty-graph", "--size", "6"]);
    assert_eq!((code, statuses(&r)), (0, vec![Status::Found]));
    assert_eq!(r.witnesses.len(), 1);
    let (r, code) = run(&["detect", "--package", "dense-order", "--vertices", "8", "--config", "empty-graph", "--size", "7"]);
    assert_eq!((code, statuses(&r)), (1, vec![Status::NotFound]));
    assert!(r.witnesses.is_empty());
}

#[test]
fn input_errors_exit_with_two() {
    let (r, code) = run(&["detect", "--package", "dense-order", "--config", "t0", "--t0", "{not json"]);
    assert_eq!(code, 2);
    assert_eq!(r.verdicts[0].check, "error");
    let (_, code) = run(&["detect", "--package", "dense-order", "--config", "t0"]);
    assert_eq!(code, 2);
    let (_, code) = run(&["detect", "--package", "random-graph", "--formula", "phi(x; y) := Q(x,y)", "--config", "empty-tuple"]);
    assert_eq!(code, 2);
    let (_, code) = run(&["detect", "--package", "custom", "--config", "empty-tuple"]);
    assert_eq!(code, 2);
    let (_, code) = run(&["verify-paper", "--only", "99"]);
    assert_eq!(code, 2);
}

#[test]
fn memory_budget_values() {
    assert_eq!(parse_budget("512").unwrap(), 512);
    assert_eq!(parse_budget("4k").unwrap(), 4096);
    assert_eq!(parse_budget(" 2M ").unwrap(), 2 << 20);
    assert_eq!(parse_budget("1G").unwrap(), 1 << 30);
    assert!(parse_budget("lots").is_err());
    assert!(parse_budget("").is_err());
    let cli = Cli::try_parse_from(["charseq", "support", "--package", "dense-order", "--vertices", "8"]).unwrap();
    assert_eq!(execute_with_budget(&cli, parse_budget("x").map(Some)).1, 2);
}

#[test]
fn budget_overruns_exit_with_three() {
    let args = ["oracle-check", "--package", "random-graph", "--vertices", "8", "--n-max", "2", "--samples", "20"];
    let (r, code) = run_with_budget(&args, Some(1024));
    assert_eq!(code, 3);
    assert!(r.verdicts[0].detail["message"].as_str().unwrap().contains("budget"));
    let (r, code) = run_with_budget(&args, Some(1 << 30));
    assert_eq!(code, 0, "{:?}", r.verdicts);
    let persist = ["persist", "--package", "dense-order", "--vertices", "10", "--t0", r#"{"v":2,"E":[[0],[1]]}"#, "--base", "[[2,7]]"];
    assert_eq!(run_with_budget(&persist, Some(1)).1, 3);
}

#[test]
fn persistence_verdicts() {
    let base = ["persist", "--package", "dense-order", "--vertices", "10", "--base", "[[2,7]]", "--m-max", "1", "--b-max", "1", "--bounds-r-max", "2"];
    let complete = [&base[..], &["--t0", r#"{"v":2,"E":[[0],[1],[0,1]]}"#]].concat();
    let (r, code) = run(&complete);
    assert_eq!((code, statuses(&r)), (0, vec![Status::Found]));
    let empty = [&base[..], &["--t0", r#"{"v":2,"E":[[0],[1]]}"#]].concat();
    let (r, code) = run(&empty);
    assert_eq!((code, statuses(&r)), (1, vec![Status::Obstructed]));
    assert!(r.verdicts[0].detail["killer"].is_object());
}

#[test]
fn reports_do_not_depend_on_thread_count() {
    let cases: [&[&str]; 3] = [
        &["oracle-check", "--package", "paley", "--q", "13", "--n-max", "3", "--samples", "200"],
        &["detect", "--package", "random-graph", "--vertices", "16", "--config", "ip", "--k", "1"],
        &["construct", "--package", "eq-relations", "--construction", "empty-graph-tree", "--k", "1"],
    ];
    for args in cases {
        let one = run(&[args, &["--threads", "1"]].concat());
        let four = run(&[args, &["--threads", "4"]].concat());
        assert_eq!(one.0.to_json(false), four.0.to_json(false), "{args:?}");
        assert_eq!(one.1, four.1);
    }
}

#[test]
fn constructions_report_validation() {
    let (r, code) = run(&["construct", "--construction", "universal-witness", "--t0", r#"{"v":2,"E":[[0],[1]]}"#]);
    assert_eq!(code, 0, "{:?}", r.verdicts);
    let (r, code) = run(&["construct", "--construction", "support-failure", "--k", "2"]);
    assert_eq!((code, r.witnesses.len()), (0, 1));
    let (r, code) = run(&["construct", "--package", "dense-order", "--vertices", "12", "--construction", "order-dividing"]);
    assert_eq!(code, 0, "{:?}", r.verdicts);
    let (r, code) = run(&["construct", "--package", "dense-order", "--vertices", "16", "--construction", "empty-graph-tree", "--k", "1"]);
    assert_eq!((code, statuses(&r)), (1, vec![Status::Obstructed]));
    let (r, code) = run(&["construct", "--package", "random-graph", "--vertices", "5", "--seed", "3", "--formula", "phi(x; y) := R(x,y)", "--construction", "coding", "--n-max", "2"]);
    assert_eq!((code, statuses(&r)), (0, vec![Status::Pass]));
}

#[test]
fn support_and_dump() {
    let (r, code) = run(&["support", "--package", "dense-order", "--vertices", "8", "--k", "2", "--n-max", "3"]);
    assert_eq!((code, statuses(&r)), (0, vec![Status::Pass]));
    let (r, code) = run(&["dump-levels", "--package", "dense-order", "--vertices", "8", "--limit", "3", "--n-max", "2"]);
    assert_eq!(code, 0);
    assert!(!r.traces.is_empty());
    assert_eq!(r.verdicts[0].detail["params"], 3);
}

#[test]
fn config_echo_omits_output_controls() {
    let (r, _) = run(&["support", "--package", "dense-order", "--vertices", "8", "--threads", "3", "--pretty"]);
    let echo = r.config_echo.as_object().unwrap();
    assert!(!echo.contains_key("threads") && !echo.contains_key("pretty"));
    assert_eq!(echo["command"]["command"], "support");
}
