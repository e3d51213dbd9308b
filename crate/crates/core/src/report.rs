//! The JSON report written by the command-line tool.

use std::collections::BTreeMap;
use std::time::Instant;

use serde::Serialize;
use serde_json::Value;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Found,
    NotFound,
    Obstructed,
    Pass,
    Fail,
}

impl Status {
    pub fn is_positive(self) -> bool {
        matches!(self, Status::Found | Status::Pass)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Verdict {
    pub check: String,
    pub status: Status,
    pub detail: Value,
}

/// Everything but `timings` depends only on the inputs.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Report {
    pub config_echo: Value,
    pub verdicts: Vec<Verdict>,
    pub witnesses: Vec<Value>,
    pub traces: Vec<Value>,
    /// Milliseconds per phase.
    pub timings: BTreeMap<String, f64>,
}

impl Report {
    pub fn new(config_echo: Value) -> Self {
        Self { config_echo, ..Default::default() }
    }

    pub fn verdict(&mut self, check: impl Into<String>, status: Status, detail: Value) {
        self.verdicts.push(Verdict { check: check.into(), status, detail });
    }

    /// Runs `f` and records its wall time under `phase`.
    pub fn timed<T>(&mut self, phase: &str, f: impl FnOnce() -> T) -> T {
        let start = Instant::now();
        let out = f();
        let ms = start.elapsed().as_secs_f64() * 1e3;
        *self.timings.entry(phase.to_string()).or_default() += ms;
        out
    }

    /// 0 when every verdict is positive, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.verdicts.iter().all(|v| v.status.is_positive()) {
            0
        } else {
            1
        }
    }

    pub fn to_json(&self, pretty: bool) -> String {
        if pretty {
            serde_json::to_string_pretty(self).expect("report serializes")
        } else {
            serde_json::to_string(self).expect("report serializes")
        }
    }
}
